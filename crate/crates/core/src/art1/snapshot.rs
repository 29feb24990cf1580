//! Binary snapshot of a trained network.
//!
//! Layout (all integers and floats little-endian):
//!
//! | offset | size | field                                  |
//! |--------|------|----------------------------------------|
//! | 0      | 8    | magic `b"ART1SNAP"`                    |
//! | 8      | 4    | format version (`u32`, currently 1)    |
//! | 12     | 8    | width in bits (`u64`)                  |
//! | 20     | 8    | vigilance (`f64`)                      |
//! | 28     | 8    | learning parameter (`f64`)             |
//! | 36     | 8    | number of categories (`u64`)           |
//! | 44     | ...  | templates, each `ceil(width / 64)` `u64` words, bit `i` at word `i / 64`, position `i % 64` |
//!
//! Bottom-up weights are not stored; they are a function of the templates.

use std::io::{self, Read, Write};

use thiserror::Error;

use super::{Art1Config, Network};
use crate::bits::BinaryVector;
use crate::scalar::Scalar;

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"ART1SNAP";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a network snapshot (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    UnsupportedVersion(u32),
    #[error("snapshot has no width; the network never saw a sample")]
    NoWidth,
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
}

/// Writes the network state in the layout documented above.
pub fn write_snapshot<T: Scalar, W: Write>(
    network: &Network<T>,
    mut out: W,
) -> Result<(), SnapshotError> {
    let width = network.width().ok_or(SnapshotError::NoWidth)?;
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    out.write_all(&(width as u64).to_le_bytes())?;
    out.write_all(&network.config().vigilance().to_f64_lossy().to_le_bytes())?;
    out.write_all(&network.config().learning_param().to_f64_lossy().to_le_bytes())?;
    out.write_all(&(network.n_categories() as u64).to_le_bytes())?;
    for t in network.templates() {
        for w in t.words() {
            out.write_all(&w.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_snapshot<T: Scalar, R: Read>(mut input: R) -> Result<Network<T>, SnapshotError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let mut v = [0u8; 4];
    input.read_exact(&mut v)?;
    let version = u32::from_le_bytes(v);
    if version != SNAPSHOT_VERSION {
        return Err(SnapshotError::UnsupportedVersion(version));
    }
    let width = usize::try_from(read_u64(&mut input)?)
        .map_err(|_| SnapshotError::Corrupt("width overflows usize".into()))?;
    let vigilance = read_f64(&mut input)?;
    let learning_param = read_f64(&mut input)?;
    let n = read_u64(&mut input)?;
    let config = Art1Config::new(T::lit(vigilance), T::lit(learning_param))
        .map_err(|e| SnapshotError::Corrupt(e.to_string()))?;
    let n_words = width.div_ceil(64);
    let mut templates = Vec::new();
    for _ in 0..n {
        let words = (0..n_words)
            .map(|_| read_u64(&mut input))
            .collect::<io::Result<Vec<_>>>()?;
        let t = BinaryVector::from_words(width, words)
            .ok_or_else(|| SnapshotError::Corrupt("template word count".into()))?;
        templates.push(t);
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(SnapshotError::Corrupt("trailing bytes".into()));
    }
    Network::from_templates(config, width, templates)
        .map_err(|e| SnapshotError::Corrupt(e.to_string()))
}
