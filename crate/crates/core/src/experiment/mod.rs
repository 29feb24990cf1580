//! Experiment harness: vigilance sweeps, cross-validation and reports.

pub mod config;
pub mod cv;
pub mod plot;
pub mod report;
pub mod stats;
pub mod sweep;

use std::fs;
use std::io;
use std::path::Path;

use indexmap::IndexSet;
use thiserror::Error;

pub use config::{DataSource, ExperimentConfig, Settings, VigilanceGrid};
pub use cv::{cv_samples, fold_indices, run_cv, CvResult, CvRow};
pub use plot::{emit_plot, write_plot, Panel, Plot, PlotError, PlotKind, Series};
pub use report::{report_samples, run_report, ReportOutput};
pub use sweep::{run_sweep, sweep_samples, BaselineRow, SweepDetail, SweepResult, SweepSummary};

use crate::art1::{Art1Config, Art1Error, Network, SnapshotError};
use crate::bits::BinaryVector;
use crate::data::{self, CellSelection, DataError, ParadigmSample};
use crate::encoding::{self, EncodingConfig, EncodingError, FeatureSpace};
use crate::eval::{Clustering, KMeansError, MetricError, ReportError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Art1(#[from] Art1Error),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    KMeans(#[from] KMeansError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl ExperimentError {
    /// Process exit code: 2 config, 3 data, 4 I/O, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::KMeans(_) => 2,
            Self::Art1(Art1Error::Config(_)) => 2,
            Self::Encoding(EncodingError::Config(_)) => 2,
            Self::Data(DataError::Config(_)) => 2,
            Self::Data(DataError::Io { .. }) => 4,
            Self::Data(_) | Self::Encoding(_) => 3,
            Self::Io { .. } | Self::Snapshot(SnapshotError::Io(_)) => 4,
            Self::Art1(_) | Self::Metric(_) | Self::Report(_) | Self::Plot(_) | Self::Snapshot(_) => 1,
        }
    }
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), ExperimentError> {
    fs::write(path, contents).map_err(io_err(path))
}

pub fn ensure_dir(path: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

/// Loads and assembles the configured dataset.
pub fn load_samples(config: &ExperimentConfig) -> Result<Vec<ParadigmSample>, ExperimentError> {
    match &config.data {
        None => Err(ExperimentError::Config("no dataset given (--data)".into())),
        Some(DataSource::Synthetic(p)) => Ok(data::synthetic_dataset(p)?.samples),
        Some(DataSource::File { path, options }) => {
            let rows = data::load_dataset(path, options)?;
            let selection = match config.selection() {
                Some(s) => s,
                None => {
                    let cells: IndexSet<&str> = rows.iter().map(|r| r.cell_id.as_str()).collect();
                    CellSelection::custom(cells.into_iter().map(str::to_string).collect())
                }
            };
            let (samples, stats) = data::assemble(&rows, &selection)?;
            log::info!(
                "{}: {} lexemes kept of {} ({} incomplete, {} duplicate forms)",
                path.display(),
                samples.len(),
                stats.lexemes_seen,
                stats.incomplete_dropped,
                stats.duplicates_resolved
            );
            Ok(samples)
        }
    }
}

/// Samples encoded against a space built from them.
pub struct Encoded {
    pub space: FeatureSpace,
    pub vectors: Vec<BinaryVector>,
    pub attested: Clustering,
    pub labels: Vec<String>,
}

/// Builds the space over `samples` and encodes them. Rejects any lexeme
/// whose vector would be empty.
pub fn encode_training(
    samples: &[ParadigmSample],
    encoding: &EncodingConfig,
) -> Result<Encoded, ExperimentError> {
    let space = encoding::build_feature_space(samples, encoding)?;
    let vectors = encoding::encode_all(samples, &space, encoding);
    if let Some(i) = vectors.iter().position(BinaryVector::is_zero) {
        return Err(DataError::NoFeatures(samples[i].lexeme_id.clone()).into());
    }
    let labels: Vec<String> = samples.iter().map(|s| s.class_label.clone()).collect();
    Ok(Encoded {
        space,
        vectors,
        attested: Clustering::from_labels(labels.iter()),
        labels,
    })
}

/// Trains a fresh network on `vectors` presented in `order`; returns the
/// network and assignments aligned with the original (unpermuted) indices.
pub fn train_in_order(
    vectors: &[BinaryVector],
    order: &[usize],
    vigilance: f64,
    learning_param: f64,
) -> Result<(Network<f64>, Vec<usize>), ExperimentError> {
    let config = Art1Config::new(vigilance, learning_param)?;
    let mut net = Network::with_width(config, vectors.first().map_or(0, BinaryVector::width));
    let assigned = net.fit(order.iter().map(|&i| &vectors[i]))?;
    let mut aligned = vec![0; vectors.len()];
    for (&i, c) in order.iter().zip(assigned) {
        aligned[i] = c;
    }
    Ok((net, aligned))
}

/// Seeded permutation of `0..n`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
    idx
}

pub(crate) fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, ExperimentError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j);
    }
    b.build()
        .map_err(|e| ExperimentError::Config(format!("cannot start worker pool: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(ExperimentError::Config("x".into()).exit_code(), 2);
        assert_eq!(ExperimentError::Data(DataError::EmptyDataset("x".into())).exit_code(), 3);
        let io = ExperimentError::Io {
            path: "p".into(),
            source: io::Error::other("x"),
        };
        assert_eq!(io.exit_code(), 4);
    }

    #[test]
    fn permutation_is_seeded() {
        let p = permutation(20, 3);
        let mut s = p.clone();
        s.sort();
        assert_eq!(s, (0..20).collect::<Vec<_>>());
        assert_eq!(p, permutation(20, 3));
        assert_ne!(p, permutation(20, 4));
    }
}
