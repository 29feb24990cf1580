//! Fixed-width packed binary vectors.

use std::fmt;

const WORD_BITS: usize = 64;

/// A fixed-width presence/absence vector packed into 64-bit words.
///
/// Bits past `width` in the last word are always zero, so popcounts over the
/// word slice are exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryVector {
    width: usize,
    words: Vec<u64>,
}

#[inline]
fn words_for(width: usize) -> usize {
    width.div_ceil(WORD_BITS)
}

impl BinaryVector {
    /// All-zero vector of the given width.
    pub fn zeros(width: usize) -> Self {
        Self {
            width,
            words: vec![0; words_for(width)],
        }
    }

    pub fn ones(width: usize) -> Self {
        let mut v = Self::zeros(width);
        for i in 0..width {
            v.set(i, true);
        }
        v
    }

    /// Builds a vector from a slice of 0/1 flags. Any non-zero entry counts as 1.
    pub fn from_bits<B: Copy + Into<u64>>(bits: &[B]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b.into() != 0 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector with the given set positions.
    ///
    /// # Panics
    /// If any index is `>= width`.
    pub fn from_indices(width: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(width);
        for i in ones {
            v.set(i, true);
        }
        v
    }

    /// Reconstructs a vector from raw words, clearing any bits past `width`.
    pub fn from_words(width: usize, mut words: Vec<u64>) -> Option<Self> {
        if words.len() != words_for(width) {
            return None;
        }
        let tail = width % WORD_BITS;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        Some(Self { width, words })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.width, "bit {i} out of range for width {}", self.width);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.width, "bit {i} out of range for width {}", self.width);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    /// L1 norm, i.e. number of set bits.
    #[inline]
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// `|self AND other|` without materialising the intersection.
    #[inline]
    pub fn and_count(&self, other: &Self) -> usize {
        debug_assert_eq!(self.width, other.width);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Elementwise AND.
    pub fn and(&self, other: &Self) -> Self {
        debug_assert_eq!(self.width, other.width);
        Self {
            width: self.width,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    /// In-place elementwise AND.
    pub fn and_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.width, other.width);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    /// True when every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    /// Indices of set bits in ascending order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let tz = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(wi * WORD_BITS + tz)
            })
        })
    }

    /// Unpacked 0/1 representation.
    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.width).map(|i| self.get(i) as u8).collect()
    }
}

impl fmt::Debug for BinaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryVector[")?;
        for i in 0..self.width {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        write!(f, "]")
    }
}
