//! ART1 clustering of inflected-verb paradigms into inflection classes.
//!
//! The pipeline loads a long-format lexicon ([`data`]), encodes each lexeme
//! as a binary vector of per-cell trigram presence ([`encoding`]), clusters
//! the vectors with an ART1 network ([`art1`]) and scores the clusters
//! against attested classes ([`eval`]). [`experiment`] wires these into
//! vigilance sweeps, cross-validation and reports.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common choices.

pub mod art1;
pub mod bits;
pub mod data;
pub mod encoding;
pub mod eval;
pub mod experiment;
pub mod scalar;
pub mod seeds;

pub use bits::BinaryVector;
pub use scalar::Scalar;

/// Double-precision ART1 network.
pub type Art1Network = art1::Network<f64>;
/// Single-precision ART1 network.
pub type Art1NetworkF32 = art1::Network<f32>;
pub type Art1Config = art1::Art1Config<f64>;
pub type Art1ConfigF32 = art1::Art1Config<f32>;
pub type AssignmentTrace = art1::AssignmentTrace<f64>;
pub type ClusterReport = eval::ClusterReport<f64>;
pub type DistinctiveFeature = eval::DistinctiveFeature<f64>;
