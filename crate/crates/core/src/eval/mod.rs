//! Evaluation: partition metrics, the k-means baseline and cluster reports.

pub mod kmeans;
pub mod metrics;
pub mod report;

pub use kmeans::{kmeans, kmeans_baseline, KMeansConfig, KMeansError, KMeansFit};
pub use metrics::{
    adjusted_mutual_information, adjusted_rand_index, ari_ami, Clustering, ContingencyTable,
    MetricError,
};
pub use report::{
    cluster_composition, distinctive_features, ClusterComposition, ClusterFeatures, ClusterReport,
    DistinctiveFeature, ReportError,
};
