//! k-fold train/test runs with frozen-network inference on held-out lexemes.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::plot::{write_plot, Panel, PlotKind};
use super::stats::mean_ci;
use super::{encode_training, ensure_dir, load_samples, permutation, thread_pool, train_in_order, write_file};
use super::{ExperimentConfig, ExperimentError};
use crate::data::ParadigmSample;
use crate::encoding;
use crate::eval::{ari_ami, Clustering, MetricError};
use crate::seeds::child_seed;

const FOLD_TAG: u64 = u64::MAX - 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CvRow {
    pub fold: usize,
    pub n_train: usize,
    /// Held-out lexemes that were scored.
    pub n_test: usize,
    /// Held-out lexemes whose encoding in the training space was empty.
    pub n_excluded: usize,
    pub train_ari: f64,
    pub test_ari: f64,
    pub train_ami: f64,
    pub test_ami: f64,
    pub n_clusters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub vigilance: f64,
    pub rows: Vec<CvRow>,
}

impl CvResult {
    fn mean(&self, f: fn(&CvRow) -> f64) -> f64 {
        mean_ci(&self.rows.iter().map(f).collect::<Vec<_>>()).0
    }

    pub fn mean_train_ari(&self) -> f64 {
        self.mean(|r| r.train_ari)
    }

    pub fn mean_test_ari(&self) -> f64 {
        self.mean(|r| r.test_ari)
    }

    pub fn mean_train_ami(&self) -> f64 {
        self.mean(|r| r.train_ami)
    }

    pub fn mean_test_ami(&self) -> f64 {
        self.mean(|r| r.test_ami)
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("fold,vigilance,n_train,n_test,n_excluded,train_ari,test_ari,train_ami,test_ami,n_clusters\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.fold,
                self.vigilance,
                r.n_train,
                r.n_test,
                r.n_excluded,
                r.train_ari,
                r.test_ari,
                r.train_ami,
                r.test_ami,
                r.n_clusters
            );
        }
        s
    }

    pub fn panel(&self) -> Panel {
        let mut categories: Vec<String> = self.rows.iter().map(|r| format!("fold {}", r.fold)).collect();
        categories.push("mean".into());
        let group = |name: &str, f: fn(&CvRow) -> f64| {
            let mut v: Vec<f64> = self.rows.iter().map(f).collect();
            v.push(self.mean(f));
            (name.to_string(), v)
        };
        Panel::GroupedBars {
            title: format!("Cross-validation at vigilance {}", self.vigilance),
            categories,
            groups: vec![
                group("train ARI", |r| r.train_ari),
                group("test ARI", |r| r.test_ari),
                group("train AMI", |r| r.train_ami),
                group("test AMI", |r| r.test_ami),
            ],
        }
    }

    /// Writes `cv.csv` and `cv.svg` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), ExperimentError> {
        ensure_dir(dir)?;
        write_file(&dir.join("cv.csv"), self.csv())?;
        write_plot(dir, "cv", PlotKind::CvBars, &[self.panel()])
    }
}

/// ARI and AMI, or NaN for both when there are fewer than two items.
fn scores(model: &Clustering, attested: &Clustering) -> Result<(f64, f64), ExperimentError> {
    match ari_ami::<f64>(model, attested) {
        Ok(s) => Ok(s),
        Err(MetricError::TooFewItems(_)) => Ok((f64::NAN, f64::NAN)),
        Err(e) => Err(e.into()),
    }
}

/// Seeded fold assignment: shuffle, then deal positions round-robin.
/// Each fold's indices keep the shuffled order.
pub fn fold_indices(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let order = permutation(n, child_seed(seed, &[FOLD_TAG]));
    let mut out = vec![Vec::new(); folds];
    for (pos, i) in order.into_iter().enumerate() {
        out[pos % folds].push(i);
    }
    out
}

fn run_fold(
    samples: &[ParadigmSample],
    config: &ExperimentConfig,
    vigilance: f64,
    fold: usize,
    folds: &[Vec<usize>],
) -> Result<CvRow, ExperimentError> {
    let train_idx: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|&(f, _)| f != fold)
        .flat_map(|(_, ix)| ix.iter().copied())
        .collect();
    let train: Vec<ParadigmSample> = train_idx.iter().map(|&i| samples[i].clone()).collect();
    let enc = encode_training(&train, &config.encoding)?;
    let order: Vec<usize> = (0..train.len()).collect();
    let (net, assigned) = train_in_order(&enc.vectors, &order, vigilance, config.learning_param)?;
    let (train_ari, train_ami) = scores(&Clustering::new(assigned), &enc.attested)?;

    let mut test_pred = Vec::new();
    let mut test_labels = Vec::new();
    let mut n_excluded = 0;
    for &i in &folds[fold] {
        let v = encoding::encode(&samples[i], &enc.space, &config.encoding);
        if v.is_zero() {
            n_excluded += 1;
            continue;
        }
        test_pred.push(net.infer(&v)?);
        test_labels.push(samples[i].class_label.as_str());
    }
    let (test_ari, test_ami) = scores(&Clustering::new(test_pred), &Clustering::from_labels(test_labels.iter()))?;
    if n_excluded > 0 {
        log::warn!("fold {fold}: {n_excluded} held-out lexemes have no known features and were excluded");
    }
    Ok(CvRow {
        fold,
        n_train: train.len(),
        n_test: test_labels.len(),
        n_excluded,
        train_ari,
        test_ari,
        train_ami,
        test_ami,
        n_clusters: net.n_categories(),
    })
}

/// Cross-validates over already-assembled samples without writing anything.
/// The feature space of each fold is built from its training part only.
pub fn cv_samples(
    samples: &[ParadigmSample],
    config: &ExperimentConfig,
    vigilance: f64,
) -> Result<CvResult, ExperimentError> {
    config.validate()?;
    if !(0.0..=1.0).contains(&vigilance) {
        return Err(ExperimentError::Config(format!("vigilance {vigilance} outside [0, 1]")));
    }
    let k = config.folds;
    if samples.len() < k {
        return Err(ExperimentError::Config(format!(
            "{k} folds need at least {k} lexemes, got {}",
            samples.len()
        )));
    }
    let folds = fold_indices(samples.len(), k, config.seed);
    let pool = thread_pool(config.jobs)?;
    let rows = pool.install(|| {
        (0..k)
            .into_par_iter()
            .map(|f| run_fold(samples, config, vigilance, f, &folds))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(CvResult { vigilance, rows })
}

/// Loads the configured dataset, cross-validates at `vigilance` and writes
/// the results to the output directory.
pub fn run_cv(config: &ExperimentConfig, vigilance: f64) -> Result<CvResult, ExperimentError> {
    let samples = load_samples(config)?;
    let result = cv_samples(&samples, config, vigilance)?;
    result.write(&config.out_dir)?;
    log::info!(
        "cv at vigilance {vigilance}: mean train ARI {:.4}, mean test ARI {:.4}",
        result.mean_train_ari(),
        result.mean_test_ari()
    );
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_partition_evenly() {
        let f = fold_indices(4, 2, 7);
        assert_eq!(f.len(), 2);
        assert!(f.iter().all(|x| x.len() == 2));
        let mut all: Vec<usize> = f.concat();
        all.sort();
        assert_eq!(all, vec![0, 1, 2, 3]);

        let f = fold_indices(23, 10, 1);
        let sizes: Vec<usize> = f.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 3, 3, 2, 2, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn too_few_lexemes_is_config_error() {
        let samples = crate::data::synthetic_dataset(&crate::data::SynthParams {
            n_classes: 2,
            n_lexemes: 4,
            ..Default::default()
        })
        .unwrap()
        .samples;
        let config = ExperimentConfig {
            folds: 5,
            ..ExperimentConfig::default()
        };
        let e = cv_samples(&samples, &config, 0.2).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
