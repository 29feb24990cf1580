//! Vigilance sweep with permutation replicates and a k-means baseline.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::plot::{write_plot, Panel, PlotKind, Series};
use super::stats::mean_ci;
use super::{encode_training, ensure_dir, load_samples, permutation, thread_pool, train_in_order, write_file};
use super::{ExperimentConfig, ExperimentError};
use crate::data::ParadigmSample;
use crate::eval::{ari_ami, kmeans_baseline};
use crate::seeds::child_seed;

/// First path element of k-means baseline seeds; kept apart from the
/// vigilance indices used for ART runs.
const BASELINE_TAG: u64 = u64::MAX;

/// One (vigilance, permutation) run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepDetail {
    pub vigilance_index: usize,
    pub vigilance: f64,
    pub permutation: usize,
    pub seed: u64,
    pub ari: f64,
    pub ami: f64,
    pub n_clusters: usize,
    pub runtime_secs: f64,
}

/// Means and 95% half-widths over the permutations of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub vigilance: f64,
    pub ari_mean: f64,
    pub ari_ci: f64,
    pub ami_mean: f64,
    pub ami_ci: f64,
    pub clusters_mean: f64,
    pub clusters_ci: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRow {
    pub permutation: usize,
    pub seed: u64,
    pub k: usize,
    pub ari: f64,
    pub ami: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub details: Vec<SweepDetail>,
    pub summary: Vec<SweepSummary>,
    pub baseline: Vec<BaselineRow>,
    pub n_samples: usize,
    pub n_classes: usize,
}

impl SweepResult {
    /// Grid point with the highest mean ARI; ties go to the lowest vigilance.
    pub fn best(&self) -> Option<&SweepSummary> {
        self.summary
            .iter()
            .fold(None, |best: Option<&SweepSummary>, s| match best {
                Some(b) if !(s.ari_mean > b.ari_mean) => Some(b),
                _ if s.ari_mean.is_nan() => best,
                _ => Some(s),
            })
    }

    pub fn best_vigilance(&self) -> Option<f64> {
        self.best().map(|s| s.vigilance)
    }

    /// Mean baseline ARI and AMI, if a baseline was run.
    pub fn baseline_means(&self) -> Option<(f64, f64)> {
        if self.baseline.is_empty() {
            return None;
        }
        let ari: Vec<f64> = self.baseline.iter().map(|b| b.ari).collect();
        let ami: Vec<f64> = self.baseline.iter().map(|b| b.ami).collect();
        Some((mean_ci(&ari).0, mean_ci(&ami).0))
    }

    pub fn detail_csv(&self) -> String {
        let mut s = String::from("vigilance,permutation,seed,ari,ami,n_clusters\n");
        for d in &self.details {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                d.vigilance, d.permutation, d.seed, d.ari, d.ami, d.n_clusters
            );
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from(
            "vigilance,ari_mean,ari_ci95,ami_mean,ami_ci95,n_clusters_mean,n_clusters_ci95\n",
        );
        for r in &self.summary {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.vigilance, r.ari_mean, r.ari_ci, r.ami_mean, r.ami_ci, r.clusters_mean, r.clusters_ci
            );
        }
        s
    }

    pub fn baseline_csv(&self) -> String {
        let mut s = String::from("permutation,seed,k,ari,ami\n");
        for b in &self.baseline {
            let _ = writeln!(s, "{},{},{},{},{}", b.permutation, b.seed, b.k, b.ari, b.ami);
        }
        s
    }

    /// Wall-clock times; kept out of the other tables so those stay
    /// reproducible byte for byte.
    pub fn timing_csv(&self) -> String {
        let mut s = String::from("vigilance,permutation,runtime_secs\n");
        for d in &self.details {
            let _ = writeln!(s, "{},{},{:.6}", d.vigilance, d.permutation, d.runtime_secs);
        }
        s
    }

    /// Metric panel (with baseline references) over a cluster-count panel
    /// (with the attested class count as reference).
    pub fn panels(&self) -> Vec<Panel> {
        let pts = |f: fn(&SweepSummary) -> (f64, f64)| -> (Vec<(f64, f64)>, Vec<f64>) {
            self.summary
                .iter()
                .map(|s| {
                    let (m, c) = f(s);
                    ((s.vigilance, m), c)
                })
                .unzip()
        };
        let (ari, ari_ci) = pts(|s| (s.ari_mean, s.ari_ci));
        let (ami, ami_ci) = pts(|s| (s.ami_mean, s.ami_ci));
        let (k, k_ci) = pts(|s| (s.clusters_mean, s.clusters_ci));
        let mut refs = Vec::new();
        if let Some((a, m)) = self.baseline_means() {
            refs.push(("k-means ARI".to_string(), a));
            refs.push(("k-means AMI".to_string(), m));
        }
        vec![
            Panel::Lines {
                title: "Clustering agreement with attested classes".into(),
                x_label: "vigilance".into(),
                y_label: "score".into(),
                series: vec![
                    Series {
                        name: "ART1 ARI".into(),
                        points: ari,
                        ci: Some(ari_ci),
                    },
                    Series {
                        name: "ART1 AMI".into(),
                        points: ami,
                        ci: Some(ami_ci),
                    },
                ],
                references: refs,
            },
            Panel::Lines {
                title: "Number of clusters".into(),
                x_label: "vigilance".into(),
                y_label: "clusters".into(),
                series: vec![Series {
                    name: "ART1 clusters".into(),
                    points: k,
                    ci: Some(k_ci),
                }],
                references: vec![("attested classes".into(), self.n_classes as f64)],
            },
        ]
    }

    /// Writes the sweep tables and `sweep.svg` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), ExperimentError> {
        ensure_dir(dir)?;
        write_file(&dir.join("sweep_detail.csv"), self.detail_csv())?;
        write_file(&dir.join("sweep_summary.csv"), self.summary_csv())?;
        if !self.baseline.is_empty() {
            write_file(&dir.join("sweep_baseline.csv"), self.baseline_csv())?;
        }
        write_file(&dir.join("sweep_timing.csv"), self.timing_csv())?;
        write_plot(dir, "sweep", PlotKind::MetricVsVigilance, &self.panels())
    }
}

/// Runs the sweep over already-assembled samples without writing anything.
pub fn sweep_samples(samples: &[ParadigmSample], config: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    config.validate()?;
    let enc = encode_training(samples, &config.encoding)?;
    let n = samples.len();
    let n_classes = enc.attested.n_clusters();
    if n < 2 || n_classes < 2 {
        return Err(ExperimentError::Config(format!(
            "a sweep needs >= 2 lexemes and >= 2 classes, got {n} lexemes in {n_classes} classes"
        )));
    }
    let grid = config.grid.values();
    let n_perm = config.n_permutations;
    log::info!(
        "sweep: {n} lexemes, {n_classes} classes, width {}, {} vigilance values x {n_perm} permutations",
        enc.space.width(),
        grid.len()
    );
    let jobs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|vi| (0..n_perm).map(move |pi| (vi, pi))).collect();
    let pool = thread_pool(config.jobs)?;

    let details = pool.install(|| {
        jobs.par_iter()
            .map(|&(vi, pi)| {
                let start = Instant::now();
                let seed = child_seed(config.seed, &[vi as u64, pi as u64]);
                let order = permutation(n, seed);
                let (net, assigned) = train_in_order(&enc.vectors, &order, grid[vi], config.learning_param)?;
                let model = crate::eval::Clustering::new(assigned);
                let (ari, ami) = ari_ami::<f64>(&model, &enc.attested)?;
                Ok(SweepDetail {
                    vigilance_index: vi,
                    vigilance: grid[vi],
                    permutation: pi,
                    seed,
                    ari,
                    ami,
                    n_clusters: net.n_categories(),
                    runtime_secs: start.elapsed().as_secs_f64(),
                })
            })
            .collect::<Result<Vec<_>, ExperimentError>>()
    })?;

    let baseline = if config.baseline {
        let k = config.baseline_k.unwrap_or(n_classes);
        pool.install(|| {
            (0..n_perm)
                .into_par_iter()
                .map(|pi| {
                    let seed = child_seed(config.seed, &[BASELINE_TAG, pi as u64]);
                    let model = kmeans_baseline(&enc.vectors, k, seed, config.baseline_restarts)?;
                    let (ari, ami) = ari_ami::<f64>(&model, &enc.attested)?;
                    Ok(BaselineRow {
                        permutation: pi,
                        seed,
                        k,
                        ari,
                        ami,
                    })
                })
                .collect::<Result<Vec<_>, ExperimentError>>()
        })?
    } else {
        Vec::new()
    };

    let summary = grid
        .iter()
        .enumerate()
        .map(|(vi, &v)| {
            let runs = &details[vi * n_perm..(vi + 1) * n_perm];
            let col = |f: fn(&SweepDetail) -> f64| mean_ci(&runs.iter().map(f).collect::<Vec<_>>());
            let (ari_mean, ari_ci) = col(|d| d.ari);
            let (ami_mean, ami_ci) = col(|d| d.ami);
            let (clusters_mean, clusters_ci) = col(|d| d.n_clusters as f64);
            SweepSummary {
                vigilance: v,
                ari_mean,
                ari_ci,
                ami_mean,
                ami_ci,
                clusters_mean,
                clusters_ci,
            }
        })
        .collect();

    Ok(SweepResult {
        details,
        summary,
        baseline,
        n_samples: n,
        n_classes,
    })
}

/// Loads the configured dataset, sweeps it and writes the results to the
/// output directory.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    let samples = load_samples(config)?;
    let result = sweep_samples(&samples, config)?;
    result.write(&config.out_dir)?;
    if let Some(b) = result.best() {
        log::info!(
            "best vigilance {} (mean ARI {:.4}, mean AMI {:.4}, {:.1} clusters)",
            b.vigilance,
            b.ari_mean,
            b.ami_mean,
            b.clusters_mean
        );
    }
    Ok(result)
}
