//! Single-run cluster reports: composition and distinctive trigrams.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::plot::{write_plot, Panel, PlotKind};
use super::{encode_training, ensure_dir, io_err, load_samples, permutation, train_in_order, write_file};
use super::{ExperimentConfig, ExperimentError};
use crate::art1::{write_snapshot, Network};
use crate::data::ParadigmSample;
use crate::encoding::FeatureSpace;
use crate::eval::{cluster_composition, distinctive_features, ClusterReport, Clustering};

/// Features per cluster in the aligned text table.
const TEXT_FEATURES: usize = 12;

pub struct ReportOutput {
    pub vigilance: f64,
    pub seed: u64,
    pub network: Network<f64>,
    pub space: FeatureSpace,
    pub assignments: Clustering,
    pub lexemes: Vec<String>,
    pub labels: Vec<String>,
    pub report: ClusterReport<f64>,
}

impl ReportOutput {
    pub fn composition_panel(&self) -> Panel {
        let mut totals: BTreeMap<&str, usize> = BTreeMap::new();
        for c in &self.report.composition {
            for (class, n) in &c.histogram {
                *totals.entry(class.as_str()).or_default() += n;
            }
        }
        let mut classes: Vec<(&str, usize)> = totals.into_iter().collect();
        classes.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let categories = self
            .report
            .composition
            .iter()
            .map(|c| format!("{} (n={})", c.cluster, c.size))
            .collect();
        let layers = classes
            .iter()
            .map(|&(class, _)| {
                let counts = self
                    .report
                    .composition
                    .iter()
                    .map(|c| {
                        c.histogram
                            .iter()
                            .find(|(k, _)| k == class)
                            .map_or(0.0, |&(_, n)| n as f64)
                    })
                    .collect();
                (class.to_string(), counts)
            })
            .collect();
        Panel::StackedBars {
            title: format!("Assigned lexemes per cluster (vigilance {}, seed {})", self.vigilance, self.seed),
            categories,
            layers,
        }
    }

    pub fn assignments_tsv(&self) -> String {
        let mut s = String::from("lexeme\tclass\tcluster\n");
        for ((lex, class), c) in self.lexemes.iter().zip(&self.labels).zip(self.assignments.labels()) {
            let _ = writeln!(s, "{lex}\t{class}\t{c}");
        }
        s
    }

    /// Writes composition CSV and SVG, feature tables, the per-lexeme
    /// assignments, the network snapshot and the feature space into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), ExperimentError> {
        ensure_dir(dir)?;
        let mut buf = Vec::new();
        self.report.write_composition_csv(&mut buf).map_err(io_err(dir))?;
        write_file(&dir.join("composition.csv"), &buf)?;
        write_plot(dir, "composition", PlotKind::CompositionBars, &[self.composition_panel()])?;

        buf.clear();
        self.report.write_features_tsv(&mut buf).map_err(io_err(dir))?;
        write_file(&dir.join("features.tsv"), &buf)?;
        buf.clear();
        self.report
            .write_features_text(&mut buf, TEXT_FEATURES)
            .map_err(io_err(dir))?;
        write_file(&dir.join("features.txt"), &buf)?;

        write_file(&dir.join("assignments.tsv"), self.assignments_tsv())?;
        buf.clear();
        self.space.write_table(&mut buf).map_err(io_err(dir))?;
        write_file(&dir.join("feature_space.tsv"), &buf)?;

        buf.clear();
        write_snapshot(&self.network, &mut buf)?;
        write_file(&dir.join("network.art1"), &buf)
    }
}

/// Trains one network at `vigilance` over samples presented in the order
/// given by `seed`, and builds the cluster report.
pub fn report_samples(
    samples: &[ParadigmSample],
    config: &ExperimentConfig,
    vigilance: f64,
    seed: u64,
    min_class_size: usize,
) -> Result<ReportOutput, ExperimentError> {
    config.validate()?;
    let enc = encode_training(samples, &config.encoding)?;
    let order = permutation(samples.len(), seed);
    let (network, assigned) = train_in_order(&enc.vectors, &order, vigilance, config.learning_param)?;
    let assignments = Clustering::new(assigned);
    let composition = cluster_composition(&assignments, &enc.labels, min_class_size)?;
    let features = distinctive_features(&network, &assignments, &enc.space, &enc.vectors)?;
    Ok(ReportOutput {
        vigilance,
        seed,
        network,
        space: enc.space,
        assignments,
        lexemes: samples.iter().map(|s| s.lexeme_id.clone()).collect(),
        labels: enc.labels,
        report: ClusterReport { composition, features },
    })
}

/// Loads the configured dataset, builds the report and writes it to the
/// output directory.
pub fn run_report(
    config: &ExperimentConfig,
    vigilance: f64,
    seed: u64,
    min_class_size: usize,
) -> Result<ReportOutput, ExperimentError> {
    let samples = load_samples(config)?;
    let out = report_samples(&samples, config, vigilance, seed, min_class_size)?;
    out.write(&config.out_dir)?;
    log::info!(
        "report at vigilance {vigilance}: {} clusters over {} lexemes",
        out.network.n_categories(),
        samples.len()
    );
    Ok(out)
}
