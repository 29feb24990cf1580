//! Cluster composition and distinctive-feature reports.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, Write};

use thiserror::Error;

use super::metrics::Clustering;
use crate::art1::Network;
use crate::bits::BinaryVector;
use crate::encoding::FeatureSpace;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("clustering has {0} items but {1} attested labels / vectors were given")]
    Length(usize, usize),
    #[error("cluster {cluster} has no template (network has {n_categories} categories)")]
    MissingTemplate { cluster: usize, n_categories: usize },
    #[error("network width {network} differs from feature space width {space}")]
    Width { network: usize, space: usize },
}

/// Attested-class make-up of one model cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterComposition {
    pub cluster: usize,
    pub size: usize,
    /// `(class, count)`, most frequent first, ties by class name. Classes
    /// below the size filter are left out.
    pub histogram: Vec<(String, usize)>,
    /// Most frequent class over all members; ties go to the
    /// lexicographically first class.
    pub majority: String,
}

/// Per-cluster histograms over attested classes, largest clusters first
/// (ties by cluster id). Classes with fewer than `min_class_size` lexemes
/// in the whole dataset are hidden from the histograms.
pub fn cluster_composition<S: AsRef<str>>(
    model: &Clustering,
    attested: &[S],
    min_class_size: usize,
) -> Result<Vec<ClusterComposition>, ReportError> {
    if model.len() != attested.len() {
        return Err(ReportError::Length(model.len(), attested.len()));
    }
    let mut class_sizes: HashMap<&str, usize> = HashMap::new();
    for a in attested {
        *class_sizes.entry(a.as_ref()).or_default() += 1;
    }
    let mut per_cluster: BTreeMap<usize, BTreeMap<&str, usize>> = BTreeMap::new();
    for (&c, a) in model.labels().iter().zip(attested) {
        *per_cluster.entry(c).or_default().entry(a.as_ref()).or_default() += 1;
    }
    let mut out: Vec<ClusterComposition> = per_cluster
        .into_iter()
        .map(|(cluster, hist)| {
            let size = hist.values().sum();
            // BTreeMap iterates classes in name order, so the first maximum wins ties.
            let majority = hist
                .iter()
                .fold(None, |best: Option<(&str, usize)>, (&k, &v)| match best {
                    Some((_, bv)) if bv >= v => best,
                    _ => Some((k, v)),
                })
                .map(|(k, _)| k.to_string())
                .unwrap_or_default();
            let mut histogram: Vec<(String, usize)> = hist
                .into_iter()
                .filter(|(k, _)| class_sizes[k] >= min_class_size)
                .map(|(k, v)| (k.to_string(), v))
                .collect();
            histogram.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            ClusterComposition {
                cluster,
                size,
                histogram,
                majority,
            }
        })
        .collect();
    out.sort_by(|a, b| b.size.cmp(&a.size).then(a.cluster.cmp(&b.cluster)));
    Ok(out)
}

/// One template bit of a cluster with its share among all lexemes that have it.
#[derive(Debug, Clone, PartialEq)]
pub struct DistinctiveFeature<T> {
    pub column: usize,
    pub cell: Option<String>,
    pub gram: String,
    /// Lexemes in this cluster with the feature / all lexemes with the feature.
    pub proportion: T,
    pub in_cluster: usize,
    pub total_with_feature: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterFeatures<T> {
    pub cluster: usize,
    pub size: usize,
    pub features: Vec<DistinctiveFeature<T>>,
}

/// Lists every template bit of every assigned cluster, sorted by proportion
/// then by total count (both descending), then by column.
pub fn distinctive_features<T: Scalar>(
    network: &Network<T>,
    assignments: &Clustering,
    space: &FeatureSpace,
    all_vectors: &[BinaryVector],
) -> Result<Vec<ClusterFeatures<T>>, ReportError> {
    if assignments.len() != all_vectors.len() {
        return Err(ReportError::Length(assignments.len(), all_vectors.len()));
    }
    if let Some(w) = network.width() {
        if w != space.width() {
            return Err(ReportError::Width {
                network: w,
                space: space.width(),
            });
        }
    }
    let width = space.width();
    let mut totals = vec![0usize; width];
    for v in all_vectors {
        for i in v.iter_ones() {
            totals[i] += 1;
        }
    }
    let mut members: BTreeMap<usize, Vec<&BinaryVector>> = BTreeMap::new();
    for (&c, v) in assignments.labels().iter().zip(all_vectors) {
        members.entry(c).or_default().push(v);
    }
    let templates = network.templates();
    let mut out = Vec::with_capacity(members.len());
    for (cluster, vs) in members {
        let template = templates.get(cluster).ok_or(ReportError::MissingTemplate {
            cluster,
            n_categories: templates.len(),
        })?;
        let mut features: Vec<DistinctiveFeature<T>> = template
            .iter_ones()
            .map(|col| {
                let in_cluster = vs.iter().filter(|v| v.get(col)).count();
                let total = totals[col];
                let key = &space.columns()[col];
                DistinctiveFeature {
                    column: col,
                    cell: key.cell.clone(),
                    gram: key.gram.to_string(),
                    proportion: if total == 0 {
                        T::zero()
                    } else {
                        T::from_count(in_cluster) / T::from_count(total)
                    },
                    in_cluster,
                    total_with_feature: total,
                }
            })
            .collect();
        features.sort_by(|a, b| {
            b.proportion
                .partial_cmp(&a.proportion)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(b.total_with_feature.cmp(&a.total_with_feature))
                .then(a.column.cmp(&b.column))
        });
        out.push(ClusterFeatures {
            cluster,
            size: vs.len(),
            features,
        });
    }
    Ok(out)
}

/// Composition and distinctive features joined per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport<T> {
    pub composition: Vec<ClusterComposition>,
    pub features: Vec<ClusterFeatures<T>>,
}

impl<T: Scalar> ClusterReport<T> {
    fn features_of(&self, cluster: usize) -> &[DistinctiveFeature<T>] {
        self.features
            .iter()
            .find(|f| f.cluster == cluster)
            .map(|f| f.features.as_slice())
            .unwrap_or(&[])
    }

    /// One row per (cluster, feature): machine-readable.
    pub fn write_features_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "cluster\tsize\tmajority_class\tcell\ttrigram\tproportion\tin_cluster\ttotal")?;
        for comp in &self.composition {
            for f in self.features_of(comp.cluster) {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{:.3}\t{}\t{}",
                    comp.cluster,
                    comp.size,
                    comp.majority,
                    f.cell.as_deref().unwrap_or(""),
                    f.gram,
                    f.proportion.to_f64_lossy(),
                    f.in_cluster,
                    f.total_with_feature
                )?;
            }
        }
        Ok(())
    }

    /// Human-readable table, one block per cluster with features grouped by
    /// cell: `cell: gram (proportion | total), ...`. At most `max_features`
    /// features per cluster are shown.
    pub fn write_features_text<W: Write>(&self, mut out: W, max_features: usize) -> io::Result<()> {
        let width = self
            .composition
            .iter()
            .map(|c| c.majority.chars().count())
            .max()
            .unwrap_or(0)
            .max("majority".len());
        writeln!(out, "{:>7}  {:>6}  {:<width$}  features", "cluster", "size", "majority")?;
        for comp in &self.composition {
            let feats = self.features_of(comp.cluster);
            let mut by_cell: Vec<(String, Vec<String>)> = Vec::new();
            for f in feats.iter().take(max_features) {
                let cell = f.cell.clone().unwrap_or_else(|| "*".into());
                let item = format!("{} ({:.3} | {})", f.gram, f.proportion.to_f64_lossy(), f.total_with_feature);
                match by_cell.iter_mut().find(|(c, _)| *c == cell) {
                    Some((_, items)) => items.push(item),
                    None => by_cell.push((cell, vec![item])),
                }
            }
            let lines: Vec<String> = by_cell
                .into_iter()
                .map(|(c, items)| format!("{c}: {}", items.join(", ")))
                .collect();
            let pad = " ".repeat(7 + 2 + 6 + 2 + width + 2);
            match lines.split_first() {
                None => writeln!(out, "{:>7}  {:>6}  {:<width$}  -", comp.cluster, comp.size, comp.majority)?,
                Some((first, rest)) => {
                    writeln!(out, "{:>7}  {:>6}  {:<width$}  {first}", comp.cluster, comp.size, comp.majority)?;
                    for l in rest {
                        writeln!(out, "{pad}{l}")?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Long-format composition: `cluster,size,majority,class,count`.
    pub fn write_composition_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "cluster,size,majority_class,class,count")?;
        for comp in &self.composition {
            for (class, count) in &comp.histogram {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    comp.cluster,
                    comp.size,
                    csv_field(&comp.majority),
                    csv_field(class),
                    count
                )?;
            }
        }
        Ok(())
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
