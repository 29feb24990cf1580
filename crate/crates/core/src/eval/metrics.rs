//! Chance-adjusted partition similarity: ARI and AMI.

use std::collections::HashMap;
use std::hash::Hash;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("clusterings have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 items to compare partitions, got {0}")]
    TooFewItems(usize),
}

/// Cluster ids aligned with a sample order. Ids are opaque.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clustering {
    labels: Vec<usize>,
    n_clusters: usize,
}

impl Clustering {
    pub fn new(labels: Vec<usize>) -> Self {
        let mut distinct = labels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        Self {
            n_clusters: distinct.len(),
            labels,
        }
    }

    /// Maps arbitrary labels to ids in order of first appearance.
    pub fn from_labels<L: Hash + Eq>(labels: impl IntoIterator<Item = L>) -> Self {
        let mut ids: HashMap<L, usize> = HashMap::new();
        let labels = labels
            .into_iter()
            .map(|l| {
                let next = ids.len();
                *ids.entry(l).or_insert(next)
            })
            .collect();
        Self::new(labels)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Counts `n_ij` of items in row cluster `i` (first clustering) and column
/// cluster `j` (second clustering).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub total: u64,
}

impl ContingencyTable {
    pub fn new(a: &Clustering, b: &Clustering) -> Result<Self, MetricError> {
        if a.len() != b.len() {
            return Err(MetricError::LengthMismatch(a.len(), b.len()));
        }
        let dense = |c: &Clustering| {
            let mut map = HashMap::new();
            let ids: Vec<usize> = c
                .labels()
                .iter()
                .map(|&l| {
                    let next = map.len();
                    *map.entry(l).or_insert(next)
                })
                .collect();
            (ids, map.len())
        };
        let (ra, nr) = dense(a);
        let (cb, nc) = dense(b);
        let mut counts = vec![vec![0u64; nc]; nr];
        for (&i, &j) in ra.iter().zip(&cb) {
            counts[i][j] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..nc).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            total: a.len() as u64,
        })
    }

    /// True when both clusterings are the same partition up to relabeling.
    pub fn is_bijection(&self) -> bool {
        self.row_sums.len() == self.col_sums.len()
            && self
                .counts
                .iter()
                .all(|r| r.iter().filter(|&&c| c > 0).count() == 1)
            && (0..self.col_sums.len())
                .all(|j| self.counts.iter().filter(|r| r[j] > 0).count() == 1)
    }
}

fn check(a: &Clustering, b: &Clustering) -> Result<ContingencyTable, MetricError> {
    let table = ContingencyTable::new(a, b)?;
    if table.total < 2 {
        return Err(MetricError::TooFewItems(table.total as usize));
    }
    Ok(table)
}

fn comb2(n: u64) -> i128 {
    let n = n as i128;
    n * (n - 1) / 2
}

/// Adjusted Rand index.
///
/// With `s = sum C(n_ij, 2)`, `sa`, `sb` the row and column pair sums and
/// `P = C(n, 2)` the score is `(s - sa*sb/P) / ((sa+sb)/2 - sa*sb/P)`, here
/// evaluated as one exact integer ratio. When the denominator vanishes the
/// score is 1 for identical partitions and 0 otherwise.
pub fn adjusted_rand_index<T: Scalar>(a: &Clustering, b: &Clustering) -> Result<T, MetricError> {
    let table = check(a, b)?;
    Ok(ari_from_table(&table))
}

pub(crate) fn ari_from_table<T: Scalar>(table: &ContingencyTable) -> T {
    let s: i128 = table.counts.iter().flatten().map(|&c| comb2(c)).sum();
    let sa: i128 = table.row_sums.iter().map(|&c| comb2(c)).sum();
    let sb: i128 = table.col_sums.iter().map(|&c| comb2(c)).sum();
    let p = comb2(table.total);
    let num = 2 * (s * p - sa * sb);
    let den = (sa + sb) * p - 2 * sa * sb;
    if den == 0 {
        return if table.is_bijection() { T::one() } else { T::zero() };
    }
    T::lit(num as f64) / T::lit(den as f64)
}

/// Shannon entropy (natural log) of a label-count vector.
pub fn entropy<T: Scalar>(counts: &[u64]) -> T {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return T::zero();
    }
    let nf = T::lit(n as f64);
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = T::lit(c as f64) / nf;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information (natural log) from a contingency table.
pub fn mutual_information<T: Scalar>(table: &ContingencyTable) -> T {
    let n = T::lit(table.total as f64);
    let mut mi = T::zero();
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let c = T::lit(c as f64);
            let ai = T::lit(table.row_sums[i] as f64);
            let bj = T::lit(table.col_sums[j] as f64);
            mi = mi + (c / n) * ((n * c) / (ai * bj)).ln();
        }
    }
    mi
}

fn ln_factorials<T: Scalar>(n: u64) -> Vec<T> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0f64;
    out.push(T::zero());
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(T::lit(acc));
    }
    out
}

/// Expected mutual information of two random partitions with the table's
/// marginals (hypergeometric model).
pub fn expected_mutual_information<T: Scalar>(table: &ContingencyTable) -> T {
    let n = table.total;
    let lf = ln_factorials::<T>(n);
    let nf = T::lit(n as f64);
    let mut memo: HashMap<(u64, u64), T> = HashMap::new();
    let mut emi = T::zero();
    for &a in &table.row_sums {
        for &b in &table.col_sums {
            let term = *memo.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let lo = 1.max((a + b).saturating_sub(n));
                let hi = a.min(b);
                let fixed = lf[a as usize] + lf[b as usize] + lf[(n - a) as usize]
                    + lf[(n - b) as usize]
                    - lf[n as usize];
                let (af, bf) = (T::lit(a as f64), T::lit(b as f64));
                let mut sum = T::zero();
                for nij in lo..=hi {
                    let x = T::lit(nij as f64);
                    let log_p = fixed
                        - lf[nij as usize]
                        - lf[(a - nij) as usize]
                        - lf[(b - nij) as usize]
                        - lf[(n + nij - a - b) as usize];
                    sum = sum + (x / nf) * ((nf * x) / (af * bf)).ln() * log_p.exp();
                }
                sum
            });
            emi = emi + term;
        }
    }
    emi
}

/// Adjusted mutual information with arithmetic-mean normalisation:
/// `(MI - E[MI]) / ((H(a) + H(b)) / 2 - E[MI])`.
///
/// Identical partitions score exactly 1; when the normaliser is zero for
/// non-identical partitions the score is 0.
pub fn adjusted_mutual_information<T: Scalar>(
    a: &Clustering,
    b: &Clustering,
) -> Result<T, MetricError> {
    let table = check(a, b)?;
    Ok(ami_from_table(&table))
}

pub(crate) fn ami_from_table<T: Scalar>(table: &ContingencyTable) -> T {
    if table.is_bijection() {
        return T::one();
    }
    let mi: T = mutual_information(table);
    let emi: T = expected_mutual_information(table);
    let mean = (entropy::<T>(&table.row_sums) + entropy::<T>(&table.col_sums)) / T::lit(2.0);
    let den = mean - emi;
    if den == T::zero() {
        return T::zero();
    }
    (mi - emi) / den
}

/// ARI and AMI from one contingency table.
pub fn ari_ami<T: Scalar>(a: &Clustering, b: &Clustering) -> Result<(T, T), MetricError> {
    let table = check(a, b)?;
    Ok((ari_from_table(&table), ami_from_table(&table)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(l: &[usize]) -> Clustering {
        Clustering::new(l.to_vec())
    }

    #[test]
    fn identical_and_relabelled() {
        let a = c(&[0, 0, 1, 1]);
        assert_eq!(adjusted_rand_index::<f64>(&a, &a).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index::<f64>(&a, &c(&[1, 1, 0, 0])).unwrap(), 1.0);
        assert_eq!(adjusted_mutual_information::<f64>(&a, &a).unwrap(), 1.0);
        let b = c(&[0, 0, 1, 1, 2, 2]);
        let b2 = c(&[7, 7, 3, 3, 9, 9]);
        let other = c(&[0, 0, 0, 1, 1, 1]);
        let x: f64 = adjusted_mutual_information(&b, &other).unwrap();
        let y: f64 = adjusted_mutual_information(&b2, &other).unwrap();
        assert!((x - y).abs() < 1e-15);
    }

    #[test]
    fn ari_known_value() {
        // Pair counts for a=[0,0,1,1,2,2], b=[0,0,0,1,1,1]:
        // n11 = 2, n10 = 1, n01 = 4, n00 = 8.
        // ARI = 2(n00 n11 - n01 n10) / ((n00+n01)(n01+n11) + (n00+n10)(n10+n11))
        //     = 2(16 - 4) / (12*6 + 9*3) = 24/99.
        let v: f64 = adjusted_rand_index(&c(&[0, 0, 1, 1, 2, 2]), &c(&[0, 0, 0, 1, 1, 1])).unwrap();
        assert!((v - 24.0 / 99.0).abs() < 1e-15);
    }

    #[test]
    fn ari_can_be_negative() {
        let v: f64 = adjusted_rand_index(&c(&[0, 0, 1, 1]), &c(&[0, 1, 0, 1])).unwrap();
        assert!(v < 0.0);
    }

    #[test]
    fn degenerate_policies() {
        let one = c(&[0, 0, 0]);
        let singles = c(&[0, 1, 2]);
        assert_eq!(adjusted_rand_index::<f64>(&one, &one).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index::<f64>(&singles, &singles).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index::<f64>(&one, &singles).unwrap(), 0.0);
        assert_eq!(adjusted_mutual_information::<f64>(&one, &one).unwrap(), 1.0);
        assert_eq!(adjusted_mutual_information::<f64>(&singles, &singles).unwrap(), 1.0);
        assert_eq!(adjusted_mutual_information::<f64>(&one, &singles).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert_eq!(
            adjusted_rand_index::<f64>(&c(&[0, 1]), &c(&[0])),
            Err(MetricError::LengthMismatch(2, 1))
        );
        assert_eq!(
            adjusted_mutual_information::<f64>(&c(&[0]), &c(&[0])),
            Err(MetricError::TooFewItems(1))
        );
    }

    #[test]
    fn from_labels_dense_ids() {
        let cl = Clustering::from_labels(["b", "a", "b", "c"]);
        assert_eq!(cl.labels(), &[0, 1, 0, 2]);
        assert_eq!(cl.n_clusters(), 3);
    }

    #[test]
    fn contingency_sums() {
        let t = ContingencyTable::new(&c(&[0, 0, 1, 5]), &c(&[2, 3, 3, 3])).unwrap();
        assert_eq!(t.total, 4);
        assert_eq!(t.counts.iter().flatten().sum::<u64>(), 4);
        assert_eq!(t.row_sums, vec![2, 1, 1]);
        assert_eq!(t.col_sums, vec![1, 3]);
    }

    #[test]
    fn f32_metrics() {
        let v: f32 = adjusted_rand_index(&c(&[0, 0, 1, 1, 2, 2]), &c(&[0, 0, 0, 1, 1, 1])).unwrap();
        assert!((v - 24.0 / 99.0).abs() < 1e-6);
        let w: f32 = adjusted_mutual_information(&c(&[0, 0, 1, 1, 2, 2]), &c(&[0, 0, 0, 1, 1, 1])).unwrap();
        let w64: f64 = adjusted_mutual_information(&c(&[0, 0, 1, 1, 2, 2]), &c(&[0, 0, 0, 1, 1, 1])).unwrap();
        assert!((w as f64 - w64).abs() < 1e-5);
    }
}
