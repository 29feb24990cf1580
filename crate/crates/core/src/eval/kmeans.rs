//! k-means baseline on binary vectors (Lloyd iterations, k-means++ seeding).
//!
//! Points stay sparse: `|x - c|^2 = |x| - 2 * sum_{i in x} c_i + |c|^2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::metrics::Clustering;
use crate::bits::BinaryVector;
use crate::scalar::Scalar;
use crate::seeds::child_seed;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KMeansError {
    #[error("k must satisfy 1 <= k <= n (k = {k}, n = {n})")]
    BadK { k: usize, n: usize },
    #[error("restarts must be at least 1")]
    NoRestarts,
    #[error("vectors have inconsistent widths")]
    Width,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop when no centroid moves further than this (Euclidean).
    pub tol: f64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            restarts: 10,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit<T> {
    pub clustering: Clustering,
    pub inertia: T,
    pub iterations: usize,
    /// Index of the restart that produced this fit.
    pub restart: usize,
}

struct Points {
    rows: Vec<Vec<usize>>,
    norms: Vec<usize>,
    width: usize,
}

fn sq_dist<T: Scalar>(row: &[usize], norm: usize, centroid: &[T], c_norm2: T) -> T {
    let dot: T = row.iter().map(|&i| centroid[i]).sum();
    let d = T::from_count(norm) - (dot + dot) + c_norm2;
    d.max(T::zero())
}

fn norm2<T: Scalar>(c: &[T]) -> T {
    c.iter().map(|&v| v * v).sum()
}

fn point_centroid<T: Scalar>(row: &[usize], width: usize) -> Vec<T> {
    let mut c = vec![T::zero(); width];
    for &i in row {
        c[i] = T::one();
    }
    c
}

fn nearest<T: Scalar>(row: &[usize], norm: usize, centroids: &[Vec<T>], norms2: &[T]) -> (usize, T) {
    let mut best = (0, T::infinity());
    for (j, (c, &n2)) in centroids.iter().zip(norms2).enumerate() {
        let d = sq_dist(row, norm, c, n2);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus_init<T: Scalar>(pts: &Points, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<T>> {
    let n = pts.rows.len();
    let first = rng.gen_range(0..n);
    let mut centroids = vec![point_centroid::<T>(&pts.rows[first], pts.width)];
    let mut d2: Vec<T> = (0..n)
        .map(|i| {
            let c = &centroids[0];
            sq_dist(&pts.rows[i], pts.norms[i], c, norm2(c))
        })
        .collect();
    while centroids.len() < k {
        let total: T = d2.iter().copied().sum();
        let pick = if total > T::zero() {
            let target = T::lit(rng.gen::<f64>()) * total;
            let mut acc = T::zero();
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc = acc + d;
                if d > T::zero() && acc > target {
                    chosen = i;
                    break;
                }
            }
            if d2[chosen] == T::zero() {
                chosen = d2.iter().rposition(|&d| d > T::zero()).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        let c = point_centroid::<T>(&pts.rows[pick], pts.width);
        let cn = norm2(&c);
        for i in 0..n {
            let d = sq_dist(&pts.rows[i], pts.norms[i], &c, cn);
            if d < d2[i] {
                d2[i] = d;
            }
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd<T: Scalar>(pts: &Points, config: &KMeansConfig, seed: u64, restart: usize) -> KMeansFit<T> {
    let n = pts.rows.len();
    let k = config.k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<Vec<T>> = plus_plus_init(pts, k, &mut rng);
    let mut norms2: Vec<T> = centroids.iter().map(|c| norm2(c)).collect();
    let mut assign = vec![0usize; n];
    let mut dists = vec![T::zero(); n];
    let tol = T::lit(config.tol);
    let mut iterations = 0;

    for _ in 0..config.max_iter {
        iterations += 1;
        for i in 0..n {
            let (j, d) = nearest(&pts.rows[i], pts.norms[i], &centroids, &norms2);
            assign[i] = j;
            dists[i] = d;
        }
        let mut sums = vec![vec![T::zero(); pts.width]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[assign[i]] += 1;
            for &f in &pts.rows[i] {
                sums[assign[i]][f] = sums[assign[i]][f] + T::one();
            }
        }
        // Empty clusters take the point farthest from its own centroid.
        for j in 0..k {
            if counts[j] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&i| counts[assign[i]] > 1)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if dists[b] >= dists[i] => Some(b),
                    _ => Some(i),
                });
            let Some(far) = far else { continue };
            let old = assign[far];
            counts[old] -= 1;
            for &f in &pts.rows[far] {
                sums[old][f] = sums[old][f] - T::one();
                sums[j][f] = sums[j][f] + T::one();
            }
            counts[j] = 1;
            assign[far] = j;
            dists[far] = T::zero();
        }
        let mut max_shift = T::zero();
        for j in 0..k {
            if counts[j] == 0 {
                continue;
            }
            let cnt = T::from_count(counts[j]);
            let new: Vec<T> = sums[j].iter().map(|&s| s / cnt).collect();
            let shift = new
                .iter()
                .zip(&centroids[j])
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<T>()
                .sqrt();
            max_shift = max_shift.max(shift);
            norms2[j] = norm2(&new);
            centroids[j] = new;
        }
        if max_shift <= tol {
            break;
        }
    }

    let mut inertia = T::zero();
    for i in 0..n {
        let (j, d) = nearest(&pts.rows[i], pts.norms[i], &centroids, &norms2);
        assign[i] = j;
        inertia = inertia + d;
    }
    KMeansFit {
        clustering: Clustering::new(assign),
        inertia,
        iterations,
        restart,
    }
}

/// Best of `config.restarts` independent runs by inertia (ties go to the
/// lower restart index). Restart `r` is seeded with `child_seed(seed, r)`.
pub fn kmeans<T: Scalar>(vectors: &[BinaryVector], config: &KMeansConfig) -> Result<KMeansFit<T>, KMeansError> {
    let n = vectors.len();
    if config.k == 0 || config.k > n {
        return Err(KMeansError::BadK { k: config.k, n });
    }
    if config.restarts == 0 {
        return Err(KMeansError::NoRestarts);
    }
    let width = vectors[0].width();
    if vectors.iter().any(|v| v.width() != width) {
        return Err(KMeansError::Width);
    }
    let pts = Points {
        rows: vectors.iter().map(|v| v.iter_ones().collect()).collect(),
        norms: vectors.iter().map(BinaryVector::count_ones).collect(),
        width,
    };
    let fits: Vec<KMeansFit<T>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| lloyd(&pts, config, child_seed(config.seed, &[r as u64]), r))
        .collect();
    Ok(fits
        .into_iter()
        .reduce(|best, f| if f.inertia < best.inertia { f } else { best })
        .expect("restarts >= 1"))
}

/// k-means clustering with default iteration limits.
pub fn kmeans_baseline(
    vectors: &[BinaryVector],
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<Clustering, KMeansError> {
    let config = KMeansConfig {
        restarts,
        ..KMeansConfig::new(k, seed)
    };
    kmeans::<f64>(vectors, &config).map(|f| f.clustering)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::metrics::adjusted_rand_index;

    fn bv(bits: &[u8]) -> BinaryVector {
        BinaryVector::from_bits(bits)
    }

    #[test]
    fn k_one_is_single_cluster() {
        let xs = vec![bv(&[1, 0, 0]), bv(&[0, 1, 0]), bv(&[1, 1, 1])];
        let c = kmeans_baseline(&xs, 1, 3, 4).unwrap();
        assert_eq!(c.n_clusters(), 1);
    }

    #[test]
    fn separable_groups_split() {
        let mut xs = vec![bv(&[1, 1, 1, 0, 0, 0]); 5];
        xs.extend(vec![bv(&[0, 0, 0, 1, 1, 1]); 5]);
        let truth = Clustering::new((0..10).map(|i| i / 5).collect());
        let c = kmeans_baseline(&xs, 2, 11, 10).unwrap();
        assert_eq!(adjusted_rand_index::<f64>(&c, &truth).unwrap(), 1.0);
    }

    #[test]
    fn k_equals_n_has_zero_inertia() {
        let xs = vec![bv(&[1, 0, 0]), bv(&[0, 1, 0]), bv(&[0, 0, 1]), bv(&[1, 1, 0])];
        let fit = kmeans::<f64>(&xs, &KMeansConfig::new(4, 5)).unwrap();
        assert_eq!(fit.inertia, 0.0);
        assert_eq!(fit.clustering.n_clusters(), 4);
    }

    #[test]
    fn bad_k() {
        let xs = vec![bv(&[1, 0])];
        assert_eq!(kmeans_baseline(&xs, 2, 0, 1), Err(KMeansError::BadK { k: 2, n: 1 }));
        assert_eq!(kmeans_baseline(&xs, 0, 0, 1), Err(KMeansError::BadK { k: 0, n: 1 }));
        assert_eq!(kmeans_baseline(&xs, 1, 0, 0), Err(KMeansError::NoRestarts));
    }

    #[test]
    fn deterministic_and_monotone_in_restarts() {
        let xs: Vec<BinaryVector> = (0..60usize)
            .map(|s| BinaryVector::from_indices(20, (0..20).filter(|i| (i * 7 + s * 13 + s * s) % 5 < 2)))
            .collect();
        let a = kmeans::<f64>(&xs, &KMeansConfig { restarts: 3, ..KMeansConfig::new(4, 9) }).unwrap();
        let b = kmeans::<f64>(&xs, &KMeansConfig { restarts: 3, ..KMeansConfig::new(4, 9) }).unwrap();
        assert_eq!(a, b);
        let mut prev = f64::INFINITY;
        for r in 1..8 {
            let f = kmeans::<f64>(&xs, &KMeansConfig { restarts: r, ..KMeansConfig::new(4, 9) }).unwrap();
            assert!(f.inertia <= prev);
            prev = f.inertia;
        }
    }

    #[test]
    fn inertia_matches_dense_recomputation() {
        let xs: Vec<BinaryVector> = (0..40usize)
            .map(|s| BinaryVector::from_indices(12, (0..12).filter(|i| (i * 5 + s * 3) % 4 == 0)))
            .collect();
        let fit = kmeans::<f64>(&xs, &KMeansConfig::new(3, 1)).unwrap();
        let labels = fit.clustering.labels();
        let mut total = 0.0;
        for j in 0..3 {
            let members: Vec<&BinaryVector> = xs.iter().zip(labels).filter(|(_, &l)| l == j).map(|(x, _)| x).collect();
            if members.is_empty() {
                continue;
            }
            let mean: Vec<f64> = (0..12)
                .map(|i| members.iter().filter(|m| m.get(i)).count() as f64 / members.len() as f64)
                .collect();
            for m in members {
                total += (0..12).map(|i| (m.get(i) as u8 as f64 - mean[i]).powi(2)).sum::<f64>();
            }
        }
        assert!((total - fit.inertia).abs() < 1e-9, "{total} vs {}", fit.inertia);
    }
}
