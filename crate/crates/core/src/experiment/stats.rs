//! Summary statistics for replicate runs.

/// Mean and 95% normal-approximation half-width `1.96 * sd / sqrt(n)`,
/// with `sd` the sample standard deviation (`n - 1` denominator). A single
/// value has half-width 0. NaN values are skipped.
pub fn mean_ci(values: &[f64]) -> (f64, f64) {
    let vals: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    let n = vals.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = vals.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, 1.96 * var.sqrt() / (n as f64).sqrt())
}
