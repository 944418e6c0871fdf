//! Batch-means effective sample size and Monte Carlo standard errors.

// Unused when std is linked (its inherent float methods take precedence).
#[allow(unused_imports)]
use num_traits::Float;

/// Number of batches used by the batch-means estimators.
pub const DEFAULT_BATCHES: usize = 100;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Batch-means estimate of `n Var(mean)`, the asymptotic variance.
///
/// The series is cut into `batches` equal batches (a remainder at the start
/// is dropped). Falls back to the sample variance when there are fewer than
/// two draws per batch.
pub fn batch_means_variance(xs: &[f64], batches: usize) -> f64 {
    let n = xs.len();
    let size = n / batches.max(1);
    if batches < 2 || size < 2 {
        return variance(xs);
    }
    let used = &xs[n - size * batches..];
    let mu = mean(used);
    let ss: f64 = used
        .chunks_exact(size)
        .map(|c| {
            let d = mean(c) - mu;
            d * d
        })
        .sum();
    size as f64 * ss / (batches as f64 - 1.0)
}

/// Effective sample size `n s^2 / sigma_bm^2`, capped at `n`.
pub fn effective_sample_size(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let s2 = variance(xs);
    let bm = batch_means_variance(xs, DEFAULT_BATCHES);
    if !(bm > 0.0) || !(s2 > 0.0) {
        return n;
    }
    (n * s2 / bm).min(n).max(1.0)
}

/// Monte Carlo standard error of the mean by batch means.
pub fn mcse(xs: &[f64]) -> f64 {
    (batch_means_variance(xs, DEFAULT_BATCHES) / xs.len() as f64).sqrt()
}
