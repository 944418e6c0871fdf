//! Gaussian kernel density estimation.

use alloc::vec::Vec;

// Unused when std is linked (its inherent float methods take precedence).
#[allow(unused_imports)]
use num_traits::Float;

use super::ess::variance;
use crate::math::norm_pdf;

/// Smallest bandwidth used, so a constant sample still yields a density.
pub const BANDWIDTH_FLOOR: f64 = 1e-8;

fn quantile_sorted(v: &[f64], p: f64) -> f64 {
    let h = (v.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Silverman's rule `0.9 min(sd, IQR / 1.34) N^(-1/5)`, floored.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    assert!(samples.len() >= 2, "bandwidth needs at least two samples");
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let sd = variance(samples).max(0.0).sqrt();
    let iqr = quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    (0.9 * spread * (samples.len() as f64).powf(-0.2)).max(BANDWIDTH_FLOOR)
}

/// Density estimate at each grid point. Uses Silverman's bandwidth when
/// `bandwidth` is `None`.
pub fn kde(samples: &[f64], grid: &[f64], bandwidth: Option<f64>) -> Vec<f64> {
    let h = bandwidth.unwrap_or_else(|| silverman_bandwidth(samples)).max(BANDWIDTH_FLOOR);
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let norm = 1.0 / (v.len() as f64 * h);
    // kernels beyond 8 bandwidths contribute below 1e-14 relative
    let reach = 8.0 * h;
    grid.iter()
        .map(|&x| {
            let lo = v.partition_point(|s| *s < x - reach);
            let hi = v.partition_point(|s| *s <= x + reach);
            norm * v[lo..hi].iter().map(|s| norm_pdf((x - s) / h)).sum::<f64>()
        })
        .collect()
}

/// `points` evenly spaced values from `lo` to `hi`.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}
