//! Kolmogorov-Smirnov distances.

use alloc::vec::Vec;

// Unused when std is linked (its inherent float methods take precedence).
#[allow(unused_imports)]
use num_traits::Float;

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Sup-distance between the empirical CDFs of `a` and `b`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "KS needs non-empty samples");
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Sup-distance between the empirical CDF of `xs` and `cdf`.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!xs.is_empty(), "KS needs a non-empty sample");
    let v = sorted(xs);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Asymptotic coefficient `c(alpha) = sqrt(-ln(alpha / 2) / 2)`; about 1.628
/// at `alpha = 0.01`.
pub fn ks_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Two-sample critical value at level `alpha` for (effective) sizes `na`, `nb`.
pub fn ks_critical_value(alpha: f64, na: f64, nb: f64) -> f64 {
    ks_coefficient(alpha) * ((na + nb) / (na * nb)).sqrt()
}

/// One-sample critical value at level `alpha` for (effective) size `n`.
pub fn ks_critical_value_one_sample(alpha: f64, n: f64) -> f64 {
    ks_coefficient(alpha) / n.sqrt()
}
