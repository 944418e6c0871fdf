//! Univariate random variates that the samplers share.

// Unused when std is linked (its inherent float methods take precedence).
#[allow(unused_imports)]
use num_traits::Float;
use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::math::{norm_isf, norm_sf};

/// Standardized truncation points beyond this use exponential rejection
/// instead of the inverse CDF, since the tail mass underflows near 37.
const TAIL_SWITCH: f64 = 30.0;

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Draw from `N(mean, sd^2)` conditioned to `(0, inf)`.
///
/// Inverse CDF on the upper tail: with `lo = -mean / sd` the standardized
/// lower bound, `z = sf^{-1}(U sf(lo))`. Working with the survival function
/// keeps full relative precision when the truncation point sits far in the
/// right tail. Past [`TAIL_SWITCH`] standard deviations the survival
/// function underflows, and Robert's exponential-proposal rejection sampler
/// takes over.
pub fn positive_normal<R: Rng + ?Sized>(mean: f64, sd: f64, rng: &mut R) -> f64 {
    debug_assert!(sd > 0.0);
    let lo = -mean / sd;
    let z = if lo < TAIL_SWITCH {
        let u: f64 = rng.sample(Open01);
        let z = norm_isf(u * norm_sf(lo));
        z.max(lo)
    } else {
        tail_rejection(lo, rng)
    };
    let x = mean + sd * z;
    if x > 0.0 {
        x
    } else {
        // only reachable through rounding at the boundary
        f64::MIN_POSITIVE
    }
}

fn tail_rejection<R: Rng + ?Sized>(lo: f64, rng: &mut R) -> f64 {
    let rate = 0.5 * (lo + (lo * lo + 4.0).sqrt());
    loop {
        let e: f64 = Exp1.sample(rng);
        let z = lo + e / rate;
        let u: f64 = rng.sample(Open01);
        if u.ln() <= -0.5 * (z - rate) * (z - rate) {
            return z;
        }
    }
}

/// Draw from the inverse gamma with density proportional to
/// `x^(-shape-1) exp(-rate / x)`, as the reciprocal of a `Gamma(shape, 1/rate)` draw.
pub fn inverse_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0 && rate > 0.0);
    let g = Gamma::new(shape, 1.0 / rate).expect("validated gamma parameters");
    let x: f64 = g.sample(rng);
    1.0 / x
}

/// Draw from the chi-square law with `df` degrees of freedom.
pub fn chi_square<R: Rng + ?Sized>(df: f64, rng: &mut R) -> f64 {
    2.0 * Gamma::new(0.5 * df, 1.0)
        .expect("validated degrees of freedom")
        .sample(rng)
}
