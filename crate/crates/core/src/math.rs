//! Scalar special functions used by the samplers.

use core::f64::consts::{FRAC_1_SQRT_2, PI};
// Unused when std is linked (its inherent float methods take precedence).
#[allow(unused_imports)]
use num_traits::Float;

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal upper-tail probability `1 - norm_cdf(x)`, accurate in the tail.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Inverse of the standard normal CDF for `p` in `(0, 1)`.
///
/// Acklam's rational approximation followed by one Halley step against
/// `erfc`, which brings the relative error to roughly machine precision
/// including deep in the lower tail.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let tail = |q: f64| {
        let r = (-2.0 * q.ln()).sqrt();
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    };
    let mut x = if p < P_LOW {
        tail(p)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail(1.0 - p)
    };

    // Halley refinement. Work in the tail that keeps `e` relative.
    if x.is_finite() {
        let e = if x <= 0.0 {
            norm_cdf(x) - p
        } else {
            (1.0 - p) - norm_sf(x)
        };
        let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Inverse of the upper-tail probability: returns `z` with `norm_sf(z) = q`.
pub fn norm_isf(q: f64) -> f64 {
    -norm_quantile(q)
}

/// `ln(sum(exp(xs)))` without overflow.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `ln(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(integral_0^width exp(slope * t) dt)`, with `width` possibly infinite
/// when `slope < 0`.
pub fn log_integral_exp(slope: f64, width: f64) -> f64 {
    if width <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if width.is_infinite() {
        debug_assert!(slope < 0.0);
        return -(-slope).ln();
    }
    let sw = slope * width;
    if sw.abs() < 1e-10 {
        // Taylor: w (1 + sw/2)
        return width.ln() + 0.5 * sw;
    }
    if slope > 0.0 {
        sw + (-(-sw).exp_m1()).ln() - slope.ln()
    } else {
        (-sw.exp_m1()).ln() - (-slope).ln()
    }
}

/// Inverse CDF of the density proportional to `exp(slope * t)` on `[0, width]`.
pub fn sample_truncated_exp(slope: f64, width: f64, u: f64) -> f64 {
    if width.is_infinite() {
        return -(-u).ln_1p() / (-slope);
    }
    let sw = slope * width;
    if sw.abs() < 1e-10 {
        return u * width;
    }
    if slope > 0.0 {
        let t = width + (u + (1.0 - u) * (-sw).exp()).ln() / slope;
        t.clamp(0.0, width)
    } else {
        let t = (u * sw.exp_m1()).ln_1p() / slope;
        t.clamp(0.0, width)
    }
}
