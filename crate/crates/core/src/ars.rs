//! Adaptive rejection sampling for the family
//!
//! ```text
//! f(x | alpha, gamma) ∝ x^(alpha - 1) exp(-(x - gamma)^2),   x > 0,
//! ```
//!
//! which is log-concave for `alpha >= 1`. This is the law of a diagonal
//! loading under the order-invariant prior after an affine rescaling (see
//! [`reduce_to_family`]).
//!
//! The envelope is the tangent construction of Gilks and Wild: an upper
//! hull made of tangents to `h = ln f` at the abscissae, and a lower
//! squeeze made of chords between neighbouring abscissae. Whenever a
//! candidate falls outside the squeeze, `h` is evaluated there and the
//! point joins the abscissae, tightening the hull. Segment masses are kept
//! in log space so that large `|gamma|` cannot overflow.

use alloc::format;
use alloc::vec::Vec;

// Unused when std is linked (its inherent float methods take precedence).
#[allow(unused_imports)]
use num_traits::Float;
use rand::distr::Open01;
use rand::Rng;

use crate::dist::positive_normal;
use crate::error::{Error, Result};
use crate::math::{log_integral_exp, log_sum_exp, sample_truncated_exp};

/// Refinement stops once the envelope holds this many abscissae. Sampling
/// stays exact beyond the cap; only the hull stops tightening.
pub const MAX_ABSCISSAE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyParams {
    alpha: f64,
    gamma: f64,
}

impl FamilyParams {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be >= 1, got {alpha}")));
        }
        if !gamma.is_finite() {
            return Err(Error::Domain(format!("gamma must be finite, got {gamma}")));
        }
        Ok(FamilyParams { alpha, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The maximiser of `f`: the positive root of `(alpha-1)/x = 2(x-gamma)`,
    /// or `max(gamma, 0)` when `alpha = 1`.
    pub fn mode(&self) -> f64 {
        let c = self.alpha - 1.0;
        let g = self.gamma;
        if c == 0.0 {
            return g.max(0.0);
        }
        let s = (g * g + 2.0 * c).sqrt();
        // two algebraically equal forms; pick the one without cancellation
        if g >= 0.0 {
            0.5 * (g + s)
        } else {
            c / (s - g)
        }
    }

    #[inline]
    fn eval(&self, x: f64) -> (f64, f64) {
        let c = self.alpha - 1.0;
        let r = x - self.gamma;
        if c == 0.0 {
            (-r * r, -2.0 * r)
        } else {
            (c * x.ln() - r * r, c / x - 2.0 * r)
        }
    }
}

/// Unnormalized log density `(alpha-1) ln x - (x-gamma)^2` and its derivative.
pub fn log_f(x: f64, p: &FamilyParams) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_f needs x > 0, got {x}")));
    }
    Ok(p.eval(x))
}

/// Starting abscissae for a family.
///
/// For `alpha > 1` the points `{x*/2, x*, 2 x*}` around the mode `x*`. For
/// `alpha = 1` the mode may sit on the boundary, so the points are placed on
/// the decreasing side at the scale of the density.
pub fn default_abscissae(p: &FamilyParams) -> Vec<f64> {
    if p.alpha > 1.0 {
        let m = p.mode();
        alloc::vec![0.5 * m, m, 2.0 * m]
    } else if p.gamma > 0.0 {
        alloc::vec![0.5 * p.gamma, p.gamma, p.gamma + 1.0]
    } else {
        let t = 1.0 / (1.0 - 2.0 * p.gamma);
        alloc::vec![0.5 * t, t, 2.0 * t]
    }
}

/// Piecewise-exponential upper hull and chord squeeze for one family member.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    params: FamilyParams,
    xs: Vec<f64>,
    hs: Vec<f64>,
    dhs: Vec<f64>,
    /// Segment `j` spans `[bounds[j], bounds[j+1]]`; `bounds[0] = 0`, last is `inf`.
    bounds: Vec<f64>,
    log_mass: Vec<f64>,
    cum: Vec<f64>,
    log_total: f64,
    refinements: usize,
    evaluations: usize,
}

/// Builds the envelope from at least two positive starting abscissae.
///
/// The derivative of `ln f` at the largest abscissa must be negative,
/// otherwise the hull has infinite mass on the right tail. The left end is
/// the boundary at zero, so it needs no such condition.
pub fn build_envelope(p: FamilyParams, init_abscissae: &[f64]) -> Result<Envelope> {
    if init_abscissae.len() < 2 {
        return Err(Error::InvalidInitialPoints(format!(
            "need at least 2 abscissae, got {}",
            init_abscissae.len()
        )));
    }
    let mut xs: Vec<f64> = init_abscissae.to_vec();
    if let Some(bad) = xs.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidInitialPoints(format!("abscissa {bad} is not in (0, inf)")));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let (hs, dhs): (Vec<f64>, Vec<f64>) = xs.iter().map(|&x| p.eval(x)).unzip();
    let mut env = Envelope {
        params: p,
        evaluations: xs.len(),
        xs,
        hs,
        dhs,
        bounds: Vec::new(),
        log_mass: Vec::new(),
        cum: Vec::new(),
        log_total: 0.0,
        refinements: 0,
    };
    env.rebuild()?;
    Ok(env)
}

impl Envelope {
    fn rebuild(&mut self) -> Result<()> {
        let n = self.xs.len();
        let last = self.dhs[n - 1];
        if !(last < 0.0) {
            return Err(Error::InvalidInitialPoints(format!(
                "derivative {last} at the largest abscissa {} leaves the right tail unbounded",
                self.xs[n - 1]
            )));
        }
        debug_assert!(
            self.dhs.windows(2).all(|w| w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0)),
            "log-density derivatives must be non-increasing"
        );
        self.bounds.clear();
        self.bounds.push(0.0);
        for j in 0..n - 1 {
            self.bounds.push(self.intersection(j));
        }
        self.bounds.push(f64::INFINITY);

        self.log_mass.clear();
        for j in 0..n {
            let lo = self.bounds[j];
            let hi = self.bounds[j + 1];
            let at_lo = self.hs[j] + self.dhs[j] * (lo - self.xs[j]);
            self.log_mass.push(at_lo + log_integral_exp(self.dhs[j], hi - lo));
        }
        self.log_total = log_sum_exp(&self.log_mass);
        if !self.log_total.is_finite() {
            return Err(Error::InvalidInitialPoints(format!(
                "hull mass is not finite (log mass {})",
                self.log_total
            )));
        }
        self.cum.clear();
        let mut acc = 0.0;
        for lm in &self.log_mass {
            acc += (lm - self.log_total).exp();
            self.cum.push(acc);
        }
        Ok(())
    }

    /// Where the tangents at abscissae `j` and `j+1` cross.
    fn intersection(&self, j: usize) -> f64 {
        let (x0, h0, d0) = (self.xs[j], self.hs[j], self.dhs[j]);
        let (x1, h1, d1) = (self.xs[j + 1], self.hs[j + 1], self.dhs[j + 1]);
        let dd = d0 - d1;
        let z = if dd <= 1e-12 * (d0.abs() + d1.abs()) {
            // (nearly) parallel tangents: the two lines almost coincide
            0.5 * (x0 + x1)
        } else {
            (h1 - h0 - x1 * d1 + x0 * d0) / dd
        };
        z.clamp(x0, x1)
    }

    pub fn params(&self) -> &FamilyParams {
        &self.params
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.xs
    }

    /// Log of the total mass under the upper hull.
    pub fn log_hull_mass(&self) -> f64 {
        self.log_total
    }

    /// Number of abscissae added by rejection steps so far.
    pub fn refinements(&self) -> usize {
        self.refinements
    }

    /// Number of log-density evaluations, including the starting abscissae.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    fn segment(&self, x: f64) -> usize {
        let j = self.bounds.partition_point(|&b| b <= x);
        j.saturating_sub(1).min(self.xs.len() - 1)
    }

    fn hull_in(&self, j: usize, x: f64) -> f64 {
        self.hs[j] + self.dhs[j] * (x - self.xs[j])
    }

    /// Upper hull of `ln f` at `x`.
    pub fn hull(&self, x: f64) -> f64 {
        self.hull_in(self.segment(x), x)
    }

    /// Lower squeeze of `ln f` at `x`; `-inf` outside the abscissae.
    pub fn squeeze(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return f64::NEG_INFINITY;
        }
        let j = self.xs.partition_point(|&a| a <= x).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.xs[j], self.xs[j + 1]);
        let w = (x - x0) / (x1 - x0);
        (1.0 - w) * self.hs[j] + w * self.hs[j + 1]
    }

    fn insert(&mut self, x: f64, h: f64, dh: f64) {
        let pos = self.xs.partition_point(|&a| a < x);
        if self.xs.get(pos) == Some(&x) {
            return;
        }
        self.xs.insert(pos, x);
        self.hs.insert(pos, h);
        self.dhs.insert(pos, dh);
        self.refinements += 1;
        // The largest abscissa only grows, so its derivative stays negative.
        self.rebuild().expect("refined envelope keeps a bounded right tail");
    }

    /// Draws one exact sample from `f`, refining the envelope on every
    /// squeeze miss (until [`MAX_ABSCISSAE`]).
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        loop {
            let u: f64 = rng.random();
            let j = self.cum.partition_point(|&c| c < u).min(self.xs.len() - 1);
            let lo = self.bounds[j];
            let width = self.bounds[j + 1] - lo;
            let x = lo + sample_truncated_exp(self.dhs[j], width, rng.sample(Open01));
            if !(x > 0.0 && x.is_finite()) {
                continue;
            }
            let upper = self.hull_in(j, x);
            let log_v = rng.sample::<f64, _>(Open01).ln();
            if log_v <= self.squeeze(x) - upper {
                return x;
            }
            let (h, dh) = self.params.eval(x);
            self.evaluations += 1;
            if self.xs.len() < MAX_ABSCISSAE {
                self.insert(x, h, dh);
            }
            if log_v <= h - upper {
                return x;
            }
        }
    }
}

/// Draws once from the envelope's family and hands back the refined envelope.
pub fn ars_sample<R: Rng + ?Sized>(mut env: Envelope, rng: &mut R) -> (f64, Envelope) {
    let x = env.sample(rng);
    (x, env)
}

/// The law of a diagonal loading given everything else: density
/// proportional to `x^power exp(-(x - a)^2 / (2 b^2))` on `(0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagConditional {
    pub a: f64,
    pub b: f64,
    pub power: u32,
}

impl DiagConditional {
    pub fn new(a: f64, b: f64, power: u32) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) || !a.is_finite() {
            return Err(Error::Domain(format!("need finite a and b > 0, got a={a}, b={b}")));
        }
        Ok(DiagConditional { a, b, power })
    }
}

/// Maps a diagonal conditional onto the family: with `scale = b sqrt(2)`,
/// `alpha = power + 1` and `gamma = a / scale`, if `u ~ f(. | alpha, gamma)`
/// then `scale * u` has the conditional's density.
///
/// The scale is `b sqrt(2)` rather than `b` because the family's quadratic
/// term `(x - gamma)^2` corresponds to variance 1/2.
pub fn reduce_to_family(d: &DiagConditional) -> (FamilyParams, f64) {
    let scale = d.b * core::f64::consts::SQRT_2;
    let p = FamilyParams {
        alpha: d.power as f64 + 1.0,
        gamma: d.a / scale,
    };
    (p, scale)
}

/// One draw from `f(. | alpha, gamma)` with a fresh envelope. `alpha = 1` is
/// the truncated normal `N(gamma, 1/2)` on `(0, inf)` and is drawn exactly
/// by inverse CDF without building an envelope.
///
/// Returns the draw and the number of envelope refinements it took.
pub fn sample_family<R: Rng + ?Sized>(p: &FamilyParams, rng: &mut R) -> (f64, usize) {
    if p.alpha == 1.0 {
        return (positive_normal(p.gamma, core::f64::consts::FRAC_1_SQRT_2, rng), 0);
    }
    let mut env = build_envelope(*p, &default_abscissae(p))
        .expect("mode-straddling abscissae give a bounded hull");
    let x = env.sample(rng);
    (x, env.refinements())
}

/// One draw from a diagonal conditional, plus the envelope refinements used.
pub fn sample_diag_conditional<R: Rng + ?Sized>(d: &DiagConditional, rng: &mut R) -> (f64, usize) {
    if d.power == 0 {
        return (positive_normal(d.a, d.b, rng), 0);
    }
    let (p, scale) = reduce_to_family(d);
    let (u, refinements) = sample_family(&p, rng);
    (scale * u, refinements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::chain_rng;
    use alloc::vec::Vec;

    fn fp(alpha: f64, gamma: f64) -> FamilyParams {
        FamilyParams::new(alpha, gamma).unwrap()
    }

    #[test]
    fn log_f_direct_substitution() {
        let (v, d) = log_f(1.0, &fp(1.0, 0.0)).unwrap();
        assert_eq!((v, d), (-1.0, -2.0));
        assert!(log_f(0.0, &fp(1.0, 0.0)).is_err());
        assert!(log_f(-1.0, &fp(2.0, 0.0)).is_err());
    }

    #[test]
    fn mode_solves_stationarity() {
        let p = fp(3.0, 2.0);
        let x = p.mode();
        assert!((x - (2.0 + 8f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!((x - 2.414_213_562_373_095).abs() < 1e-12);
        assert!(log_f(x, &p).unwrap().1.abs() < 1e-12);
        // negative gamma uses the cancellation-free form
        let q = fp(4.0, -1e6);
        let y = q.mode();
        assert!(log_f(y, &q).unwrap().1.abs() < 1e-6 * 1e6);
        assert!((y - 3.0 / 2e6).abs() < 1e-15);
    }

    #[test]
    fn log_f_is_concave_on_grid() {
        for &(a, g) in &[(1.0, 0.0), (3.0, 2.0), (6.0, -2.0), (2.0, 3.0)] {
            let p = fp(a, g);
            let hgrid = 1e-3;
            let vals: Vec<f64> = (1..5000).map(|i| log_f(i as f64 * hgrid, &p).unwrap().0).collect();
            for w in vals.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-9);
            }
        }
    }

    #[test]
    fn half_normal_hull_bounds_true_mass() {
        let p = fp(1.0, 0.0);
        let env = build_envelope(p, &default_abscissae(&p)).unwrap();
        let true_mass = core::f64::consts::PI.sqrt() / 2.0;
        assert!(env.log_hull_mass() >= true_mass.ln());
    }

    #[test]
    fn straddling_points_valid_for_alpha_above_one() {
        for a in 2..=6 {
            for &g in &[-2.0, 0.0, 0.5, 3.0, 40.0, -40.0] {
                let p = fp(a as f64, g);
                let pts = default_abscissae(&p);
                let ds: Vec<f64> = pts.iter().map(|&x| log_f(x, &p).unwrap().1).collect();
                assert!(ds[0] > 0.0 && ds[2] < 0.0, "a={a} g={g}: {ds:?}");
                assert!(build_envelope(p, &pts).is_ok());
            }
        }
    }

    #[test]
    fn decreasing_density_gives_finite_hull() {
        let p = fp(1.0, -25.0);
        let env = build_envelope(p, &default_abscissae(&p)).unwrap();
        assert!(env.log_hull_mass().is_finite());
    }

    #[test]
    fn rejects_unbounded_right_tail() {
        let p = fp(3.0, 2.0);
        assert!(matches!(
            build_envelope(p, &[0.5, 1.0]),
            Err(Error::InvalidInitialPoints(_))
        ));
        assert!(build_envelope(p, &[3.0]).is_err());
        assert!(build_envelope(p, &[0.0, 3.0]).is_err());
    }

    #[test]
    fn sandwich_holds_through_refinement() {
        let p = fp(4.0, 1.5);
        let mut env = build_envelope(p, &default_abscissae(&p)).unwrap();
        let mut rng = chain_rng(5, 0);
        let mut last_mass = env.log_hull_mass();
        for _ in 0..200 {
            env.sample(&mut rng);
            assert!(env.log_hull_mass() <= last_mass + 1e-12);
            last_mass = env.log_hull_mass();
            for i in 1..400 {
                let x = i as f64 * 0.01;
                let h = log_f(x, &p).unwrap().0;
                assert!(env.squeeze(x) <= h + 1e-10, "squeeze above at {x}");
                assert!(env.hull(x) >= h - 1e-10, "hull below at {x}");
            }
            for &x in env.abscissae() {
                let h = log_f(x, &p).unwrap().0;
                assert!((env.hull(x) - h).abs() < 1e-9);
                assert!((env.squeeze(x) - h).abs() < 1e-9);
            }
        }
        assert!(env.abscissae().len() <= MAX_ABSCISSAE);
    }

    #[test]
    fn refinement_respects_cap() {
        let p = fp(5.0, 0.5);
        let mut env = build_envelope(p, &default_abscissae(&p)).unwrap();
        let mut rng = chain_rng(6, 0);
        for _ in 0..50_000 {
            env.sample(&mut rng);
        }
        assert!(env.abscissae().len() <= MAX_ABSCISSAE);
    }

    #[test]
    fn deterministic_under_seed() {
        let p = fp(3.0, 0.5);
        let run = || {
            let mut env = build_envelope(p, &default_abscissae(&p)).unwrap();
            let mut rng = chain_rng(77, 0);
            let xs: Vec<f64> = (0..1000).map(|_| env.sample(&mut rng)).collect();
            (xs, env)
        };
        let (a, ea) = run();
        let (b, eb) = run();
        assert_eq!(a, b);
        assert_eq!(ea, eb);
    }

    #[test]
    fn half_normal_mean() {
        let p = fp(1.0, 0.0);
        let mut env = build_envelope(p, &default_abscissae(&p)).unwrap();
        let mut rng = chain_rng(8, 0);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| env.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let expected = 1.0 / core::f64::consts::PI.sqrt();
        assert!((mean - expected).abs() < 3.0 * (var / n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn reduce_examples() {
        let (p, s) = reduce_to_family(&DiagConditional::new(0.0, core::f64::consts::FRAC_1_SQRT_2, 0).unwrap());
        assert_eq!(p.alpha(), 1.0);
        assert_eq!(p.gamma(), 0.0);
        assert!((s - 1.0).abs() < 1e-15);

        let (p, s) = reduce_to_family(&DiagConditional::new(3.0, 1.0, 2).unwrap());
        assert_eq!(p.alpha(), 3.0);
        assert!((p.gamma() - 3.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn reduction_matches_change_of_variables() {
        // ln target(scale u) - ln f(u) must be constant in u.
        let d = DiagConditional::new(-0.7, 0.3, 3).unwrap();
        let (p, scale) = reduce_to_family(&d);
        let target = |x: f64| d.power as f64 * x.ln() - (x - d.a).powi(2) / (2.0 * d.b * d.b);
        let diffs: Vec<f64> = [0.1, 0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&u| target(scale * u) - log_f(u, &p).unwrap().0)
            .collect();
        for w in diffs.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn family_params_validation() {
        assert!(FamilyParams::new(0.5, 0.0).is_err());
        assert!(FamilyParams::new(2.0, f64::NAN).is_err());
        assert!(DiagConditional::new(0.0, 0.0, 1).is_err());
    }
}
