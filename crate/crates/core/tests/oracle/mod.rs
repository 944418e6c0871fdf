//! Reference computations that share no code with the sampler.
#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 50)
}

/// Mean and variance of the density proportional to `x^(alpha-1) exp(-(x-gamma)^2)`
/// on `x > 0`, by quadrature.
pub fn family_moments(alpha: f64, gamma: f64) -> (f64, f64) {
    // log density at its maximum, to keep the integrand near 1
    let mode = if alpha > 1.0 {
        0.5 * (gamma + (gamma * gamma + 2.0 * (alpha - 1.0)).sqrt())
    } else {
        gamma.max(0.0)
    };
    let logf = |x: f64| (alpha - 1.0) * x.ln() - (x - gamma) * (x - gamma);
    let peak = if mode > 0.0 { logf(mode) } else { -(gamma * gamma) };
    let dens = move |x: f64| if x <= 0.0 { if alpha == 1.0 { (-(gamma * gamma) - peak).exp() } else { 0.0 } } else { (logf(x) - peak).exp() };
    let upper = mode.max(gamma).max(0.0) + 12.0;
    let pieces = [0.0, 0.25 * upper, 0.5 * upper, upper];
    let integrate = |g: &dyn Fn(f64) -> f64| {
        pieces
            .windows(2)
            .map(|w| adaptive_simpson(g, w[0], w[1], 1e-13))
            .sum::<f64>()
    };
    let z = integrate(&dens);
    let m1 = integrate(&|x| x * dens(x)) / z;
    let m2 = integrate(&|x| x * x * dens(x)) / z;
    (m1, m2 - m1 * m1)
}

/// Standard normal CDF by quadrature of the density.
pub fn phi(x: f64) -> f64 {
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let half = adaptive_simpson(&pdf, 0.0, x.abs().min(40.0), 1e-14);
    if x >= 0.0 { 0.5 + half } else { 0.5 - half }
}

/// A CDF tabulated from an unnormalized density on an increasing grid,
/// by the trapezoid rule and linear interpolation.
pub struct GridCdf {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl GridCdf {
    pub fn new(grid: Vec<f64>, density: &[f64]) -> Self {
        let mut cdf = vec![0.0; grid.len()];
        for i in 1..grid.len() {
            cdf[i] = cdf[i - 1] + 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
        }
        let total = *cdf.last().unwrap();
        for c in &mut cdf {
            *c /= total;
        }
        GridCdf { grid, cdf }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.grid[0] {
            return 0.0;
        }
        if x >= *self.grid.last().unwrap() {
            return 1.0;
        }
        let j = self.grid.partition_point(|g| *g <= x);
        let (x0, x1) = (self.grid[j - 1], self.grid[j]);
        let t = (x - x0) / (x1 - x0);
        self.cdf[j - 1] + t * (self.cdf[j] - self.cdf[j - 1])
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Solves the small symmetric positive definite system `a x = b` by
/// Gaussian elimination without pivoting.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for p in 0..n {
        for r in p + 1..n {
            let f = m[r][p] / m[p][p];
            for c in p..n {
                m[r][c] -= f * m[p][c];
            }
            x[r] -= f * x[p];
        }
    }
    for p in (0..n).rev() {
        let s: f64 = (p + 1..n).map(|c| m[p][c] * x[c]).sum();
        x[p] = (x[p] - s) / m[p][p];
    }
    x
}

pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| solve(a, &(0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect::<Vec<_>>()))
        .collect();
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

/// Mean and covariance of the Gaussian factor of a loading-row conditional:
/// precision `I/c0 + F'F/w`, linear term `F'y/w`, over the first `d` factors.
pub fn row_gaussian(f: &[Vec<f64>], y: &[f64], d: usize, w: f64, c0: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let prec: Vec<Vec<f64>> = (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    f.iter().map(|r| r[a] * r[b]).sum::<f64>() / w + if a == b { 1.0 / c0 } else { 0.0 }
                })
                .collect()
        })
        .collect();
    let lin: Vec<f64> = (0..d).map(|a| f.iter().zip(y).map(|(r, v)| r[a] * v).sum::<f64>() / w).collect();
    let cov = invert(&prec);
    let mean = solve(&prec, &lin);
    (mean, cov)
}

pub fn sample_mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_var(xs: &[f64]) -> f64 {
    let m = sample_mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Brute-force posterior means of `(beta11, beta21, omega1^2, omega2^2)` for
/// a one-factor model of two variables, with the factors integrated out.
///
/// `s` is the 2x2 second-moment matrix of `n` observations. The prior is
/// `beta11 ~ N+(0, c0)`, `beta21 ~ N(0, c0)`, `omega_i^2 ~ IG(nu/2, nu s2/2)`.
/// The grid runs over `(beta11, beta21, ln omega1^2, ln omega2^2)`; a coarse
/// pass locates the posterior mass and a fine pass integrates it.
pub fn tiny_posterior_means(s: [[f64; 2]; 2], n: usize, c0: f64, nu: f64, s2: f64, fine: usize) -> [f64; 4] {
    let a = 0.5 * nu;
    let rate = 0.5 * nu * s2;
    let nf = n as f64;
    let logpost = |b1: f64, b2: f64, u1: f64, u2: f64| {
        let (w1, w2) = (u1.exp(), u2.exp());
        let s11 = b1 * b1 + w1;
        let s22 = b2 * b2 + w2;
        let s12 = b1 * b2;
        let det = s11 * s22 - s12 * s12;
        let tr = (s22 * s[0][0] - 2.0 * s12 * s[0][1] + s11 * s[1][1]) / det;
        -0.5 * nf * (det.ln() + tr) - (b1 * b1 + b2 * b2) / (2.0 * c0) - a * (u1 + u2) - rate * ((-u1).exp() + (-u2).exp())
    };

    let mut lo = [1e-9, -6.0, -14.0, -14.0];
    let mut hi = [6.0, 6.0, 5.0, 5.0];
    for pass in 0..2 {
        let g = if pass == 0 { 48 } else { 64 };
        let axes: Vec<Vec<f64>> = (0..4)
            .map(|d| (0..g).map(|i| lo[d] + (hi[d] - lo[d]) * (i as f64 + 0.5) / g as f64).collect())
            .collect();
        let mut peak = f64::NEG_INFINITY;
        let mut vals = vec![0.0; g * g * g * g];
        for (i0, &b1) in axes[0].iter().enumerate() {
            for (i1, &b2) in axes[1].iter().enumerate() {
                for (i2, &u1) in axes[2].iter().enumerate() {
                    for (i3, &u2) in axes[3].iter().enumerate() {
                        let v = logpost(b1, b2, u1, u2);
                        vals[((i0 * g + i1) * g + i2) * g + i3] = v;
                        peak = peak.max(v);
                    }
                }
            }
        }
        let mut nlo = [f64::INFINITY; 4];
        let mut nhi = [f64::NEG_INFINITY; 4];
        for i0 in 0..g {
            for i1 in 0..g {
                for i2 in 0..g {
                    for i3 in 0..g {
                        if vals[((i0 * g + i1) * g + i2) * g + i3] > peak - 30.0 {
                            for (d, i) in [i0, i1, i2, i3].into_iter().enumerate() {
                                let w = (hi[d] - lo[d]) / g as f64;
                                nlo[d] = nlo[d].min(axes[d][i] - 1.5 * w);
                                nhi[d] = nhi[d].max(axes[d][i] + 1.5 * w);
                            }
                        }
                    }
                }
            }
        }
        nlo[0] = nlo[0].max(1e-9);
        lo = nlo;
        hi = nhi;
    }

    let g = fine;
    let axes: Vec<Vec<f64>> = (0..4)
        .map(|d| (0..g).map(|i| lo[d] + (hi[d] - lo[d]) * (i as f64 + 0.5) / g as f64).collect())
        .collect();
    let peak = {
        let mut p = f64::NEG_INFINITY;
        for &b1 in &axes[0] {
            for &b2 in &axes[1] {
                for &u1 in &axes[2] {
                    for &u2 in &axes[3] {
                        p = p.max(logpost(b1, b2, u1, u2));
                    }
                }
            }
        }
        p
    };
    let mut z = 0.0;
    let mut acc = [0.0; 4];
    for &b1 in &axes[0] {
        for &b2 in &axes[1] {
            for &u1 in &axes[2] {
                for &u2 in &axes[3] {
                    let w = (logpost(b1, b2, u1, u2) - peak).exp();
                    z += w;
                    acc[0] += w * b1;
                    acc[1] += w * b2;
                    acc[2] += w * u1.exp();
                    acc[3] += w * u2.exp();
                }
            }
        }
    }
    acc.map(|v| v / z)
}
