//! Maximum-likelihood starting values for the sampler.
//!
//! The factor model `Sigma = Psi + beta beta'` is fitted to `S = Y'Y / n` by
//! EM, started from a principal-axis estimate. If EM does not converge or an
//! estimated uniqueness collapses, the principal-axis estimate is used.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::f64::consts::PI;

// Unused when std is linked (its inherent float methods take precedence).
#[allow(unused_imports)]
use num_traits::Float;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gibbs::ChainState;
use crate::linalg::{cholesky, cholesky_inverse, cholesky_solve, lq_decompose, symmetric_eigen, Matrix, SpdMatrix};
use crate::priors::Uniquenesses;

pub const EM_MAX_ITER: usize = 500;
pub const EM_REL_TOL: f64 = 1e-8;
/// Uniquenesses below this signal a Heywood case.
pub const HEYWOOD_FLOOR: f64 = 1e-6;
/// Floor applied to principal-axis uniquenesses.
pub const PRINCIPAL_AXIS_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MleMethod {
    Em,
    PrincipalAxis,
}

impl MleMethod {
    pub fn name(self) -> &'static str {
        match self {
            MleMethod::Em => "em",
            MleMethod::PrincipalAxis => "principal-axis",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleFit {
    /// Unrotated `m x k` loadings.
    pub loadings: Matrix,
    pub uniquenesses: Vec<f64>,
    pub method: MleMethod,
    pub iterations: usize,
    /// Log-likelihood at the start and after every EM iteration.
    pub loglik_trace: Vec<f64>,
    pub fallback_reason: Option<String>,
}

impl MleFit {
    pub fn sigma(&self) -> Matrix {
        implied_sigma(&self.loadings, &self.uniquenesses)
    }
}

fn implied_sigma(beta: &Matrix, psi: &[f64]) -> Matrix {
    let mut s = beta.matmul_t(beta);
    for (i, p) in psi.iter().enumerate() {
        s[(i, i)] += p;
    }
    s
}

/// Gaussian log-likelihood of `n` centered observations with second-moment
/// matrix `s` under `Sigma = diag(psi) + beta beta'`.
pub fn factor_loglik(s: &Matrix, n: usize, beta: &Matrix, psi: &[f64]) -> Result<f64> {
    let m = s.rows();
    let g = cholesky(&SpdMatrix::symmetrize(implied_sigma(beta, psi)))?;
    let inv = cholesky_inverse(&g);
    let tr: f64 = (0..m)
        .map(|i| (0..m).map(|j| inv.get(i, j) * s[(j, i)]).sum::<f64>())
        .sum();
    Ok(-0.5 * n as f64 * (m as f64 * (2.0 * PI).ln() + 2.0 * g.log_det() + tr))
}

/// Top-`k` eigenvectors of `s`, each scaled by the square root of its
/// eigenvalue in excess of the mean discarded eigenvalue, with uniquenesses
/// from the residual diagonal.
pub fn principal_axis(s: &Matrix, k: usize) -> (Matrix, Vec<f64>) {
    let m = s.rows();
    let (values, vectors) = symmetric_eigen(&SpdMatrix::symmetrize(s.clone()));
    let noise = if k < m {
        values[k..].iter().sum::<f64>() / (m - k) as f64
    } else {
        0.0
    };
    let floor = 1e-6 * values[0].abs().max(f64::MIN_POSITIVE);
    let scales: Vec<f64> = values[..k].iter().map(|l| (l - noise).max(floor).sqrt()).collect();
    let beta = Matrix::from_fn(m, k, |i, a| vectors[(i, a)] * scales[a]);
    let psi = (0..m)
        .map(|i| {
            let common: f64 = beta.row(i).iter().map(|b| b * b).sum();
            (s[(i, i)] - common).max(PRINCIPAL_AXIS_FLOOR)
        })
        .collect();
    (beta, psi)
}

fn em_step(s: &Matrix, beta: &Matrix, psi: &[f64]) -> Result<(Matrix, Vec<f64>)> {
    let (m, k) = beta.shape();
    let weighted = Matrix::from_fn(m, k, |i, a| beta[(i, a)] / psi[i]);
    let mut prec = beta.t_matmul(&weighted);
    for a in 0..k {
        prec[(a, a)] += 1.0;
    }
    let g = cholesky_inverse(&cholesky(&SpdMatrix::symmetrize(prec))?);
    // delta = G beta' Psi^-1, the regression of factors on observations
    let delta = g.as_matrix().matmul_t(&weighted);
    let s_delta_t = s.matmul_t(&delta);
    let eff = g.as_matrix().add(&delta.matmul(&s_delta_t));
    let eff_chol = cholesky(&SpdMatrix::symmetrize(eff))?;
    let mut next = Matrix::zeros(m, k);
    for i in 0..m {
        let row = cholesky_solve(&eff_chol, s_delta_t.row(i));
        next.row_mut(i).copy_from_slice(&row);
    }
    let next_psi = (0..m)
        .map(|i| s[(i, i)] - next.row(i).iter().zip(s_delta_t.row(i)).map(|(b, c)| b * c).sum::<f64>())
        .collect();
    Ok((next, next_psi))
}

/// Fits the `k`-factor model to `y` by EM, falling back to the principal-axis
/// estimate on non-convergence or a Heywood case.
pub fn fit_factor_mle(y: &Dataset, k: usize) -> Result<MleFit> {
    let m = y.m();
    if k == 0 || k >= m {
        return Err(Error::InvalidConfig(format!(
            "maximum likelihood start needs 1 <= k < m, got k={k}, m={m}"
        )));
    }
    if y.n() == 0 {
        return Err(Error::InvalidConfig("maximum likelihood start needs observations".into()));
    }
    let s = y.second_moment();
    let n = y.n();
    let (pa_beta, pa_psi) = principal_axis(&s, k);
    let fallback = |reason: String, iterations: usize, trace: Vec<f64>| MleFit {
        loadings: pa_beta.clone(),
        uniquenesses: pa_psi.clone(),
        method: MleMethod::PrincipalAxis,
        iterations,
        loglik_trace: trace,
        fallback_reason: Some(reason),
    };

    let mut beta = pa_beta.clone();
    let mut psi = pa_psi.clone();
    let mut prev = factor_loglik(&s, n, &beta, &psi)?;
    let mut trace = vec![prev];
    for it in 1..=EM_MAX_ITER {
        let (nb, np) = match em_step(&s, &beta, &psi) {
            Ok(v) => v,
            Err(e) => return Ok(fallback(format!("EM step failed: {e}"), it, trace)),
        };
        if let Some((i, p)) = np.iter().enumerate().find(|(_, p)| !(**p >= HEYWOOD_FLOOR)) {
            return Ok(fallback(
                format!("Heywood case: uniqueness {} reached {p:e} at EM iteration {it}", i + 1),
                it,
                trace,
            ));
        }
        let ll = match factor_loglik(&s, n, &nb, &np) {
            Ok(v) => v,
            Err(e) => return Ok(fallback(format!("EM likelihood failed: {e}"), it, trace)),
        };
        debug_assert!(ll >= prev - 1e-9 * prev.abs().max(1.0), "EM decreased the likelihood");
        trace.push(ll);
        beta = nb;
        psi = np;
        if (ll - prev).abs() <= EM_REL_TOL * ll.abs() {
            return Ok(MleFit {
                loadings: beta,
                uniquenesses: psi,
                method: MleMethod::Em,
                iterations: it,
                loglik_trace: trace,
                fallback_reason: None,
            });
        }
        prev = ll;
    }
    let err = Error::NonConvergence { iterations: EM_MAX_ITER };
    Ok(fallback(format!("{err}"), EM_MAX_ITER, trace))
}

/// Chain state at a fitted `(beta, Psi)`: loadings rotated to lower
/// triangular form, factors at their conditional posterior mean.
pub fn state_from_fit(y: &Dataset, fit: &MleFit) -> Result<ChainState> {
    let (beta, _) = lq_decompose(&fit.loadings)?;
    let omega2 = Uniquenesses::new(fit.uniquenesses.clone())?;
    let (m, k) = (beta.rows(), beta.cols());
    let b = beta.as_matrix();
    let weighted = Matrix::from_fn(m, k, |i, a| b[(i, a)] / omega2.get(i));
    let mut prec = b.t_matmul(&weighted);
    for a in 0..k {
        prec[(a, a)] += 1.0;
    }
    let chol = cholesky(&SpdMatrix::symmetrize(prec))?;
    let rhs = y.matrix().matmul(&weighted);
    let mut factors = Matrix::zeros(y.n(), k);
    for t in 0..y.n() {
        let mean = cholesky_solve(&chol, rhs.row(t));
        factors.row_mut(t).copy_from_slice(&mean);
    }
    ChainState::new(beta, omega2, factors)
}

/// Maximum-likelihood starting state for a `k`-factor chain on `y`.
pub fn mle_init(y: &Dataset, k: usize) -> Result<ChainState> {
    state_from_fit(y, &fit_factor_mle(y, k)?)
}
