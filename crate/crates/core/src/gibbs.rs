//! Full conditionals and the chain driver.
//!
//! One sweep updates, in this fixed order,
//!
//! 1. the latent factors `F`, row by row from `N_k(V beta' Omega^-1 y_t, V)`
//!    with `V = (I_k + beta' Omega^-1 beta)^-1`;
//! 2. the uniquenesses, `omega_i^2 ~ IG((nu + n)/2, (nu s2 + d_i)/2)` with
//!    `d_i` the residual sum of squares of column `i`;
//! 3. the loading rows. Rows `i <= k` have `i` free entries and a density
//!    proportional to `beta_ii^power N(beta_i; m_i, C_i) 1{beta_ii > 0}`;
//!    they are drawn as `beta_ii` from its marginal followed by the
//!    remaining entries from the Gaussian conditional. Rows `i > k` are
//!    plain `N_k(m_i, C_i)`.
//!
//! `power` is `k - i` under the order-invariant prior and `0` under the
//! standard prior, where the diagonal update is a truncated normal.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;
use core::str::FromStr;

// Unused when std is linked (its inherent float methods take precedence).
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::ars::{sample_diag_conditional, DiagConditional};
use crate::dataset::Dataset;
use crate::dist::inverse_gamma;
use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, cholesky_inverse, cholesky_solve, gaussian_condition, mvn_sample, mvn_sample_precision,
    LowerTriangular, Matrix, SpdMatrix,
};
use crate::priors::{sample_loadings_prior, sample_uniquenesses_prior, ModelDims, PriorSpec, Uniquenesses};
use crate::rng::chain_rng;

/// Ridge, relative to the trace, added on the single retry after a failed
/// Cholesky of a loading-row precision.
pub const JITTER_REL: f64 = 1e-10;

/// Current `(beta, Omega, F)` and the number of sweeps that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub beta: LowerTriangular,
    pub omega2: Uniquenesses,
    pub factors: Matrix,
    pub iteration: u64,
}

impl ChainState {
    pub fn new(beta: LowerTriangular, omega2: Uniquenesses, factors: Matrix) -> Result<Self> {
        if omega2.len() != beta.rows() {
            return Err(Error::DimensionMismatch {
                what: "uniquenesses vs loading rows",
                expected: (beta.rows(), 1),
                got: (omega2.len(), 1),
            });
        }
        if factors.cols() != beta.cols() {
            return Err(Error::DimensionMismatch {
                what: "factor columns vs loading columns",
                expected: (factors.rows(), beta.cols()),
                got: factors.shape(),
            });
        }
        Ok(ChainState {
            beta,
            omega2,
            factors,
            iteration: 0,
        })
    }

    /// Draws `(beta, Omega)` from the prior and `F` from its full conditional.
    pub fn from_prior<R: Rng + ?Sized>(y: &Dataset, prior: &PriorSpec, k: usize, rng: &mut R) -> Result<Self> {
        let dims = ModelDims::new(y.m(), k, y.n().max(1))?;
        let beta = sample_loadings_prior(prior, &dims, rng);
        let omega2 = sample_uniquenesses_prior(prior, &dims, rng);
        let factors = sample_factors(&beta, &omega2, y, rng)?;
        ChainState::new(beta, omega2, factors)
    }

    pub fn m(&self) -> usize {
        self.beta.rows()
    }

    pub fn k(&self) -> usize {
        self.beta.cols()
    }

    pub fn check_against(&self, y: &Dataset) -> Result<()> {
        if self.m() != y.m() || self.factors.rows() != y.n() {
            return Err(Error::DimensionMismatch {
                what: "chain state vs dataset",
                expected: (y.n(), y.m()),
                got: (self.factors.rows(), self.m()),
            });
        }
        Ok(())
    }

    /// Re-validates the identification constraints and positivity.
    pub fn check_invariants(&self) -> Result<()> {
        LowerTriangular::new(self.beta.as_matrix().clone())?;
        Uniquenesses::new(self.omega2.as_slice().to_vec())?;
        Ok(())
    }

    /// `Sigma = Omega + beta beta'`.
    pub fn sigma(&self) -> Matrix {
        let mut s = self.beta.gram();
        for i in 0..self.m() {
            s[(i, i)] += self.omega2.get(i);
        }
        s
    }

    pub fn sigma_diag(&self) -> Vec<f64> {
        (0..self.m())
            .map(|i| self.omega2.get(i) + self.beta.row_head(i).iter().map(|b| b * b).sum::<f64>())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreMode {
    /// `Sigma_ii` for every variable.
    SigmaDiag,
    /// The upper triangle of `Sigma`.
    FullSigma,
    /// The free loadings followed by the uniquenesses.
    BetaOmega,
}

impl StoreMode {
    pub fn name(self) -> &'static str {
        match self {
            StoreMode::SigmaDiag => "sigma-diag",
            StoreMode::FullSigma => "full-sigma",
            StoreMode::BetaOmega => "beta-omega",
        }
    }

    pub fn columns(self, m: usize, k: usize) -> Vec<String> {
        match self {
            StoreMode::SigmaDiag => (1..=m).map(|i| format!("sigma_{i}_{i}")).collect(),
            StoreMode::FullSigma => (1..=m)
                .flat_map(|i| (i..=m).map(move |j| format!("sigma_{i}_{j}")))
                .collect(),
            StoreMode::BetaOmega => {
                let mut cols: Vec<String> = (1..=m)
                    .flat_map(|i| (1..=i.min(k)).map(move |j| format!("beta_{i}_{j}")))
                    .collect();
                cols.extend((1..=m).map(|i| format!("omega2_{i}")));
                cols
            }
        }
    }

    fn record(self, state: &ChainState, out: &mut Vec<f64>) {
        match self {
            StoreMode::SigmaDiag => out.extend(state.sigma_diag()),
            StoreMode::FullSigma => {
                let s = state.sigma();
                for i in 0..state.m() {
                    out.extend_from_slice(&s.row(i)[i..]);
                }
            }
            StoreMode::BetaOmega => {
                for i in 0..state.m() {
                    out.extend_from_slice(state.beta.row_head(i));
                }
                out.extend_from_slice(state.omega2.as_slice());
            }
        }
    }
}

impl fmt::Display for StoreMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StoreMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigma-diag" => Ok(StoreMode::SigmaDiag),
            "full-sigma" => Ok(StoreMode::FullSigma),
            "beta-omega" => Ok(StoreMode::BetaOmega),
            other => Err(Error::InvalidConfig(format!("unknown store mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsConfig {
    pub prior: PriorSpec,
    pub burn_in: u64,
    pub iterations: u64,
    pub thin: u64,
    pub seed: u64,
    /// Selects the random stream: chains with the same seed and different
    /// indices are independent.
    pub chain: u64,
    pub store: StoreMode,
}

impl GibbsConfig {
    pub fn new(prior: PriorSpec, burn_in: u64, iterations: u64, seed: u64) -> Self {
        GibbsConfig {
            prior,
            burn_in,
            iterations,
            thin: 1,
            seed,
            chain: 0,
            store: StoreMode::SigmaDiag,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.prior.validate()?;
        if self.thin < 1 {
            return Err(Error::InvalidConfig("thin must be at least 1".into()));
        }
        if self.iterations < self.thin {
            return Err(Error::InvalidConfig(format!(
                "iterations ({}) must be at least thin ({})",
                self.iterations, self.thin
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChainDiagnostics {
    pub sweeps: u64,
    /// Diagonal loadings drawn through an ARS envelope.
    pub ars_draws: u64,
    pub ars_refinements: u64,
    pub jitter_retries: u64,
    pub warnings: Vec<String>,
}

/// Stored draws, one row per kept iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawStore {
    pub mode: StoreMode,
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub columns: Vec<String>,
    /// Post-burn-in iteration number (1-based) of each stored row.
    pub iterations: Vec<u64>,
    values: Vec<f64>,
    pub diagnostics: ChainDiagnostics,
    /// Set when the chain aborted and the store holds only part of the run.
    pub truncated: bool,
}

impl DrawStore {
    fn new(mode: StoreMode, m: usize, k: usize, n: usize) -> Self {
        DrawStore {
            mode,
            m,
            k,
            n,
            columns: mode.columns(m, k),
            iterations: Vec::new(),
            values: Vec::new(),
            diagnostics: ChainDiagnostics::default(),
            truncated: false,
        }
    }

    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, d: usize) -> &[f64] {
        let w = self.width();
        &self.values[d * w..(d + 1) * w]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        let w = self.width();
        self.values.iter().skip(c).step_by(w).copied().collect()
    }

    pub fn column_by_name(&self, name: &str) -> Option<Vec<f64>> {
        self.columns.iter().position(|c| c == name).map(|c| self.column(c))
    }

    /// Draws of `Sigma_ii` for variable `i` (0-based), in any store mode.
    pub fn sigma_diag_series(&self, i: usize) -> Vec<f64> {
        match self.mode {
            StoreMode::SigmaDiag => self.column(i),
            StoreMode::FullSigma => self
                .column_by_name(&format!("sigma_{0}_{0}", i + 1))
                .expect("full-sigma store has every diagonal column"),
            StoreMode::BetaOmega => {
                let start: usize = (0..i).map(|r| (r + 1).min(self.k)).sum();
                let len = (i + 1).min(self.k);
                let omega_col = self.width() - self.m + i;
                (0..self.len())
                    .map(|d| {
                        let row = self.row(d);
                        row[omega_col] + row[start..start + len].iter().map(|b| b * b).sum::<f64>()
                    })
                    .collect()
            }
        }
    }
}

/// A chain that stopped early. `partial` holds every draw stored before the
/// failure and is marked truncated.
#[derive(Debug, Clone)]
pub struct ChainAborted {
    pub partial: Box<DrawStore>,
    pub error: Error,
}

impl fmt::Display for ChainAborted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "chain aborted after {} stored draws: {}",
            self.partial.len(),
            self.error
        )
    }
}

impl core::error::Error for ChainAborted {}

#[derive(Debug, Default)]
struct SweepStats {
    ars_draws: u64,
    ars_refinements: u64,
    jitter_retries: u64,
}

/// Draws every row of `F` from its full conditional given `(beta, Omega, Y)`.
pub fn sample_factors<R: Rng + ?Sized>(
    beta: &LowerTriangular,
    omega2: &Uniquenesses,
    y: &Dataset,
    rng: &mut R,
) -> Result<Matrix> {
    let (m, k) = (beta.rows(), beta.cols());
    if y.m() != m || omega2.len() != m {
        return Err(Error::DimensionMismatch {
            what: "sample_factors",
            expected: (y.n(), m),
            got: (y.n(), y.m()),
        });
    }
    let b = beta.as_matrix();
    // weighted = Omega^{-1} beta
    let weighted = Matrix::from_fn(m, k, |i, j| b[(i, j)] / omega2.get(i));
    let mut precision = b.t_matmul(&weighted);
    for a in 0..k {
        precision[(a, a)] += 1.0;
    }
    let chol = cholesky(&SpdMatrix::symmetrize(precision))?;
    let rhs = y.matrix().matmul(&weighted); // row t is (beta' Omega^-1 y_t)'
    let mut f = Matrix::zeros(y.n(), k);
    for t in 0..y.n() {
        let mean = cholesky_solve(&chol, rhs.row(t));
        let draw = mvn_sample_precision(&mean, &chol, rng);
        f.row_mut(t).copy_from_slice(&draw);
    }
    Ok(f)
}

/// Draws every `omega_i^2` from its full conditional given `(beta, F, Y)`.
pub fn sample_uniquenesses<R: Rng + ?Sized>(
    beta: &LowerTriangular,
    factors: &Matrix,
    y: &Dataset,
    prior: &PriorSpec,
    rng: &mut R,
) -> Uniquenesses {
    let n = y.n();
    let ym = y.matrix();
    let shape = 0.5 * (prior.nu + n as f64);
    let values = (0..beta.rows())
        .map(|i| {
            let head = beta.row_head(i);
            let d: f64 = (0..n)
                .map(|t| {
                    let fit: f64 = head.iter().zip(factors.row(t)).map(|(b, f)| b * f).sum();
                    let r = ym[(t, i)] - fit;
                    r * r
                })
                .sum();
            inverse_gamma(shape, 0.5 * (prior.nu * prior.s2 + d), rng)
        })
        .collect();
    Uniquenesses::new(values).expect("inverse gamma draws are positive")
}

fn row_precision(ftf: &Matrix, d: usize, omega2_i: f64, c0: f64) -> SpdMatrix {
    SpdMatrix::symmetrize(Matrix::from_fn(d, d, |a, b| {
        ftf[(a, b)] / omega2_i + if a == b { 1.0 / c0 } else { 0.0 }
    }))
}

fn factor_precision(p: &SpdMatrix, stats: &mut SweepStats) -> Result<LowerTriangular> {
    match cholesky(p) {
        Ok(g) => Ok(g),
        Err(Error::NotPositiveDefinite { .. }) => {
            stats.jitter_retries += 1;
            let ridge = JITTER_REL * p.as_matrix().trace().abs().max(f64::MIN_POSITIVE);
            cholesky(&p.add_ridge(ridge))
        }
        Err(e) => Err(e),
    }
}

#[allow(clippy::too_many_arguments)]
fn head_row<R: Rng + ?Sized>(
    i: usize,
    k: usize,
    omega2_i: f64,
    ftf: &Matrix,
    fty_col: &[f64],
    prior: &PriorSpec,
    stats: &mut SweepStats,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let d = i;
    let precision = row_precision(ftf, d, omega2_i, prior.c0);
    let chol = factor_precision(&precision, stats)?;
    let cov = cholesky_inverse(&chol);
    let rhs: Vec<f64> = fty_col[..d].iter().map(|v| v / omega2_i).collect();
    let mean = cholesky_solve(&chol, &rhs);

    let a = mean[d - 1];
    let b = cov.get(d - 1, d - 1).sqrt();
    let power = prior.family.diag_power(i, k);
    let (diag, refinements) = sample_diag_conditional(&DiagConditional::new(a, b, power)?, rng);
    if power > 0 {
        stats.ars_draws += 1;
        stats.ars_refinements += refinements as u64;
    }
    if d == 1 {
        return Ok(vec![diag]);
    }
    let cond = gaussian_condition(&mean, &cov, diag)?;
    let mut row = mvn_sample(&cond.mean, &cond.chol, rng);
    row.push(diag);
    Ok(row)
}

fn tail_row<R: Rng + ?Sized>(
    k: usize,
    omega2_i: f64,
    ftf: &Matrix,
    fty_col: &[f64],
    prior: &PriorSpec,
    stats: &mut SweepStats,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let precision = row_precision(ftf, k, omega2_i, prior.c0);
    let chol = factor_precision(&precision, stats)?;
    let rhs: Vec<f64> = fty_col[..k].iter().map(|v| v / omega2_i).collect();
    let mean = cholesky_solve(&chol, &rhs);
    Ok(mvn_sample_precision(&mean, &chol, rng))
}

fn check_row_inputs(factors: &Matrix, y_col: &[f64], need: usize) -> Result<()> {
    if factors.rows() != y_col.len() || factors.cols() < need {
        return Err(Error::DimensionMismatch {
            what: "loading row inputs",
            expected: (y_col.len(), need),
            got: factors.shape(),
        });
    }
    Ok(())
}

/// Draws `(beta_i1, ..., beta_ii)` for a row `i <= k` (1-based) from its
/// full conditional.
///
/// `beta_ii` comes first, from the marginal proportional to
/// `x^power exp(-(x - a)^2 / (2 b^2))` on `x > 0` with `a = (m_i)_i` and
/// `b^2 = (C_i)_ii`; the rest follow from the Gaussian conditional of
/// `N(m_i, C_i)` given `beta_ii`.
#[allow(clippy::too_many_arguments)]
pub fn sample_loading_row_head<R: Rng + ?Sized>(
    i: usize,
    k: usize,
    omega2_i: f64,
    factors: &Matrix,
    y_col: &[f64],
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(1 <= i && i <= k) {
        return Err(Error::Domain(format!("head rows need 1 <= i <= k, got i={i}, k={k}")));
    }
    check_row_inputs(factors, y_col, i)?;
    let ftf = factors.t_matmul(factors);
    let fty: Vec<f64> = (0..factors.cols())
        .map(|a| (0..y_col.len()).map(|t| factors[(t, a)] * y_col[t]).sum())
        .collect();
    head_row(i, k, omega2_i, &ftf, &fty, prior, &mut SweepStats::default(), rng)
}

/// Draws the `k` loadings of a row `i > k` from `N_k(m_i, C_i)`.
pub fn sample_loading_row_tail<R: Rng + ?Sized>(
    k: usize,
    omega2_i: f64,
    factors: &Matrix,
    y_col: &[f64],
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_row_inputs(factors, y_col, k)?;
    let ftf = factors.t_matmul(factors);
    let fty: Vec<f64> = (0..k)
        .map(|a| (0..y_col.len()).map(|t| factors[(t, a)] * y_col[t]).sum())
        .collect();
    tail_row(k, omega2_i, &ftf, &fty, prior, &mut SweepStats::default(), rng)
}

fn sweep<R: Rng + ?Sized>(
    state: ChainState,
    y: &Dataset,
    prior: &PriorSpec,
    stats: &mut SweepStats,
    rng: &mut R,
) -> Result<ChainState> {
    let (m, k) = (state.m(), state.k());
    let factors = sample_factors(&state.beta, &state.omega2, y, rng)?;
    let omega2 = sample_uniquenesses(&state.beta, &factors, y, prior, rng);

    let ftf = factors.t_matmul(&factors);
    let fty = factors.t_matmul(y.matrix()); // k x m
    let mut beta = Matrix::zeros(m, k);
    let mut col = vec![0.0; k];
    for i in 0..m {
        for (a, c) in col.iter_mut().enumerate() {
            *c = fty[(a, i)];
        }
        let row = if i < k {
            head_row(i + 1, k, omega2.get(i), &ftf, &col, prior, stats, rng)?
        } else {
            tail_row(k, omega2.get(i), &ftf, &col, prior, stats, rng)?
        };
        beta.row_mut(i)[..row.len()].copy_from_slice(&row);
    }
    let next = ChainState {
        beta: LowerTriangular::new(beta)?,
        omega2,
        factors,
        iteration: state.iteration + 1,
    };
    debug_assert!(next.check_invariants().is_ok());
    Ok(next)
}

/// One full scan `F -> Omega -> beta rows 1..m`.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    state: ChainState,
    y: &Dataset,
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<ChainState> {
    state.check_against(y)?;
    sweep(state, y, prior, &mut SweepStats::default(), rng)
}

/// Runs `burn_in` discarded sweeps, then `iterations` sweeps keeping every
/// `thin`-th state.
pub fn run_chain(y: &Dataset, config: &GibbsConfig, init: ChainState) -> core::result::Result<DrawStore, ChainAborted> {
    let mut store = DrawStore::new(config.store, init.m(), init.k(), y.n());
    let abort = |mut partial: DrawStore, error: Error| {
        partial.truncated = true;
        ChainAborted { partial: Box::new(partial), error }
    };
    if let Err(e) = config.validate().and_then(|_| init.check_against(y)) {
        return Err(abort(store, e));
    }
    if y.n() < init.k() {
        store.diagnostics.warnings.push(format!(
            "fewer observations (n={}) than factors (k={}); the posterior is carried by the prior",
            y.n(),
            init.k()
        ));
    }
    let mut rng = chain_rng(config.seed, config.chain);
    let mut stats = SweepStats::default();
    let mut state = init;
    let total = config.burn_in + config.iterations;
    for s in 1..=total {
        state = match sweep(state, y, &config.prior, &mut stats, &mut rng) {
            Ok(next) => next,
            Err(e) => {
                store.diagnostics.sweeps = s - 1;
                fill_stats(&mut store, &stats);
                return Err(abort(store, e));
            }
        };
        if s > config.burn_in {
            let it = s - config.burn_in;
            if it.is_multiple_of(config.thin) {
                store.iterations.push(it);
                config.store.record(&state, &mut store.values);
            }
        }
    }
    store.diagnostics.sweeps = total;
    fill_stats(&mut store, &stats);
    Ok(store)
}

fn fill_stats(store: &mut DrawStore, stats: &SweepStats) {
    store.diagnostics.ars_draws = stats.ars_draws;
    store.diagnostics.ars_refinements = stats.ars_refinements;
    store.diagnostics.jitter_retries = stats.jitter_retries;
}

impl fmt::Display for GibbsConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "prior={} c0={} nu={} s2={} burn_in={} iterations={} thin={} seed={} chain={} store={}",
            self.prior.family,
            self.prior.c0,
            self.prior.nu,
            self.prior.s2,
            self.burn_in,
            self.iterations,
            self.thin,
            self.seed,
            self.chain,
            self.store
        )
    }
}

impl ChainDiagnostics {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "sweeps={} ars_draws={} ars_refinements={} jitter_retries={}",
            self.sweeps, self.ars_draws, self.ars_refinements, self.jitter_retries
        );
        for w in &self.warnings {
            s.push_str("; warning: ");
            s.push_str(w);
        }
        s
    }
}
