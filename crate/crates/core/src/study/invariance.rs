//! Paired chains on `Y` and on its column permutation `Y^pi`.
//!
//! If the posterior of `Sigma` is invariant under reordering, the draws of
//! `sigma_ii | Y` and `sigma_{pi(i) pi(i)} | Y^pi` share a distribution. Each
//! variable is checked with a two-sample KS test whose critical value uses
//! the effective sample sizes of the two chains.

use alloc::string::String;
use alloc::vec::Vec;

use super::ess::{effective_sample_size, mean};
use super::kde::{kde, linspace, silverman_bandwidth};
use super::ks::{ks_critical_value, ks_two_sample};
use super::mle::{fit_factor_mle, state_from_fit, MleFit};
use super::sim::{permute_columns, Permutation};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gibbs::{run_chain, ChainState, DrawStore, GibbsConfig, StoreMode};

/// Chain index of the arm on `Y`; the arm on `Y^pi` uses the next stream.
pub const ARM_Y_CHAIN: u64 = 0;
pub const ARM_YPI_CHAIN: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceConfig {
    /// Prior, chain lengths and seed shared by both arms. The chain index and
    /// store mode are set per arm.
    pub gibbs: GibbsConfig,
    pub k: usize,
    pub alpha: f64,
    pub kde_points: usize,
}

impl InvarianceConfig {
    pub fn new(gibbs: GibbsConfig, k: usize) -> Self {
        InvarianceConfig {
            gibbs,
            k,
            alpha: 0.01,
            kde_points: 256,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.gibbs.validate()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(alloc::format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if self.kde_points < 2 {
            return Err(Error::InvalidConfig("kde_points must be at least 2".into()));
        }
        Ok(())
    }

    pub fn arm_config(&self, chain: u64) -> GibbsConfig {
        GibbsConfig {
            chain,
            store: StoreMode::SigmaDiag,
            ..self.gibbs
        }
    }
}

/// Everything needed to run the two arms, in either order or concurrently.
#[derive(Debug, Clone)]
pub struct Arms {
    pub y: Dataset,
    pub ypi: Dataset,
    pub fit_y: MleFit,
    pub fit_ypi: MleFit,
    pub init_y: ChainState,
    pub init_ypi: ChainState,
    pub config_y: GibbsConfig,
    pub config_ypi: GibbsConfig,
}

/// Permutes the data and computes maximum-likelihood starting states.
pub fn prepare_arms(y: &Dataset, pi: &Permutation, cfg: &InvarianceConfig) -> Result<Arms> {
    cfg.validate()?;
    let ypi = permute_columns(y, pi)?;
    let fit_y = fit_factor_mle(y, cfg.k)?;
    let fit_ypi = fit_factor_mle(&ypi, cfg.k)?;
    let init_y = state_from_fit(y, &fit_y)?;
    let init_ypi = state_from_fit(&ypi, &fit_ypi)?;
    Ok(Arms {
        y: y.clone(),
        ypi,
        fit_y,
        fit_ypi,
        init_y,
        init_ypi,
        config_y: cfg.arm_config(ARM_Y_CHAIN),
        config_ypi: cfg.arm_config(ARM_YPI_CHAIN),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableCheck {
    /// 1-based index in `Y`.
    pub variable: usize,
    /// 1-based index of the same variable in `Y^pi`.
    pub permuted_variable: usize,
    pub ks: f64,
    pub ess_y: f64,
    pub ess_ypi: f64,
    pub critical_value: f64,
    pub pass: bool,
    pub mean_y: f64,
    pub mean_ypi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdeCurve {
    pub variable: usize,
    pub grid: Vec<f64>,
    pub density_y: Vec<f64>,
    pub density_ypi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub alpha: f64,
    pub draws_y: usize,
    pub draws_ypi: usize,
    pub checks: Vec<VariableCheck>,
    pub curves: Vec<KdeCurve>,
    pub warnings: Vec<String>,
}

impl InvarianceReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<usize> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.variable).collect()
    }
}

/// Per-variable KS checks and KDE curves from the stored draws of both arms.
pub fn compare_arms(
    store_y: &DrawStore,
    store_ypi: &DrawStore,
    pi: &Permutation,
    alpha: f64,
    kde_points: usize,
) -> InvarianceReport {
    let m = pi.len();
    let mut checks = Vec::with_capacity(m);
    let mut curves = Vec::with_capacity(m);
    for i in 0..m {
        let j = pi.apply(i);
        let a = store_y.sigma_diag_series(i);
        let b = store_ypi.sigma_diag_series(j);
        let ks = ks_two_sample(&a, &b);
        let ess_y = effective_sample_size(&a);
        let ess_ypi = effective_sample_size(&b);
        let critical_value = ks_critical_value(alpha, ess_y, ess_ypi);
        checks.push(VariableCheck {
            variable: i + 1,
            permuted_variable: j + 1,
            ks,
            ess_y,
            ess_ypi,
            critical_value,
            pass: ks <= critical_value,
            mean_y: mean(&a),
            mean_ypi: mean(&b),
        });

        let h = silverman_bandwidth(&a).max(silverman_bandwidth(&b));
        let lo = a.iter().chain(&b).copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
        let hi = a.iter().chain(&b).copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
        let grid = linspace(lo.max(0.0), hi, kde_points);
        curves.push(KdeCurve {
            variable: i + 1,
            density_y: kde(&a, &grid, None),
            density_ypi: kde(&b, &grid, None),
            grid,
        });
    }
    let mut warnings = store_y.diagnostics.warnings.clone();
    warnings.extend(store_ypi.diagnostics.warnings.iter().cloned());
    InvarianceReport {
        alpha,
        draws_y: store_y.len(),
        draws_ypi: store_ypi.len(),
        checks,
        curves,
        warnings,
    }
}

/// Runs both arms one after the other and compares them.
pub fn invariance_study(y: &Dataset, pi: &Permutation, cfg: &InvarianceConfig) -> Result<InvarianceReport> {
    let arms = prepare_arms(y, pi, cfg)?;
    let store_y = run_chain(&arms.y, &arms.config_y, arms.init_y).map_err(|a| a.error)?;
    let store_ypi = run_chain(&arms.ypi, &arms.config_ypi, arms.init_ypi).map_err(|a| a.error)?;
    Ok(compare_arms(&store_y, &store_ypi, pi, cfg.alpha, cfg.kde_points))
}
