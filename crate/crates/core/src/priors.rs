//! Priors on the loading matrix and the uniquenesses.
//!
//! Both loading priors put independent `N(0, C0)` laws on the off-diagonal
//! entries `beta_ij`, `i > j`. They differ on the diagonal:
//!
//! | family           | density of `beta_ii` on `(0, inf)`          | law of `beta_ii^2 / C0` |
//! |------------------|---------------------------------------------|-------------------------|
//! | `Standard`       | `exp(-x^2 / (2 C0))`                         | chi-square, 1 df        |
//! | `OrderInvariant` | `x^(k-i) exp(-x^2 / (2 C0))`                 | chi-square, `k-i+1` df  |
//!
//! Under `OrderInvariant` every row sum `(beta beta')_ii / C0` is chi-square
//! with `k` degrees of freedom, whatever the row; under `Standard` it has
//! `min(i, k)`.
//!
//! Uniquenesses are iid inverse gamma `IG(nu/2, nu s2 / 2)` with density
//! proportional to `x^(-nu/2 - 1) exp(-nu s2 / (2 x))`, so that
//! `nu s2 / omega_i^2` is chi-square with `nu` degrees of freedom.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

// Unused when std is linked (its inherent float methods take precedence).
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::dist::{chi_square, inverse_gamma, positive_normal, standard_normal};
use crate::error::{Error, Result};
use crate::linalg::{LowerTriangular, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PriorFamily {
    Standard,
    OrderInvariant,
}

impl PriorFamily {
    pub fn name(self) -> &'static str {
        match self {
            PriorFamily::Standard => "standard",
            PriorFamily::OrderInvariant => "order-invariant",
        }
    }

    /// Exponent of the polynomial factor `beta_ii^power` in the diagonal
    /// density of row `i` (1-based), for `i <= k`.
    pub fn diag_power(self, i: usize, k: usize) -> u32 {
        debug_assert!(1 <= i && i <= k);
        match self {
            PriorFamily::Standard => 0,
            PriorFamily::OrderInvariant => (k - i) as u32,
        }
    }
}

impl fmt::Display for PriorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PriorFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(PriorFamily::Standard),
            "order-invariant" => Ok(PriorFamily::OrderInvariant),
            other => Err(Error::InvalidConfig(format!(
                "unknown prior family '{other}' (expected 'standard' or 'order-invariant')"
            ))),
        }
    }
}

/// Prior family plus hyperparameters `C0` (loading variance), `nu` and `s2`
/// (uniqueness shape and scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    pub family: PriorFamily,
    pub c0: f64,
    pub nu: f64,
    pub s2: f64,
}

impl PriorSpec {
    pub fn new(family: PriorFamily, c0: f64, nu: f64, s2: f64) -> Result<Self> {
        let spec = PriorSpec { family, c0, nu, s2 };
        spec.validate()?;
        Ok(spec)
    }

    /// `C0 = 1`, `nu = 2.2`, `s2 = 0.1 / 2.2`.
    pub fn default_for(family: PriorFamily) -> Self {
        PriorSpec {
            family,
            c0: 1.0,
            nu: 2.2,
            s2: 0.1 / 2.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c0", self.c0), ("nu", self.nu), ("s2", self.s2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    /// observed variables
    pub m: usize,
    /// factors
    pub k: usize,
    /// observations
    pub n: usize,
}

impl ModelDims {
    pub fn new(m: usize, k: usize, n: usize) -> Result<Self> {
        if k < 1 || k > m {
            return Err(Error::InvalidConfig(format!("need 1 <= k <= m, got k={k}, m={m}")));
        }
        if n < 1 {
            return Err(Error::InvalidConfig("need at least one observation".into()));
        }
        Ok(ModelDims { m, k, n })
    }
}

/// The `m` positive error variances `omega_i^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Uniquenesses(Vec<f64>);

impl Uniquenesses {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
        {
            return Err(Error::Domain(format!("uniqueness {} is {v}, must be > 0", i + 1)));
        }
        Ok(Uniquenesses(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }
}

fn check_loading_dims(beta: &LowerTriangular, dims: &ModelDims) -> Result<()> {
    if beta.rows() != dims.m || beta.cols() != dims.k {
        return Err(Error::DimensionMismatch {
            what: "loading matrix",
            expected: (dims.m, dims.k),
            got: (beta.rows(), beta.cols()),
        });
    }
    Ok(())
}

/// Log prior density of a loading matrix, up to the family's additive
/// normalizing constant.
pub fn log_prior_loadings(beta: &LowerTriangular, spec: &PriorSpec, dims: &ModelDims) -> Result<f64> {
    check_loading_dims(beta, dims)?;
    let mut lp = 0.0;
    for i in 0..dims.m {
        for &b in beta.row_head(i) {
            lp -= b * b / (2.0 * spec.c0);
        }
    }
    for i in 0..dims.k {
        let d = beta.diag(i);
        if !(d > 0.0) {
            return Err(Error::Domain(format!("diagonal loading {} is {d}", i + 1)));
        }
        let power = spec.family.diag_power(i + 1, dims.k);
        if power > 0 {
            lp += power as f64 * d.ln();
        }
    }
    Ok(lp)
}

/// Log prior density of the uniquenesses, up to an additive constant.
pub fn log_prior_uniquenesses(omega2: &Uniquenesses, spec: &PriorSpec) -> f64 {
    let shape = 0.5 * spec.nu;
    let rate = 0.5 * spec.nu * spec.s2;
    omega2
        .as_slice()
        .iter()
        .map(|&w| -(shape + 1.0) * w.ln() - rate / w)
        .sum()
}

/// Draws a loading matrix from the prior.
///
/// Off-diagonal entries are `N(0, C0)`. Diagonal entries are
/// `sqrt(C0 * chi2_{k-i+1})` under `OrderInvariant`, and the positive part of
/// `N(0, C0)` under `Standard` (drawn with the truncated-normal sampler).
pub fn sample_loadings_prior<R: Rng + ?Sized>(spec: &PriorSpec, dims: &ModelDims, rng: &mut R) -> LowerTriangular {
    let sd = spec.c0.sqrt();
    let mut beta = Matrix::zeros(dims.m, dims.k);
    for i in 0..dims.m {
        let width = (i + 1).min(dims.k);
        for j in 0..width {
            beta[(i, j)] = if j == i {
                match spec.family {
                    PriorFamily::Standard => positive_normal(0.0, sd, rng),
                    PriorFamily::OrderInvariant => {
                        let df = (dims.k - i) as f64;
                        (spec.c0 * chi_square(df, rng)).sqrt()
                    }
                }
            } else {
                sd * standard_normal(rng)
            };
        }
    }
    LowerTriangular::new_unchecked(beta)
}

/// `m` iid draws from `IG(nu/2, nu s2 / 2)`.
pub fn sample_uniquenesses_prior<R: Rng + ?Sized>(spec: &PriorSpec, dims: &ModelDims, rng: &mut R) -> Uniquenesses {
    let shape = 0.5 * spec.nu;
    let rate = 0.5 * spec.nu * spec.s2;
    Uniquenesses((0..dims.m).map(|_| inverse_gamma(shape, rate, rng)).collect())
}

/// Degrees of freedom of the chi-square law of `(beta beta')_ii / C0`
/// for row `i` (1-based) under the given family.
pub fn gram_diag_df(family: PriorFamily, i: usize, k: usize) -> usize {
    debug_assert!(i >= 1);
    match family {
        PriorFamily::Standard => i.min(k),
        PriorFamily::OrderInvariant => k,
    }
}
