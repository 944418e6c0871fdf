//! Gibbs sampling for Bayesian exploratory factor analysis.
//!
//! The loading matrix is kept lower triangular with a positive diagonal so
//! that it is identified. Two priors are available for it:
//!
//! - [`PriorFamily::Standard`]: independent `N(0, C0)` off-diagonal loadings
//!   and truncated-normal diagonal loadings.
//! - [`PriorFamily::OrderInvariant`]: the law of the `L` factor in the LQ
//!   decomposition of a spherical Gaussian `m x k` matrix. Diagonal entries
//!   have density proportional to `x^(k-i) exp(-x^2 / (2 C0))`, which makes
//!   the implied prior and posterior of `Sigma = Omega + beta beta'`
//!   invariant under reordering of the observed variables.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, threads and
//! the command-line front end live in the `factorgibbs` crate.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod ars;
pub mod dataset;
pub mod dist;
mod error;
pub mod gibbs;
pub mod linalg;
pub mod math;
pub mod priors;
pub mod rng;
pub mod study;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use gibbs::{
    gibbs_sweep, run_chain, ChainAborted, ChainState, DrawStore, GibbsConfig, StoreMode,
};
pub use linalg::{LowerTriangular, Matrix, SpdMatrix};
pub use priors::{ModelDims, PriorFamily, PriorSpec, Uniquenesses};
pub use rng::{chain_rng, ChainRng};
