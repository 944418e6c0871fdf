//! Simulation, initialization and diagnostics for the reordering experiment.

pub mod ess;
pub mod invariance;
pub mod kde;
pub mod ks;
pub mod mle;
pub mod sim;

pub use invariance::{
    compare_arms, invariance_study, prepare_arms, Arms, InvarianceConfig, InvarianceReport, KdeCurve, VariableCheck,
};
pub use mle::{fit_factor_mle, mle_init, state_from_fit, MleFit, MleMethod};
pub use sim::{fixture_by_name, paper_sim_1, PAPER_SIM_1, permute_columns, simulate_dataset, Fixture, Permutation, SimTruth};
