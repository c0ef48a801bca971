//! Logistic pseudo-likelihood: dummy points, design rows and the objective.

mod design;
mod dummies;
mod objective;

pub use design::{build_design, DesignData, RowSource, TypeBlock};
pub use dummies::{generate_dummies, strata_grid, DummySpec, Dummies};
pub use objective::{gradient, log_sigmoid, logistic_loglik, sigmoid, softplus};
