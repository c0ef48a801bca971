//! Interaction detection for multitype Gibbs point patterns.
//!
//! A multitype saturation (or Strauss) model is fitted by logistic
//! pseudo-likelihood with a group-lasso penalty on the interaction parameters;
//! the penalty is tuned by spatial block cross-validation or AIC, and
//! interactions can be checked with Monte Carlo tests under randomisation.
//!
//! All numeric code is generic over [`Real`] (`f32`, `f64`); the aliases at the
//! crate root fix it to `f64`, which is what the fitting code is tuned for.

pub mod config;
pub mod cv;
pub mod error;
pub mod lasso;
pub mod linalg;
pub mod mctest;
pub mod io;
pub mod model;
pub mod pca;
pub mod pattern;
pub mod pipeline;
pub mod pseudolik;
pub mod scalar;
pub mod simulate;

pub use error::{Error, Result};
pub use model::Family;
pub use scalar::Real;

pub type Window = pattern::Window<f64>;
pub type Point = pattern::Point<f64>;
pub type Pattern = pattern::MultiTypePattern<f64>;
pub type ModelSpec = model::ModelSpec<f64>;
pub type CovariateField = model::CovariateField<f64>;
pub type Covariates = model::Covariates<f64>;

/// Single-precision aliases, for storage-heavy uses.
pub mod f32 {
    pub type Window = crate::pattern::Window<f32>;
    pub type Point = crate::pattern::Point<f32>;
    pub type Pattern = crate::pattern::MultiTypePattern<f32>;
    pub type ModelSpec = crate::model::ModelSpec<f32>;
}
