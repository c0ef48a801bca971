//! Non-parametric Monte Carlo interaction tests: kernel intensities, conditional
//! Poisson nulls, translation-corrected K functions and global envelope tests.

mod envelope;
mod kernel;
mod kfunc;
mod matrix;

pub use envelope::{rank_envelope_test, studentised_test, CurveSet, RankOrdering, RankResult, StudentisedResult};
pub use kernel::{edge_mass, epanechnikov, field_integral, kernel_intensity};
pub use kfunc::{cross_k, linear_grid, translation_weight};
pub use matrix::{interaction_test_matrix, McMatrix, McOptions, McTest};
