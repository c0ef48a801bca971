//! Group-lasso penalized pseudo-likelihood along a penalty path.

mod matrix;
mod path;
mod solver;

pub use matrix::InteractionMatrix;
pub use path::{aic, effective_df, fit_path, log_grid, PathPoint, PenaltyPath};
pub use solver::{group_solve, Curvature, FitResult, GroupLasso, GroupWeights, SolverOptions};
