//! The multi-range multitype Strauss / saturation Gibbs model.

mod covariate;
mod omega;
mod saturation;
mod spec;

pub use covariate::{CovariateField, Covariates};
pub use omega::{log_conditional_intensity, omega, sufficient_statistics, Neighbourhood, RingCounts};
pub use saturation::{poisson_cdf, poisson_quantile, saturation_auto, t_function};
pub use spec::{Family, Group, GroupKind, Layout, ModelSpec, TypeRow};
