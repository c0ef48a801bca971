//! Seeded pattern generators and the synthetic experiment designs.

pub mod experiments;
mod gibbs;
mod poisson;
mod rng;
mod score;
mod thomas;

pub use experiments::{generate, generate_replicates, Dataset, ExperimentId, ExperimentScale, Scenario};
pub use gibbs::{move_log_ratio, sim_gibbs_fixed_n, GibbsSample, MhOptions};
pub use poisson::{sim_binomial, sim_ipp, sim_poisson};
pub use rng::RngStream;
pub use score::{score, Rates};
pub use thomas::{sim_thomas, ThomasSpec};
