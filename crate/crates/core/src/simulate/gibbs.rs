use rand::Rng;
use serde::{Deserialize, Serialize};

use super::poisson::{sim_binomial, uniform_in};
use crate::error::{Error, Result};
use crate::model::{sufficient_statistics, Covariates, ModelSpec, Neighbourhood};
use crate::pattern::{MultiTypePattern, Point, SpatialIndex, Window};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MhOptions {
    /// Each sweep makes one relocation proposal per point.
    pub sweeps: usize,
}

impl Default for MhOptions {
    fn default() -> Self {
        Self { sweeps: 500 }
    }
}

#[derive(Debug, Clone)]
pub struct GibbsSample<T> {
    pub pattern: MultiTypePattern<T>,
    /// `θ·v(x)` after every sweep, starting with the initial state.
    pub potential_trace: Vec<T>,
    pub acceptance_rate: f64,
}

/// Log density ratio of moving point `idx` of the indexed pattern to `(x, y)`.
#[allow(clippy::too_many_arguments)]
pub fn move_log_ratio<T: Real>(
    nbhd: &Neighbourhood<T>,
    spec: &ModelSpec<T>,
    covariates: &Covariates<T>,
    theta: &[T],
    idx: usize,
    x: T,
    y: T,
    scratch: &mut Vec<T>,
) -> T {
    let old = nbhd.index().points()[idx];
    let new_ll = nbhd.log_lambda(spec, covariates, theta, x, y, old.ty, Some(idx), scratch);
    let old_ll = nbhd.log_lambda(spec, covariates, theta, old.x, old.y, old.ty, Some(idx), scratch);
    new_ll - old_ll
}

/// Fixed-count Metropolis–Hastings: a uniformly chosen point is proposed at a uniform
/// new location and accepted with probability `min(1, f(new)/f(old))`.
#[allow(clippy::too_many_arguments)]
pub fn sim_gibbs_fixed_n<T: Real, R: Rng + ?Sized>(
    spec: &ModelSpec<T>,
    theta: &[T],
    covariates: &Covariates<T>,
    counts: &[usize],
    window: &Window<T>,
    options: &MhOptions,
    rng: &mut R,
) -> Result<GibbsSample<T>> {
    if counts.len() != spec.n_types() {
        return Err(Error::arg("need one count per type"));
    }
    if theta.len() != spec.layout().len() {
        return Err(Error::arg("theta length does not match the model"));
    }
    if options.sweeps == 0 {
        return Err(Error::arg("at least one sweep is required"));
    }
    let max_cov = (0..spec.n_types()).flat_map(|i| spec.covariates(i).iter().copied()).max();
    covariates.check(window, max_cov)?;
    let mut points = Vec::new();
    for (ty, &n) in counts.iter().enumerate() {
        points.extend(sim_binomial(window, n, rng).into_iter().map(|(x, y)| Point::new(x, y, ty)));
    }
    let start = MultiTypePattern::new(window.clone(), spec.n_types(), points)?;
    let dot = |v: Vec<T>| v.iter().zip(theta).map(|(&a, &b)| a * b).sum::<T>();
    let mut potential = dot(sufficient_statistics(&start, spec, covariates));
    let mut trace = vec![potential];
    let n = start.len();
    let mut nbhd = Neighbourhood::from_index(SpatialIndex::build(window, spec.n_types(), start.points(), spec.max_range()));
    let mut scratch = Vec::new();
    let mut accepted = 0usize;
    if n > 0 {
        for _ in 0..options.sweeps {
            for _ in 0..n {
                let idx = rng.gen_range(0..n);
                let (x, y) = uniform_in(window, rng);
                let delta = move_log_ratio(&nbhd, spec, covariates, theta, idx, x, y, &mut scratch);
                let u: f64 = rng.gen();
                if delta >= T::zero() || T::lit(u).ln() < delta {
                    nbhd.index_mut().relocate(idx, x, y);
                    potential += delta;
                    accepted += 1;
                }
            }
            trace.push(potential);
        }
    }
    let pattern = MultiTypePattern::new(window.clone(), spec.n_types(), nbhd.index().points().to_vec())?;
    let proposals = (n * options.sweeps).max(1);
    Ok(GibbsSample {
        pattern,
        potential_trace: trace,
        acceptance_rate: accepted as f64 / proposals as f64,
    })
}
