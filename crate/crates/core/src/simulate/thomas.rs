use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::poisson::{sim_ipp, sim_poisson};
use crate::error::{Error, Result};
use crate::model::CovariateField;
use crate::pattern::Window;
use crate::scalar::Real;

/// Thomas cluster process: Poisson parents, Poisson(`mu`) offspring per parent with
/// isotropic Gaussian displacement of sd `sigma`.
#[derive(Debug, Clone)]
pub struct ThomasSpec<T> {
    /// Parent intensity per unit area.
    pub kappa: T,
    /// Fixed number of parents on the dilated window. Overrides the Poisson draw from `kappa`,
    /// which removes the parent-count variance from the realised total.
    pub parents: Option<usize>,
    pub mu: T,
    pub sigma: T,
    /// Relative parent intensity; parents are placed proportionally to it.
    pub parent_field: Option<CovariateField<T>>,
}

impl<T: Real> ThomasSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: T| v > T::zero() && v.is_finite();
        if !(ok(self.kappa) && ok(self.mu) && ok(self.sigma)) {
            return Err(Error::arg("Thomas parameters must be positive and finite"));
        }
        Ok(())
    }
}

/// Parents live on the window dilated by `4σ`; offspring outside the window are dropped.
pub fn sim_thomas<T: Real, R: Rng + ?Sized>(window: &Window<T>, spec: &ThomasSpec<T>, rng: &mut R) -> Result<Vec<(T, T)>> {
    spec.validate()?;
    let outer = window.dilate(T::lit(4.0) * spec.sigma);
    let parents = match (&spec.parent_field, spec.parents) {
        (None, None) => sim_poisson(&outer, spec.kappa, rng)?,
        (field, fixed) => {
            let n = match fixed {
                Some(n) => n,
                None => {
                    let mean = (spec.kappa * outer.area()).to_f64_lossy();
                    Poisson::new(mean).map_err(|e| Error::arg(e.to_string()))?.sample(rng) as usize
                }
            };
            match field {
                Some(f) => sim_ipp(&outer, f, n, rng)?,
                None => super::poisson::sim_binomial(&outer, n, rng),
            }
        }
    };
    let offspring = Poisson::new(spec.mu.to_f64_lossy()).map_err(|e| Error::arg(e.to_string()))?;
    let disp = Normal::new(0.0, spec.sigma.to_f64_lossy()).map_err(|e| Error::arg(e.to_string()))?;
    let mut out = Vec::new();
    for (px, py) in parents {
        let k = offspring.sample(rng) as usize;
        for _ in 0..k {
            let x = px + T::lit(disp.sample(rng));
            let y = py + T::lit(disp.sample(rng));
            if window.contains(x, y) {
                out.push((x, y));
            }
        }
    }
    Ok(out)
}
