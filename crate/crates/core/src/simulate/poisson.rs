use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::model::CovariateField;
use crate::pattern::Window;
use crate::scalar::Real;

pub(crate) fn uniform_in<T: Real, R: Rng + ?Sized>(w: &Window<T>, rng: &mut R) -> (T, T) {
    let x = w.x_min + T::lit(rng.gen::<f64>()) * w.width();
    let y = w.y_min + T::lit(rng.gen::<f64>()) * w.height();
    (x.min(w.x_max), y.min(w.y_max))
}

/// `n` independent uniform points (binomial process).
pub fn sim_binomial<T: Real, R: Rng + ?Sized>(window: &Window<T>, n: usize, rng: &mut R) -> Vec<(T, T)> {
    (0..n).map(|_| uniform_in(window, rng)).collect()
}

/// Homogeneous Poisson process of intensity `lambda`.
pub fn sim_poisson<T: Real, R: Rng + ?Sized>(window: &Window<T>, lambda: T, rng: &mut R) -> Result<Vec<(T, T)>> {
    let mean = (lambda * window.area()).to_f64_lossy();
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::arg("intensity must be finite and non-negative"));
    }
    let n = if mean == 0.0 {
        0
    } else {
        Poisson::new(mean).map_err(|e| Error::arg(e.to_string()))?.sample(rng) as usize
    };
    Ok(sim_binomial(window, n, rng))
}

/// `n` points with density proportional to `field` on `window` (rejection sampling
/// against the field maximum).
pub fn sim_ipp<T: Real, R: Rng + ?Sized>(
    window: &Window<T>,
    field: &CovariateField<T>,
    n: usize,
    rng: &mut R,
) -> Result<Vec<(T, T)>> {
    let max = field.max_value();
    if field.values.iter().any(|&v| v < T::zero()) {
        return Err(Error::arg("intensity field has negative values"));
    }
    if !(max > T::zero()) {
        return Err(Error::arg("intensity field is identically zero"));
    }
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (x, y) = uniform_in(window, rng);
        if T::lit(rng.gen::<f64>()) * max < field.value_at(x, y) {
            out.push((x, y));
        }
    }
    Ok(out)
}
