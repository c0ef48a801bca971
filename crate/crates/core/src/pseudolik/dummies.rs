use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{MultiTypePattern, Point, Window};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DummySpec {
    /// Dummies per data point of the same type.
    pub intensity_factor: f64,
    /// Floor on the number of dummies of each type.
    pub min_per_type: usize,
}

impl Default for DummySpec {
    fn default() -> Self {
        Self {
            intensity_factor: 4.0,
            min_per_type: 500,
        }
    }
}

impl DummySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.intensity_factor > 0.0 && self.intensity_factor.is_finite()) {
            return Err(Error::arg("dummy intensity factor must be positive"));
        }
        if self.min_per_type == 0 {
            return Err(Error::arg("dummy floor must be at least 1"));
        }
        Ok(())
    }

    pub fn count_for(&self, n: usize) -> usize {
        ((self.intensity_factor * n as f64).ceil() as usize).max(self.min_per_type)
    }
}

/// Dummy points with their homogeneous per-type intensities `ρ_i`.
#[derive(Debug, Clone)]
pub struct Dummies<T> {
    pub pattern: MultiTypePattern<T>,
    pub rho: Vec<T>,
}

/// Stratification grid for `m` points: about `√(m·aspect) × √(m/aspect)` cells.
pub fn strata_grid<T: Real>(window: &Window<T>, m: usize) -> (usize, usize) {
    let aspect = (window.width() / window.height()).to_f64_lossy();
    let mf = m as f64;
    let nx = (mf * aspect).sqrt().ceil().max(1.0) as usize;
    let mut ny = (mf / aspect).sqrt().ceil().max(1.0) as usize;
    while nx * ny < m {
        ny += 1;
    }
    (nx, ny)
}

/// Stratified uniform dummies: per type, `m_i` distinct grid cells are drawn and
/// one uniform point placed in each.
pub fn generate_dummies<T: Real, R: Rng + ?Sized>(
    window: &Window<T>,
    counts: &[usize],
    spec: &DummySpec,
    rng: &mut R,
) -> Result<Dummies<T>> {
    spec.validate()?;
    let area = window.area();
    let mut points = Vec::new();
    let mut rho = Vec::with_capacity(counts.len());
    for (ty, &n) in counts.iter().enumerate() {
        let m = spec.count_for(n);
        let (nx, ny) = strata_grid(window, m);
        let dx = window.width() / T::from_usize_lossy(nx);
        let dy = window.height() / T::from_usize_lossy(ny);
        let mut cells = sample(rng, nx * ny, m).into_vec();
        cells.sort_unstable();
        for c in cells {
            let (cx, cy) = (c % nx, c / nx);
            let ux: T = T::lit(rng.gen::<f64>());
            let uy: T = T::lit(rng.gen::<f64>());
            let x = (window.x_min + (T::from_usize_lossy(cx) + ux) * dx).min(window.x_max);
            let y = (window.y_min + (T::from_usize_lossy(cy) + uy) * dy).min(window.y_max);
            points.push(Point::new(x, y, ty));
        }
        rho.push(T::from_usize_lossy(m) / area);
    }
    let pattern = MultiTypePattern::new(window.clone(), counts.len(), points)?;
    Ok(Dummies { pattern, rho })
}
