use crate::error::{Error, Result};
use crate::pattern::Window;
use crate::scalar::Real;

/// Raster covariate `z(u)` with nearest-cell lookup.
///
/// Cell `(ix, iy)` covers `[x0 + ix·dx, x0 + (ix+1)·dx) × [y0 + iy·dy, ...)`; values
/// are stored row-major with rows running along `y`. Lookups outside the grid clamp
/// to the nearest edge cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateField<T> {
    pub x0: T,
    pub y0: T,
    pub dx: T,
    pub dy: T,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<T>,
}

impl<T: Real> CovariateField<T> {
    pub fn new(x0: T, y0: T, dx: T, dy: T, nx: usize, ny: usize, values: Vec<T>) -> Result<Self> {
        if nx == 0 || ny == 0 || !(dx > T::zero()) || !(dy > T::zero()) {
            return Err(Error::arg("raster needs positive cell sizes and dimensions"));
        }
        if values.len() != nx * ny {
            return Err(Error::arg(format!(
                "raster has {} values, expected {}",
                values.len(),
                nx * ny
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("raster values must be finite"));
        }
        Ok(Self {
            x0,
            y0,
            dx,
            dy,
            nx,
            ny,
            values,
        })
    }

    /// Grid covering `window` with cells of side `cell`, filled by `f(cell centre)`.
    pub fn from_fn<F: FnMut(T, T) -> T>(window: &Window<T>, cell: T, mut f: F) -> Self {
        let nx = (window.width() / cell).ceil().to_usize().unwrap_or(1).max(1);
        let ny = (window.height() / cell).ceil().to_usize().unwrap_or(1).max(1);
        let half = T::lit(0.5);
        let mut values = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                let x = window.x_min + (T::from_usize_lossy(ix) + half) * cell;
                let y = window.y_min + (T::from_usize_lossy(iy) + half) * cell;
                values.push(f(x, y));
            }
        }
        Self {
            x0: window.x_min,
            y0: window.y_min,
            dx: cell,
            dy: cell,
            nx,
            ny,
            values,
        }
    }

    pub fn constant(window: &Window<T>, value: T) -> Self {
        Self::from_fn(window, window.width().max(window.height()), |_, _| value)
    }

    #[inline]
    pub fn cell_of(&self, x: T, y: T) -> (usize, usize) {
        let fx = ((x - self.x0) / self.dx).floor();
        let fy = ((y - self.y0) / self.dy).floor();
        let ix = if fx <= T::zero() { 0 } else { fx.to_usize().unwrap_or(usize::MAX).min(self.nx - 1) };
        let iy = if fy <= T::zero() { 0 } else { fy.to_usize().unwrap_or(usize::MAX).min(self.ny - 1) };
        (ix, iy)
    }

    #[inline]
    pub fn value_at(&self, x: T, y: T) -> T {
        let (ix, iy) = self.cell_of(x, y);
        self.values[iy * self.nx + ix]
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> (T, T) {
        let half = T::lit(0.5);
        (
            self.x0 + (T::from_usize_lossy(ix) + half) * self.dx,
            self.y0 + (T::from_usize_lossy(iy) + half) * self.dy,
        )
    }

    pub fn extent(&self) -> Window<T> {
        Window {
            x_min: self.x0,
            x_max: self.x0 + self.dx * T::from_usize_lossy(self.nx),
            y_min: self.y0,
            y_max: self.y0 + self.dy * T::from_usize_lossy(self.ny),
        }
    }

    /// Whether the grid extent contains the window (up to a relative tolerance).
    pub fn covers(&self, window: &Window<T>) -> bool {
        let e = self.extent();
        let tol = T::lit(1e-9) * (window.width() + window.height());
        e.x_min <= window.x_min + tol
            && e.y_min <= window.y_min + tol
            && e.x_max >= window.x_max - tol
            && e.y_max >= window.y_max - tol
    }

    pub fn same_geometry(&self, other: &Self) -> bool {
        self.x0 == other.x0
            && self.y0 == other.y0
            && self.dx == other.dx
            && self.dy == other.dy
            && self.nx == other.nx
            && self.ny == other.ny
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn map<F: Fn(T) -> T>(&self, f: F) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }
}

/// The covariate maps available to a model; `ModelSpec::covariates(i)` indexes into it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Covariates<T> {
    fields: Vec<CovariateField<T>>,
}

impl<T: Real> Covariates<T> {
    pub fn new(fields: Vec<CovariateField<T>>) -> Self {
        Self { fields }
    }

    pub fn none() -> Self {
        Self { fields: Vec::new() }
    }

    pub fn fields(&self) -> &[CovariateField<T>] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Writes `z_i(u) = [1, z_{i1}(u), …]` into `out`.
    #[inline]
    pub fn fill_row(&self, which: &[usize], x: T, y: T, out: &mut [T]) {
        out[0] = T::one();
        for (slot, &k) in out[1..].iter_mut().zip(which) {
            *slot = self.fields[k].value_at(x, y);
        }
    }

    pub fn check(&self, window: &Window<T>, max_index: Option<usize>) -> Result<()> {
        if let Some(m) = max_index {
            if m >= self.fields.len() {
                return Err(Error::arg(format!(
                    "model references covariate {m} but only {} are loaded",
                    self.fields.len()
                )));
            }
        }
        if let Some(i) = self.fields.iter().position(|f| !f.covers(window)) {
            return Err(Error::arg(format!("covariate {i} does not cover the window")));
        }
        Ok(())
    }
}
