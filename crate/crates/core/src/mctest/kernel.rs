use crate::error::{Error, Result};
use crate::model::CovariateField;
use crate::pattern::Window;
use crate::scalar::Real;

/// Epanechnikov kernel `(2 / πh²)(1 − d²/h²)₊`, normalised to unit mass on the plane.
#[inline]
pub fn epanechnikov<T: Real>(d2: T, h: T) -> T {
    let u = T::one() - d2 / (h * h);
    if u > T::zero() {
        T::lit(2.0 / std::f64::consts::PI) * u / (h * h)
    } else {
        T::zero()
    }
}

/// Grid cells as (centre x, centre y, area inside the window).
struct Grid<T> {
    field: CovariateField<T>,
    cx: Vec<T>,
    cy: Vec<T>,
    wx: Vec<T>,
    wy: Vec<T>,
}

impl<T: Real> Grid<T> {
    fn new(window: &Window<T>, cell: T) -> Self {
        let field = CovariateField::from_fn(window, cell, |_, _| T::zero());
        let axis = |lo: T, hi: T, n: usize| -> (Vec<T>, Vec<T>) {
            (0..n)
                .map(|i| {
                    let a = lo + T::from_usize_lossy(i) * cell;
                    let b = (a + cell).min(hi);
                    ((a + b) * T::lit(0.5), b - a)
                })
                .unzip()
        };
        let (cx, wx) = axis(window.x_min, window.x_max, field.nx);
        let (cy, wy) = axis(window.y_min, window.y_max, field.ny);
        Self { field, cx, cy, wx, wy }
    }

    /// Index range of cells whose centre may lie within `h` of `v`.
    fn span(c: &[T], v: T, h: T) -> std::ops::Range<usize> {
        let lo = c.partition_point(|&x| x < v - h);
        let hi = c.partition_point(|&x| x <= v + h);
        lo..hi
    }

    fn for_each_near<F: FnMut(usize, T)>(&self, x: T, y: T, h: T, mut f: F) {
        for iy in Self::span(&self.cy, y, h) {
            let dy = self.cy[iy] - y;
            for ix in Self::span(&self.cx, x, h) {
                let dx = self.cx[ix] - x;
                f(iy * self.field.nx + ix, dx * dx + dy * dy);
            }
        }
    }

    fn area(&self, idx: usize) -> T {
        self.wx[idx % self.field.nx] * self.wy[idx / self.field.nx]
    }
}

/// Kernel mass `c_W(x) = ∫_W k_h(v − x) dv`, by the midpoint rule on a grid of side `cell`.
pub fn edge_mass<T: Real>(x: T, y: T, window: &Window<T>, bandwidth: T, cell: T) -> T {
    let grid = Grid::new(window, cell);
    let mut mass = T::zero();
    grid.for_each_near(x, y, bandwidth, |i, d2| mass += epanechnikov(d2, bandwidth) * grid.area(i));
    mass
}

/// Edge-corrected kernel intensity `η(u) = Σ_x k_h(u − x) / c_W(x)` on a grid of side
/// `cell`. `c_W` uses the same grid, so the grid integral of `η` equals the point count.
/// An empty pattern gives the zero field (logged).
pub fn kernel_intensity<T: Real>(points: &[(T, T)], window: &Window<T>, bandwidth: T, cell: T) -> Result<CovariateField<T>> {
    if !(bandwidth > T::zero()) || !(cell > T::zero()) {
        return Err(Error::arg("bandwidth and cell size must be positive"));
    }
    let mut grid = Grid::new(window, cell);
    if points.is_empty() {
        log::warn!("kernel intensity of an empty pattern is identically zero");
        return Ok(grid.field);
    }
    let mut acc = vec![T::zero(); grid.field.values.len()];
    let mut near = Vec::new();
    for &(x, y) in points {
        near.clear();
        let mut mass = T::zero();
        grid.for_each_near(x, y, bandwidth, |i, d2| {
            let k = epanechnikov(d2, bandwidth);
            if k > T::zero() {
                mass += k * grid.area(i);
                near.push((i, k));
            }
        });
        if mass > T::zero() {
            for &(i, k) in &near {
                acc[i] += k / mass;
            }
        }
    }
    grid.field.values = acc;
    Ok(grid.field)
}

/// Grid integral of a field over its own cells, clipped to `window`.
pub fn field_integral<T: Real>(field: &CovariateField<T>, window: &Window<T>) -> T {
    let mut total = T::zero();
    for iy in 0..field.ny {
        for ix in 0..field.nx {
            let x0 = field.x0 + T::from_usize_lossy(ix) * field.dx;
            let y0 = field.y0 + T::from_usize_lossy(iy) * field.dy;
            let cell = Window {
                x_min: x0,
                x_max: x0 + field.dx,
                y_min: y0,
                y_max: y0 + field.dy,
            };
            total += field.values[iy * field.nx + ix] * cell.intersection_area(window);
        }
    }
    total
}
