use super::{check_radii, in_annulus, Point, Window};
use crate::error::Result;
use crate::scalar::Real;

const MAX_CELLS_PER_AXIS: usize = 1024;

/// Uniform bucket grid over a window, with per-cell point lists split by type.
///
/// The grid is sized for a nominal query radius; larger radii still return exact
/// results by scanning more cells. Points may be relocated in place, which the
/// Metropolis–Hastings sampler relies on.
#[derive(Debug, Clone)]
pub struct SpatialIndex<T> {
    x0: T,
    y0: T,
    cell: T,
    nx: usize,
    ny: usize,
    n_types: usize,
    buckets: Vec<Vec<u32>>,
    points: Vec<Point<T>>,
    slot: Vec<usize>,
}

impl<T: Real> SpatialIndex<T> {
    pub fn build(window: &Window<T>, n_types: usize, points: &[Point<T>], radius: T) -> Self {
        let max_cells = T::from_usize_lossy(MAX_CELLS_PER_AXIS);
        let mut cell = if radius > T::zero() && radius.is_finite() {
            radius
        } else {
            window.width().max(window.height())
        };
        cell = cell.max(window.width() / max_cells).max(window.height() / max_cells);
        let nx = (window.width() / cell).ceil().to_usize().unwrap_or(1).max(1);
        let ny = (window.height() / cell).ceil().to_usize().unwrap_or(1).max(1);
        let mut index = Self {
            x0: window.x_min,
            y0: window.y_min,
            cell,
            nx,
            ny,
            n_types,
            buckets: vec![Vec::new(); nx * ny * n_types],
            points: points.to_vec(),
            slot: vec![0; points.len()],
        };
        for i in 0..points.len() {
            let b = index.bucket_of(&points[i]);
            index.slot[i] = b;
            index.buckets[b].push(i as u32);
        }
        index
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn cell_size(&self) -> T {
        self.cell
    }

    #[inline]
    fn cell_coord(&self, v: T, origin: T, n: usize) -> usize {
        let c = ((v - origin) / self.cell).floor();
        if c <= T::zero() {
            0
        } else {
            c.to_usize().unwrap_or(usize::MAX).min(n - 1)
        }
    }

    #[inline]
    fn bucket_of(&self, p: &Point<T>) -> usize {
        let cx = self.cell_coord(p.x, self.x0, self.nx);
        let cy = self.cell_coord(p.y, self.y0, self.ny);
        (cy * self.nx + cx) * self.n_types + p.ty
    }

    /// Visits every point of type `ty` with squared distance `<= r²` from `(x, y)`.
    #[inline]
    pub fn for_each_within<F: FnMut(usize, T)>(&self, x: T, y: T, ty: usize, r: T, mut f: F) {
        let r2 = r * r;
        let lo_x = self.cell_coord(x - r, self.x0, self.nx);
        let hi_x = self.cell_coord(x + r, self.x0, self.nx);
        let lo_y = self.cell_coord(y - r, self.y0, self.ny);
        let hi_y = self.cell_coord(y + r, self.y0, self.ny);
        for cy in lo_y..=hi_y {
            for cx in lo_x..=hi_x {
                for &j in &self.buckets[(cy * self.nx + cx) * self.n_types + ty] {
                    let j = j as usize;
                    let d2 = self.points[j].dist2(x, y);
                    if d2 <= r2 {
                        f(j, d2);
                    }
                }
            }
        }
    }

    /// Exact count of type-`target_type` points in the annulus `(r_lo, r_hi]` around `center`.
    pub fn count_annulus(
        &self,
        center: (T, T),
        target_type: usize,
        r_lo: T,
        r_hi: T,
        exclude: Option<usize>,
    ) -> Result<usize> {
        check_radii(r_lo, r_hi)?;
        let mut n = 0;
        self.for_each_within(center.0, center.1, target_type, r_hi, |j, d2| {
            if Some(j) != exclude && in_annulus(d2, r_lo, r_hi) {
                n += 1;
            }
        });
        Ok(n)
    }

    /// Moves point `i` to `(x, y)`, keeping its type.
    pub fn relocate(&mut self, i: usize, x: T, y: T) {
        let old = self.slot[i];
        let pos = self.buckets[old]
            .iter()
            .position(|&j| j as usize == i)
            .expect("indexed point present in its bucket");
        self.buckets[old].swap_remove(pos);
        self.points[i].x = x;
        self.points[i].y = y;
        let b = self.bucket_of(&self.points[i]);
        self.slot[i] = b;
        self.buckets[b].push(i as u32);
    }
}
