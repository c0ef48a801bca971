//! Conditional-intensity statistics ω and sufficient statistics v(x).
//!
//! For a marked point `u = (x, i)` added to a pattern `X` (not containing `u`) the
//! change in the type-pair statistic for ring `k` is
//!
//! ```text
//! ω_ijk = g_ijk(u, X_j) + Σ_{y ∈ X_j} [ g_jik(y, X_i ∪ u) − g_jik(y, X_i) ]
//! ```
//!
//! with `g = ne` (Strauss) or `g = min(c, ne)` (saturation). Only pairs involving
//! the type of `u` change, so a design row touches just those groups.

use super::covariate::Covariates;
use super::spec::{Family, ModelSpec};
use crate::error::{Error, Result};
use crate::pattern::{in_annulus, MultiTypePattern, SpatialIndex};
use crate::scalar::Real;

pub(crate) const MAX_STEPS: usize = 16;

#[inline]
fn ring_of<T: Real>(d2: T, r: &[T]) -> Option<usize> {
    r.iter().position(|&rk| d2 <= rk * rk)
}

/// Raw annulus neighbour counts of every point of a fixed pattern.
///
/// The counts of a type-`a` point follow the ω layout of a type-`a` design row.
#[derive(Debug, Clone)]
pub struct RingCounts {
    offsets: Vec<usize>,
    values: Vec<u32>,
}

impl RingCounts {
    pub fn compute<T: Real>(spec: &ModelSpec<T>, index: &SpatialIndex<T>) -> Self {
        let layout = spec.layout();
        let pts = index.points();
        let mut offsets = Vec::with_capacity(pts.len() + 1);
        let mut values = Vec::new();
        for (yi, y) in pts.iter().enumerate() {
            offsets.push(values.len());
            let row = layout.type_row(y.ty);
            let base = values.len();
            values.resize(base + row.len() - row.beta_start(), 0);
            for b in 0..spec.n_types() {
                let Some(start) = row.pair_start[b] else { continue };
                let r = spec.ranges(y.ty, b);
                let slot = base + start - row.beta_start();
                index.for_each_within(y.x, y.y, b, *r.last().unwrap(), |zi, d2| {
                    if zi != yi {
                        values[slot + ring_of(d2, r).unwrap()] += 1;
                    }
                });
            }
        }
        offsets.push(values.len());
        Self { offsets, values }
    }

    /// Counts of point `y` laid out as the ω part of its design row.
    pub fn of(&self, y: usize) -> &[u32] {
        &self.values[self.offsets[y]..self.offsets[y + 1]]
    }
}

/// A conditioning pattern prepared for repeated ω evaluations.
#[derive(Debug, Clone)]
pub struct Neighbourhood<T> {
    index: SpatialIndex<T>,
    counts: Option<RingCounts>,
}

impl<T: Real> Neighbourhood<T> {
    /// Index only; each ω evaluation queries neighbours-of-neighbours directly.
    pub fn new(pattern: &MultiTypePattern<T>, spec: &ModelSpec<T>) -> Self {
        let index = SpatialIndex::build(pattern.window(), pattern.n_types(), pattern.points(), spec.max_range());
        Self { index, counts: None }
    }

    /// Also caches every point's ring counts, which makes ω for many query points cheap.
    pub fn with_ring_counts(pattern: &MultiTypePattern<T>, spec: &ModelSpec<T>) -> Self {
        let mut n = Self::new(pattern, spec);
        n.counts = Some(RingCounts::compute(spec, &n.index));
        n
    }

    pub fn from_index(index: SpatialIndex<T>) -> Self {
        Self { index, counts: None }
    }

    pub fn index(&self) -> &SpatialIndex<T> {
        &self.index
    }

    /// Mutable access drops any cached counts.
    pub fn index_mut(&mut self) -> &mut SpatialIndex<T> {
        self.counts = None;
        &mut self.index
    }

    /// ω for `u = ((x, y), ty)` given the pattern minus point `exclude`.
    ///
    /// `out` receives the ω part of a type-`ty` design row.
    pub fn omega_into(&self, spec: &ModelSpec<T>, x: T, y: T, ty: usize, exclude: Option<usize>, out: &mut [T]) {
        match (&self.counts, spec.family()) {
            (Some(counts), Family::Saturation) => {
                let layout = spec.layout();
                let pts = self.index.points();
                let included = u32::from(exclude.is_some());
                omega_impl(spec, &self.index, x, y, ty, exclude, out, |yi, k| {
                    let nb_row = layout.type_row(pts[yi].ty);
                    let local = nb_row.pair_start[ty].unwrap() - nb_row.beta_start() + k;
                    counts.of(yi)[local] - included
                })
            }
            _ => {
                let pts = self.index.points();
                omega_impl(spec, &self.index, x, y, ty, exclude, out, |yi, k| {
                    let nb = pts[yi];
                    let r = spec.ranges(nb.ty, ty);
                    let lo = if k == 0 { T::zero() } else { r[k - 1] };
                    let hi = r[k];
                    let mut n = 0u32;
                    self.index.for_each_within(nb.x, nb.y, ty, hi, |zi, d2| {
                        if zi != yi && Some(zi) != exclude && in_annulus(d2, lo, hi) {
                            n += 1;
                        }
                    });
                    n
                })
            }
        }
    }

    /// Full design row `[z(u); ω(u)]` for a type-`ty` point.
    pub fn row_into(
        &self,
        spec: &ModelSpec<T>,
        covariates: &Covariates<T>,
        x: T,
        y: T,
        ty: usize,
        exclude: Option<usize>,
        out: &mut [T],
    ) {
        let row = spec.layout().type_row(ty);
        let (z, w) = out.split_at_mut(row.beta_start());
        covariates.fill_row(spec.covariates(ty), x, y, z);
        self.omega_into(spec, x, y, ty, exclude, w);
    }

    /// `log λ_θ(u; X∖u)`.
    #[allow(clippy::too_many_arguments)]
    pub fn log_lambda(
        &self,
        spec: &ModelSpec<T>,
        covariates: &Covariates<T>,
        theta: &[T],
        x: T,
        y: T,
        ty: usize,
        exclude: Option<usize>,
        scratch: &mut Vec<T>,
    ) -> T {
        let row = spec.layout().type_row(ty);
        scratch.clear();
        scratch.resize(row.len(), T::zero());
        self.row_into(spec, covariates, x, y, ty, exclude, scratch);
        row.global.iter().zip(scratch.iter()).map(|(&g, &v)| theta[g] * v).sum()
    }
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn omega_impl<T: Real, F: Fn(usize, usize) -> u32>(
    spec: &ModelSpec<T>,
    index: &SpatialIndex<T>,
    x: T,
    y: T,
    ty: usize,
    exclude: Option<usize>,
    out: &mut [T],
    neighbour_count: F,
) {
    let row = spec.layout().type_row(ty);
    let saturating = spec.family() == Family::Saturation;
    for (j, start) in row.pair_start.iter().enumerate() {
        let Some(start) = *start else { continue };
        let local = start - row.beta_start();
        let r = spec.ranges(ty, j);
        let k_len = r.len();
        let c_own = spec.saturation(ty, j);
        let c_nb = spec.saturation(j, ty);
        let mut own = [0u32; MAX_STEPS];
        let mut nb = [0u32; MAX_STEPS];
        index.for_each_within(x, y, j, r[k_len - 1], |yi, d2| {
            if Some(yi) == exclude {
                return;
            }
            let k = ring_of(d2, r).unwrap();
            own[k] += 1;
            if !saturating || neighbour_count(yi, k) < c_nb[k] {
                nb[k] += 1;
            }
        });
        for k in 0..k_len {
            let g = if saturating { own[k].min(c_own[k]) } else { own[k] };
            out[local + k] = T::from_u32(g + nb[k]).unwrap();
        }
    }
}

/// ω statistics for a marked point `u = (location, ty)` relative to `pattern`, which
/// must not contain `u`.
pub fn omega<T: Real>(location: (T, T), ty: usize, pattern: &MultiTypePattern<T>, spec: &ModelSpec<T>) -> Result<Vec<T>> {
    check_query(location, ty, pattern, spec)?;
    let n = Neighbourhood::new(pattern, spec);
    let row = spec.layout().type_row(ty);
    let mut out = vec![T::zero(); row.len() - row.beta_start()];
    n.omega_into(spec, location.0, location.1, ty, None, &mut out);
    Ok(out)
}

/// `log λ_θ(u; X) = z(u)ᵀα_i + Σ β_ijk ω_ijk(u, X_j)` for `u` not in `pattern`.
pub fn log_conditional_intensity<T: Real>(
    location: (T, T),
    ty: usize,
    pattern: &MultiTypePattern<T>,
    spec: &ModelSpec<T>,
    theta: &[T],
    covariates: &Covariates<T>,
) -> Result<T> {
    check_query(location, ty, pattern, spec)?;
    if theta.len() != spec.layout().len() {
        return Err(Error::arg(format!(
            "theta has length {}, model needs {}",
            theta.len(),
            spec.layout().len()
        )));
    }
    let n = Neighbourhood::new(pattern, spec);
    let mut scratch = Vec::new();
    Ok(n.log_lambda(spec, covariates, theta, location.0, location.1, ty, None, &mut scratch))
}

fn check_query<T: Real>(location: (T, T), ty: usize, pattern: &MultiTypePattern<T>, spec: &ModelSpec<T>) -> Result<()> {
    if !pattern.window().contains(location.0, location.1) {
        return Err(Error::arg("query point lies outside the window"));
    }
    if ty >= spec.n_types() || pattern.n_types() != spec.n_types() {
        return Err(Error::arg("type index does not match the model"));
    }
    Ok(())
}

/// Sufficient statistic `v(x)`: per-type covariate sums and the summed interaction
/// functions, both orientations of an inter-type pair feeding the shared group.
pub fn sufficient_statistics<T: Real>(
    pattern: &MultiTypePattern<T>,
    spec: &ModelSpec<T>,
    covariates: &Covariates<T>,
) -> Vec<T> {
    let layout = spec.layout();
    let index = SpatialIndex::build(pattern.window(), pattern.n_types(), pattern.points(), spec.max_range());
    let counts = RingCounts::compute(spec, &index);
    let mut v = vec![T::zero(); layout.len()];
    let mut z = Vec::new();
    let saturating = spec.family() == Family::Saturation;
    for (yi, y) in pattern.points().iter().enumerate() {
        let row = layout.type_row(y.ty);
        z.clear();
        z.resize(row.beta_start(), T::zero());
        covariates.fill_row(spec.covariates(y.ty), y.x, y.y, &mut z);
        for (c, &g) in z.iter().zip(&row.global) {
            v[g] += *c;
        }
        let ring = counts.of(yi);
        for j in 0..spec.n_types() {
            let Some(start) = row.pair_start[j] else { continue };
            let local = start - row.beta_start();
            let sat = spec.saturation(y.ty, j);
            for k in 0..sat.len() {
                let ne = ring[local + k];
                let g = if saturating { ne.min(sat[k]) } else { ne };
                v[row.global[start + k]] += T::from_u32(g).unwrap();
            }
        }
    }
    v
}
