//! Rectangular windows, labelled point patterns and annulus neighbour counting.

mod index;
mod window;

pub use index::SpatialIndex;
pub use window::Window;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A located point with a 0-based type index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
    pub ty: usize,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T, ty: usize) -> Self {
        Self { x, y, ty }
    }

    #[inline]
    pub fn dist2(&self, x: T, y: T) -> T {
        let dx = self.x - x;
        let dy = self.y - y;
        dx * dx + dy * dy
    }
}

/// Membership in the annulus `(r_lo, r_hi]`.
///
/// The innermost annulus (`r_lo == 0`) also contains distance zero so that
/// coincident points count as neighbours; self-exclusion is by identity.
#[inline]
pub fn in_annulus<T: Real>(d2: T, r_lo: T, r_hi: T) -> bool {
    d2 <= r_hi * r_hi && (r_lo == T::zero() || d2 > r_lo * r_lo)
}

pub(crate) fn check_radii<T: Real>(r_lo: T, r_hi: T) -> Result<()> {
    if !(r_lo >= T::zero()) || !(r_hi > r_lo) || !r_hi.is_finite() {
        return Err(Error::arg(format!(
            "annulus radii must satisfy 0 <= r_lo < r_hi, got ({r_lo}, {r_hi})"
        )));
    }
    Ok(())
}

/// A multitype point pattern observed in a rectangular window.
///
/// Types are stored 0-based; `labels[i]` is the external name of type `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiTypePattern<T> {
    window: Window<T>,
    n_types: usize,
    points: Vec<Point<T>>,
    labels: Vec<String>,
}

impl<T: Real> MultiTypePattern<T> {
    pub fn new(window: Window<T>, n_types: usize, points: Vec<Point<T>>) -> Result<Self> {
        let labels = (1..=n_types).map(|i| i.to_string()).collect();
        Self::with_labels(window, points, labels)
    }

    pub fn with_labels(window: Window<T>, points: Vec<Point<T>>, labels: Vec<String>) -> Result<Self> {
        let n_types = labels.len();
        if n_types == 0 {
            return Err(Error::arg("a pattern needs at least one type"));
        }
        for (i, p) in points.iter().enumerate() {
            if p.ty >= n_types {
                return Err(Error::arg(format!(
                    "point {i} has type index {} but only {n_types} types exist",
                    p.ty
                )));
            }
            if !window.contains(p.x, p.y) {
                return Err(Error::arg(format!(
                    "point {i} at ({}, {}) lies outside the window",
                    p.x, p.y
                )));
            }
        }
        Ok(Self {
            window,
            n_types,
            points,
            labels,
        })
    }

    pub fn empty(window: Window<T>, n_types: usize) -> Self {
        Self::new(window, n_types, Vec::new()).expect("empty pattern is valid")
    }

    pub fn window(&self) -> &Window<T> {
        &self.window
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn set_labels(&mut self, labels: Vec<String>) -> Result<()> {
        if labels.len() != self.n_types {
            return Err(Error::arg("label count must equal the type count"));
        }
        self.labels = labels;
        Ok(())
    }

    /// Per-type point counts `n_i`.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_types];
        for p in &self.points {
            c[p.ty] += 1;
        }
        c
    }

    /// The locations of type `ty`.
    pub fn of_type(&self, ty: usize) -> Vec<Point<T>> {
        self.points.iter().filter(|p| p.ty == ty).copied().collect()
    }

    /// Points located inside `region` (closed rectangle); the type index is preserved.
    pub fn subset_in_region(&self, region: &Window<T>) -> Self {
        Self {
            window: self.window,
            n_types: self.n_types,
            points: self
                .points
                .iter()
                .filter(|p| region.contains(p.x, p.y))
                .copied()
                .collect(),
            labels: self.labels.clone(),
        }
    }

    /// Number of type-`target_type` points at distance in `(r_lo, r_hi]` from `center`.
    ///
    /// `exclude` removes one point by index, used when `center` is itself a pattern point.
    pub fn count_annulus_neighbours(
        &self,
        center: (T, T),
        target_type: usize,
        r_lo: T,
        r_hi: T,
        exclude: Option<usize>,
    ) -> Result<usize> {
        check_radii(r_lo, r_hi)?;
        let index = SpatialIndex::build(&self.window, self.n_types, &self.points, r_hi);
        index.count_annulus(center, target_type, r_lo, r_hi, exclude)
    }

    /// Concatenates two patterns over the same window and type set.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.n_types != other.n_types || self.window != other.window {
            return Err(Error::arg("patterns must share window and type count"));
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        Ok(Self {
            window: self.window,
            n_types: self.n_types,
            points,
            labels: self.labels.clone(),
        })
    }

    /// Converts the scalar type of every coordinate.
    pub fn cast<U: Real>(&self) -> MultiTypePattern<U> {
        MultiTypePattern {
            window: self.window.cast(),
            n_types: self.n_types,
            points: self
                .points
                .iter()
                .map(|p| Point::new(U::lit(p.x.to_f64_lossy()), U::lit(p.y.to_f64_lossy()), p.ty))
                .collect(),
            labels: self.labels.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_window() -> Window<f64> {
        Window::new(0.0, 10.0, 0.0, 10.0).unwrap()
    }

    #[test]
    fn empty_pattern_counts_zero() {
        let pat = MultiTypePattern::empty(unit_window(), 2);
        assert_eq!(pat.count_annulus_neighbours((5.0, 5.0), 0, 0.0, 3.0, None).unwrap(), 0);
    }

    #[test]
    fn boundary_distance_is_included() {
        let w = Window::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let pat = MultiTypePattern::new(w, 1, vec![Point::new(0.3, 0.0, 0)]).unwrap();
        assert_eq!(pat.count_annulus_neighbours((0.0, 0.0), 0, 0.0, 0.3, None).unwrap(), 1);
        // Lower bound is open.
        assert_eq!(pat.count_annulus_neighbours((0.0, 0.0), 0, 0.3, 0.5, None).unwrap(), 0);
    }

    #[test]
    fn invalid_radii_rejected() {
        let pat = MultiTypePattern::empty(unit_window(), 1);
        assert!(pat.count_annulus_neighbours((1.0, 1.0), 0, 0.5, 0.5, None).is_err());
        assert!(pat.count_annulus_neighbours((1.0, 1.0), 0, -0.1, 0.5, None).is_err());
    }

    #[test]
    fn coincident_points_are_neighbours_but_self_is_not() {
        let pts = vec![Point::new(2.0, 2.0, 0), Point::new(2.0, 2.0, 0)];
        let pat = MultiTypePattern::new(unit_window(), 1, pts).unwrap();
        assert_eq!(pat.count_annulus_neighbours((2.0, 2.0), 0, 0.0, 1.0, Some(0)).unwrap(), 1);
        assert_eq!(pat.count_annulus_neighbours((2.0, 2.0), 0, 0.0, 1.0, None).unwrap(), 2);
    }

    #[test]
    fn points_outside_window_rejected() {
        let r = MultiTypePattern::new(unit_window(), 1, vec![Point::new(11.0, 1.0, 0)]);
        assert!(r.is_err());
        let r = MultiTypePattern::new(unit_window(), 1, vec![Point::new(1.0, 1.0, 1)]);
        assert!(r.is_err());
    }

    #[test]
    fn subset_full_and_disjoint() {
        let pts: Vec<_> = (0..10).map(|i| Point::new(i as f64 + 0.5, 5.0, i % 3)).collect();
        let pat = MultiTypePattern::new(unit_window(), 3, pts).unwrap();
        assert_eq!(pat.subset_in_region(pat.window()), pat);
        let far = Window::new(20.0, 30.0, 20.0, 30.0).unwrap();
        let sub = pat.subset_in_region(&far);
        assert_eq!(sub.len(), 0);
        assert_eq!(sub.n_types(), 3);
    }

    #[test]
    fn subset_halves_partition_the_points() {
        let pts: Vec<_> = (0..10)
            .map(|i| Point::new(0.37 + i as f64 * 0.93, (i * 7 % 10) as f64 + 0.2, 0))
            .collect();
        let pat = MultiTypePattern::new(unit_window(), 1, pts).unwrap();
        // Enumerate directly: the cut at x = 5 is not hit by any coordinate.
        let left_expected = pat.points().iter().filter(|p| p.x < 5.0).count();
        let left = pat.subset_in_region(&Window::new(0.0, 5.0, 0.0, 10.0).unwrap());
        let right = pat.subset_in_region(&Window::new(5.0, 10.0, 0.0, 10.0).unwrap());
        assert_eq!(left.len(), left_expected);
        assert_eq!(left.len() + right.len(), 10);
    }
}
