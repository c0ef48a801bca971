use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window<T> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Real> Window<T> {
    pub fn new(x_min: T, x_max: T, y_min: T, y_max: T) -> Result<Self> {
        if !(x_min < x_max) || !(y_min < y_max) {
            return Err(Error::DegenerateWindow(format!(
                "[{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    pub fn width(&self) -> T {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> T {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    #[inline]
    pub fn contains(&self, x: T, y: T) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    /// Minkowski erosion by a disc of radius `r_bor`.
    pub fn erode(&self, r_bor: T) -> Result<Self> {
        if !(r_bor >= T::zero()) {
            return Err(Error::arg(format!("erosion radius must be >= 0, got {r_bor}")));
        }
        Self::new(
            self.x_min + r_bor,
            self.x_max - r_bor,
            self.y_min + r_bor,
            self.y_max - r_bor,
        )
    }

    /// Enlarges each side by `r`.
    pub fn dilate(&self, r: T) -> Self {
        Self {
            x_min: self.x_min - r,
            x_max: self.x_max + r,
            y_min: self.y_min - r,
            y_max: self.y_max + r,
        }
    }

    pub fn intersection_area(&self, other: &Self) -> T {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w > T::zero() && h > T::zero() {
            w * h
        } else {
            T::zero()
        }
    }

    pub fn cast<U: Real>(&self) -> Window<U> {
        Window {
            x_min: U::lit(self.x_min.to_f64_lossy()),
            x_max: U::lit(self.x_max.to_f64_lossy()),
            y_min: U::lit(self.y_min.to_f64_lossy()),
            y_max: U::lit(self.y_max.to_f64_lossy()),
        }
    }
}
