use super::solver::{norm, FitResult, GroupLasso};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `n` log-equidistant penalties from `gamma_max` down to `ratio · gamma_max`.
///
/// A zero `gamma_max` (nothing to select) gives the single grid point 0.
pub fn log_grid<T: Real>(gamma_max: T, n: usize, ratio: T) -> Result<Vec<T>> {
    if n == 0 || !(ratio > T::zero() && ratio < T::one()) {
        return Err(Error::arg("grid needs n >= 1 and a floor ratio in (0, 1)"));
    }
    if !(gamma_max >= T::zero()) || !gamma_max.is_finite() {
        return Err(Error::arg("gamma_max must be finite and non-negative"));
    }
    if gamma_max == T::zero() {
        return Ok(vec![T::zero()]);
    }
    if n == 1 {
        return Ok(vec![gamma_max]);
    }
    let step = ratio.ln() / T::from_usize_lossy(n - 1);
    Ok((0..n)
        .map(|k| if k == 0 { gamma_max } else { gamma_max * (step * T::from_usize_lossy(k)).exp() })
        .collect())
}

/// One solved grid point with its information criterion.
#[derive(Debug, Clone)]
pub struct PathPoint<T> {
    pub fit: FitResult<T>,
    pub df: T,
    pub aic: T,
}

#[derive(Debug, Clone)]
pub struct PenaltyPath<T> {
    pub gamma_max: T,
    pub points: Vec<PathPoint<T>>,
}

impl<T: Real> PenaltyPath<T> {
    pub fn grid(&self) -> Vec<T> {
        self.points.iter().map(|p| p.fit.gamma).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index minimizing AIC among converged points; ties go to the smaller γ.
    pub fn aic_index(&self) -> usize {
        let usable: Vec<usize> = {
            let conv: Vec<usize> = (0..self.len()).filter(|&k| self.points[k].fit.converged).collect();
            if conv.is_empty() {
                (0..self.len()).collect()
            } else {
                conv
            }
        };
        let mut best = usable[0];
        for &k in &usable[1..] {
            if self.points[k].aic <= self.points[best].aic {
                best = k;
            }
        }
        best
    }

    /// Grid point nearest `(γ_AIC + γ_max)/2`.
    pub fn aic05_index(&self) -> usize {
        let g_aic = self.points[self.aic_index()].fit.gamma;
        let target = (g_aic + self.gamma_max) * T::lit(0.5);
        let mut best = 0;
        for k in 1..self.len() {
            if (self.points[k].fit.gamma - target).abs() < (self.points[best].fit.gamma - target).abs() {
                best = k;
            }
        }
        best
    }
}

/// Breheny–Huang effective degrees of freedom.
pub fn effective_df<T: Real>(solver: &GroupLasso<'_, T>, fit: &FitResult<T>) -> T {
    let layout = solver.design().layout();
    let mut df = T::from_usize_lossy(solver.unpenalized_count());
    for (gi, g) in layout.groups().iter().enumerate() {
        if !g.penalized || !fit.active[gi] {
            continue;
        }
        let est = norm(&fit.theta[g.range()]);
        let free = norm(&solver.unpenalized_group_solution(fit, gi));
        let ratio = if free > T::zero() { (est / free).min(T::one()) } else { T::one() };
        df += T::one() + T::from_usize_lossy(g.len - 1) * ratio;
    }
    df
}

/// `−2 ℓ(θ̂) + 2 df`.
pub fn aic<T: Real>(solver: &GroupLasso<'_, T>, fit: &FitResult<T>) -> T {
    T::lit(-2.0) * fit.loglik + T::lit(2.0) * effective_df(solver, fit)
}

/// Solves the path with warm starts. Points that hit the iteration limit are kept
/// and flagged through `FitResult::converged`.
pub fn fit_path<T: Real>(solver: &GroupLasso<'_, T>, grid: &[T], gamma_max: T, start: Option<&[T]>) -> Result<PenaltyPath<T>> {
    if grid.is_empty() {
        return Err(Error::arg("empty penalty grid"));
    }
    if grid.iter().any(|&g| !(g >= T::zero()) || !g.is_finite()) || grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::arg("penalty grid must be non-negative and strictly decreasing"));
    }
    let mut warm: Option<Vec<T>> = start.map(<[T]>::to_vec);
    let mut points = Vec::with_capacity(grid.len());
    for &gamma in grid {
        let fit = solver.fit(gamma, warm.as_deref());
        if !fit.converged {
            log::warn!("penalty {gamma}: no convergence after {} iterations (KKT {})", fit.iterations, fit.kkt);
        }
        let df = effective_df(solver, &fit);
        let aic = T::lit(-2.0) * fit.loglik + T::lit(2.0) * df;
        warm = Some(fit.theta.clone());
        points.push(PathPoint { fit, df, aic });
    }
    Ok(PenaltyPath { gamma_max, points })
}
