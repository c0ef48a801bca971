//! Spatially blocked cross-validation of the penalty.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lasso::{fit_path, GroupLasso, PenaltyPath, SolverOptions};
use crate::pattern::Window;
use crate::pseudolik::{DesignData, RowSource};
use crate::scalar::Real;

/// `k_x × k_y` equal quadrats with their border-eroded evaluation regions.
#[derive(Debug, Clone)]
pub struct Partition<T> {
    window: Window<T>,
    kx: usize,
    ky: usize,
    r_bor: T,
    quadrats: Vec<Window<T>>,
    eroded: Vec<Window<T>>,
}

/// Tiles `w` into `kx × ky` quadrats, each eroded by `r_bor` for evaluation.
pub fn partition_window<T: Real>(w: &Window<T>, kx: usize, ky: usize, r_bor: T) -> Result<Partition<T>> {
    if kx == 0 || ky == 0 {
        return Err(Error::Partition("need at least one quadrat per axis".into()));
    }
    let dx = w.width() / T::from_usize_lossy(kx);
    let dy = w.height() / T::from_usize_lossy(ky);
    let mut quadrats = Vec::with_capacity(kx * ky);
    let mut eroded = Vec::with_capacity(kx * ky);
    for iy in 0..ky {
        for ix in 0..kx {
            let x0 = w.x_min + dx * T::from_usize_lossy(ix);
            let y0 = w.y_min + dy * T::from_usize_lossy(iy);
            let x1 = if ix + 1 == kx { w.x_max } else { x0 + dx };
            let y1 = if iy + 1 == ky { w.y_max } else { y0 + dy };
            let q = Window::new(x0, x1, y0, y1)?;
            let e = q.erode(r_bor).map_err(|_| {
                Error::Partition(format!(
                    "quadrat {} vanishes after erosion by {r_bor}; use fewer splits",
                    quadrats.len() + 1
                ))
            })?;
            quadrats.push(q);
            eroded.push(e);
        }
    }
    Ok(Partition {
        window: *w,
        kx,
        ky,
        r_bor,
        quadrats,
        eroded,
    })
}

impl<T: Real> Partition<T> {
    pub fn len(&self) -> usize {
        self.quadrats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quadrats.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.kx, self.ky)
    }

    pub fn r_bor(&self) -> T {
        self.r_bor
    }

    pub fn quadrat(&self, k: usize) -> &Window<T> {
        &self.quadrats[k]
    }

    pub fn eroded(&self, k: usize) -> &Window<T> {
        &self.eroded[k]
    }

    /// Quadrat holding `(x, y)`; points on a shared edge go to the higher tile.
    pub fn quadrat_of(&self, x: T, y: T) -> usize {
        let w = &self.window;
        let fx = ((x - w.x_min) / w.width() * T::from_usize_lossy(self.kx)).floor();
        let fy = ((y - w.y_min) / w.height() * T::from_usize_lossy(self.ky)).floor();
        let ix = fx.to_usize().unwrap_or(0).min(self.kx - 1);
        let iy = fy.to_usize().unwrap_or(0).min(self.ky - 1);
        iy * self.kx + ix
    }

    /// Fraction of the window outside every eroded quadrat.
    pub fn loss_fraction(&self) -> T {
        let kept: T = self.eroded.iter().map(Window::area).sum();
        T::one() - kept / self.window.area()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualKind {
    Raw,
    Inverse,
    Pearson,
}

impl ResidualKind {
    pub const ALL: [ResidualKind; 3] = [ResidualKind::Raw, ResidualKind::Inverse, ResidualKind::Pearson];

    pub fn name(self) -> &'static str {
        match self {
            ResidualKind::Raw => "raw",
            ResidualKind::Inverse => "inverse",
            ResidualKind::Pearson => "pearson",
        }
    }

    /// Test function `h` at intensity `λ`, with `0/0 := 0`.
    fn h<T: Real>(self, lambda: T) -> T {
        match self {
            ResidualKind::Raw => T::one(),
            _ if lambda <= T::zero() || !lambda.is_finite() => T::zero(),
            ResidualKind::Inverse => T::one() / lambda,
            ResidualKind::Pearson => T::one() / lambda.sqrt(),
        }
    }
}

/// CV h-residual of quadrat `k`: over types, data terms in `W_k ⊖ r_bor` minus the
/// integral of `h·λ` there (exact for the inverse kind, dummy-based otherwise).
pub fn h_residual<T: Real>(
    eval: &DesignData<T>,
    region: &Window<T>,
    rho: &[T],
    theta: &[T],
    kind: ResidualKind,
    type_weights: Option<&[T]>,
) -> T {
    let mut total = T::zero();
    let eta = eval.linear_predictor(theta);
    for (e, b) in eta.iter().zip(eval.blocks()) {
        let mut data = T::zero();
        let mut integral = T::zero();
        for r in 0..b.n_rows() {
            if !region.contains(b.x[r], b.y[r]) {
                continue;
            }
            let lambda = (e[r] - b.offset).exp();
            match b.source[r] {
                RowSource::Data(_) => data += kind.h(lambda),
                RowSource::Dummy(_) if kind != ResidualKind::Inverse => {
                    integral += kind.h(lambda) * lambda / rho[b.ty];
                }
                RowSource::Dummy(_) => {}
            }
        }
        if kind == ResidualKind::Inverse {
            integral = region.area();
        }
        let w = type_weights.map_or(T::one(), |w| w[b.ty]);
        total += w * (data - integral);
    }
    total
}

/// Path fitted with one quadrat held out.
#[derive(Debug, Clone)]
pub struct FoldPath<T> {
    pub fold: usize,
    pub path: PenaltyPath<T>,
    pub dropped: bool,
}

/// Fits the full grid once per quadrat on the rows outside it. Folds run in
/// parallel on the current rayon pool; results come back in fold order.
pub fn cv_paths<T: Real>(
    design: &DesignData<T>,
    grid: &[T],
    gamma_max: T,
    partition: &Partition<T>,
    options: SolverOptions,
) -> Result<Vec<FoldPath<T>>> {
    cv_paths_with(partition, grid, gamma_max, options, |k| {
        Ok(design.filter_rows(|x, y| partition.quadrat_of(x, y) != k))
    })
}

/// Like [`cv_paths`] with caller-built training designs (e.g. fresh dummies per fold).
pub fn cv_paths_with<T: Real, F>(
    partition: &Partition<T>,
    grid: &[T],
    gamma_max: T,
    options: SolverOptions,
    train: F,
) -> Result<Vec<FoldPath<T>>>
where
    F: Fn(usize) -> Result<DesignData<T>> + Sync,
{
    if partition.len() < 2 {
        return Err(Error::Partition("cross-validation needs at least two quadrats".into()));
    }
    let folds: Vec<Result<FoldPath<T>>> = (0..partition.len())
        .into_par_iter()
        .map(|k| {
            let d = train(k)?;
            // A type with no training points has no finite intercept estimate.
            if let Some(b) = d.blocks().iter().find(|b| !b.response.iter().any(|&t| t > T::zero())) {
                log::warn!("fold {}: type {} has no training points; fold dropped", k + 1, b.ty);
                return Ok(FoldPath { fold: k, path: PenaltyPath { gamma_max, points: Vec::new() }, dropped: true });
            }
            let solver = GroupLasso::new(&d, options);
            let start = solver.fit(T::infinity(), None);
            let path = fit_path(&solver, grid, gamma_max, Some(&start.theta))?;
            let dropped = path.points.iter().all(|p| !p.fit.converged);
            if dropped {
                log::warn!("fold {}: no grid point converged; fold dropped", k + 1);
            }
            Ok(FoldPath { fold: k, path, dropped })
        })
        .collect();
    let folds = folds.into_iter().collect::<Result<Vec<_>>>()?;
    if folds.iter().all(|f| f.dropped) {
        return Err(Error::Solver("every cross-validation fold failed to converge".into()));
    }
    Ok(folds)
}

/// Risk curve and selection for one residual kind.
#[derive(Debug, Clone)]
pub struct CvSelection<T> {
    pub kind: ResidualKind,
    pub grid: Vec<T>,
    /// `residuals[f][g]` for retained fold `folds[f]`.
    pub residuals: Vec<Vec<T>>,
    pub folds: Vec<usize>,
    pub risk: Vec<T>,
    pub selected: usize,
}

impl<T: Real> CvSelection<T> {
    pub fn gamma(&self) -> T {
        self.grid[self.selected]
    }

    pub fn write_folds_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "fold,gamma,residual,squared")?;
        for (f, res) in self.folds.iter().zip(&self.residuals) {
            for (g, r) in self.grid.iter().zip(res) {
                writeln!(out, "{},{},{},{}", f + 1, g, r, *r * *r)?;
            }
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "gamma,risk,selected")?;
        for (k, (g, r)) in self.grid.iter().zip(&self.risk).enumerate() {
            writeln!(out, "{},{},{}", g, r, u8::from(k == self.selected))?;
        }
        Ok(())
    }
}

/// Mean squared residual per grid point; the minimizer with ties to the largest γ
/// (grid assumed decreasing, so the first minimizer).
pub fn cv_risk<T: Real>(residuals: &[Vec<T>]) -> (Vec<T>, usize) {
    let n = residuals.first().map_or(0, Vec::len);
    let k = T::from_usize_lossy(residuals.len());
    let risk: Vec<T> = (0..n).map(|g| residuals.iter().map(|r| r[g] * r[g]).sum::<T>() / k).collect();
    let mut best = 0;
    for g in 1..n {
        if risk[g] < risk[best] {
            best = g;
        }
    }
    (risk, best)
}

/// Scores fold paths with the chosen residual on the full design.
pub fn cv_select<T: Real>(
    design: &DesignData<T>,
    rho: &[T],
    partition: &Partition<T>,
    folds: &[FoldPath<T>],
    kind: ResidualKind,
    type_weights: Option<&[T]>,
) -> Result<CvSelection<T>> {
    if partition.r_bor() < design.r_bor() {
        return Err(Error::arg("partition border must be at least the design border"));
    }
    let kept: Vec<&FoldPath<T>> = folds.iter().filter(|f| !f.dropped).collect();
    if kept.is_empty() {
        return Err(Error::Solver("no usable cross-validation folds".into()));
    }
    let grid = kept[0].path.grid();
    let residuals: Vec<Vec<T>> = kept
        .par_iter()
        .map(|f| {
            let region = partition.eroded(f.fold);
            let eval = design.filter_rows(|x, y| region.contains(x, y));
            f.path
                .points
                .iter()
                .map(|p| h_residual(&eval, region, rho, &p.fit.theta, kind, type_weights))
                .collect()
        })
        .collect();
    let (risk, selected) = cv_risk(&residuals);
    Ok(CvSelection {
        kind,
        grid,
        residuals,
        folds: kept.iter().map(|f| f.fold).collect(),
        risk,
        selected,
    })
}
