//! Principal-component reduction of covariate rasters.

use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::model::CovariateField;
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct PcaResult<T> {
    /// Component maps `X v_k` (left singular vectors scaled by singular values).
    pub components: Vec<CovariateField<T>>,
    /// Squared singular values of the standardised matrix, descending, for every component.
    pub eigenvalues: Vec<T>,
    /// Cumulative variance fraction after each component.
    pub cumulative: Vec<T>,
    /// Input rasters dropped for being constant.
    pub dropped: Vec<usize>,
    /// `loadings[k][c]`: weight of kept raster `c` in component `k`.
    pub loadings: Vec<Vec<T>>,
}

impl<T: Real> PcaResult<T> {
    /// Variance fraction captured by the returned components.
    pub fn captured(&self) -> T {
        self.components
            .len()
            .checked_sub(1)
            .map_or(T::zero(), |k| self.cumulative[k])
    }
}

/// Standardises each raster over its cells, then keeps the first `k` principal components.
pub fn pca_covariates<T: Real>(rasters: &[CovariateField<T>], k: usize) -> Result<PcaResult<T>> {
    let first = rasters.first().ok_or_else(|| Error::arg("no rasters to reduce"))?;
    if rasters.iter().any(|r| !r.same_geometry(first)) {
        return Err(Error::arg("rasters must share grid geometry"));
    }
    let cells = first.values.len();
    let n = T::from_usize_lossy(cells);
    let mut columns = Vec::new();
    let mut dropped = Vec::new();
    for (idx, r) in rasters.iter().enumerate() {
        let mean = r.values.iter().copied().sum::<T>() / n;
        let sd = (r.values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n).sqrt();
        if sd > T::zero() && sd.is_finite() {
            columns.push(r.values.iter().map(|&v| (v - mean) / sd).collect::<Vec<T>>());
        } else {
            log::warn!("covariate raster {} is constant and is left out of the PCA", idx + 1);
            dropped.push(idx);
        }
    }
    let m = columns.len();
    if k == 0 || k > m {
        return Err(Error::arg(format!("k = {k} must lie in 1..={m} (non-constant rasters)")));
    }
    let mut gram = vec![T::zero(); m * m];
    for a in 0..m {
        for b in a..m {
            let v: T = columns[a].iter().zip(&columns[b]).map(|(&x, &y)| x * y).sum();
            gram[a * m + b] = v;
            gram[b * m + a] = v;
        }
    }
    let (values, vectors) = sym_eigen(&gram, m);
    let eigenvalues: Vec<T> = values.iter().map(|&v| v.max(T::zero())).collect();
    let total: T = eigenvalues.iter().copied().sum();
    let mut acc = T::zero();
    let cumulative = eigenvalues
        .iter()
        .map(|&v| {
            acc += v;
            acc / total
        })
        .collect();
    let loadings: Vec<Vec<T>> = (0..k).map(|c| (0..m).map(|a| vectors[a * m + c]).collect()).collect();
    let components = loadings
        .iter()
        .map(|w| {
            let values = (0..cells).map(|i| (0..m).map(|a| columns[a][i] * w[a]).sum()).collect();
            CovariateField { values, ..first.clone() }
        })
        .collect();
    Ok(PcaResult {
        components,
        eigenvalues,
        cumulative,
        dropped,
        loadings,
    })
}
