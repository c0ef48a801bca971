use crate::error::{Error, Result};
use crate::pattern::Window;
use crate::scalar::Real;

/// `n` equally spaced distances from `lo` to `hi` inclusive.
pub fn linear_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![hi],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1))
            .collect(),
    }
}

/// Translation edge-correction weight `|W| / |W ∩ (W + h)|` for the lag `h = (dx, dy)`.
#[inline]
pub fn translation_weight<T: Real>(window: &Window<T>, dx: T, dy: T) -> T {
    let (w, h) = (window.width(), window.height());
    w * h / ((w - dx.abs()) * (h - dy.abs()))
}

fn check_grid<T: Real>(window: &Window<T>, r: &[T]) -> Result<()> {
    let half = window.width().min(window.height()) * T::lit(0.5);
    let mut prev = T::neg_infinity();
    for &v in r {
        if !(v >= T::zero()) || !(v > prev) {
            return Err(Error::arg("distance grid must be non-negative and increasing"));
        }
        prev = v;
    }
    match r.last() {
        None => Err(Error::arg("empty distance grid")),
        Some(&m) if m >= half => Err(Error::arg(format!("largest distance {m} must be below half the shorter side ({half})"))),
        _ => Ok(()),
    }
}

/// Cross-K `K̂_ij(r)` of `xj` around `xi` with translation edge correction. With
/// `xj = None` it is the univariate estimator of `xi` (self pairs excluded, normalised
/// by `n(n − 1)`).
pub fn cross_k<T: Real>(xi: &[(T, T)], xj: Option<&[(T, T)]>, window: &Window<T>, r: &[T]) -> Result<Vec<T>> {
    check_grid(window, r)?;
    let same = xj.is_none();
    let xj = xj.unwrap_or(xi);
    let (ni, nj) = (xi.len(), xj.len());
    if ni == 0 || nj == 0 || (same && ni < 2) {
        return Err(Error::UndefinedCurve("K needs non-empty types (two points for the univariate case)".into()));
    }
    let rmax = *r.last().expect("checked");
    let mut order: Vec<usize> = (0..nj).collect();
    order.sort_by(|&a, &b| xj[a].0.partial_cmp(&xj[b].0).expect("finite coordinates"));
    let sx: Vec<T> = order.iter().map(|&k| xj[k].0).collect();
    let mut pairs: Vec<(T, T)> = Vec::new();
    for (a, &(x, y)) in xi.iter().enumerate() {
        let lo = sx.partition_point(|&v| v < x - rmax);
        let hi = sx.partition_point(|&v| v <= x + rmax);
        for &b in &order[lo..hi] {
            if same && a == b {
                continue;
            }
            let (dx, dy) = (xj[b].0 - x, xj[b].1 - y);
            let d2 = dx * dx + dy * dy;
            if d2 <= rmax * rmax {
                pairs.push((d2, translation_weight(window, dx, dy)));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances"));
    let denom = if same {
        T::from_usize_lossy(ni) * T::from_usize_lossy(ni - 1)
    } else {
        T::from_usize_lossy(ni) * T::from_usize_lossy(nj)
    };
    let scale = window.area() / denom;
    let mut out = Vec::with_capacity(r.len());
    let (mut k, mut acc) = (0, T::zero());
    for &rv in r {
        while k < pairs.len() && pairs[k].0 <= rv * rv {
            acc += pairs[k].1;
            k += 1;
        }
        out.push(acc * scale);
    }
    Ok(out)
}
