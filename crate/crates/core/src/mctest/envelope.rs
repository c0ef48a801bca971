use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A data curve and `s` null curves on a shared distance grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSet {
    r: Vec<f64>,
    data: Vec<f64>,
    sims: Vec<Vec<f64>>,
    transformed: bool,
}

impl CurveSet {
    pub fn new(r: Vec<f64>, data: Vec<f64>, sims: Vec<Vec<f64>>) -> Result<Self> {
        if sims.is_empty() {
            return Err(Error::arg("need at least one simulated curve"));
        }
        if data.len() != r.len() || sims.iter().any(|c| c.len() != r.len()) {
            return Err(Error::arg("all curves must share the distance grid"));
        }
        Ok(Self {
            r,
            data,
            sims,
            transformed: false,
        })
    }

    /// Applies `√(K/π)` to every curve (idempotent).
    pub fn sqrt_transform(mut self) -> Self {
        if !self.transformed {
            let f = |v: &mut f64| *v = (v.max(0.0) / std::f64::consts::PI).sqrt();
            self.data.iter_mut().for_each(f);
            self.sims.iter_mut().flatten().for_each(f);
            self.transformed = true;
        }
        self
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn sims(&self) -> &[Vec<f64>] {
        &self.sims
    }

    pub fn s(&self) -> usize {
        self.sims.len()
    }

    pub fn is_transformed(&self) -> bool {
        self.transformed
    }

    fn curve(&self, b: usize) -> &[f64] {
        if b == 0 {
            &self.data
        } else {
            &self.sims[b - 1]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudentisedResult {
    pub p: f64,
    pub statistic: f64,
    /// Grid indices skipped because the null curves do not vary there.
    pub dropped: Vec<usize>,
}

/// `L²` Studentised deviation test: `T_b = Σ_r ((K_b − m)/sd)²` with `m`, `sd` from
/// the null curves, `p = (1 + #{b ≥ 1 : T_b ≥ T_0}) / (s + 1)`.
pub fn studentised_test(curves: &CurveSet) -> Result<StudentisedResult> {
    let s = curves.s();
    if s < 2 {
        return Err(Error::arg("the Studentised test needs at least two simulations"));
    }
    let nr = curves.r.len();
    let mut mean = vec![0.0; nr];
    for c in &curves.sims {
        mean.iter_mut().zip(c).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= s as f64);
    let mut sd = vec![0.0; nr];
    for c in &curves.sims {
        sd.iter_mut().zip(c.iter().zip(&mean)).for_each(|(q, (v, m))| *q += (v - m).powi(2));
    }
    sd.iter_mut().for_each(|q| *q = (*q / (s - 1) as f64).sqrt());
    let dropped: Vec<usize> = (0..nr).filter(|&k| !(sd[k] > 0.0)).collect();
    if !dropped.is_empty() {
        log::warn!("Studentised test: {} of {nr} distances have zero null variance and are skipped", dropped.len());
    }
    let stat = |c: &[f64]| -> f64 {
        (0..nr)
            .filter(|&k| sd[k] > 0.0)
            .map(|k| ((c[k] - mean[k]) / sd[k]).powi(2))
            .sum()
    };
    let t0 = stat(&curves.data);
    let more = curves.sims.iter().filter(|c| stat(c) >= t0).count();
    Ok(StudentisedResult {
        p: (1 + more) as f64 / (s + 1) as f64,
        statistic: t0,
        dropped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankOrdering {
    /// Extreme rank length: ties in the extreme rank are broken by the next most
    /// extreme pointwise ranks, so the p-interval is almost always a point.
    #[default]
    Erl,
    /// Minimum pointwise rank only; heavy ties, very conservative upper bound.
    Classic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankResult {
    pub p_lower: f64,
    pub p_upper: f64,
    /// The data curve's minimum two-sided pointwise rank.
    pub extreme_rank: usize,
}

/// Two-sided pointwise ranks of all `s + 1` curves; ties count against extremity.
fn pointwise_ranks(curves: &CurveSet) -> Vec<Vec<usize>> {
    let n = curves.s() + 1;
    let nr = curves.r.len();
    let mut ranks = vec![vec![0usize; nr]; n];
    let mut col: Vec<f64> = Vec::with_capacity(n);
    for k in 0..nr {
        col.clear();
        col.extend((0..n).map(|b| curves.curve(b)[k]));
        let mut sorted = col.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        for (b, &v) in col.iter().enumerate() {
            let le = sorted.partition_point(|&x| x <= v);
            let ge = n - sorted.partition_point(|&x| x < v);
            ranks[b][k] = le.min(ge);
        }
    }
    ranks
}

/// Global rank envelope test. Returns the Monte Carlo p-interval; decisions should
/// use `p_upper`, which counts ties as at least as extreme as the data.
pub fn rank_envelope_test(curves: &CurveSet, ordering: RankOrdering) -> RankResult {
    let n = curves.s() + 1;
    let mut ranks = pointwise_ranks(curves);
    ranks.iter_mut().for_each(|v| v.sort_unstable());
    let extreme_rank = ranks[0][0];
    // Smaller key = more extreme.
    let cmp = |a: &Vec<usize>, b: &Vec<usize>| -> Ordering {
        match ordering {
            RankOrdering::Classic => a[0].cmp(&b[0]),
            RankOrdering::Erl => a.cmp(b),
        }
    };
    let (mut less, mut le) = (0, 0);
    for v in &ranks[1..] {
        match cmp(v, &ranks[0]) {
            Ordering::Less => {
                less += 1;
                le += 1;
            }
            Ordering::Equal => le += 1,
            Ordering::Greater => {}
        }
    }
    RankResult {
        p_lower: (1 + less) as f64 / n as f64,
        p_upper: (1 + le) as f64 / n as f64,
        extreme_rank,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(data: Vec<f64>, sims: Vec<Vec<f64>>) -> CurveSet {
        let r = (0..data.len()).map(|i| i as f64).collect();
        CurveSet::new(r, data, sims).unwrap()
    }

    #[test]
    fn ranks_are_two_sided() {
        let c = set(vec![5.0], vec![vec![1.0], vec![2.0], vec![3.0]]);
        let r = pointwise_ranks(&c);
        assert_eq!(r.iter().map(|v| v[0]).collect::<Vec<_>>(), vec![1, 1, 2, 2]);
    }

    #[test]
    fn transform_is_idempotent() {
        let c = set(vec![std::f64::consts::PI * 4.0], vec![vec![0.0]]).sqrt_transform().sqrt_transform();
        assert!((c.data()[0] - 2.0).abs() < 1e-12);
    }
}
