use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::envelope::{rank_envelope_test, studentised_test, CurveSet, RankOrdering};
use super::kernel::kernel_intensity;
use super::kfunc::{cross_k, linear_grid};
use crate::error::{Error, Result};
use crate::lasso::InteractionMatrix;
use crate::pattern::MultiTypePattern;
use crate::simulate::{sim_ipp, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McTest {
    #[default]
    Studentised,
    Rank,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McOptions {
    pub r_min: f64,
    pub r_max: f64,
    pub n_r: usize,
    pub simulations: usize,
    pub bandwidth: f64,
    pub cell: f64,
    pub test: McTest,
    pub ordering: RankOrdering,
    pub alpha: f64,
    /// Compare `√(K/π)` rather than `K`.
    pub transform: bool,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            r_min: 1.0,
            r_max: 50.0,
            n_r: 50,
            simulations: 999,
            bandwidth: 30.0,
            cell: 2.0,
            test: McTest::Studentised,
            ordering: RankOrdering::Erl,
            alpha: 0.05,
            transform: true,
        }
    }
}

impl McOptions {
    pub fn validate(&self) -> Result<()> {
        if self.simulations < 19 {
            return Err(Error::arg("at least 19 simulations are needed for a 5% test"));
        }
        if !(self.r_min >= 0.0 && self.r_max > self.r_min) || self.n_r == 0 {
            return Err(Error::arg("distance grid needs 0 <= r_min < r_max and n_r >= 1"));
        }
        if !(self.bandwidth > 0.0 && self.cell > 0.0) {
            return Err(Error::arg("bandwidth and cell must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::arg("alpha must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        linear_grid(self.r_min, self.r_max, self.n_r)
    }

    /// Monte Carlo p-value for one curve set (the upper end for the rank test).
    pub fn p_interval(&self, curves: CurveSet) -> Result<(f64, f64)> {
        let curves = if self.transform { curves.sqrt_transform() } else { curves };
        Ok(match self.test {
            McTest::Studentised => {
                let p = studentised_test(&curves)?.p;
                (p, p)
            }
            McTest::Rank => {
                let r = rank_envelope_test(&curves, self.ordering);
                (r.p_lower, r.p_upper)
            }
        })
    }
}

/// Result of the `p × p` Monte Carlo tests. Entry `(a, b)` tests type `a` (row,
/// randomised) against type `b` (column, held fixed); the matrix is not symmetrised.
#[derive(Debug, Clone, PartialEq)]
pub struct McMatrix {
    pub p: usize,
    pub p_values: Vec<f64>,
    pub p_lower: Vec<f64>,
    pub indicators: InteractionMatrix,
}

impl McMatrix {
    pub fn p_value(&self, a: usize, b: usize) -> f64 {
        self.p_values[a * self.p + b]
    }

    pub fn write_csv<W: Write>(&self, mut out: W, labels: &[String]) -> Result<()> {
        writeln!(out, "type,{}", labels.join(","))?;
        for a in 0..self.p {
            let row: Vec<String> = (0..self.p).map(|b| format!("{}", self.p_value(a, b))).collect();
            writeln!(out, "{},{}", labels[a], row.join(","))?;
        }
        Ok(())
    }
}

/// Conditional-IPP nulls: `s` relocations of every type from its own kernel intensity,
/// simulated once and shared by all tests involving that type.
fn null_patterns(pattern: &MultiTypePattern<f64>, opts: &McOptions, stream: &RngStream) -> Result<Vec<Vec<Vec<(f64, f64)>>>> {
    let window = *pattern.window();
    (0..pattern.n_types())
        .into_par_iter()
        .map(|ty| {
            let xy: Vec<(f64, f64)> = pattern.of_type(ty).iter().map(|q| (q.x, q.y)).collect();
            let field = kernel_intensity(&xy, &window, opts.bandwidth, opts.cell)?;
            (0..opts.simulations as u64)
                .map(|b| sim_ipp(&window, &field, xy.len(), &mut stream.index(ty as u64).index(b).rng()))
                .collect()
        })
        .collect()
}

pub fn interaction_test_matrix(pattern: &MultiTypePattern<f64>, opts: &McOptions, stream: &RngStream) -> Result<McMatrix> {
    opts.validate()?;
    let p = pattern.n_types();
    if let Some(ty) = pattern.counts().iter().position(|&n| n < 2) {
        return Err(Error::UndefinedCurve(format!("type {} has fewer than two points", pattern.labels()[ty])));
    }
    let window = *pattern.window();
    let r = opts.grid();
    let nulls = null_patterns(pattern, opts, &stream.child("null"))?;
    let xy: Vec<Vec<(f64, f64)>> = (0..p).map(|ty| pattern.of_type(ty).iter().map(|q| (q.x, q.y)).collect()).collect();
    let cells: Vec<(f64, f64)> = (0..p * p)
        .into_par_iter()
        .map(|cell| {
            let (a, b) = (cell / p, cell % p);
            let k = |moving: &[(f64, f64)]| {
                if a == b {
                    cross_k(moving, None, &window, &r)
                } else {
                    cross_k(&xy[b], Some(moving), &window, &r)
                }
            };
            let data = k(&xy[a])?;
            let sims = nulls[a].iter().map(|m| k(m)).collect::<Result<Vec<_>>>()?;
            opts.p_interval(CurveSet::new(r.clone(), data, sims)?)
        })
        .collect::<Result<_>>()?;
    let mut indicators = InteractionMatrix::zeros(p);
    for (cell, &(_, hi)) in cells.iter().enumerate() {
        indicators.set(cell / p, cell % p, hi < opts.alpha, 1.0 - hi);
    }
    Ok(McMatrix {
        p,
        p_values: cells.iter().map(|c| c.1).collect(),
        p_lower: cells.iter().map(|c| c.0).collect(),
        indicators,
    })
}
