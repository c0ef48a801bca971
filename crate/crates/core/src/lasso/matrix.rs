use std::io::Write;

use super::solver::{norm, FitResult};
use crate::error::{Error, Result};
use crate::model::{GroupKind, Layout};

/// `p × p` interaction indicators with optional scores (group norms or p-values).
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    p: usize,
    indicators: Vec<bool>,
    scores: Vec<f64>,
}

impl InteractionMatrix {
    pub fn zeros(p: usize) -> Self {
        Self {
            p,
            indicators: vec![false; p * p],
            scores: vec![0.0; p * p],
        }
    }

    pub fn from_parts(p: usize, indicators: Vec<bool>, scores: Vec<f64>) -> Result<Self> {
        if indicators.len() != p * p || scores.len() != p * p {
            return Err(Error::arg("matrix entries must number p*p"));
        }
        Ok(Self { p, indicators, scores })
    }

    /// Symmetric matrix of active groups, scored by `‖θ̂_g‖`.
    pub fn from_fit<T: crate::Real>(layout: &Layout, fit: &FitResult<T>) -> Self {
        let p = layout.n_types();
        let mut m = Self::zeros(p);
        for (gi, g) in layout.groups().iter().enumerate() {
            let (i, j) = match g.kind {
                GroupKind::Intra(i) => (i, i),
                GroupKind::Inter(i, j) => (i, j),
                GroupKind::Covariates(_) => continue,
            };
            let score = norm(&fit.theta[g.range()]).to_f64_lossy();
            for (a, b) in [(i, j), (j, i)] {
                m.indicators[a * p + b] = fit.active[gi];
                m.scores[a * p + b] = score;
            }
        }
        m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.indicators[i * self.p + j]
    }

    pub fn score(&self, i: usize, j: usize) -> f64 {
        self.scores[i * self.p + j]
    }

    pub fn set(&mut self, i: usize, j: usize, on: bool, score: f64) {
        self.indicators[i * self.p + j] = on;
        self.scores[i * self.p + j] = score;
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.p).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Same matrix with types reordered: entry `(a, b)` of the result is `(order[a], order[b])`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let p = self.p;
        let mut m = Self::zeros(p);
        for a in 0..p {
            for b in 0..p {
                m.set(a, b, self.get(order[a], order[b]), self.score(order[a], order[b]));
            }
        }
        m
    }

    /// 0/1 CSV with a header row and a label column.
    pub fn write_csv<W: Write>(&self, mut out: W, labels: &[String]) -> Result<()> {
        write!(out, "type")?;
        for l in labels {
            write!(out, ",{l}")?;
        }
        writeln!(out)?;
        for i in 0..self.p {
            write!(out, "{}", labels[i])?;
            for j in 0..self.p {
                write!(out, ",{}", u8::from(self.get(i, j)))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn write_scores_csv<W: Write>(&self, mut out: W, labels: &[String]) -> Result<()> {
        write!(out, "type")?;
        for l in labels {
            write!(out, ",{l}")?;
        }
        writeln!(out)?;
        for i in 0..self.p {
            write!(out, "{}", labels[i])?;
            for j in 0..self.p {
                write!(out, ",{}", self.score(i, j))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Plain (P2) graymap: 255 where an interaction is present, 0 elsewhere.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "P2")?;
        writeln!(out, "{} {}", self.p, self.p)?;
        writeln!(out, "255")?;
        for i in 0..self.p {
            let row: Vec<&str> = (0..self.p).map(|j| if self.get(i, j) { "255" } else { "0" }).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }
}
