use std::io::Write;

use super::dummies::Dummies;
use crate::error::{Error, Result};
use crate::model::{Covariates, Layout, ModelSpec, Neighbourhood};
use crate::pattern::{MultiTypePattern, Window};
use crate::scalar::Real;

/// Origin of a design row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSource {
    Data(usize),
    Dummy(usize),
}

/// Design rows of one type, stored column-major.
///
/// Only the columns a type-`i` row can touch are kept; `Layout::type_row(i).global`
/// maps them to coefficients.
#[derive(Debug, Clone)]
pub struct TypeBlock<T> {
    pub ty: usize,
    pub width: usize,
    pub offset: T,
    pub columns: Vec<T>,
    pub response: Vec<T>,
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub source: Vec<RowSource>,
}

impl<T: Real> TypeBlock<T> {
    fn empty(ty: usize, width: usize, offset: T) -> Self {
        Self {
            ty,
            width,
            offset,
            columns: Vec::new(),
            response: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
            source: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    /// Local column `c` over all rows.
    pub fn column(&self, c: usize) -> &[T] {
        let n = self.n_rows();
        &self.columns[c * n..(c + 1) * n]
    }

    /// Statistic vector of row `r` in local layout.
    pub fn row(&self, r: usize) -> Vec<T> {
        (0..self.width).map(|c| self.column(c)[r]).collect()
    }

    fn from_rows(mut self, rows: Vec<T>) -> Self {
        let n = self.response.len();
        let w = self.width;
        let mut cols = vec![T::zero(); n * w];
        for r in 0..n {
            for c in 0..w {
                cols[c * n + r] = rows[r * w + c];
            }
        }
        self.columns = cols;
        self
    }

    fn subset(&self, keep: &[bool]) -> Self {
        let n = self.n_rows();
        let pick = |v: &[T]| v.iter().zip(keep).filter(|(_, &k)| k).map(|(a, _)| *a).collect::<Vec<_>>();
        let mut columns = Vec::new();
        for c in 0..self.width {
            columns.extend(pick(&self.columns[c * n..(c + 1) * n]));
        }
        Self {
            ty: self.ty,
            width: self.width,
            offset: self.offset,
            columns,
            response: pick(&self.response),
            x: pick(&self.x),
            y: pick(&self.y),
            source: self.source.iter().zip(keep).filter(|(_, &k)| k).map(|(s, _)| *s).collect(),
        }
    }
}

/// Logistic-regression form of the pseudo-likelihood.
#[derive(Debug, Clone)]
pub struct DesignData<T> {
    layout: Layout,
    blocks: Vec<TypeBlock<T>>,
    window: Window<T>,
    r_bor: T,
    warnings: Vec<String>,
}

impl<T: Real> DesignData<T> {
    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn n_coefficients(&self) -> usize {
        self.layout.len()
    }

    pub fn blocks(&self) -> &[TypeBlock<T>] {
        &self.blocks
    }

    pub fn window(&self) -> &Window<T> {
        &self.window
    }

    pub fn r_bor(&self) -> T {
        self.r_bor
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn n_rows(&self) -> usize {
        self.blocks.iter().map(TypeBlock::n_rows).sum()
    }

    pub fn n_data_rows(&self) -> usize {
        self.blocks
            .iter()
            .flat_map(|b| b.source.iter())
            .filter(|s| matches!(s, RowSource::Data(_)))
            .count()
    }

    /// Assembles a design directly from per-type blocks (used for synthetic problems).
    pub fn from_blocks(layout: Layout, blocks: Vec<TypeBlock<T>>, window: Window<T>) -> Result<Self> {
        for b in &blocks {
            if b.ty >= layout.n_types() || b.width != layout.type_row(b.ty).len() {
                return Err(Error::arg("block does not match the layout"));
            }
            if b.columns.len() != b.width * b.n_rows() || b.x.len() != b.n_rows() || b.source.len() != b.n_rows() {
                return Err(Error::arg("block arrays have inconsistent lengths"));
            }
        }
        Ok(Self {
            layout,
            blocks,
            window,
            r_bor: T::zero(),
            warnings: Vec::new(),
        })
    }

    /// Rows whose location satisfies `keep`, e.g. those outside a CV quadrat.
    pub fn filter_rows<F: Fn(T, T) -> bool>(&self, keep: F) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let mask: Vec<bool> = b.x.iter().zip(&b.y).map(|(&x, &y)| keep(x, y)).collect();
                b.subset(&mask)
            })
            .collect();
        Self {
            layout: self.layout.clone(),
            blocks,
            window: self.window.clone(),
            r_bor: self.r_bor,
            warnings: self.warnings.clone(),
        }
    }

    /// Linear predictor `b(u)·θ + o(u)` per block.
    pub fn linear_predictor(&self, theta: &[T]) -> Vec<Vec<T>> {
        self.blocks
            .iter()
            .map(|b| {
                let mut eta = vec![b.offset; b.n_rows()];
                let global = &self.layout.type_row(b.ty).global;
                for (c, &g) in global.iter().enumerate() {
                    let t = theta[g];
                    if t != T::zero() {
                        for (e, &v) in eta.iter_mut().zip(b.column(c)) {
                            *e += t * v;
                        }
                    }
                }
                eta
            })
            .collect()
    }

    /// CSV with one row per design row: `t,type,x,y,offset` then every coefficient column.
    pub fn write_csv<W: Write>(&self, out: W, labels: &[String]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "type".into(), "x".into(), "y".into(), "offset".into()];
        header.extend(self.layout.column_names(labels));
        w.write_record(&header).map_err(csv_err)?;
        let width = self.layout.len();
        for b in &self.blocks {
            let global = &self.layout.type_row(b.ty).global;
            for r in 0..b.n_rows() {
                let mut full = vec![T::zero(); width];
                for (c, &g) in global.iter().enumerate() {
                    full[g] = b.column(c)[r];
                }
                let mut rec = vec![
                    b.response[r].to_string(),
                    labels[b.ty].clone(),
                    b.x[r].to_string(),
                    b.y[r].to_string(),
                    b.offset.to_string(),
                ];
                rec.extend(full.iter().map(|v| v.to_string()));
                w.write_record(&rec).map_err(csv_err)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Builds the design: one row per data or dummy point inside `W ⊖ r_bor`.
///
/// Rows condition on the full data pattern; dummies never act as neighbours and
/// filtered-out data points still do.
pub fn build_design<T: Real>(
    data: &MultiTypePattern<T>,
    dummies: &Dummies<T>,
    spec: &ModelSpec<T>,
    covariates: &Covariates<T>,
    r_bor: T,
) -> Result<DesignData<T>> {
    let p = spec.n_types();
    if data.n_types() != p || dummies.pattern.n_types() != p || dummies.rho.len() != p {
        return Err(Error::arg("data, dummies and model disagree on the number of types"));
    }
    if data.window() != dummies.pattern.window() {
        return Err(Error::arg("dummies were generated on a different window"));
    }
    if !(r_bor >= spec.max_range()) {
        return Err(Error::arg(format!(
            "border range {r_bor} is smaller than the largest interaction range {}",
            spec.max_range()
        )));
    }
    let max_cov = (0..p).flat_map(|i| spec.covariates(i).iter().copied()).max();
    covariates.check(data.window(), max_cov)?;
    let inner = data.window().erode(r_bor)?;
    let layout = spec.layout().clone();
    let nbhd = Neighbourhood::with_ring_counts(data, spec);

    let mut blocks: Vec<TypeBlock<T>> = (0..p)
        .map(|i| TypeBlock::empty(i, layout.type_row(i).len(), -dummies.rho[i].ln()))
        .collect();
    let mut rows: Vec<Vec<T>> = vec![Vec::new(); p];
    let mut scratch = Vec::new();
    let sources = data
        .points()
        .iter()
        .enumerate()
        .map(|(i, pt)| (pt, RowSource::Data(i)))
        .chain(dummies.pattern.points().iter().enumerate().map(|(i, pt)| (pt, RowSource::Dummy(i))));
    for (pt, src) in sources {
        if !inner.contains(pt.x, pt.y) {
            continue;
        }
        let b = &mut blocks[pt.ty];
        scratch.clear();
        scratch.resize(b.width, T::zero());
        let exclude = match src {
            RowSource::Data(i) => Some(i),
            RowSource::Dummy(_) => None,
        };
        nbhd.row_into(spec, covariates, pt.x, pt.y, pt.ty, exclude, &mut scratch);
        rows[pt.ty].extend_from_slice(&scratch);
        b.response.push(if exclude.is_some() { T::one() } else { T::zero() });
        b.x.push(pt.x);
        b.y.push(pt.y);
        b.source.push(src);
    }
    let mut warnings = Vec::new();
    let blocks = blocks
        .into_iter()
        .zip(rows)
        .map(|(b, r)| {
            if !b.response.iter().any(|&t| t > T::zero()) {
                let msg = format!("type {} has no data points inside the eroded window", b.ty + 1);
                log::warn!("{msg}");
                warnings.push(msg);
            }
            b.from_rows(r)
        })
        .collect();
    Ok(DesignData {
        layout,
        blocks,
        window: data.window().clone(),
        r_bor,
        warnings,
    })
}
