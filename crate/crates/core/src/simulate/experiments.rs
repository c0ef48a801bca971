//! Synthetic study designs with known interaction matrices.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gibbs::{sim_gibbs_fixed_n, MhOptions};
use super::poisson::{sim_binomial, sim_ipp};
use super::rng::RngStream;
use super::thomas::{sim_thomas, ThomasSpec};
use crate::error::{Error, Result};
use crate::lasso::InteractionMatrix;
use crate::model::{CovariateField, Covariates, GroupKind, ModelSpec};
use crate::pattern::{MultiTypePattern, Point, Window};
use crate::Family;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentId {
    /// Four types, mixed repulsion and clustering.
    One,
    /// Ten types in two interacting blocks.
    Two,
    /// Independent (possibly inhomogeneous) types, at most one interacting type.
    Four,
    /// Independent Thomas and Geyer types on a habitat field.
    Five,
}

impl ExperimentId {
    pub fn from_number(n: u32) -> Result<Self> {
        match n {
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            4 => Ok(Self::Four),
            5 => Ok(Self::Five),
            3 => Err(Error::arg("experiment 3 (log-Gaussian Cox) is not supported")),
            _ => Err(Error::arg(format!("unknown experiment {n}"))),
        }
    }

    pub fn number(self) -> u32 {
        match self {
            Self::One => 1,
            Self::Two => 2,
            Self::Four => 4,
            Self::Five => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Homogeneous,
    HomogeneousPlus,
    Inhomogeneous,
    InhomogeneousPlus,
}

impl Scenario {
    fn inhomogeneous(self) -> bool {
        matches!(self, Self::Inhomogeneous | Self::InhomogeneousPlus)
    }

    fn extra(self) -> bool {
        matches!(self, Self::HomogeneousPlus | Self::InhomogeneousPlus)
    }
}

/// Size knobs; each experiment reads only its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentScale {
    /// Experiment 2 points per type (50, 100 or 200).
    pub n_per_type: usize,
    /// Experiment 4 Poisson types (10 or 20).
    pub n_types: usize,
    pub scenario: Scenario,
    /// Experiment 5 types per generating model (16 at full scale).
    pub types_per_model: usize,
    pub mh: MhOptions,
}

impl Default for ExperimentScale {
    fn default() -> Self {
        Self {
            n_per_type: 50,
            n_types: 10,
            scenario: Scenario::Homogeneous,
            types_per_model: 4,
            mh: MhOptions::default(),
        }
    }
}

impl ExperimentScale {
    fn validate(&self) -> Result<()> {
        if self.n_per_type == 0 || self.n_types < 2 || self.types_per_model == 0 {
            return Err(Error::arg("experiment sizes must be positive (and at least 2 types)"));
        }
        Ok(())
    }
}

/// One replicate: the pattern, the truth and how it should be fitted.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub pattern: MultiTypePattern<f64>,
    pub truth: InteractionMatrix,
    pub covariates: Covariates<f64>,
    pub fit_spec: ModelSpec<f64>,
    pub r_bor: f64,
    pub cv_dims: (usize, usize),
}

/// `k` counts from `lo` to `hi`, evenly spaced on the log scale.
pub fn loglinear_counts(lo: usize, hi: usize, k: usize) -> Vec<usize> {
    if k == 1 {
        return vec![lo];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    (0..k)
        .map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp().round() as usize)
        .collect()
}

/// A smooth random surface (sum of random plane waves), standardised over cells.
pub fn synthetic_field(window: &Window<f64>, cell: f64, stream: &RngStream) -> CovariateField<f64> {
    let mut rng = stream.rng();
    let side = window.width().min(window.height());
    let waves: Vec<(f64, f64, f64, f64)> = (0..8)
        .map(|_| {
            let angle = rng.gen::<f64>() * std::f64::consts::PI;
            let wavelength = side * (0.3 + 0.9 * rng.gen::<f64>());
            let k = std::f64::consts::TAU / wavelength;
            (k * angle.cos(), k * angle.sin(), rng.gen::<f64>() * std::f64::consts::TAU, rng.gen::<f64>() + 0.5)
        })
        .collect();
    let field = CovariateField::from_fn(window, cell, |x, y| {
        waves.iter().map(|&(kx, ky, ph, a)| a * (kx * x + ky * y + ph).cos()).sum()
    });
    standardise(field)
}

fn standardise(field: CovariateField<f64>) -> CovariateField<f64> {
    let n = field.values.len() as f64;
    let mean = field.values.iter().sum::<f64>() / n;
    let var = field.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd > 0.0 {
        field.map(|v| (v - mean) / sd)
    } else {
        field.map(|_| 0.0)
    }
}

/// Coefficient vector for `spec` from per-type `α_i` and per-pair `β_ij`.
pub fn theta_from<A, B>(spec: &ModelSpec<f64>, alpha: A, beta: B) -> Vec<f64>
where
    A: Fn(usize) -> Vec<f64>,
    B: Fn(usize, usize) -> Vec<f64>,
{
    let mut theta = vec![0.0; spec.layout().len()];
    for g in spec.layout().groups() {
        let v = match g.kind {
            GroupKind::Covariates(i) => alpha(i),
            GroupKind::Intra(i) => beta(i, i),
            GroupKind::Inter(i, j) => beta(i, j),
        };
        for (slot, x) in theta[g.range()].iter_mut().zip(v) {
            *slot = x;
        }
    }
    theta
}

fn truth_from(p: usize, on: impl Fn(usize, usize) -> bool) -> InteractionMatrix {
    let mut m = InteractionMatrix::zeros(p);
    for i in 0..p {
        for j in 0..p {
            if on(i.min(j), i.max(j)) {
                m.set(i, j, true, 1.0);
            }
        }
    }
    m
}

fn labelled(window: Window<f64>, points: Vec<Point<f64>>, labels: Vec<String>) -> Result<MultiTypePattern<f64>> {
    MultiTypePattern::with_labels(window, points, labels)
}

fn default_labels(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("T{i}")).collect()
}

/// Generates replicate `index`. Quantities the paper keeps fixed across replicates
/// (covariate maps, habitat assignments) come from `stream` itself, the rest from
/// `stream.index(index)`.
pub fn generate(id: ExperimentId, scale: &ExperimentScale, stream: &RngStream, index: u64) -> Result<Dataset> {
    scale.validate()?;
    let rep = stream.index(index);
    match id {
        ExperimentId::One => experiment1(scale, &rep),
        ExperimentId::Two => experiment2(scale, &rep),
        ExperimentId::Four => experiment4(scale, stream, &rep),
        ExperimentId::Five => experiment5(scale, stream, &rep),
    }
}

/// Replicates `0..n`, generated in parallel; the result does not depend on the pool size.
pub fn generate_replicates(id: ExperimentId, scale: &ExperimentScale, stream: &RngStream, n: usize) -> Result<Vec<Dataset>> {
    (0..n as u64).into_par_iter().map(|i| generate(id, scale, stream, i)).collect()
}

fn unit_square() -> Window<f64> {
    Window::new(0.0, 10.0, 0.0, 10.0).expect("valid window")
}

fn plot_window() -> Window<f64> {
    Window::new(0.0, 1000.0, 0.0, 500.0).expect("valid window")
}

fn experiment1(scale: &ExperimentScale, rep: &RngStream) -> Result<Dataset> {
    let window = unit_square();
    let spec = ModelSpec::uniform(4, Family::Saturation, vec![0.1, 0.2, 0.3], vec![0.1, 0.4])?.with_saturation_constant(1)?;
    let linked = |i: usize, j: usize| (i, j) == (0, 1) || (i, j) == (2, 3);
    let theta = theta_from(
        &spec,
        |_| vec![0.0],
        |i, j| match (i, j) {
            (0, 0) | (1, 1) => vec![-1.0, 1.0, 0.0],
            (2, 2) => vec![0.0, 1.0, 0.0],
            _ if linked(i, j) => vec![0.6, 0.3],
            _ => vec![],
        },
    );
    let sample = sim_gibbs_fixed_n(&spec, &theta, &Covariates::none(), &[100, 100, 50, 150], &window, &scale.mh, &mut rep.child("mh").rng())?;
    let pattern = labelled(window, sample.pattern.points().to_vec(), default_labels(4))?;
    Ok(Dataset {
        pattern,
        truth: truth_from(4, |i, j| (i == j && i < 3) || linked(i, j)),
        covariates: Covariates::none(),
        fit_spec: spec,
        r_bor: 0.4,
        cv_dims: (4, 4),
    })
}

fn experiment2(scale: &ExperimentScale, rep: &RngStream) -> Result<Dataset> {
    let window = unit_square();
    let p = 10;
    let block = |i: usize| i / 5;
    let spec = ModelSpec::uniform(p, Family::Saturation, vec![0.25, 0.5], vec![0.25, 0.5])?.with_saturation_constant(1)?;
    let theta = theta_from(
        &spec,
        |_| vec![0.0],
        |i, j| {
            if i == j {
                vec![if block(i) == 0 { 1.0 } else { -1.0 }, 0.5]
            } else if block(i) == block(j) {
                vec![0.5, 0.25]
            } else {
                vec![0.0, 0.0]
            }
        },
    );
    let counts = vec![scale.n_per_type; p];
    let sample = sim_gibbs_fixed_n(&spec, &theta, &Covariates::none(), &counts, &window, &scale.mh, &mut rep.child("mh").rng())?;
    let pattern = labelled(window, sample.pattern.points().to_vec(), default_labels(p))?;
    let fit_spec = ModelSpec::uniform(p, Family::Saturation, vec![0.15, 0.3], vec![0.15, 0.3])?.with_saturation_constant(1)?;
    Ok(Dataset {
        pattern,
        truth: truth_from(p, |i, j| block(i) == block(j)),
        covariates: Covariates::none(),
        fit_spec,
        r_bor: 0.3,
        cv_dims: (5, 5),
    })
}

/// Six smooth maps standing in for the principal components of the soil rasters.
pub fn habitat_maps(window: &Window<f64>, stream: &RngStream, k: usize) -> Vec<CovariateField<f64>> {
    (0..k as u64).map(|i| synthetic_field(window, 20.0, &stream.index(i))).collect()
}

fn experiment4(scale: &ExperimentScale, stream: &RngStream, rep: &RngStream) -> Result<Dataset> {
    let window = plot_window();
    let p = scale.n_types;
    let maps = habitat_maps(&window, &stream.child("covariates"), 6);
    let mut counts = loglinear_counts(50, 300, p);
    let mut points = Vec::new();
    if scale.scenario.inhomogeneous() {
        let mut rng = rep.child("trend").rng();
        let trends: Vec<CovariateField<f64>> = (0..2)
            .map(|_| {
                let coef: Vec<f64> = (0..maps.len())
                    .map(|_| match rng.gen::<f64>() {
                        u if u < 0.25 => -1.0,
                        u if u < 0.75 => 0.0,
                        _ => 1.0,
                    })
                    .collect();
                let mut t = maps[0].map(|_| 0.0);
                for (m, c) in maps.iter().zip(&coef) {
                    for (v, z) in t.values.iter_mut().zip(&m.values) {
                        *v += c * z;
                    }
                }
                t.map(f64::exp)
            })
            .collect();
        for (ty, &n) in counts.iter().enumerate() {
            let field = &trends[usize::from(ty >= p / 2)];
            let xy = sim_ipp(&window, field, n, &mut rep.child("type").index(ty as u64).rng())?;
            points.extend(xy.into_iter().map(|(x, y)| Point::new(x, y, ty)));
        }
    } else {
        for (ty, &n) in counts.iter().enumerate() {
            let xy = sim_binomial(&window, n, &mut rep.child("type").index(ty as u64).rng());
            points.extend(xy.into_iter().map(|(x, y)| Point::new(x, y, ty)));
        }
    }
    let mut labels = default_labels(p);
    let mut n_types = p;
    if scale.scenario.extra() {
        let mut spec = ModelSpec::from_fn(1, Family::Saturation, |_, _| vec![1.0, 20.0])?;
        spec.set_saturation(0, 0, vec![3, 3])?;
        let theta = theta_from(&spec, |_| vec![0.0], |_, _| vec![-10.0, 1.0]);
        let sample = sim_gibbs_fixed_n(&spec, &theta, &Covariates::none(), &[100], &window, &scale.mh, &mut rep.child("extra").rng())?;
        points.extend(sample.pattern.points().iter().map(|q| Point::new(q.x, q.y, p)));
        counts.push(100);
        labels.push("extra".into());
        n_types += 1;
    }
    let pattern = labelled(window, points, labels)?;
    let mut fit_spec = ModelSpec::uniform(n_types, Family::Saturation, vec![7.0, 15.0], vec![7.0, 15.0])?
        .with_auto_saturation(&counts, window.area(), 0.01)?;
    let covariates = if scale.scenario.inhomogeneous() {
        fit_spec = fit_spec.with_shared_covariates(maps.len());
        Covariates::new(maps)
    } else {
        Covariates::none()
    };
    let extra = scale.scenario.extra().then_some(p);
    Ok(Dataset {
        pattern,
        truth: truth_from(n_types, |i, j| Some(i) == extra && i == j),
        covariates,
        fit_spec,
        r_bor: 15.0,
        cv_dims: (6, 3),
    })
}

/// Generating models of experiment 5, in block order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exp5Model {
    Thomas1,
    Thomas2,
    Geyer1,
    Geyer2,
}

impl Exp5Model {
    pub const ALL: [Self; 4] = [Self::Thomas1, Self::Thomas2, Self::Geyer1, Self::Geyer2];

    pub fn name(self) -> &'static str {
        match self {
            Self::Thomas1 => "thomas1",
            Self::Thomas2 => "thomas2",
            Self::Geyer1 => "geyer1",
            Self::Geyer2 => "geyer2",
        }
    }
}

/// Repulsion range of the Geyer types: shrinks with abundance so dense types still pack.
pub fn geyer_range(n: usize) -> f64 {
    20.0 * (50.0 / n as f64).sqrt()
}

fn experiment5(scale: &ExperimentScale, stream: &RngStream, rep: &RngStream) -> Result<Dataset> {
    let window = plot_window();
    let m = scale.types_per_model;
    let z = synthetic_field(&window, 20.0, &stream.child("covariates"));
    let block_counts = loglinear_counts(50, 1000, m);
    let types: Vec<(Exp5Model, usize, usize)> = Exp5Model::ALL
        .iter()
        .flat_map(|&model| block_counts.iter().enumerate().map(move |(k, &n)| (model, k, n)))
        .collect();
    let per_type: Vec<Vec<(f64, f64)>> = types
        .par_iter()
        .enumerate()
        .map(|(ty, &(model, k, n))| {
            // Every other type in a block responds to the habitat; fixed over replicates.
            let weight = if k % 2 == 0 { 0.5 } else { 0.0 };
            let surface = z.map(|v| weight * v);
            let mut rng = rep.child("type").index(ty as u64).rng();
            match model {
                Exp5Model::Thomas1 | Exp5Model::Thomas2 => {
                    let (mu, sigma) = if model == Exp5Model::Thomas1 { (20.0, 20.0) } else { (10.0, 10.0) };
                    // Parent count is fixed so the realised total only varies through
                    // offspring noise and edge loss.
                    let outer = window.dilate(4.0 * sigma).area();
                    let parents = ((n as f64 * outer / (mu * window.area())).round() as usize).max(1);
                    let spec = ThomasSpec {
                        kappa: n as f64 / (mu * window.area()),
                        parents: Some(parents),
                        mu,
                        sigma,
                        parent_field: Some(surface.map(f64::exp)),
                    };
                    sim_thomas(&window, &spec, &mut rng)
                }
                Exp5Model::Geyer1 | Exp5Model::Geyer2 => {
                    let r = geyer_range(n);
                    let (ranges, beta, sat) = if model == Exp5Model::Geyer1 {
                        (vec![r, 2.0 * r], vec![-3.0, 1.0], vec![3, 3])
                    } else {
                        (vec![r], vec![-3.0], vec![3])
                    };
                    let mut spec = ModelSpec::from_fn(1, Family::Saturation, |_, _| ranges.clone())?.with_shared_covariates(1);
                    spec.set_saturation(0, 0, sat)?;
                    let theta = theta_from(&spec, |_| vec![0.0, 1.0], |_, _| beta.clone());
                    let cov = Covariates::new(vec![surface]);
                    let s = sim_gibbs_fixed_n(&spec, &theta, &cov, &[n], &window, &scale.mh, &mut rng)?;
                    Ok(s.pattern.points().iter().map(|q| (q.x, q.y)).collect())
                }
            }
        })
        .collect::<Result<_>>()?;
    let points = per_type
        .into_iter()
        .enumerate()
        .flat_map(|(ty, xy)| xy.into_iter().map(move |(x, y)| Point::new(x, y, ty)))
        .collect();
    let labels = types.iter().map(|(model, k, _)| format!("{}_{}", model.name(), k + 1)).collect();
    let pattern = labelled(window, points, labels)?;
    let p = types.len();
    let fit_spec = ModelSpec::uniform(p, Family::Saturation, vec![10.0, 20.0], vec![10.0, 20.0])?
        .with_auto_saturation(&pattern.counts(), window.area(), 0.01)?
        .with_shared_covariates(1);
    Ok(Dataset {
        pattern,
        truth: truth_from(p, |i, j| i == j),
        covariates: Covariates::new(vec![z]),
        fit_spec,
        r_bor: 20.0,
        cv_dims: (7, 4),
    })
}
