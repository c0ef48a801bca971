//! TOML configuration for the pipeline and the simulator. Unknown keys are errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cv::ResidualKind;
use crate::error::{Error, Result};
use crate::lasso::SolverOptions;
use crate::mctest::McOptions;
use crate::model::ModelSpec;
use crate::pattern::Window;
use crate::pseudolik::DummySpec;
use crate::simulate::MhOptions;
use crate::Family;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub pattern: PathBuf,
    #[serde(default)]
    pub covariates: Vec<PathBuf>,
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub family: Family,
    pub intra: Vec<f64>,
    pub inter: Vec<f64>,
    /// Fixed saturation level; when absent the levels are chosen from `epsilon`.
    pub saturation: Option<u32>,
    pub epsilon: f64,
    /// Border erosion; defaults to the largest range.
    pub r_bor: Option<f64>,
    /// Reduce the covariate rasters to this many principal components.
    pub pca_components: Option<usize>,
    pub dummies: DummySpec,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            family: Family::Saturation,
            intra: vec![7.0, 15.0],
            inter: vec![7.0, 15.0],
            saturation: None,
            epsilon: 0.01,
            r_bor: None,
            pca_components: None,
            dummies: DummySpec::default(),
        }
    }
}

impl ModelConfig {
    /// The model for `counts` on `window` with `n_covariates` shared covariates.
    pub fn spec(&self, counts: &[usize], window: &Window<f64>, n_covariates: usize) -> Result<ModelSpec<f64>> {
        let spec = ModelSpec::uniform(counts.len(), self.family, self.intra.clone(), self.inter.clone())?;
        let spec = match self.saturation {
            Some(c) => spec.with_saturation_constant(c)?,
            None => spec.with_auto_saturation(counts, window.area(), self.epsilon)?,
        };
        Ok(spec.with_shared_covariates(n_covariates))
    }

    pub fn r_bor(&self) -> f64 {
        self.r_bor
            .unwrap_or_else(|| self.intra.iter().chain(&self.inter).copied().fold(0.0, f64::max))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LassoConfig {
    pub n_grid: usize,
    /// Smallest penalty as a fraction of `γ_max`.
    pub floor_ratio: f64,
    pub solver: SolverOptions,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            n_grid: 100,
            floor_ratio: 1e-3,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CvConfig {
    pub enabled: bool,
    pub kx: usize,
    pub ky: usize,
    pub kinds: Vec<ResidualKind>,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            kx: 4,
            ky: 4,
            kinds: ResidualKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[serde(default = "one")]
    pub workers: usize,
    pub paths: Paths,
    /// Observation window; otherwise taken from the pattern file.
    #[serde(default)]
    pub window: Option<Window<f64>>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub lasso: LassoConfig,
    #[serde(default)]
    pub cv: CvConfig,
    /// Monte Carlo tests are run only when this section is present.
    #[serde(default)]
    pub mc: Option<McOptions>,
}

fn one() -> usize {
    1
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses a file; relative paths are taken relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        resolve(base, &mut cfg.paths.pattern);
        resolve(base, &mut cfg.paths.output);
        cfg.paths.covariates.iter_mut().for_each(|p| resolve(base, p));
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        for p in std::iter::once(&self.paths.pattern).chain(&self.paths.covariates) {
            if !p.is_file() {
                return bad(format!("input file {} does not exist", p.display()));
            }
        }
        if let Some(w) = &self.window {
            Window::new(w.x_min, w.x_max, w.y_min, w.y_max)?;
        }
        let m = &self.model;
        if !(m.epsilon > 0.0 && m.epsilon < 1.0) {
            return bad("model.epsilon must lie in (0, 1)".into());
        }
        if m.saturation == Some(0) {
            return bad("model.saturation must be at least 1".into());
        }
        if m.r_bor.is_some_and(|r| !(r >= 0.0)) {
            return bad("model.r_bor must be non-negative".into());
        }
        if m.pca_components.is_some_and(|k| k == 0 || k > self.paths.covariates.len()) {
            return bad("model.pca_components must lie in 1..=number of covariate files".into());
        }
        m.dummies.validate()?;
        // Range vectors are checked by building a one-type model.
        ModelSpec::<f64>::uniform(2, m.family, m.intra.clone(), m.inter.clone())?;
        if self.lasso.n_grid == 0 || !(self.lasso.floor_ratio > 0.0 && self.lasso.floor_ratio < 1.0) {
            return bad("lasso.n_grid must be >= 1 and lasso.floor_ratio in (0, 1)".into());
        }
        if self.cv.enabled && (self.cv.kx == 0 || self.cv.ky == 0 || self.cv.kx * self.cv.ky < 2 || self.cv.kinds.is_empty()) {
            return bad("cv needs at least two quadrats and one residual kind".into());
        }
        if let Some(mc) = &self.mc {
            mc.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairBeta {
    /// 1-based type indices.
    pub i: usize,
    pub j: usize,
    pub beta: Vec<f64>,
}

/// Parameter file of the `simulate` command: a homogeneous multitype model with
/// one intra and one inter range vector, simulated at fixed counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub window: Window<f64>,
    pub counts: Vec<usize>,
    #[serde(default = "saturation")]
    pub family: Family,
    pub intra: Vec<f64>,
    #[serde(default)]
    pub inter: Vec<f64>,
    #[serde(default = "one_u32")]
    pub saturation: u32,
    /// One vector per type (missing types are zero).
    #[serde(default)]
    pub beta_intra: Vec<Vec<f64>>,
    #[serde(default)]
    pub beta_inter: Vec<PairBeta>,
    #[serde(default)]
    pub labels: Vec<String>,
    #[serde(default)]
    pub mh: MhOptions,
}

fn saturation() -> Family {
    Family::Saturation
}

fn one_u32() -> u32 {
    1
}

impl SimulateConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Window::new(cfg.window.x_min, cfg.window.x_max, cfg.window.y_min, cfg.window.y_max)?;
        if cfg.counts.is_empty() {
            return Err(Error::Config("counts must list at least one type".into()));
        }
        if !cfg.labels.is_empty() && cfg.labels.len() != cfg.counts.len() {
            return Err(Error::Config("labels must match counts".into()));
        }
        Ok(cfg)
    }

    pub fn spec(&self) -> Result<ModelSpec<f64>> {
        ModelSpec::uniform(self.counts.len(), self.family, self.intra.clone(), self.inter.clone())?.with_saturation_constant(self.saturation)
    }

    pub fn theta(&self, spec: &ModelSpec<f64>) -> Result<Vec<f64>> {
        let p = self.counts.len();
        for b in &self.beta_inter {
            if b.i == 0 || b.j == 0 || b.i > p || b.j > p || b.i == b.j {
                return Err(Error::Config(format!("beta_inter pair ({}, {}) is not a valid type pair", b.i, b.j)));
            }
        }
        let check = |v: &Vec<f64>, k: usize, what: &str| {
            if v.len() == k {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} needs {k} values, got {}", v.len())))
            }
        };
        for v in &self.beta_intra {
            check(v, self.intra.len(), "beta_intra entry")?;
        }
        for b in &self.beta_inter {
            check(&b.beta, self.inter.len(), "beta_inter entry")?;
        }
        Ok(crate::simulate::experiments::theta_from(
            spec,
            |_| vec![0.0],
            |i, j| {
                if i == j {
                    self.beta_intra.get(i).cloned().unwrap_or_default()
                } else {
                    self.beta_inter
                        .iter()
                        .find(|b| (b.i - 1, b.j - 1) == (i, j) || (b.j - 1, b.i - 1) == (i, j))
                        .map(|b| b.beta.clone())
                        .unwrap_or_default()
                }
            },
        ))
    }

    pub fn labels(&self) -> Vec<String> {
        if self.labels.is_empty() {
            (1..=self.counts.len()).map(|i| i.to_string()).collect()
        } else {
            self.labels.clone()
        }
    }
}
