//! End-to-end orchestration: load, reduce covariates, fit the penalty path, select
//! penalties by cross-validation and AIC0.5, and write every report.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{LassoConfig, PipelineConfig};
use crate::cv::{cv_paths, cv_select, partition_window, CvSelection, ResidualKind};
use crate::error::{Error, Result};
use crate::io::{read_pattern_csv, read_raster, write_path_csv, write_pattern_csv};
use crate::lasso::{fit_path, log_grid, GroupLasso, InteractionMatrix, PenaltyPath};
use crate::mctest::{interaction_test_matrix, McMatrix, McOptions};
use crate::model::{CovariateField, Covariates, ModelSpec};
use crate::pattern::{MultiTypePattern, Point};
use crate::pca::pca_covariates;
use crate::pseudolik::{build_design, generate_dummies, DummySpec};
use crate::simulate::{generate, score, Dataset, ExperimentId, ExperimentScale, Rates, RngStream};

/// Penalty selection rules reported side by side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    CvRaw,
    CvInverse,
    CvPearson,
    Aic05,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::CvRaw => "cv-raw",
            Rule::CvInverse => "cv-inverse",
            Rule::CvPearson => "cv-pearson",
            Rule::Aic05 => "aic0.5",
        }
    }

    fn of_kind(kind: ResidualKind) -> Self {
        match kind {
            ResidualKind::Raw => Rule::CvRaw,
            ResidualKind::Inverse => Rule::CvInverse,
            ResidualKind::Pearson => Rule::CvPearson,
        }
    }
}

/// What [`analyse`] needs besides the data and the model.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSettings {
    pub dummies: DummySpec,
    pub lasso: LassoConfig,
    /// Quadrat counts; `None` skips cross-validation.
    pub cv: Option<(usize, usize)>,
    pub kinds: Vec<ResidualKind>,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            dummies: DummySpec::default(),
            lasso: LassoConfig::default(),
            cv: Some((4, 4)),
            kinds: ResidualKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub rule: Rule,
    pub index: usize,
    pub gamma: f64,
    pub matrix: InteractionMatrix,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub spec: ModelSpec<f64>,
    pub path: PenaltyPath<f64>,
    pub cv: Vec<CvSelection<f64>>,
    pub selections: Vec<Selection>,
    pub n_rows: usize,
    pub n_data_rows: usize,
    pub loss_fraction: Option<f64>,
    pub warnings: Vec<String>,
}

impl Analysis {
    pub fn selection(&self, rule: Rule) -> Option<&Selection> {
        self.selections.iter().find(|s| s.rule == rule)
    }
}

/// Fits the penalty path and applies every selection rule. Dummies come from
/// `stream.child("dummies")`; folds run on the current rayon pool.
pub fn analyse(
    pattern: &MultiTypePattern<f64>,
    spec: &ModelSpec<f64>,
    covariates: &Covariates<f64>,
    r_bor: f64,
    settings: &FitSettings,
    stream: &RngStream,
) -> Result<Analysis> {
    let dummies = generate_dummies(pattern.window(), &pattern.counts(), &settings.dummies, &mut stream.child("dummies").rng())
        .map_err(|e| e.at_stage("dummies"))?;
    let design = build_design(pattern, &dummies, spec, covariates, r_bor).map_err(|e| e.at_stage("design"))?;
    let solver = GroupLasso::new(&design, settings.lasso.solver);
    let (gmax, start) = solver.gamma_max().map_err(|e| e.at_stage("gamma-max"))?;
    let grid = log_grid(gmax, settings.lasso.n_grid, settings.lasso.floor_ratio).map_err(|e| e.at_stage("path"))?;
    let path = fit_path(&solver, &grid, gmax, Some(&start.theta)).map_err(|e| e.at_stage("path"))?;
    let layout = spec.layout();
    let mut selections = Vec::new();
    let mut cv = Vec::new();
    let mut loss_fraction = None;
    if let Some((kx, ky)) = settings.cv {
        let stage = |e: Error| e.at_stage("cv");
        let partition = partition_window(pattern.window(), kx, ky, r_bor).map_err(stage)?;
        loss_fraction = Some(partition.loss_fraction());
        let folds = cv_paths(&design, &grid, gmax, &partition, settings.lasso.solver).map_err(stage)?;
        for &kind in &settings.kinds {
            let sel = cv_select(&design, &dummies.rho, &partition, &folds, kind, None).map_err(stage)?;
            let index = sel.selected;
            selections.push(Selection {
                rule: Rule::of_kind(kind),
                index,
                gamma: grid[index],
                matrix: InteractionMatrix::from_fit(layout, &path.points[index].fit),
            });
            cv.push(sel);
        }
    }
    let index = path.aic05_index();
    selections.push(Selection {
        rule: Rule::Aic05,
        index,
        gamma: grid[index],
        matrix: InteractionMatrix::from_fit(layout, &path.points[index].fit),
    });
    Ok(Analysis {
        spec: spec.clone(),
        path,
        cv,
        selections,
        n_rows: design.n_rows(),
        n_data_rows: design.n_data_rows(),
        loss_fraction,
        warnings: design.warnings().to_vec(),
    })
}

/// Relabels types by ascending abundance (ties keep file order). `order[new] = old`.
pub fn order_by_abundance(pattern: &MultiTypePattern<f64>) -> Result<(MultiTypePattern<f64>, Vec<usize>)> {
    let counts = pattern.counts();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by_key(|&t| counts[t]);
    let mut new_of = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        new_of[old] = new;
    }
    let points = pattern.points().iter().map(|p| Point::new(p.x, p.y, new_of[p.ty])).collect();
    let labels = order.iter().map(|&t| pattern.labels()[t].clone()).collect();
    Ok((MultiTypePattern::with_labels(*pattern.window(), points, labels)?, order))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeInfo {
    pub label: String,
    pub count: usize,
    /// 1-based position in the input file's type order.
    pub input_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport {
    pub rule: Rule,
    pub gamma: f64,
    pub grid_index: usize,
    pub active_intra: usize,
    pub active_inter: usize,
    pub matrix: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub rule: Rule,
    pub label: String,
    /// Intercept first, then one value per covariate.
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub converged_points: usize,
    pub grid_points: usize,
    pub design_rows: usize,
    pub data_rows: usize,
    pub cv_loss_fraction: Option<f64>,
    pub pca_captured: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub config: PipelineConfig,
    pub types: Vec<TypeInfo>,
    pub gamma_max: f64,
    pub grid: Vec<f64>,
    pub selections: Vec<SelectionReport>,
    pub coefficients: Vec<CoefficientRow>,
    pub diagnostics: Diagnostics,
    pub mc: Option<Vec<Vec<f64>>>,
    /// Wall-clock seconds per stage; written separately so reports stay reproducible.
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

fn matrix_rows(m: &InteractionMatrix) -> Vec<Vec<u8>> {
    (0..m.p()).map(|i| (0..m.p()).map(|j| u8::from(m.get(i, j))).collect()).collect()
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
}

/// Runs the configured analysis and writes its outputs to `config.paths.output`.
/// Every file except `timings.txt` is a pure function of the configuration.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunReport> {
    config.validate()?;
    pool(config.workers)?.install(|| run_inner(config))
}

fn run_inner(config: &PipelineConfig) -> Result<RunReport> {
    let out = &config.paths.output;
    std::fs::create_dir_all(out)?;
    let stream = RngStream::new(config.seed);
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut Vec<(String, f64)>| {
        timings.push((name.to_string(), clock.elapsed().as_secs_f64()));
        clock = Instant::now();
    };
    create(out, "config.toml")?.write_all(config.to_toml()?.as_bytes())?;

    let raw = read_pattern_csv(File::open(&config.paths.pattern)?, config.window).map_err(|e| e.at_stage("load"))?;
    let (pattern, order) = order_by_abundance(&raw).map_err(|e| e.at_stage("load"))?;
    let labels = pattern.labels().to_vec();
    let counts = pattern.counts();
    if let Some(ty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::arg(format!("type {} has no points", labels[ty])).at_stage("load"));
    }
    let types: Vec<TypeInfo> = order
        .iter()
        .zip(&counts)
        .zip(&labels)
        .map(|((&old, &count), label)| TypeInfo {
            label: label.clone(),
            count,
            input_index: old + 1,
        })
        .collect();
    {
        let mut f = create(out, "types.csv")?;
        writeln!(f, "index,label,count,input_index")?;
        for (k, t) in types.iter().enumerate() {
            writeln!(f, "{},{},{},{}", k + 1, t.label, t.count, t.input_index)?;
        }
    }
    write_pattern_csv(&pattern, create(out, "pattern_ordered.csv")?)?;
    lap("load", &mut timings);

    let rasters: Vec<CovariateField<f64>> = config
        .paths
        .covariates
        .iter()
        .map(|p| read_raster(File::open(p)?))
        .collect::<Result<_>>()
        .map_err(|e| e.at_stage("covariates"))?;
    let mut pca_captured = None;
    let fields = match config.model.pca_components {
        Some(k) => {
            let pca = pca_covariates(&rasters, k).map_err(|e| e.at_stage("pca"))?;
            let mut f = create(out, "pca.csv")?;
            writeln!(f, "component,eigenvalue,cumulative")?;
            for (c, (v, cum)) in pca.eigenvalues.iter().zip(&pca.cumulative).enumerate() {
                writeln!(f, "{},{},{}", c + 1, v, cum)?;
            }
            pca_captured = Some(pca.captured());
            pca.components
        }
        None => rasters,
    };
    let covariates = Covariates::new(fields);
    lap("covariates", &mut timings);

    let spec = config
        .model
        .spec(&counts, pattern.window(), covariates.len())
        .map_err(|e| e.at_stage("model"))?;
    let settings = FitSettings {
        dummies: config.model.dummies,
        lasso: config.lasso.clone(),
        cv: config.cv.enabled.then_some((config.cv.kx, config.cv.ky)),
        kinds: config.cv.kinds.clone(),
    };
    let analysis = analyse(&pattern, &spec, &covariates, config.model.r_bor(), &settings, &stream)?;
    lap("fit", &mut timings);

    let layout = spec.layout();
    write_path_csv(&analysis.path, layout, &labels, create(out, "path.csv")?)?;
    for sel in &analysis.cv {
        sel.write_folds_csv(create(out, &format!("cv_{}_folds.csv", sel.kind.name()))?)?;
        sel.write_summary_csv(create(out, &format!("cv_{}_summary.csv", sel.kind.name()))?)?;
    }
    let mut selections = Vec::new();
    let mut coefficients = Vec::new();
    {
        let mut f = create(out, "selection.csv")?;
        writeln!(f, "rule,grid_index,gamma")?;
        for s in &analysis.selections {
            writeln!(f, "{},{},{}", s.rule.name(), s.index + 1, s.gamma)?;
            s.matrix.write_csv(create(out, &format!("matrix_{}.csv", s.rule.name()))?, &labels)?;
            s.matrix.write_scores_csv(create(out, &format!("scores_{}.csv", s.rule.name()))?, &labels)?;
            s.matrix.write_pgm(create(out, &format!("matrix_{}.pgm", s.rule.name()))?)?;
            let p = s.matrix.p();
            selections.push(SelectionReport {
                rule: s.rule,
                gamma: s.gamma,
                grid_index: s.index,
                active_intra: (0..p).filter(|&i| s.matrix.get(i, i)).count(),
                active_inter: (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).filter(|&(i, j)| s.matrix.get(i, j)).count(),
                matrix: matrix_rows(&s.matrix),
            });
            let theta = &analysis.path.points[s.index].fit.theta;
            for (i, label) in labels.iter().enumerate() {
                coefficients.push(CoefficientRow {
                    rule: s.rule,
                    label: label.clone(),
                    alpha: layout.slice(theta, layout.alpha_group(i)).to_vec(),
                });
            }
        }
    }
    {
        let mut f = create(out, "coefficients.csv")?;
        write!(f, "rule,type,intercept")?;
        for k in 0..covariates.len() {
            write!(f, ",z{}", k + 1)?;
        }
        writeln!(f)?;
        for c in &coefficients {
            let vals: Vec<String> = c.alpha.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{},{},{}", c.rule.name(), c.label, vals.join(","))?;
        }
    }
    lap("report", &mut timings);

    let mc = match &config.mc {
        Some(opts) => {
            let m = interaction_test_matrix(&pattern, opts, &stream.child("mc")).map_err(|e| e.at_stage("mc"))?;
            write_mc(&m, out, &labels)?;
            lap("mc", &mut timings);
            Some((0..m.p).map(|a| (0..m.p).map(|b| m.p_value(a, b)).collect()).collect())
        }
        None => None,
    };

    let report = RunReport {
        seed: config.seed,
        config: config.clone(),
        types,
        gamma_max: analysis.path.gamma_max,
        grid: analysis.path.grid(),
        selections,
        coefficients,
        diagnostics: Diagnostics {
            converged_points: analysis.path.points.iter().filter(|p| p.fit.converged).count(),
            grid_points: analysis.path.len(),
            design_rows: analysis.n_rows,
            data_rows: analysis.n_data_rows,
            cv_loss_fraction: analysis.loss_fraction,
            pca_captured,
            warnings: analysis.warnings.clone(),
        },
        mc,
        timings,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    create(out, "report.json")?.write_all(json.as_bytes())?;
    let mut t = create(out, "timings.txt")?;
    for (stage, secs) in &report.timings {
        writeln!(t, "{stage}\t{secs:.3}")?;
    }
    Ok(report)
}

/// Writes `mc_pvalues.csv`, `mc_matrix.csv` and `mc_matrix.pgm` into `out`.
pub fn write_mc(m: &McMatrix, out: &Path, labels: &[String]) -> Result<()> {
    m.write_csv(create(out, "mc_pvalues.csv")?, labels)?;
    m.indicators.write_csv(create(out, "mc_matrix.csv")?, labels)?;
    m.indicators.write_pgm(create(out, "mc_matrix.pgm")?)
}

/// Settings for running and scoring a synthetic experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSettings {
    pub scale: ExperimentScale,
    pub replicates: usize,
    pub seed: u64,
    pub lasso: LassoConfig,
    pub dummies: DummySpec,
    /// Also run the Monte Carlo tests on each replicate.
    pub mc: Option<McOptions>,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            scale: ExperimentScale::default(),
            replicates: 10,
            seed: 1,
            lasso: LassoConfig::default(),
            dummies: DummySpec::default(),
            mc: None,
        }
    }
}

/// Detection rates of one replicate under each rule (and the Monte Carlo test, if run).
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub rates: Vec<(Rule, Rates)>,
    pub mc: Option<Rates>,
}

impl Evaluation {
    pub fn rule(&self, rule: Rule) -> Option<&Rates> {
        self.rates.iter().find(|r| r.0 == rule).map(|r| &r.1)
    }
}

pub fn evaluate_dataset(data: &Dataset, settings: &ExperimentSettings, stream: &RngStream) -> Result<Evaluation> {
    let fit = FitSettings {
        dummies: settings.dummies,
        lasso: settings.lasso.clone(),
        cv: Some(data.cv_dims),
        kinds: ResidualKind::ALL.to_vec(),
    };
    let a = analyse(&data.pattern, &data.fit_spec, &data.covariates, data.r_bor, &fit, &stream.child("fit"))?;
    let rates = a.selections.iter().map(|s| (s.rule, score(&s.matrix, &data.truth))).collect();
    let mc = match &settings.mc {
        Some(opts) => Some(score(&interaction_test_matrix(&data.pattern, opts, &stream.child("mc"))?.indicators, &data.truth)),
        None => None,
    };
    Ok(Evaluation { rates, mc })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| x.to_string())
}

fn rate_fields(r: &Rates) -> [Option<f64>; 6] {
    [r.tp, r.fp, r.intra_tp, r.intra_fp, r.inter_tp, r.inter_fp]
}

const RATE_NAMES: [&str; 6] = ["tp", "fp", "intra_tp", "intra_fp", "inter_tp", "inter_fp"];

/// Generates (and optionally scores) replicates, writing patterns, the truth matrix, a
/// manifest and, when evaluating, per-replicate rates and their means.
pub fn run_experiment(id: ExperimentId, settings: &ExperimentSettings, out: &Path, evaluate: bool) -> Result<Vec<Evaluation>> {
    std::fs::create_dir_all(out)?;
    let stream = RngStream::new(settings.seed).child(&format!("experiment{}", id.number()));
    let mut manifest = create(out, "manifest.csv")?;
    writeln!(manifest, "replicate,file,points")?;
    let mut evals = Vec::new();
    for rep in 0..settings.replicates {
        let data = generate(id, &settings.scale, &stream, rep as u64).map_err(|e| e.at_stage("simulate"))?;
        let file = format!("replicate_{:03}.csv", rep + 1);
        write_pattern_csv(&data.pattern, create(out, &file)?)?;
        writeln!(manifest, "{},{},{}", rep + 1, file, data.pattern.len())?;
        if rep == 0 {
            data.truth.write_csv(create(out, "truth.csv")?, data.pattern.labels())?;
        }
        if evaluate {
            evals.push(evaluate_dataset(&data, settings, &stream.child("evaluate").index(rep as u64))?);
        }
    }
    if evaluate {
        let mut f = create(out, "rates.csv")?;
        writeln!(f, "replicate,rule,{}", RATE_NAMES.join(","))?;
        for (rep, e) in evals.iter().enumerate() {
            let rows = e.rates.iter().map(|(r, x)| (r.name(), x)).chain(e.mc.as_ref().map(|x| ("mc", x)));
            for (name, x) in rows {
                let vals: Vec<String> = rate_fields(x).iter().map(|v| fmt_opt(*v)).collect();
                writeln!(f, "{},{},{}", rep + 1, name, vals.join(","))?;
            }
        }
        let mut s = create(out, "summary.csv")?;
        writeln!(s, "rule,metric,mean,sd,n")?;
        let mut rules: Vec<(String, Vec<&Rates>)> = Vec::new();
        if let Some(first) = evals.first() {
            for (r, _) in &first.rates {
                rules.push((r.name().into(), evals.iter().filter_map(|e| e.rule(*r)).collect()));
            }
            if first.mc.is_some() {
                rules.push(("mc".into(), evals.iter().filter_map(|e| e.mc.as_ref()).collect()));
            }
        }
        for (name, xs) in rules {
            for (k, metric) in RATE_NAMES.iter().enumerate() {
                let v: Vec<f64> = xs.iter().filter_map(|x| rate_fields(x)[k]).collect();
                let (m, sd) = mean_sd(&v);
                writeln!(s, "{name},{metric},{},{},{}", fmt_opt(m), fmt_opt(sd), v.len())?;
            }
        }
    }
    Ok(evals)
}

/// Mean and sample sd; `None` when there is nothing (or too little) to summarise.
pub fn mean_sd(v: &[f64]) -> (Option<f64>, Option<f64>) {
    if v.is_empty() {
        return (None, None);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let sd = (v.len() > 1).then(|| (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (Some(m), sd)
}
