use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use multigibbs::config::{PipelineConfig, SimulateConfig};
use multigibbs::io::{read_pattern_csv, read_raster, write_pattern_csv, write_raster};
use multigibbs::mctest::{interaction_test_matrix, McOptions, McTest, RankOrdering};
use multigibbs::pattern::{MultiTypePattern, Point, Window};
use multigibbs::pca::pca_covariates;
use multigibbs::pipeline::{run_experiment, run_pipeline, write_mc, ExperimentSettings};
use multigibbs::simulate::{sim_gibbs_fixed_n, ExperimentId, RngStream, Scenario};
use multigibbs::Covariates;

/// Interaction detection for multitype point patterns.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a multitype Gibbs pattern at fixed counts.
    Simulate {
        /// TOML parameter file (window, counts, ranges, betas).
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the penalty path and report the AIC0.5 selection (no cross-validation).
    Fit(ConfigArgs),
    /// Full pipeline: path, cross-validation for every residual kind, AIC0.5.
    Cv(ConfigArgs),
    /// Monte Carlo interaction tests under conditional Poisson nulls.
    Mctest(McArgs),
    /// Principal components of covariate rasters.
    Pca {
        #[arg(long, num_args = 1.., required = true)]
        rasters: Vec<PathBuf>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate (and optionally score) a synthetic experiment: 1, 2, 4 or 5.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured worker count.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestArg {
    Studentised,
    Rank,
    RankClassic,
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    pattern: PathBuf,
    /// Window as x_min,x_max,y_min,y_max (default: from the file).
    #[arg(long, value_delimiter = ',', num_args = 4)]
    window: Option<Vec<f64>>,
    #[arg(long, default_value_t = 30.0)]
    bandwidth: f64,
    #[arg(long, default_value_t = 2.0)]
    cell: f64,
    #[arg(long, default_value_t = 1.0)]
    r_min: f64,
    #[arg(long, default_value_t = 50.0)]
    r_max: f64,
    #[arg(long, default_value_t = 50)]
    n_r: usize,
    #[arg(long, default_value_t = 999)]
    simulations: usize,
    #[arg(long, value_enum, default_value = "studentised")]
    test: TestArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Homogeneous,
    HomogeneousPlus,
    Inhomogeneous,
    InhomogeneousPlus,
}

#[derive(Args)]
struct ExperimentArgs {
    id: u32,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Fit every replicate and score it against the truth.
    #[arg(long)]
    evaluate: bool,
    /// Experiment 2 points per type.
    #[arg(long)]
    n_per_type: Option<usize>,
    /// Experiment 4 number of Poisson types.
    #[arg(long)]
    types: Option<usize>,
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    /// Experiment 5 types per generating model.
    #[arg(long)]
    types_per_model: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    /// Also run Monte Carlo tests with this many simulations.
    #[arg(long)]
    mc_simulations: Option<usize>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn simulate(params: &Path, seed: u64, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(params).with_context(|| format!("reading {}", params.display()))?;
    let cfg = SimulateConfig::from_toml(&text)?;
    let spec = cfg.spec()?;
    let theta = cfg.theta(&spec)?;
    let mut rng = RngStream::new(seed).child("simulate").rng();
    let s = sim_gibbs_fixed_n(&spec, &theta, &Covariates::none(), &cfg.counts, &cfg.window, &cfg.mh, &mut rng)?;
    log::info!("acceptance rate {:.3}", s.acceptance_rate);
    let pts: Vec<Point<f64>> = s.pattern.points().to_vec();
    let pattern = MultiTypePattern::with_labels(cfg.window, pts, cfg.labels())?;
    write_pattern_csv(&pattern, create(out)?)?;
    Ok(())
}

fn pipeline(args: &ConfigArgs, cv: bool) -> Result<()> {
    let mut cfg = PipelineConfig::load(&args.config)?;
    cfg.cv.enabled = cv;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    let report = run_pipeline(&cfg)?;
    for s in &report.selections {
        println!(
            "{:<11} gamma={:.6e} intra={} inter={}",
            s.rule.name(),
            s.gamma,
            s.active_intra,
            s.active_inter
        );
    }
    println!("outputs in {}", cfg.paths.output.display());
    Ok(())
}

fn mctest(a: &McArgs) -> Result<()> {
    let window = match &a.window {
        Some(v) => Some(Window::new(v[0], v[1], v[2], v[3])?),
        None => None,
    };
    let pattern = read_pattern_csv(File::open(&a.pattern).with_context(|| format!("opening {}", a.pattern.display()))?, window)?;
    let (test, ordering) = match a.test {
        TestArg::Studentised => (McTest::Studentised, RankOrdering::Erl),
        TestArg::Rank => (McTest::Rank, RankOrdering::Erl),
        TestArg::RankClassic => (McTest::Rank, RankOrdering::Classic),
    };
    let opts = McOptions {
        r_min: a.r_min,
        r_max: a.r_max,
        n_r: a.n_r,
        simulations: a.simulations,
        bandwidth: a.bandwidth,
        cell: a.cell,
        test,
        ordering,
        ..McOptions::default()
    };
    let m = interaction_test_matrix(&pattern, &opts, &RngStream::new(a.seed).child("mc"))?;
    std::fs::create_dir_all(&a.out)?;
    write_mc(&m, &a.out, pattern.labels())?;
    for r in 0..m.p {
        let row: Vec<String> = (0..m.p).map(|c| format!("{:.3}", m.p_value(r, c))).collect();
        println!("{:<12} {}", pattern.labels()[r], row.join(" "));
    }
    Ok(())
}

fn pca(rasters: &[PathBuf], k: usize, out: &Path) -> Result<()> {
    let fields = rasters
        .iter()
        .map(|p| read_raster(File::open(p).with_context(|| format!("opening {}", p.display()))?).map_err(Into::into))
        .collect::<Result<Vec<_>>>()?;
    let res = pca_covariates(&fields, k)?;
    std::fs::create_dir_all(out)?;
    for (c, f) in res.components.iter().enumerate() {
        write_raster(f, create(&out.join(format!("pc{}.txt", c + 1)))?)?;
    }
    let mut f = create(&out.join("variance.csv"))?;
    writeln!(f, "component,eigenvalue,cumulative")?;
    for (c, (v, cum)) in res.eigenvalues.iter().zip(&res.cumulative).enumerate() {
        writeln!(f, "{},{},{}", c + 1, v, cum)?;
    }
    println!("{k} components capture {:.1}% of the variance", 100.0 * res.captured());
    Ok(())
}

fn experiment(a: &ExperimentArgs) -> Result<()> {
    let id = ExperimentId::from_number(a.id)?;
    let mut s = ExperimentSettings {
        replicates: a.replicates,
        seed: a.seed,
        ..ExperimentSettings::default()
    };
    if let Some(v) = a.n_per_type {
        s.scale.n_per_type = v;
    }
    if let Some(v) = a.types {
        s.scale.n_types = v;
    }
    if let Some(v) = a.scenario {
        s.scale.scenario = match v {
            ScenarioArg::Homogeneous => Scenario::Homogeneous,
            ScenarioArg::HomogeneousPlus => Scenario::HomogeneousPlus,
            ScenarioArg::Inhomogeneous => Scenario::Inhomogeneous,
            ScenarioArg::InhomogeneousPlus => Scenario::InhomogeneousPlus,
        };
    }
    if let Some(v) = a.types_per_model {
        s.scale.types_per_model = v;
    }
    if let Some(v) = a.sweeps {
        s.scale.mh.sweeps = v;
    }
    if let Some(v) = a.grid {
        s.lasso.n_grid = v;
    }
    if let Some(v) = a.mc_simulations {
        s.mc = Some(McOptions {
            simulations: v,
            ..McOptions::default()
        });
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.workers).build()?;
    pool.install(|| run_experiment(id, &s, &a.out, a.evaluate))?;
    println!("outputs in {}", a.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { params, seed, out } => simulate(params, *seed, out),
        Command::Fit(a) => pipeline(a, false),
        Command::Cv(a) => pipeline(a, true),
        Command::Mctest(a) => mctest(a),
        Command::Pca { rasters, k, out } => pca(rasters, *k, out),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
