//! Command-line interface: simulate samples, fit, build intervals, run
//! Bayesian analyses, drive Monte Carlo experiments and export plot data.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use gphc::bayes::{
    bayes_estimates, credible_set, hpd_interval, posterior, posterior_variances, sample_posterior,
    BetaGammaParams, GFunction, SplitPolicy,
};
use gphc::data;
use gphc::error::Error;
use gphc::estimation::{asymptotic_ci, fit_mle, ExpCompetingModel};
use gphc::exact::{build_mixture, Target};
use gphc::experiments::{run_experiment, ExperimentConfig, Methods, SchemeFamily};
use gphc::intervals::{bootstrap_ci, cdf_in_parameter, exact_ci, IntervalResult, OtherThetaPolicy};
use gphc::io::{load_sample, sample_from_pairs, save_sample, SampleFormat};
use gphc::rngs::replication_rng;
use gphc::sample::{generate_sample, GphcSample};
use gphc::scheme::CensoringScheme;

#[derive(Parser)]
#[command(
    name = "gphc",
    version,
    about = "Competing-risks exponential inference under generalized progressive hybrid censoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one censored sample and write it to a file.
    Simulate(SimulateArgs),
    /// Maximum likelihood estimates (with approximate normal intervals).
    Fit(FitArgs),
    /// Exact confidence interval by pivoting the conditional CDF.
    ExactCi(ExactCiArgs),
    /// Parametric bootstrap percentile interval.
    BootCi(BootCiArgs),
    /// Bayesian analysis under a Beta-Gamma prior.
    Bayes(BayesArgs),
    /// Monte Carlo replication study over a design.
    Experiment(ExperimentArgs),
    /// Export plot data (density/CDF grids, pivot curves, credible sets,
    /// posterior draws) as CSV.
    PlotData(PlotDataArgs),
}

/// Design flags: n units on test, at most m and at least k observed
/// failures, deadline T, removals R at each failure.
#[derive(Args, Clone)]
struct SchemeArgs {
    /// Units on test (n).
    #[arg(long)]
    n: Option<u32>,
    /// Maximum number of observed failures (m).
    #[arg(long)]
    m: Option<u32>,
    /// Guaranteed number of observed failures (k).
    #[arg(long)]
    k: Option<u32>,
    /// Deadline T in time units.
    #[arg(long = "T", visible_alias = "deadline")]
    deadline: Option<f64>,
    /// Removal pattern: I (all at first failure), II (middle), III (last).
    #[arg(long)]
    scheme: Option<String>,
    /// Explicit removal counts R_1,...,R_m (comma separated; overrides
    /// --scheme).
    #[arg(long, value_delimiter = ',')]
    removals: Option<Vec<u32>>,
}

impl SchemeArgs {
    fn build(&self) -> Result<CensoringScheme, Error> {
        let need = |name: &str, v: Option<u32>| {
            v.ok_or_else(|| Error::InvalidArgument(format!("--{name} is required")))
        };
        let n = need("n", self.n)?;
        let m = need("m", self.m)?;
        let k = need("k", self.k)?;
        let t = self
            .deadline
            .ok_or_else(|| Error::InvalidArgument("--T is required".into()))?;
        let removals = if let Some(r) = &self.removals {
            r.clone()
        } else {
            let fam: SchemeFamily = self
                .scheme
                .as_deref()
                .ok_or_else(|| Error::InvalidArgument("pass --scheme or --removals".into()))?
                .parse()?;
            gphc::experiments::expand_scheme(&fam, n, m)?
        };
        CensoringScheme::new(n, m, k, t, removals)
    }
}

/// Input data selector: `builtin:hoel-gphc`, a CSV file (scheme from the
/// sidecar or the design flags), or a self-describing JSON file.
#[derive(Args, Clone)]
struct DataArgs {
    /// Data source: builtin:hoel-gphc, a .csv file or a .json file.
    #[arg(long)]
    data: String,
    #[command(flatten)]
    scheme: SchemeArgs,
}

impl DataArgs {
    fn load(&self) -> Result<GphcSample, Error> {
        if let Some(name) = self.data.strip_prefix("builtin:") {
            if name == data::HOEL_GPHC_NAME {
                return Ok(data::hoel_gphc_sample());
            }
            return Err(Error::InvalidArgument(format!(
                "unknown builtin dataset {name:?}"
            )));
        }
        let path = Path::new(&self.data);
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => SampleFormat::Json,
            _ => SampleFormat::Csv,
        };
        if format == SampleFormat::Csv && self.scheme.n.is_some() {
            let scheme = self.scheme.build()?;
            let text = fs::read_to_string(path)?;
            let pairs = gphc::io::parse_csv_observations(&text)?;
            return sample_from_pairs(&pairs, &scheme);
        }
        load_sample(path, format, None)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Mean lifetime of cause 1.
    #[arg(long)]
    theta1: f64,
    /// Mean lifetime of cause 2.
    #[arg(long)]
    theta2: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file for the sample.
    #[arg(long)]
    out: PathBuf,
    /// csv (with a scheme sidecar) or json.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExactCiArgs {
    #[command(flatten)]
    data: DataArgs,
    /// theta1 or theta2.
    #[arg(long)]
    target: String,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Fix the nuisance parameter instead of plugging in its MLE.
    #[arg(long)]
    other_theta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BootCiArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    target: String,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = 1000)]
    b: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BayesArgs {
    #[command(flatten)]
    data: DataArgs,
    /// `matching` (Bayes estimates coincide with the MLEs) or `b0,a0,a1,a2`.
    #[arg(long, default_value = "matching")]
    prior: String,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Functions to report HPD intervals for (theta1, theta2, lambda1,
    /// lambda2, ratio).
    #[arg(long, value_delimiter = ',')]
    hpd: Vec<String>,
    #[arg(long, default_value_t = 100_000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long, default_value_t = 1.0)]
    theta1: f64,
    #[arg(long, default_value_t = 1.3)]
    theta2: f64,
    #[arg(long, default_value_t = 1000)]
    reps: u32,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 20_240_101)]
    seed: u64,
    /// Bootstrap replicates inside each replication.
    #[arg(long = "B", default_value_t = 1000)]
    b: u32,
    /// Comma list from: mle, exact, boot, bayes-informative, bayes-matching.
    #[arg(long, value_delimiter = ',', default_value = "mle,exact,boot")]
    methods: Vec<String>,
    /// Score replications without an exact interval as non-coverage.
    #[arg(long, default_value_t = false)]
    neci_as_miss: bool,
    #[arg(long, default_value_t = 2000)]
    posterior_draws: usize,
    /// Write the metrics table as CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotDataArgs {
    /// pdf-cdf | ci-curve | credible-set | posterior-draws.
    #[arg(long)]
    kind: String,
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long)]
    data: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    theta1: f64,
    #[arg(long, default_value_t = 1.3)]
    theta2: f64,
    #[arg(long, default_value = "theta1")]
    target: String,
    /// Grid as lo:hi:steps.
    #[arg(long, default_value = "0.01:6:400")]
    grid: String,
    /// Observed estimate for ci-curve (defaults to the fitted value when
    /// --data is given).
    #[arg(long)]
    x_obs: Option<f64>,
    #[arg(long)]
    other_theta: Option<f64>,
    #[arg(long, default_value = "matching")]
    prior: String,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 10_000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
}

fn parse_target(s: &str) -> Result<Target, Error> {
    match s.trim().to_lowercase().as_str() {
        "theta1" | "1" => Ok(Target::Theta1),
        "theta2" | "2" => Ok(Target::Theta2),
        other => Err(Error::InvalidArgument(format!(
            "target must be theta1 or theta2, got {other:?}"
        ))),
    }
}

fn parse_prior(s: &str) -> Result<BetaGammaParams, Error> {
    if s.trim() == "matching" {
        return Ok(BetaGammaParams::matching_prior());
    }
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Error::InvalidArgument(format!("bad prior argument {s:?}: {e}")))?;
    if parts.len() != 4 {
        return Err(Error::InvalidArgument(
            "prior must be `matching` or `b0,a0,a1,a2`".into(),
        ));
    }
    BetaGammaParams::new(parts[0], parts[1], parts[2], parts[3])
}

struct Manifest {
    command: String,
    config: Value,
    seed: Option<u64>,
    started: Instant,
    stages: Vec<(String, f64)>,
}

impl Manifest {
    fn new(command: &str, config: Value, seed: Option<u64>) -> Self {
        Manifest {
            command: command.into(),
            config,
            seed,
            started: Instant::now(),
            stages: Vec::new(),
        }
    }

    fn stage(&mut self, name: &str, secs: f64) {
        self.stages.push((name.to_string(), secs));
    }

    fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "config": self.config,
            "master_seed": self.seed,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "wall_clock_seconds": self.started.elapsed().as_secs_f64(),
            "stage_seconds": self.stages.iter().map(|(n, s)| json!({"stage": n, "seconds": s})).collect::<Vec<_>>(),
        })
    }

    /// Written next to the primary output (or to gphc-manifest.json).
    fn write(&self, out: Option<&Path>) -> Result<(), Error> {
        let path = match out {
            Some(p) => {
                let mut os = p.as_os_str().to_owned();
                os.push(".manifest.json");
                PathBuf::from(os)
            }
            None => PathBuf::from("gphc-manifest.json"),
        };
        fs::write(path, serde_json::to_string_pretty(&self.to_json())?)?;
        Ok(())
    }
}

/// Print the advisory table, then emit the machine JSON (to --out if given,
/// otherwise to standard output).
fn emit(result: &Value, table: String, out: Option<&Path>) -> Result<(), Error> {
    print!("{table}");
    match out {
        Some(p) => fs::write(p, serde_json::to_string_pretty(result)?)?,
        None => println!("{}", serde_json::to_string_pretty(result)?),
    }
    Ok(())
}

fn interval_json(r: &IntervalResult) -> Value {
    serde_json::to_value(r).unwrap()
}

fn fmt_interval(r: &IntervalResult) -> String {
    match (r.lower, r.upper) {
        (Some(l), Some(u)) => format!("({l:.4}, {u:.4})"),
        (Some(l), None) => format!("({l:.4}, none: no finite upper limit)"),
        _ => "(does not exist)".into(),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate(a) => {
            let scheme = a.scheme.build()?;
            let model = ExpCompetingModel::new(a.theta1, a.theta2)?;
            let mut manifest = Manifest::new(
                "simulate",
                json!({"scheme": scheme, "theta1": a.theta1, "theta2": a.theta2, "format": a.format}),
                Some(a.seed),
            );
            let t0 = Instant::now();
            let sample = generate_sample(&model, &scheme, &mut replication_rng(a.seed, 0));
            manifest.stage("generate", t0.elapsed().as_secs_f64());
            let format = match a.format.as_str() {
                "csv" => SampleFormat::Csv,
                "json" => SampleFormat::Json,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "format must be csv or json, got {other:?}"
                    )))
                }
            };
            save_sample(&sample, &a.out, format)?;
            manifest.write(Some(&a.out))?;
            println!(
                "wrote {} observations (J={}, D1={}, D2={}, W={:.6}) to {}",
                sample.observations.len(),
                sample.j,
                sample.d1,
                sample.d2,
                sample.w,
                a.out.display()
            );
            Ok(())
        }
        Command::Fit(a) => {
            let sample = a.data.load()?;
            let mut manifest =
                Manifest::new("fit", json!({"data": a.data.data, "alpha": a.alpha}), None);
            let t0 = Instant::now();
            let fit = fit_mle(&sample);
            let asym = match (fit.theta1, fit.theta2) {
                (Some(_), Some(_)) => Some(asymptotic_ci(&fit, a.alpha)?),
                _ => None,
            };
            manifest.stage("fit", t0.elapsed().as_secs_f64());
            let mut table = format!(
                "statistic          value\nJ                  {}\nD1                 {}\nD2                 {}\nW                  {:.6}\n",
                sample.j, sample.d1, sample.d2, sample.w
            );
            for (name, v) in [("theta1_hat", fit.theta1), ("theta2_hat", fit.theta2)] {
                match v {
                    Some(v) => table.push_str(&format!("{name}         {v:.4}\n")),
                    None => table.push_str(&format!("{name}         does not exist\n")),
                }
            }
            if let Some((c1, c2)) = &asym {
                table.push_str(&format!(
                    "approx CI theta1   {}\napprox CI theta2   {}\n",
                    fmt_interval(c1),
                    fmt_interval(c2)
                ));
            }
            let result = json!({
                "statistics": {"j": sample.j, "d1": sample.d1, "d2": sample.d2, "w": sample.w},
                "mle": {"theta1": fit.theta1, "theta2": fit.theta2},
                "asymptotic_ci": asym.map(|(c1, c2)| json!({
                    "label": "approximate",
                    "theta1": interval_json(&c1),
                    "theta2": interval_json(&c2),
                })),
            });
            emit(&result, table, a.out.as_deref())?;
            manifest.write(a.out.as_deref())
        }
        Command::ExactCi(a) => {
            let sample = a.data.load()?;
            let target = parse_target(&a.target)?;
            let policy = match a.other_theta {
                Some(v) => OtherThetaPolicy::Fixed(v),
                None => OtherThetaPolicy::PlugInMle,
            };
            let mut manifest = Manifest::new(
                "exact-ci",
                json!({"data": a.data.data, "target": a.target, "alpha": a.alpha, "other_theta": a.other_theta}),
                None,
            );
            let t0 = Instant::now();
            let ci = exact_ci(&sample, target, a.alpha, policy)?;
            manifest.stage("pivot", t0.elapsed().as_secs_f64());
            let table = format!(
                "exact {:.0}% CI for {}: {}\n",
                100.0 * (1.0 - a.alpha),
                a.target,
                fmt_interval(&ci)
            );
            emit(
                &json!({"target": a.target, "interval": interval_json(&ci)}),
                table,
                a.out.as_deref(),
            )?;
            manifest.write(a.out.as_deref())
        }
        Command::BootCi(a) => {
            let sample = a.data.load()?;
            let target = parse_target(&a.target)?;
            let mut manifest = Manifest::new(
                "boot-ci",
                json!({"data": a.data.data, "target": a.target, "alpha": a.alpha, "B": a.b}),
                Some(a.seed),
            );
            let t0 = Instant::now();
            let ci = bootstrap_ci(&sample, target, a.alpha, a.b, a.seed)?;
            manifest.stage("bootstrap", t0.elapsed().as_secs_f64());
            let table = format!(
                "bootstrap {:.0}% CI for {} (B = {}): {}\n",
                100.0 * (1.0 - a.alpha),
                a.target,
                a.b,
                fmt_interval(&ci)
            );
            emit(
                &json!({"target": a.target, "interval": interval_json(&ci)}),
                table,
                a.out.as_deref(),
            )?;
            manifest.write(a.out.as_deref())
        }
        Command::Bayes(a) => {
            let sample = a.data.load()?;
            let prior = parse_prior(&a.prior)?;
            let mut manifest = Manifest::new(
                "bayes",
                json!({"data": a.data.data, "prior": prior, "alpha": a.alpha, "draws": a.draws}),
                Some(a.seed),
            );
            let t0 = Instant::now();
            let post = posterior(&prior, &sample);
            let estimates = bayes_estimates(&post).ok();
            let variances = posterior_variances(&post).ok();
            let set = credible_set(&post, a.alpha, SplitPolicy::Symmetric)?;
            let mut hpd_out = Vec::new();
            for (i, name) in a.hpd.iter().enumerate() {
                let g = match name.trim().to_lowercase().as_str() {
                    "theta1" => GFunction::Theta1,
                    "theta2" => GFunction::Theta2,
                    "lambda1" => GFunction::Lambda1,
                    "lambda2" => GFunction::Lambda2,
                    "ratio" => GFunction::RateRatio,
                    other => {
                        return Err(Error::InvalidArgument(format!(
                            "unknown HPD function {other:?}"
                        )))
                    }
                };
                let iv = hpd_interval(&post, g, a.alpha, a.draws, a.seed.wrapping_add(i as u64))?;
                hpd_out.push((name.clone(), iv));
            }
            manifest.stage("bayes", t0.elapsed().as_secs_f64());
            let mut table = format!(
                "posterior: BG(b0={}, a0={}, a1={}, a2={})\n",
                post.b0, post.a0, post.a1, post.a2
            );
            if let Some((t1, t2)) = estimates {
                table.push_str(&format!("theta1_B = {t1:.4}   theta2_B = {t2:.4}\n"));
            }
            for (name, (lo, hi)) in &hpd_out {
                table.push_str(&format!("HPD {name}: ({lo:.4}, {hi:.4})\n"));
            }
            let result = json!({
                "posterior": post,
                "estimates": estimates.map(|(t1, t2)| json!({"theta1": t1, "theta2": t2})),
                "posterior_variances": variances.map(|(v1, v2)| json!({"theta1": v1, "theta2": v2})),
                "credible_set": set,
                "hpd": hpd_out.iter().map(|(n, (lo, hi))| json!({"g": n, "lower": lo, "upper": hi})).collect::<Vec<_>>(),
            });
            emit(&result, table, a.out.as_deref())?;
            manifest.write(a.out.as_deref())
        }
        Command::Experiment(a) => {
            let fam: SchemeFamily = match &a.scheme.removals {
                Some(r) => SchemeFamily::Custom(r.clone()),
                None => a
                    .scheme
                    .scheme
                    .as_deref()
                    .ok_or_else(|| Error::InvalidArgument("pass --scheme or --removals".into()))?
                    .parse()?,
            };
            let need = |name: &str, v: Option<u32>| {
                v.ok_or_else(|| Error::InvalidArgument(format!("--{name} is required")))
            };
            let mut config = ExperimentConfig::new(
                a.theta1,
                a.theta2,
                need("n", a.scheme.n)?,
                need("m", a.scheme.m)?,
                need("k", a.scheme.k)?,
                a.scheme
                    .deadline
                    .ok_or_else(|| Error::InvalidArgument("--T is required".into()))?,
                fam,
            );
            config.replications = a.reps;
            config.alpha = a.alpha;
            config.master_seed = a.seed;
            config.bootstrap_b = a.b;
            config.posterior_draws = a.posterior_draws;
            config.score_neci_as_miss = a.neci_as_miss;
            config.methods = Methods {
                mle: a.methods.iter().any(|m| m == "mle"),
                exact_ci: a.methods.iter().any(|m| m == "exact"),
                bootstrap_ci: a.methods.iter().any(|m| m == "boot"),
                bayes_informative: a.methods.iter().any(|m| m == "bayes-informative"),
                bayes_matching: a.methods.iter().any(|m| m == "bayes-matching"),
            };
            let mut manifest =
                Manifest::new("experiment", serde_json::to_value(&config)?, Some(a.seed));
            let t0 = Instant::now();
            let report = run_experiment(&config)?;
            manifest.stage("replications", t0.elapsed().as_secs_f64());
            let (header, rows) = report.csv_rows();
            let mut table = format!("{header}\n");
            for r in &rows {
                table.push_str(r);
                table.push('\n');
            }
            if let Some(out) = &a.out {
                fs::write(out, &table)?;
            }
            emit(&serde_json::to_value(&report)?, table, None)?;
            manifest.write(a.out.as_deref())
        }
        Command::PlotData(a) => {
            let mut manifest = Manifest::new(
                "plot-data",
                json!({"kind": a.kind, "grid": a.grid, "target": a.target, "alpha": a.alpha}),
                Some(a.seed),
            );
            let t0 = Instant::now();
            let csv_text = match a.kind.as_str() {
                "pdf-cdf" => {
                    let scheme = a.scheme.build()?;
                    let model = ExpCompetingModel::new(a.theta1, a.theta2)?;
                    let target = parse_target(&a.target)?;
                    let mix = build_mixture(&model, &scheme, target)?;
                    let grid = parse_grid(&a.grid)?;
                    let mut s = String::from("x,pdf,cdf\n");
                    for (x, p, c) in mix.plot_data(&grid)? {
                        s.push_str(&format!("{x:.10e},{p:.10e},{c:.10e}\n"));
                    }
                    s
                }
                "ci-curve" => {
                    let scheme = a.scheme.build()?;
                    let target = parse_target(&a.target)?;
                    let (x_obs, other) = match (&a.data, a.x_obs, a.other_theta) {
                        (Some(d), _, _) => {
                            let sample =
                                DataArgs { data: d.clone(), scheme: a.scheme.clone() }.load()?;
                            let fit = fit_mle(&sample);
                            let (x, o) = match target {
                                Target::Theta1 => (fit.theta1, fit.theta2),
                                Target::Theta2 => (fit.theta2, fit.theta1),
                            };
                            (
                                a.x_obs.or(x).ok_or(Error::MissingMle("target"))?,
                                a.other_theta.or(o).ok_or(Error::MissingMle("nuisance"))?,
                            )
                        }
                        (None, Some(x), Some(o)) => (x, o),
                        _ => {
                            return Err(Error::InvalidArgument(
                                "ci-curve needs --data or both --x-obs and --other-theta".into(),
                            ))
                        }
                    };
                    let grid = parse_grid(&a.grid)?;
                    let curve = cdf_in_parameter(x_obs, &grid, &scheme, other, target)?;
                    let mut s = String::from("theta,probability\n");
                    for (t, p) in curve {
                        s.push_str(&format!("{t:.10e},{p:.10e}\n"));
                    }
                    s
                }
                "credible-set" => {
                    let data = a
                        .data
                        .clone()
                        .ok_or_else(|| Error::InvalidArgument("credible-set needs --data".into()))?;
                    let sample = DataArgs { data, scheme: a.scheme.clone() }.load()?;
                    let post = posterior(&parse_prior(&a.prior)?, &sample);
                    let set = credible_set(&post, a.alpha, SplitPolicy::Symmetric)?;
                    let mut s = String::from("theta1,theta2,curve_id\n");
                    for (t1, t2, id) in set.boundary_curves(a.points) {
                        s.push_str(&format!("{t1:.10e},{t2:.10e},{id}\n"));
                    }
                    s
                }
                "posterior-draws" => {
                    let data = a.data.clone().ok_or_else(|| {
                        Error::InvalidArgument("posterior-draws needs --data".into())
                    })?;
                    let sample = DataArgs { data, scheme: a.scheme.clone() }.load()?;
                    let post = posterior(&parse_prior(&a.prior)?, &sample);
                    let draws = sample_posterior(&post, a.draws, a.seed)?;
                    let mut s = String::from("lambda1,lambda2\n");
                    for (l1, l2) in draws {
                        s.push_str(&format!("{l1:.10e},{l2:.10e}\n"));
                    }
                    s
                }
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown plot kind {other:?} (pdf-cdf, ci-curve, credible-set, posterior-draws)"
                    )))
                }
            };
            manifest.stage("evaluate", t0.elapsed().as_secs_f64());
            fs::write(&a.out, &csv_text)?;
            println!(
                "wrote {} lines to {}",
                csv_text.lines().count(),
                a.out.display()
            );
            manifest.write(Some(&a.out))
        }
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "grid must be lo:hi:steps, got {text:?}"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|e| Error::InvalidArgument(format!("bad grid lower bound: {e}")))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|e| Error::InvalidArgument(format!("bad grid upper bound: {e}")))?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|e| Error::InvalidArgument(format!("bad grid step count: {e}")))?;
    if !(hi > lo) || steps < 2 {
        return Err(Error::InvalidArgument(
            "grid needs hi > lo and at least 2 steps".into(),
        ));
    }
    Ok((0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
