use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use blockboot_core::harness::{
    cumulant::write_cumulant_csv, cumulant_check, mse_experiment, sensitivity_scan, true_cdf_oracle, ExperimentConfig,
    ExperimentSeeds, HRule, ScanParam,
};
use blockboot_core::process::{read_series_csv, write_series_csv};
use blockboot_core::rng::{domain, RngStream};
use blockboot_core::tuning::{self, CurveKind, GammaGConfig};
use blockboot_core::{
    bootstrap_cdf, make_ebc_params, make_nbc_params, make_uns_params, Error, Method, StationaryProcess,
};

#[derive(Parser, Debug)]
#[command(
    name = "blockboot",
    version,
    about = "Hybrid block bootstrap for kernel density estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    /// Configuration override, KEY=VALUE with VALUE parsed as JSON when possible.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Master seed; overrides the configuration's master_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "BLOCKBOOT_WORKERS")]
    workers: Option<usize>,
    #[arg(short, long, global = true)]
    verbose: bool,
}

/// Flags shared by the commands that read the experiment configuration.
#[derive(Args, Debug, Clone, Default)]
struct Point {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    y: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one series and write it as CSV.
    Simulate {
        #[command(flatten)]
        point: Point,
        /// Output file name inside the output directory.
        #[arg(long, default_value = "series.csv")]
        out: String,
    },
    /// Monte Carlo truth oracle for P(T_h <= y); prints one JSON line.
    Oracle {
        #[command(flatten)]
        point: Point,
        #[arg(long = "oracle-R")]
        oracle_r: Option<usize>,
    },
    /// One bootstrap estimate of P(T* <= y | X); prints JSON.
    Estimate {
        #[command(flatten)]
        point: Point,
        /// Series CSV; simulated from the seed when absent.
        #[arg(long)]
        series: Option<PathBuf>,
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[arg(long)]
        b: usize,
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        k1: Option<f64>,
        #[arg(long)]
        c2: Option<f64>,
        #[arg(long = "B")]
        draws: Option<usize>,
    },
    /// Tuning selector output as JSON.
    Tune(TuneArgs),
    /// MSE benchmark from a configuration file.
    Benchmark {
        /// Scan one tuning constant for a single cell instead.
        #[arg(long, value_enum)]
        scan: Option<ScanArg>,
        /// Cell for --scan, as B,ELL.
        #[arg(long)]
        cell: Option<String>,
        /// Method for --scan.
        #[arg(long, value_parser = parse_method)]
        method: Option<Method>,
    },
    /// g-function, b-window and q-exponent curves as CSV.
    Curves {
        /// One of g0, g1, g2, bminmax, q_exponents; all when absent.
        #[arg(long)]
        which: Option<String>,
        /// Grid as LO:HI:COUNT, log-spaced.
        #[arg(long, default_value = "2.01:100:200")]
        beta_grid: String,
        #[arg(long, default_value_t = 400)]
        d_max: u32,
    },
    /// Simulated variance and mean of the density estimator against theory.
    Cumulants {
        /// Comma-separated sample sizes.
        #[arg(long, default_value = "500,2000,8000")]
        n_list: String,
        /// Bandwidth rule such as 0.5, n^-0.2 or 1.5*n^-0.2.
        #[arg(long, default_value = "n^-0.3333333333333333")]
        h_rule: String,
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long = "R", default_value_t = 10_000)]
        replications: usize,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ScanArg {
    K1,
    C2,
}

#[derive(Copy, Clone, Debug, PartialEq, ValueEnum)]
enum Regime {
    Practical,
    Polynomial,
    Exponential,
}

#[derive(Args, Debug)]
struct TuneArgs {
    #[arg(long, value_parser = parse_method)]
    method: Method,
    #[arg(long, value_enum)]
    regime: Regime,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    beta: Option<f64>,
    /// Block count (polynomial EBC).
    #[arg(long)]
    b: Option<usize>,
    /// Density bandwidth (NBC).
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, default_value_t = 0.02)]
    delta: f64,
    #[arg(long, default_value_t = 0.01)]
    delta_prime: f64,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Exponent a in L_n = (ln n)^(-a).
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 2.0 / 3.0)]
    b0: f64,
    #[arg(long, default_value_t = 0.5)]
    c0: f64,
    /// Subsampling (b = 1) form of the exponential NBC rule.
    #[arg(long)]
    subsampling: bool,
    #[arg(long, default_value_t = 400)]
    d_max: u32,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

/// Failure with the process exit status it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let code = match error.downcast_ref::<Error>() {
            Some(e) if e.is_infeasible() => 3,
            Some(Error::Config(_) | Error::Parse(_) | Error::Json(_) | Error::InvalidParameter(_))
            | Some(Error::InvalidC0(_) | Error::BetaOutOfRange(_) | Error::UnknownRateRow { .. }) => 2,
            Some(_) => 1,
            None => 1,
        };
        Failure { code, error }
    }
}

fn config_error(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        error: Error::Config(msg.into()).into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if cli.common.verbose {
        "info"
    } else {
        "warn"
    }))
    .init();
    let result = match cli.common.workers {
        Some(0) => Err(config_error("--workers must be >= 1")),
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(e.into()),
        },
        None => run(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Config file (or an empty object) with overrides and flags applied.
fn load_config(
    common: &Common,
    flags: &[(&str, Option<Value>)],
    require_file: bool,
) -> Result<ExperimentConfig, Failure> {
    let mut doc = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<Value>(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?
        }
        None if require_file => return Err(config_error("this command requires --config")),
        None => Value::Object(Map::new()),
    };
    let obj = doc
        .as_object_mut()
        .ok_or_else(|| config_error("configuration must be a JSON object"))?;
    for item in &common.overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| config_error(format!("override '{item}' is not KEY=VALUE")))?;
        obj.insert(key.trim().to_string(), parse_value(raw.trim()));
    }
    for (key, value) in flags {
        if let Some(v) = value {
            obj.insert(key.to_string(), v.clone());
        }
    }
    if let Some(seed) = common.seed {
        obj.insert("master_seed".into(), json!(seed));
    }
    let cfg: ExperimentConfig = serde_json::from_value(doc).map_err(|e| config_error(format!("configuration: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

fn point_flags(p: &Point) -> Vec<(&'static str, Option<Value>)> {
    vec![
        ("n", p.n.map(|v| json!(v))),
        ("h", p.h.map(|v| json!(v))),
        ("x0", p.x0.map(|v| json!(v))),
        ("y", p.y.map(|v| json!(v))),
    ]
}

fn seed_of(cfg: &ExperimentConfig) -> Result<u64, Failure> {
    cfg.master_seed
        .ok_or_else(|| config_error("no seed: pass --seed or set master_seed in the configuration"))
}

fn output_path(common: &Common, name: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(&common.output_dir).with_context(|| format!("creating {}", common.output_dir.display()))?;
    Ok(common.output_dir.join(name))
}

fn create(path: &Path) -> Result<std::fs::File, Failure> {
    Ok(std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let common = &cli.common;
    match &cli.command {
        Command::Simulate { point, out } => {
            let cfg = load_config(common, &point_flags(point), false)?;
            let seeds = ExperimentSeeds::derive(seed_of(&cfg)?);
            let sample = cfg.model.simulate(cfg.n, seeds.series_seed(0))?;
            let path = output_path(common, out)?;
            write_series_csv(create(&path)?, sample.values())?;
            emit(path.display())?;
        }
        Command::Oracle { point, oracle_r } => {
            let mut flags = point_flags(point);
            flags.push(("oracle_r", oracle_r.map(|v| json!(v))));
            let cfg = load_config(common, &flags, false)?;
            let seeds = ExperimentSeeds::derive(seed_of(&cfg)?);
            let o = true_cdf_oracle(
                &cfg.model,
                cfg.n,
                cfg.x0,
                cfg.y,
                cfg.h,
                &cfg.kernel,
                cfg.oracle_r,
                seeds.oracle,
            )?;
            emit(json!({"p": o.p, "std_err": o.std_err}))?;
        }
        Command::Estimate {
            point,
            series,
            method,
            b,
            ell,
            k1,
            c2,
            draws,
        } => {
            let mut flags = point_flags(point);
            flags.push(("B", draws.map(|v| json!(v))));
            let cfg = load_config(common, &flags, false)?;
            let seed = seed_of(&cfg)?;
            let seeds = ExperimentSeeds::derive(seed);
            let sample = match series {
                Some(path) => read_series_csv(
                    std::fs::File::open(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?,
                )?,
                None => cfg.model.simulate(cfg.n, seeds.series_seed(0))?,
            };
            let n = sample.n();
            let need = |v: Option<f64>, name: &str| {
                v.ok_or_else(|| config_error(format!("--{name} is required for {method}")))
            };
            let params = match method {
                Method::Ebc => make_ebc_params(n, cfg.h, *b, *ell, need(*k1, "k1")?, cfg.c0, need(*c2, "c2")?)?,
                Method::Nbc => make_nbc_params(n, cfg.h, *b, *ell, cfg.c0)?,
                Method::Uns => make_uns_params(*b, *ell, need(*k1, "k1")?)?,
                Method::Custom => return Err(config_error("estimate supports ebc, nbc and uns")),
            };
            let stream = RngStream::new(seed).fork(domain::BOOTSTRAP);
            let est = bootstrap_cdf(&sample, &params, cfg.x0, cfg.y, cfg.draws, &cfg.kernel, &stream)?;
            emit(json!({"p_hat": est.p_hat, "std_err": est.std_err, "draws": est.draws, "n": n, "params": params}))?;
        }
        Command::Tune(args) => {
            let sel = tune(args)?;
            emit(serde_json::to_string_pretty(&sel)?)?;
        }
        Command::Benchmark { scan, cell, method } => {
            let cfg = load_config(common, &[], true)?;
            seed_of(&cfg)?;
            if let Some(param) = scan {
                let cell = cell
                    .as_deref()
                    .ok_or_else(|| config_error("--scan requires --cell B,ELL"))
                    .and_then(parse_cell)?;
                let method = method.ok_or_else(|| config_error("--scan requires --method"))?;
                let param = match param {
                    ScanArg::K1 => ScanParam::K1,
                    ScanArg::C2 => ScanParam::C2,
                };
                let curve = sensitivity_scan(&cfg, cell, method, param)?;
                let path = output_path(common, "sensitivity.csv")?;
                curve.write_csv(create(&path)?)?;
                emit(path.display())?;
                return Ok(());
            }
            let report = mse_experiment(&cfg)?;
            let csv_path = output_path(common, "mse_report.csv")?;
            report.write_csv(create(&csv_path)?)?;
            let grid_path = output_path(common, "mse_grid.csv")?;
            report.write_grid_csv(create(&grid_path)?)?;
            let json_path = output_path(common, "mse_report.json")?;
            serde_json::to_writer_pretty(create(&json_path)?, &report.sidecar_json())?;
            emit(csv_path.display())?;
        }
        Command::Curves {
            which,
            beta_grid,
            d_max,
        } => {
            let cfg = GammaGConfig::new(*d_max)?;
            let grid = parse_beta_grid(beta_grid)?;
            let kinds = match which {
                Some(w) => vec![w.parse::<CurveKind>()?],
                None => CurveKind::ALL.to_vec(),
            };
            for kind in kinds {
                let table = tuning::g_curve_export(kind, &grid, &cfg)?;
                let path = output_path(common, &format!("{}.csv", kind.name()))?;
                table.write_csv(create(&path)?)?;
                emit(path.display())?;
            }
        }
        Command::Cumulants {
            n_list,
            h_rule,
            x0,
            replications,
        } => {
            let cfg = load_config(common, &[("x0", x0.map(|v| json!(v)))], false)?;
            let seed = seed_of(&cfg)?;
            let ns = n_list
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| config_error(format!("--n-list: {e}")))?;
            let rule: HRule = h_rule.parse()?;
            let rows = cumulant_check(&cfg.model, &ns, rule, cfg.x0, &cfg.kernel, *replications, seed)?;
            let path = output_path(common, "cumulants.csv")?;
            write_cumulant_csv(&rows, create(&path)?)?;
            emit(path.display())?;
        }
    }
    Ok(())
}

/// Writes one line to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: impl std::fmt::Display) -> Result<(), Failure> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn parse_cell(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || config_error(format!("cell '{s}' is not B,ELL"));
    let (b, l) = s.split_once(',').ok_or_else(bad)?;
    Ok((
        b.trim().parse().map_err(|_| bad())?,
        l.trim().parse().map_err(|_| bad())?,
    ))
}

fn parse_beta_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || config_error(format!("beta grid '{s}' is not LO:HI:COUNT"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    if !(lo > 2.0 && hi >= lo && count >= 1) {
        return Err(bad());
    }
    Ok(blockboot_core::harness::log_grid(lo, hi, count))
}

fn tune(a: &TuneArgs) -> Result<tuning::TuningSelection, Failure> {
    let cfg = GammaGConfig::new(a.d_max)?;
    let beta = || {
        a.beta
            .ok_or_else(|| config_error("--beta is required for the polynomial regime"))
    };
    let h = || a.h.ok_or_else(|| config_error("--h is required for NBC"));
    let sel = match (a.method, a.regime) {
        (Method::Ebc, Regime::Practical) => tuning::practical_choice_ebc(a.n, a.b0, a.delta)?,
        (Method::Ebc, Regime::Polynomial) => {
            let b = a.b.ok_or_else(|| config_error("--b is required for polynomial EBC"))?;
            tuning::ebc_optimal_poly(beta()?, a.n, b, a.delta, &cfg)?
        }
        (Method::Ebc, Regime::Exponential) => tuning::ebc_optimal_expo(a.n, a.a)?,
        (Method::Nbc, Regime::Polynomial) => {
            tuning::nbc_optimal_poly(beta()?, a.n, h()?, a.delta, a.epsilon, a.c0, &cfg)?
        }
        (Method::Nbc, Regime::Exponential) if a.subsampling => tuning::nbc_subsampling_expo(a.n, h()?, a.c0)?,
        (Method::Nbc, Regime::Exponential) => tuning::nbc_optimal_expo(a.n, h()?, a.c0)?,
        (Method::Uns, Regime::Polynomial) => tuning::uns_optimal_poly(beta()?, a.n, a.delta_prime, &cfg)?,
        (Method::Uns, Regime::Exponential) => tuning::uns_optimal_expo(a.n, a.a)?,
        (m, r) => return Err(config_error(format!("no {r:?} selector for {m}"))),
    };
    Ok(sel)
}
