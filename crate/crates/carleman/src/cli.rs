//! Command-line interface.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use carleman_core::bounds::{bound1_horizon, envelope_e1, envelope_e2};
use carleman_core::carleman::{assemble, reduce_quadratic};
use carleman_core::sim::{first_block, integrate_nonlinear, time_grid, MonomialLift, Trajectory};
use carleman_core::{Error as CoreError, SparseMatrix};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::formats::{comparison_csv, envelope_csv, matrix_market, trajectory_csv};
use crate::input::{load, InputError, LoadedSystem};
use crate::json::{self, JsonSystem};
use crate::pipeline::{analyze, compare, default_t_end, SOUNDNESS_FRACTION};
use crate::selfcheck::{self, SelfCheckConfig};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    /// Unreadable input, bad flags or a malformed system.
    pub const PARSE: i32 = 2;
    /// A matrix would exceed the assembly size limit.
    pub const SIZE_GUARD: i32 = 3;
    /// A measured error exceeded its envelope before `0.9 T*`.
    pub const SOUNDNESS: i32 = 4;
    /// An oracle check failed.
    pub const VERIFY: i32 = 5;
}

#[derive(Debug, Parser)]
#[command(
    name = "carleman",
    version,
    about = "Carleman linearization of polynomial ODEs with truncation-error bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble the truncated Carleman matrix A_N for each order.
    Lift(RunArgs),
    /// Rewrite the system as an equivalent quadratic one.
    Reduce(RunArgs),
    /// Report the bound parameters, T* and sampled error envelopes.
    Bounds(RunArgs),
    /// Integrate the nonlinear system and its Carleman truncations.
    Simulate(RunArgs),
    /// Measure the truncation error against the envelopes.
    Compare(RunArgs),
    /// Run the brute-force oracle checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixFormat {
    /// Matrix Market coordinate text.
    Mm,
    /// JSON with 0-based `[row, col, value]` entries.
    Json,
    /// CSV with 0-based `row,col,value` lines.
    Csv,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// System file: the expression format, or JSON (`.json` or starting with `{`).
    pub input: PathBuf,
    /// Truncation order; repeat or give a comma list (default 2,4,8; `lift` needs it).
    #[arg(short = 'N', long = "order", value_delimiter = ',')]
    pub orders: Vec<usize>,
    /// End time (default 0.9 T*, or 1 when T* is infinite).
    #[arg(long)]
    pub tend: Option<f64>,
    /// RK4 step and envelope sampling interval.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Initial state as a comma list.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
    /// A-priori bound on the solution norm for the E1 envelope (default: growth bound at each t).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Encoding of matrices written by `lift` and `reduce`.
    #[arg(long, value_enum, default_value_t = MatrixFormat::Mm)]
    pub format: MatrixFormat,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random systems per randomized check.
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
    /// Also write verify.json into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Soundness(String),
    #[error("{0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => exit::PARSE,
            CliError::Core(CoreError::AssemblyLimitExceeded { .. }) => exit::SIZE_GUARD,
            CliError::Core(CoreError::InvalidArgument(_) | CoreError::MissingAlpha) => exit::PARSE,
            CliError::Core(_) | CliError::Io { .. } => exit::FAILURE,
            CliError::Soundness(_) => exit::SOUNDNESS,
            CliError::Verify(_) => exit::VERIFY,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Reports go to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
                return exit::PARSE;
            }
            let _ = stdout.write_all(rendered.as_bytes());
            return exit::OK;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => exit::OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, stdout: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Lift(args) => cmd_lift(&RunConfig::new(args, &[])?, stdout),
        Command::Reduce(args) => cmd_reduce(&RunConfig::new(args, &DEFAULT_ORDERS)?, stdout),
        Command::Bounds(args) => cmd_bounds(&RunConfig::new(args, &DEFAULT_ORDERS)?, stdout),
        Command::Simulate(args) => cmd_simulate(&RunConfig::new(args, &DEFAULT_ORDERS)?, stdout),
        Command::Compare(args) => cmd_compare(&RunConfig::new(args, &DEFAULT_ORDERS)?, stdout),
        Command::Verify(args) => cmd_verify(&args, stdout),
    }
}

const DEFAULT_ORDERS: [usize; 3] = [2, 4, 8];

/// Validated arguments with the system loaded.
pub struct RunConfig {
    pub args: RunArgs,
    pub system: LoadedSystem,
    pub orders: Vec<usize>,
}

impl RunConfig {
    fn new(args: RunArgs, default_orders: &[usize]) -> CliResult<Self> {
        let system = load(&args.input)?;
        let mut orders = if args.orders.is_empty() {
            default_orders.to_vec()
        } else {
            args.orders.clone()
        };
        if orders.is_empty() {
            return Err(CliError::Usage(
                "at least one truncation order (-N) is required".into(),
            ));
        }
        if orders.contains(&0) {
            return Err(CliError::Usage(
                "truncation orders must be at least 1".into(),
            ));
        }
        orders.sort_unstable();
        orders.dedup();
        if !(args.step > 0.0 && args.step.is_finite()) {
            return Err(CliError::Usage("--step must be positive".into()));
        }
        if let Some(t) = args.tend {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage("--tend must be positive".into()));
            }
        }
        if let Some(x0) = &args.x0 {
            let n = system.ode.dim();
            if x0.len() != n {
                return Err(CliError::Usage(format!(
                    "--x0 has {} components, the system has {n}",
                    x0.len()
                )));
            }
            if x0.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Usage("--x0 must be finite".into()));
            }
        }
        Ok(RunConfig {
            args,
            system,
            orders,
        })
    }

    fn x0(&self) -> CliResult<&[f64]> {
        self.args
            .x0
            .as_deref()
            .ok_or_else(|| CliError::Usage("--x0 is required for this command".into()))
    }

    fn out_dir(&self) -> CliResult<&Path> {
        let dir = self.args.out.as_path();
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(dir)
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports always serialize");
    s.push('\n');
    s
}

fn emit<T: Serialize>(stdout: &mut dyn Write, dir: &Path, name: &str, report: &T) -> CliResult<()> {
    let text = to_json(report);
    write_file(dir, name, &text)?;
    stdout
        .write_all(text.as_bytes())
        .map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        })
}

/// JSON has no infinities: non-finite values are written as the strings
/// `"inf"`, `"-inf"` and `"nan"`.
fn real<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn opt_real<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => real(v, s),
        None => s.serialize_none(),
    }
}

fn matrix_file(
    dir: &Path,
    stem: &str,
    m: &SparseMatrix,
    format: MatrixFormat,
) -> CliResult<String> {
    let (name, text) = match format {
        MatrixFormat::Mm => (format!("{stem}.mtx"), matrix_market(m)),
        MatrixFormat::Json => {
            #[derive(Serialize)]
            struct Triplets {
                rows: usize,
                cols: usize,
                entries: Vec<(usize, usize, f64)>,
            }
            (
                format!("{stem}.json"),
                to_json(&Triplets {
                    rows: m.rows(),
                    cols: m.cols(),
                    entries: m.iter().collect(),
                }),
            )
        }
        MatrixFormat::Csv => {
            let mut text = String::from("row,col,value\n");
            for (r, c, v) in m.iter() {
                text.push_str(&format!("{r},{c},{v}\n"));
            }
            (format!("{stem}.csv"), text)
        }
    };
    write_file(dir, &name, &text)?;
    Ok(name)
}

#[derive(Debug, Serialize)]
struct LiftReport {
    n: usize,
    k: usize,
    #[serde(rename = "N")]
    order: usize,
    dimension: usize,
    nnz: usize,
    block_offsets: Vec<usize>,
    matrix_file: String,
}

fn cmd_lift(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    if cfg.args.orders.is_empty() {
        return Err(CliError::Usage("lift needs at least one -N".into()));
    }
    let ode = &cfg.system.ode;
    let zeros = vec![0.0; ode.dim()];
    let x0 = cfg.args.x0.as_deref().unwrap_or(&zeros);
    let systems = cfg
        .orders
        .par_iter()
        .map(|&order| assemble(ode, x0, order))
        .collect::<carleman_core::Result<Vec<_>>>()?;
    let dir = cfg.out_dir()?;
    let mut reports = Vec::with_capacity(systems.len());
    for sys in systems {
        let matrix_file = matrix_file(
            dir,
            &format!("A_N{}", sys.order),
            &sys.matrix,
            cfg.args.format,
        )?;
        let report = LiftReport {
            n: sys.n,
            k: sys.degree,
            order: sys.order,
            dimension: sys.dim(),
            nnz: sys.matrix.nnz(),
            block_offsets: sys.block_offsets.clone(),
            matrix_file,
        };
        write_file(dir, &format!("lift_N{}.json", sys.order), &to_json(&report))?;
        reports.push(report);
    }
    stdout
        .write_all(to_json(&reports).as_bytes())
        .map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        })
}

#[derive(Debug, Serialize)]
#[allow(non_snake_case)]
struct ReduceReport {
    n: usize,
    k: usize,
    reduced_dim: usize,
    block_dims: Vec<usize>,
    #[serde(serialize_with = "real")]
    norm_F1_tilde: f64,
    #[serde(serialize_with = "real")]
    norm_F2_tilde: f64,
    #[serde(serialize_with = "real")]
    mu: f64,
    system_file: String,
    matrix_files: Vec<String>,
}

fn cmd_reduce(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let ode = &cfg.system.ode;
    let red = reduce_quadratic(ode)?;
    let dir = cfg.out_dir()?;
    let system_file = "reduced.json".to_string();
    write_file(
        dir,
        &system_file,
        &(json::to_string(&JsonSystem::from_ode(&red.system)) + "\n"),
    )?;
    let matrix_files = vec![
        matrix_file(dir, "F1_tilde", &red.linear_part(), cfg.args.format)?,
        matrix_file(dir, "F2_tilde", &red.quadratic_part(), cfg.args.format)?,
    ];
    let report = ReduceReport {
        n: ode.dim(),
        k: ode.degree(),
        reduced_dim: red.system.dim(),
        block_dims: red.block_dims.clone(),
        norm_F1_tilde: red.norm_f1,
        norm_F2_tilde: red.norm_f2,
        mu: red.linear_part().log_norm()?,
        system_file,
        matrix_files,
    };
    emit(stdout, dir, "reduce.json", &report)
}

#[derive(Debug, Serialize)]
#[allow(non_snake_case)]
struct BoundsReport {
    reduced_dim: usize,
    #[serde(serialize_with = "real")]
    norm_F1_tilde: f64,
    #[serde(serialize_with = "real")]
    norm_F2_tilde: f64,
    #[serde(serialize_with = "real")]
    mu: f64,
    #[serde(serialize_with = "real")]
    norm_x0: f64,
    #[serde(serialize_with = "real")]
    beta0: f64,
    #[serde(serialize_with = "real")]
    T_star: f64,
    #[serde(serialize_with = "opt_real")]
    alpha: Option<f64>,
    #[serde(serialize_with = "opt_real")]
    E1_horizon: Option<f64>,
    t_end: f64,
    step: f64,
    envelope_files: Vec<String>,
}

fn cmd_bounds(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let analysis = analyze(&cfg.system.ode, cfg.x0()?, cfg.args.alpha)?;
    let p = &analysis.params;
    let t_end = cfg
        .args
        .tend
        .unwrap_or_else(|| default_t_end(analysis.t_star));
    let times = time_grid(t_end, cfg.args.step)?;
    let dir = cfg.out_dir()?;
    let mut envelope_files = Vec::new();
    for &order in &cfg.orders {
        let e2 = envelope_e2(p, order, &times);
        let e1 = envelope_e1(p, order, &times);
        let rows: Vec<_> = e2
            .samples
            .iter()
            .zip(&e1.samples)
            .map(|(&(t, a), &(_, b))| (t, a, b))
            .collect();
        let name = format!("bounds_N{order}.csv");
        write_file(dir, &name, &envelope_csv(&rows))?;
        envelope_files.push(name);
    }
    let report = BoundsReport {
        reduced_dim: analysis.reduction.system.dim(),
        norm_F1_tilde: p.norm_f1,
        norm_F2_tilde: p.norm_f2,
        mu: p.mu_f1,
        norm_x0: p.norm_x0,
        beta0: p.beta0,
        T_star: analysis.t_star,
        alpha: p.alpha,
        E1_horizon: p.alpha.map(|_| bound1_horizon(p)).transpose()?,
        t_end,
        step: cfg.args.step,
        envelope_files,
    };
    emit(stdout, dir, "bounds.json", &report)
}

#[derive(Debug, Serialize)]
struct TruncatedRun {
    #[serde(rename = "N")]
    order: usize,
    /// Number of distinct monomials integrated.
    dimension: usize,
    blow_up: Option<f64>,
    file: String,
}

#[derive(Debug, Serialize)]
struct SimulateReport {
    t_end: f64,
    step: f64,
    nonlinear_blow_up: Option<f64>,
    nonlinear_file: String,
    truncated: Vec<TruncatedRun>,
}

/// A trajectory, or the part computed before the solution left the overflow threshold.
fn tolerate_blow_up(
    result: carleman_core::Result<Trajectory>,
) -> CliResult<(Trajectory, Option<f64>)> {
    match result {
        Ok(traj) => Ok((traj, None)),
        Err(CoreError::BlowUp { time, trajectory }) => Ok((*trajectory, Some(time))),
        Err(e) => Err(e.into()),
    }
}

fn cmd_simulate(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let ode = &cfg.system.ode;
    let x0 = cfg.x0()?;
    let t_end = match cfg.args.tend {
        Some(t) => t,
        None => default_t_end(analyze(ode, x0, None)?.t_star),
    };
    let h = cfg.args.step;
    let (nonlinear, nonlinear_blow_up) = tolerate_blow_up(integrate_nonlinear(ode, x0, t_end, h))?;
    let truncated = cfg
        .orders
        .par_iter()
        .map(|&order| {
            let lift = MonomialLift::new(ode, order)?;
            let (traj, blow_up) = tolerate_blow_up(lift.integrate(x0, t_end, h))?;
            Ok((order, lift.dim(), first_block(&traj, ode.dim()), blow_up))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let dir = cfg.out_dir()?;
    let nonlinear_file = "nonlinear.csv".to_string();
    write_file(dir, &nonlinear_file, &trajectory_csv(&nonlinear))?;
    let mut runs = Vec::with_capacity(truncated.len());
    for (order, dimension, traj, blow_up) in truncated {
        let file = format!("truncated_N{order}.csv");
        write_file(dir, &file, &trajectory_csv(&traj))?;
        runs.push(TruncatedRun {
            order,
            dimension,
            blow_up,
            file,
        });
    }
    let report = SimulateReport {
        t_end,
        step: h,
        nonlinear_blow_up,
        nonlinear_file,
        truncated: runs,
    };
    emit(stdout, dir, "simulate.json", &report)
}

#[derive(Debug, Serialize)]
struct OrderSummary {
    #[serde(rename = "N")]
    order: usize,
    #[serde(serialize_with = "real")]
    max_ratio: f64,
    violations: usize,
    first_violation: Option<f64>,
    file: String,
}

#[derive(Debug, Serialize)]
#[allow(non_snake_case)]
struct CompareReport {
    #[serde(serialize_with = "real")]
    T_star: f64,
    #[serde(serialize_with = "real")]
    soundness_limit: f64,
    t_end: f64,
    step: f64,
    orders: Vec<OrderSummary>,
}

fn cmd_compare(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let analysis = analyze(&cfg.system.ode, cfg.x0()?, cfg.args.alpha)?;
    let t_end = cfg
        .args
        .tend
        .unwrap_or_else(|| default_t_end(analysis.t_star));
    let h = cfg.args.step;
    let comparisons = cfg
        .orders
        .par_iter()
        .map(|&order| compare(&analysis, order, t_end, h))
        .collect::<carleman_core::Result<Vec<_>>>()?;

    let dir = cfg.out_dir()?;
    let mut orders = Vec::with_capacity(comparisons.len());
    for c in &comparisons {
        let file = format!("compare_N{}.csv", c.order);
        write_file(dir, &file, &comparison_csv(&c.rows))?;
        orders.push(OrderSummary {
            order: c.order,
            max_ratio: c.max_ratio,
            violations: c.violations.len(),
            first_violation: c.violations.first().map(|v| v.t),
            file,
        });
    }
    let report = CompareReport {
        T_star: analysis.t_star,
        soundness_limit: SOUNDNESS_FRACTION * analysis.t_star,
        t_end,
        step: h,
        orders,
    };
    emit(stdout, dir, "compare.json", &report)?;
    let failing: Vec<String> = comparisons
        .iter()
        .filter_map(|c| {
            c.violations.first().map(|v| {
                format!(
                    "N={} at t={} (err {} > E2 {})",
                    c.order, v.t, v.err, v.bound
                )
            })
        })
        .collect();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(CliError::Soundness(format!(
            "measured error exceeds the E2 envelope: {}",
            failing.join("; ")
        )))
    }
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let outcomes = selfcheck::run(SelfCheckConfig {
        seed: args.seed,
        cases: args.cases,
    });
    let io = |source| CliError::Io {
        path: "<stdout>".into(),
        source,
    };
    for o in &outcomes {
        let status = if o.passed() { "PASS" } else { "FAIL" };
        writeln!(
            stdout,
            "{status} {:<30} cases={:<6} failures={:<4} worst={:e}",
            o.name, o.cases, o.failures, o.worst
        )
        .map_err(io)?;
    }
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        write_file(dir, "verify.json", &to_json(&outcomes))?;
    }
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.passed())
        .map(|o| o.name)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verify(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}
