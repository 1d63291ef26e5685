//! Command-line front end: solve model files, sweep the benchmark families
//! into CSV, dump generated models and build root-sum gadgets.
//!
//! Exit codes: 0 success, 1 usage, 2 invalid input, 3 internal invariant
//! violation (a failed `--check` or `--diagnostics` counts as one).

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use rayon::prelude::*;
use robustpi_core::bounds::rmdp_outer_bound;
use robustpi_core::format::{chain_to_json, read_model};
use robustpi_core::oracles::apply_bellman_rmdp;
use robustpi_core::rational::{format_decimal, format_rational, parse_rational};
use robustpi_core::{
    build_root_sum_gadget, model_to_json, rmdp_policy_iteration, verify_rmdp_trace, BenchmarkKind,
    BenchmarkSpec, ImprovementMode, Norm, Rational, Rmdp, RmdpSolveTrace,
};
use serde::Serialize;
use thiserror::Error;

/// Significant digits in the decimal CSV columns.
pub const DECIMAL_DIGITS: u32 = 12;

pub const THREADS_ENV: &str = "ROBUSTPI_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] robustpi_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use robustpi_core::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Core(E::Singular { .. } | E::Invariant(_)) => 3,
            CliError::Core(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "robustpi",
    version,
    about = "Exact policy iteration for robust MDPs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a model file and print exact values and policies.
    Solve(SolveArgs),
    /// Solve a grid of benchmark instances and write one CSV row per instance.
    Sweep(SweepArgs),
    /// Write a generated benchmark model in the model file format.
    Bench(BenchArgs),
    /// Build the root-sum gadget and decide the comparison.
    Gadget(GadgetArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub model: PathBuf,
    #[arg(long, default_value = "perpair", value_parser = parse_mode)]
    pub mode: ImprovementMode,
    /// Apply the Bellman operator to the result and require an exact fixed point.
    #[arg(long)]
    pub check: bool,
    /// Print the convergence diagnostics for the whole solve.
    #[arg(long)]
    pub diagnostics: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Benchmark families; all of them when omitted.
    #[arg(long, value_delimiter = ',', value_parser = parse_kind)]
    pub kind: Vec<BenchmarkKind>,
    /// Target state counts.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64")]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1/2", value_parser = parse_rational_arg)]
    pub gamma: Vec<Rational>,
    #[arg(long, value_delimiter = ',', default_value = "1/20", value_parser = parse_rational_arg)]
    pub delta: Vec<Rational>,
    #[arg(long, value_delimiter = ',', default_value = "l1,linf", value_parser = parse_norm)]
    pub norm: Vec<Norm>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "perpair", value_parser = parse_mode)]
    pub mode: ImprovementMode,
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub diagnostics: bool,
    /// Record wall-clock time; otherwise `runtime_ms` is 0 and the file is reproducible.
    #[arg(long)]
    pub timing: bool,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: BenchmarkKind,
    /// Target state count.
    #[arg(long)]
    pub size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "1/2", value_parser = parse_rational_arg)]
    pub gamma: Rational,
    #[arg(long, default_value = "0", value_parser = parse_rational_arg)]
    pub delta: Rational,
    #[arg(long, default_value = "l1", value_parser = parse_norm)]
    pub norm: Norm,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GadgetArgs {
    /// Positive integers under the roots.
    #[arg(long, value_delimiter = ',', required = true)]
    pub a: Vec<u64>,
    #[arg(long, value_parser = parse_bigint)]
    pub alpha: BigInt,
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    #[arg(long, default_value = "1/2", value_parser = parse_rational_arg)]
    pub gamma: Rational,
    /// Bits of the value enclosure.
    #[arg(long, default_value_t = 64)]
    pub precision: u32,
    /// Where to write the gadget chain; printed before the summary when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn parse_norm(s: &str) -> Result<Norm, String> {
    match s.parse::<Norm>() {
        Ok(n @ (Norm::L1 | Norm::LInf)) => Ok(n),
        Ok(other) => Err(format!(
            "norm {other} is not supported here (use l1 or linf)"
        )),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_kind(s: &str) -> Result<BenchmarkKind, String> {
    s.parse().map_err(|e: robustpi_core::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<ImprovementMode, String> {
    s.parse().map_err(|e: robustpi_core::Error| e.to_string())
}

fn parse_bigint(s: &str) -> Result<BigInt, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("not an integer: {s:?}"))
}

/// Sizes the global rayon pool from `ROBUSTPI_THREADS` if it is set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {value:?}"
            ))
        })?;
    // A second call in the same process finds the pool already built; that is fine.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
        Command::Gadget(a) => cmd_gadget(&a, out),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

/// Writes `text` to `path`, or to `out` when there is no path.
fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(io_err(p)),
        None => out.write_all(text.as_bytes()).map_err(stdout_err),
    }
}

fn fixed_point_error(model: &Rmdp, trace: &RmdpSolveTrace) -> CliResult<Option<String>> {
    let v = trace.values();
    let tv = apply_bellman_rmdp(model, v)?;
    Ok((0..model.n_states).find(|&s| tv[s] != v[s]).map(|s| {
        format!(
            "fixed point violated at s={s}: (Tv)_s = {}, v_s = {}",
            tv[s], v[s]
        )
    }))
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> CliResult<()> {
    let model = read_model(&args.model)?;
    let trace = rmdp_policy_iteration(&model, None, args.mode)?;
    let mut text = String::new();
    text.push_str(&format!("outer_iterations: {}\n", trace.outer_iterations()));
    text.push_str(&format!(
        "inner_iterations_total: {}\n",
        trace.inner_iterations_total()
    ));
    text.push_str("values:\n");
    for (s, v) in trace.values().iter().enumerate() {
        text.push_str(&format!("  s={s}: {}\n", format_rational(v)));
    }
    let policy: Vec<String> = trace.policy().iter().map(|a| a.to_string()).collect();
    text.push_str(&format!("policy: {}\n", policy.join(" ")));
    text.push_str("adversary:\n");
    for (s, row) in trace.adversary().rows.iter().enumerate() {
        let t = model.transition(s, trace.policy()[s]);
        let entries: Vec<String> = t
            .successors
            .iter()
            .zip(row)
            .map(|(succ, p)| format!("{succ}:{}", format_rational(p)))
            .collect();
        text.push_str(&format!("  s={s}: {}\n", entries.join(" ")));
    }
    let mut violation = None;
    if args.check {
        violation = fixed_point_error(&model, &trace)?;
        text.push_str(if violation.is_none() {
            "fixed-point: exact\n"
        } else {
            "fixed-point: VIOLATED\n"
        });
    }
    if args.diagnostics {
        let report = verify_rmdp_trace(&model, &trace)?;
        text.push_str("diagnostics:\n");
        text.push_str(&report.to_string());
        if violation.is_none() {
            violation = report
                .failures()
                .next()
                .map(|l| format!("diagnostic failed: {l}"));
        }
    }
    out.write_all(text.as_bytes()).map_err(stdout_err)?;
    match violation {
        Some(v) => Err(CliError::Invariant(v)),
        None => Ok(()),
    }
}

/// One CSV line of a sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub benchmark: &'static str,
    pub norm: String,
    pub gamma: String,
    pub delta: String,
    pub n: usize,
    pub outer_iters: usize,
    pub inner_iters_total: usize,
    pub bound: u128,
    pub runtime_ms: u128,
    pub gamma_exact: String,
    pub delta_exact: String,
}

struct Cell {
    order: (usize, Norm, Rational, Rational, usize),
    row: SweepRow,
    problem: Option<String>,
}

fn sweep_cell(spec: BenchmarkSpec, args: &SweepArgs) -> CliResult<Cell> {
    let start = Instant::now();
    let model = spec.build()?;
    let trace = rmdp_policy_iteration(&model, None, args.mode)?;
    let elapsed = start.elapsed().as_millis();
    let label = format!(
        "{} n={} {} gamma={} delta={}",
        spec.kind, model.n_states, spec.norm, spec.gamma, spec.delta
    );
    let mut problem = None;
    if args.check {
        problem = fixed_point_error(&model, &trace)?.map(|e| format!("{label}: {e}"));
    }
    if args.diagnostics && problem.is_none() {
        let report = verify_rmdp_trace(&model, &trace)?;
        problem = report
            .failures()
            .next()
            .map(|l| format!("{label}: diagnostic failed: {l}"));
    }
    let bound = rmdp_outer_bound(model.n_states, model.n_actions, &spec.gamma)?;
    let kind_index = BenchmarkKind::ALL
        .iter()
        .position(|k| *k == spec.kind)
        .expect("known kind");
    Ok(Cell {
        order: (
            kind_index,
            spec.norm,
            spec.gamma.clone(),
            spec.delta.clone(),
            model.n_states,
        ),
        row: SweepRow {
            benchmark: spec.kind.name(),
            norm: spec.norm.to_string(),
            gamma: format_decimal(&spec.gamma, DECIMAL_DIGITS),
            delta: format_decimal(&spec.delta, DECIMAL_DIGITS),
            n: model.n_states,
            outer_iters: trace.outer_iterations(),
            inner_iters_total: trace.inner_iterations_total(),
            bound,
            runtime_ms: if args.timing { elapsed } else { 0 },
            gamma_exact: format_rational(&spec.gamma),
            delta_exact: format_rational(&spec.delta),
        },
        problem,
    })
}

/// Solves every grid cell and returns the rows in their canonical order.
pub fn sweep_rows(args: &SweepArgs) -> CliResult<(Vec<SweepRow>, Vec<String>)> {
    if args.sizes.is_empty() {
        return Err(CliError::Usage(
            "--sizes must list at least one size".into(),
        ));
    }
    let kinds = if args.kind.is_empty() {
        BenchmarkKind::ALL.to_vec()
    } else {
        args.kind.clone()
    };
    let mut specs = Vec::new();
    for &kind in &kinds {
        for &size in &args.sizes {
            for &norm in &args.norm {
                for gamma in &args.gamma {
                    for delta in &args.delta {
                        specs.push(BenchmarkSpec {
                            kind,
                            param: kind.parameter_for_size(size),
                            seed: args.seed,
                            gamma: gamma.clone(),
                            delta: delta.clone(),
                            norm,
                        });
                    }
                }
            }
        }
    }
    let mut cells = specs
        .into_par_iter()
        .map(|spec| sweep_cell(spec, args))
        .collect::<CliResult<Vec<Cell>>>()?;
    cells.sort_by(|a, b| a.order.cmp(&b.order));
    // Two sizes can map to the same instance (e.g. grid sides); keep one row.
    cells.dedup_by(|a, b| a.order == b.order);
    let problems = cells.iter().filter_map(|c| c.problem.clone()).collect();
    Ok((cells.into_iter().map(|c| c.row).collect(), problems))
}

pub const CSV_HEADER: [&str; 11] = [
    "benchmark",
    "norm",
    "gamma",
    "delta",
    "n",
    "outer_iters",
    "inner_iters_total",
    "bound",
    "runtime_ms",
    "gamma_exact",
    "delta_exact",
];

/// Header plus rows. The header is written even when there are no rows.
pub fn write_csv(rows: &[SweepRow]) -> String {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    writer
        .write_record(CSV_HEADER)
        .expect("in-memory CSV write");
    for row in rows {
        writer.serialize(row).expect("in-memory CSV write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> CliResult<()> {
    let (rows, problems) = sweep_rows(args)?;
    emit(args.output.as_deref(), &write_csv(&rows), out)?;
    match problems.first() {
        Some(first) => Err(CliError::Invariant(format!(
            "{} instance(s) failed; first: {first}",
            problems.len()
        ))),
        None => Ok(()),
    }
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    let spec = BenchmarkSpec {
        kind: args.kind,
        param: args.kind.parameter_for_size(args.size),
        seed: args.seed,
        gamma: args.gamma.clone(),
        delta: args.delta.clone(),
        norm: args.norm,
    };
    let model = spec.build()?;
    emit(args.output.as_deref(), &model_to_json(&model), out)
}

pub fn cmd_gadget(args: &GadgetArgs, out: &mut dyn Write) -> CliResult<()> {
    let gadget = build_root_sum_gadget(&args.a, &args.alpha, args.p, &args.gamma)?;
    let value = gadget.closed_form_value(args.precision)?;
    let decision = gadget.decide(args.precision)?;
    emit(args.output.as_deref(), &chain_to_json(&gadget.rmc), out)?;
    let summary = format!(
        "states: {}\nlambda: {}\nvalue: {}\ndecision: {}\n",
        gadget.rmc.n_states(),
        format_rational(&gadget.lambda),
        value,
        decision
    );
    out.write_all(summary.as_bytes()).map_err(stdout_err)
}
