//! Command-line driver.
//!
//! Exit codes: `0` for a clean run, `1` when a monitor reported violations or
//! a run stopped on a runtime error, `2` for bad configuration or I/O.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cases::{random_admissible_case, shipped_case, CaseError, RandomCaseConfig, TestCase, SHIPPED};
use crate::diagnostics::{
    check_compatibility, entropy_gradient, entropy_gradient_fd, entropy_hessian_spectrum, EntropyPair,
    EntropyResidualMonitor, MinEntropyMonitor, Monitor, PositivityMonitor,
};
use crate::eos::GasModel;
use crate::report::RunReport;
use crate::runner::{run, RunOptions};
use crate::scheme::{SchemeConfig, SchemeKind};
use crate::states::{CellState, PrimitiveState};
use crate::stationary::ResonancePolicy;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Grid ladder used by `sweep`.
pub const SWEEP_CELLS: [usize; 4] = [500, 1000, 2000, 4000];

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Parser)]
#[command(name = "nozzleflow", version, about = "Well-balanced quasi-1D nozzle flow solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one case and write snapshots and a report.
    Run(RunArgs),
    /// Check the entropy-pair oracles at random states.
    Verify(VerifyArgs),
    /// List the shipped cases, or print one as a case file.
    Cases(CasesArgs),
    /// Run one case on the 500/1000/2000/4000-cell ladder.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    WellBalanced,
    LfCentral,
    LfForward,
    LfBackward,
}

impl From<SchemeArg> for SchemeKind {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::WellBalanced => SchemeKind::WellBalanced,
            SchemeArg::LfCentral => SchemeKind::LfCentral,
            SchemeArg::LfForward => SchemeKind::LfForward,
            SchemeArg::LfBackward => SchemeKind::LfBackward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResonanceArg {
    Project,
    Fail,
}

impl From<ResonanceArg> for ResonancePolicy {
    fn from(r: ResonanceArg) -> Self {
        match r {
            ResonanceArg::Project => ResonancePolicy::Project,
            ResonanceArg::Fail => ResonancePolicy::Fail,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CaseArgs {
    /// Shipped case name, or `random` for a generated case (see `--seed`).
    #[arg(long, default_value = "paper-stationary", conflicts_with = "case_file")]
    pub case: String,
    /// TOML case file.
    #[arg(long)]
    pub case_file: Option<PathBuf>,
    /// Seed for `--case random`; echoed in the report.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Number of steps (overrides the case's stop condition).
    #[arg(long, conflicts_with = "t_end")]
    pub steps: Option<usize>,
    /// Final time (overrides the case's stop condition).
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Pinned `λ = Δt/Δx`; checked against the CFL bound every step.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum, default_value = "project")]
    pub resonance: ResonanceArg,
    /// Snapshot cadence in steps; the initial and final states are always written.
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Number of cells (defaults to the case's).
    #[arg(long)]
    pub cells: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Cell counts to run (defaults to 500, 1000, 2000, 4000).
    #[arg(long, value_delimiter = ',')]
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct CasesArgs {
    /// Case to print as TOML.
    pub name: Option<String>,
}

/// Parses `argv` and runs the command, writing human-readable output to `out`.
pub fn main_with(argv: impl IntoIterator<Item = String>, out: &mut String) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(out, "{e}");
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(&args, out),
        Command::Verify(args) => Ok(cmd_verify(&args, out)),
        Command::Cases(args) => cmd_cases(&args, out),
        Command::Sweep(args) => cmd_sweep(&args, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            EXIT_CONFIG
        }
    }
}

fn load_case(args: &CaseArgs) -> Result<TestCase, CliError> {
    if let Some(path) = &args.case_file {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        return Ok(TestCase::from_toml(&text)?);
    }
    if args.case == "random" {
        let seed = args.seed.ok_or_else(|| CliError::Config("--case random needs --seed".into()))?;
        return Ok(random_admissible_case(seed, &RandomCaseConfig::default())?);
    }
    Ok(shipped_case(&args.case)?)
}

fn case_label(args: &CaseArgs, case: &TestCase) -> String {
    match &args.case_file {
        Some(path) => format!("{} ({})", case.name, path.display()),
        None => case.name.clone(),
    }
}

fn monitors_for(kind: SchemeKind) -> Vec<Box<dyn Monitor>> {
    let mut monitors: Vec<Box<dyn Monitor>> = vec![Box::new(PositivityMonitor)];
    // The entropy principles are properties of the well-balanced scheme only.
    if kind == SchemeKind::WellBalanced {
        monitors.push(Box::new(MinEntropyMonitor));
        monitors.push(Box::new(EntropyResidualMonitor::new(2.0)));
    }
    monitors
}

struct Outcome {
    report: RunReport,
    failed: bool,
}

fn run_case(
    case_args: &CaseArgs,
    case: &TestCase,
    solver: &SolverArgs,
    n_cells: usize,
) -> Result<Outcome, CliError> {
    if n_cells < 2 {
        return Err(CliError::Config(format!("need at least 2 cells, got {n_cells}")));
    }
    let kind: SchemeKind = solver.scheme.unwrap_or(SchemeArg::WellBalanced).into();
    let mut cfg = SchemeConfig::new(kind, n_cells, case.domain);
    cfg.boundary = case.boundary;
    cfg.lambda = solver.lambda;
    cfg.resonance = solver.resonance.into();
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;

    let mut opts = match (solver.steps, solver.t_end, case.t_end) {
        (Some(n), _, _) => RunOptions::steps(n),
        (None, Some(t), _) | (None, None, Some(t)) => RunOptions::until(t),
        (None, None, None) => RunOptions::steps(case.n_steps),
    };
    if let crate::report::StopAt::Time(t) = opts.stop {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("t_end must be finite and non-negative, got {t}")));
        }
    }
    opts.snapshot_every = solver.snapshot_every;
    opts.reference = case.reference_fields(n_cells)?;

    let initial = case.initial_state(n_cells)?;
    let mut monitors = monitors_for(kind);
    let (mut report, failed) = match run(&case.model, &cfg, initial, &opts, &mut monitors) {
        Ok(r) => (r, false),
        Err(f) => (*f.report, true),
    };
    report.config.case = Some(case_label(case_args, case));
    report.config.seed = case_args.seed;
    Ok(Outcome { report, failed })
}

fn write_report(report: &RunReport, dir: &Path) -> Result<(), CliError> {
    report.write_dir(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

fn summarize(report: &RunReport, out: &mut String) {
    let last = report.series.t.len().saturating_sub(1);
    let _ = writeln!(out, "steps: {}", report.series.step.get(last).copied().unwrap_or(0));
    let _ = writeln!(out, "t: {:e}", report.series.t.get(last).copied().unwrap_or(0.0));
    let min_rho = report.series.min_rho.iter().cloned().fold(f64::INFINITY, f64::min);
    let _ = writeln!(out, "min rho: {min_rho:e}");
    if let Some(d) = report.max_deviation() {
        let _ = writeln!(out, "max deviation from reference: {d:e}");
    }
    if !report.resonance_events.is_empty() {
        let total: usize = report.resonance_events.iter().map(|e| e.1).sum();
        let _ = writeln!(out, "resonance projections: {total} over {} steps", report.resonance_events.len());
    }
    let _ = writeln!(out, "violations: {}", report.violations.len());
    if let Some(e) = &report.error {
        let _ = writeln!(out, "stopped: {e}");
    }
}

fn exit_code(outcome: &Outcome) -> i32 {
    if outcome.failed || !outcome.report.violations.is_empty() {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}

fn cmd_run(args: &RunArgs, out: &mut String) -> Result<i32, CliError> {
    let case = load_case(&args.case)?;
    let n = args.cells.unwrap_or(case.n_cells);
    let outcome = run_case(&args.case, &case, &args.solver, n)?;
    write_report(&outcome.report, &args.solver.out)?;
    let _ = writeln!(out, "case: {}", outcome.report.config.case.as_deref().unwrap_or("-"));
    let _ = writeln!(out, "cells: {n}");
    summarize(&outcome.report, out);
    Ok(exit_code(&outcome))
}

#[derive(Debug, Serialize)]
struct SweepEntry {
    cells: usize,
    dir: String,
    t: f64,
    steps: usize,
    max_deviation: Option<f64>,
    violations: usize,
    error: Option<String>,
}

fn cmd_sweep(args: &SweepArgs, out: &mut String) -> Result<i32, CliError> {
    let case = load_case(&args.case)?;
    let ladder = if args.cells.is_empty() { SWEEP_CELLS.to_vec() } else { args.cells.clone() };
    let mut entries = Vec::with_capacity(ladder.len());
    let mut code = EXIT_OK;
    let _ = writeln!(out, "{:>6}  {:>12}  {:>8}  {:>14}  {:>10}", "cells", "t", "steps", "max deviation", "violations");
    for &n in &ladder {
        let outcome = run_case(&args.case, &case, &args.solver, n)?;
        let dir = format!("cells_{n}");
        write_report(&outcome.report, &args.solver.out.join(&dir))?;
        code = code.max(exit_code(&outcome));
        let r = &outcome.report;
        let entry = SweepEntry {
            cells: n,
            dir,
            t: r.series.t.last().copied().unwrap_or(0.0),
            steps: r.series.step.last().copied().unwrap_or(0),
            max_deviation: r.max_deviation(),
            violations: r.violations.len(),
            error: r.error.clone(),
        };
        let dev = entry.max_deviation.map_or("-".to_string(), |d| format!("{d:.6e}"));
        let _ = writeln!(out, "{:>6}  {:>12.6e}  {:>8}  {:>14}  {:>10}", n, entry.t, entry.steps, dev, entry.violations);
        entries.push(entry);
    }
    let path = args.solver.out.join("sweep.json");
    let json = serde_json::to_string_pretty(&entries).expect("sweep summary serialises");
    fs::write(&path, json).map_err(|source| CliError::Io { path, source })?;
    Ok(code)
}

fn cmd_cases(args: &CasesArgs, out: &mut String) -> Result<i32, CliError> {
    match &args.name {
        None => {
            for name in SHIPPED {
                let case = shipped_case(name)?;
                let _ = writeln!(out, "{name:<20} {} cells, domain [{}, {}]", case.n_cells, case.domain.0, case.domain.1);
            }
            let _ = writeln!(out, "{:<20} generated from --seed", "random");
        }
        Some(name) => out.push_str(&shipped_case(name)?.to_toml()?),
    }
    Ok(EXIT_OK)
}

/// One row of the `verify` table.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: &'static str,
    pub worst: f64,
    pub tol: f64,
    pub pass: bool,
}

fn random_state(rng: &mut ChaCha8Rng) -> Option<(GasModel, CellState)> {
    let gamma = rng.random_range(1.05..1.65);
    let p_inf = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..5.0) };
    let model = GasModel::new(gamma, p_inf, rng.random_range(-2.0..2.0)).ok()?;
    let rho = rng.random_range(0.05..5.0);
    let p_total = rng.random_range(0.05..5.0);
    let u = rng.random_range(-3.0..3.0);
    let a = rng.random_range(0.2..4.0);
    let cell = PrimitiveState { rho, u, p: p_total - p_inf, a }.to_conserved(&model).ok()?;
    Some((model, cell))
}

/// Entropy-pair oracles at `samples` random admissible states:
/// compatibility `B = 0` with the differenced matrix, closed-form gradient
/// against differences, and convexity of `𝒰` in the conserved variables.
pub fn verify_suite(samples: usize, seed: u64) -> Vec<CheckRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_b, mut worst_printed, mut worst_grad, mut worst_eig) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    let mut failures = 0usize;
    for i in 0..samples {
        let Some((model, cell)) = random_state(&mut rng) else {
            failures += 1;
            continue;
        };
        let p_exp = [2.0, 4.0, 8.0][i % 3];
        let outcome = (|| -> Result<(), crate::states::StateError> {
            let pair = EntropyPair::covering(&model, [&cell], p_exp)?;
            let (derived, printed) = check_compatibility(&model, &cell, &pair)?;
            worst_b = worst_b.max(derived.relative);
            worst_printed = worst_printed.max(printed.relative);
            let g = entropy_gradient(&model, &cell, &pair)?;
            let fd = entropy_gradient_fd(&model, &cell, &pair)?;
            worst_grad = worst_grad.max((g - fd).abs().max() / g.abs().max());
            let (min, radius) = entropy_hessian_spectrum(&model, &cell, &pair)?;
            worst_eig = worst_eig.min(min / radius.max(1.0));
            Ok(())
        })();
        if outcome.is_err() {
            failures += 1;
        }
    }
    let row = |name, worst: f64, tol: f64, pass: bool| CheckRow { name, worst, tol, pass };
    vec![
        row("compatibility (differenced A)", worst_b, 1e-6, worst_b <= 1e-6),
        row("gradient vs differences", worst_grad, 1e-6, worst_grad <= 1e-6),
        row("convexity (min eigenvalue)", worst_eig, -1e-8, worst_eig >= -1e-8),
        row("state evaluation errors", failures as f64, 0.0, failures == 0),
        // informational: the closed-form entries, for comparison with the oracle
        row("compatibility (closed-form A)", worst_printed, f64::INFINITY, true),
    ]
}

fn cmd_verify(args: &VerifyArgs, out: &mut String) -> i32 {
    let rows = verify_suite(args.samples, args.seed);
    let _ = writeln!(out, "samples: {}, seed: {}", args.samples, args.seed);
    let _ = writeln!(out, "{:<32}  {:>12}  {:>10}  result", "check", "worst", "tolerance");
    for r in &rows {
        let tol = if r.tol.is_finite() { format!("{:.0e}", r.tol) } else { "-".into() };
        let result = if !r.tol.is_finite() {
            "info"
        } else if r.pass {
            "PASS"
        } else {
            "FAIL"
        };
        let _ = writeln!(out, "{:<32}  {:>12.4e}  {:>10}  {result}", r.name, r.worst, tol);
    }
    if rows.iter().all(|r| r.pass) {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}
