//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p nozzleflow --test acceptance -- --nocapture` to see them.

use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use nozzleflow::cases::{paper_stationary_case, random_admissible_case, RandomCaseConfig, STATIONARY_RHO_R, STATIONARY_U_R};
use nozzleflow::diagnostics::{
    check_compatibility, entropy_gradient, entropy_gradient_fd, entropy_hessian_spectrum, EntropyResidualMonitor,
    MinEntropyMonitor, Monitor, PositivityMonitor, Violation, ViolationKind,
};
use nozzleflow::diagnostics::EntropyPair;
use nozzleflow::report::RunReport;
use nozzleflow::runner::{run, RunOptions};
use nozzleflow::scheme::{SchemeConfig, SchemeKind};
use nozzleflow::stationary::{a_min, phi, solve_stationary, transport, ResonancePolicy};
use nozzleflow::{GasModel, PrimitiveState};

// Tolerances, one per criterion.
const STEADY_TOL: f64 = 1e-9;
const STEADY_MAX_SECONDS: f64 = 10.0;
const BASELINE_FACTOR: f64 = 1e2;
const BASELINE_FLOOR: f64 = 1e-3;
const BASELINE_T_END: f64 = 0.4;
const NEAR_DISCONTINUITY: f64 = 0.1;
const PAIR_TOL: f64 = 1e-9;
const RANDOM_RUNS: u64 = 200;
const RANDOM_CELLS: usize = 500;
const RANDOM_STEPS: usize = 500;
const POSITIVITY_SLACK: f64 = 1e-14;
const ENTROPY_TOL: f64 = 1e-10;
const COMPAT_SAMPLES: usize = 1000;
const COMPAT_TOL: f64 = 1e-6;
const GRADIENT_TOL: f64 = 1e-6;
const HESSIAN_TOL: f64 = 1e-8;
const ROOT_SAMPLES: usize = 500;
const ROOT_TOL: f64 = 1e-10;
const DOUBLE_ROOT_TOL: f64 = 1e-5;
const INVOLUTION_TOL: f64 = 1e-9;

fn verdict(name: &str, pass: bool, detail: String) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn stationary_run(kind: SchemeKind, n_cells: usize, opts: RunOptions) -> RunReport {
    let case = paper_stationary_case();
    let cfg = SchemeConfig::new(kind, n_cells, case.domain);
    let mut opts = opts;
    opts.reference = case.reference_fields(n_cells).unwrap();
    run(&case.model, &cfg, case.initial_state(n_cells).unwrap(), &opts, &mut []).unwrap()
}

/// Largest `|ρ − ρ⁰|` over cells with `|x| ≤ NEAR_DISCONTINUITY` in the final snapshot.
fn density_deviation_near_jump(report: &RunReport, n_cells: usize) -> f64 {
    let case = paper_stationary_case();
    let reference = case.primitives(n_cells).unwrap();
    let snap = report.final_snapshot().unwrap();
    snap.x
        .iter()
        .zip(&snap.rho)
        .zip(&reference)
        .filter(|((x, _), _)| x.abs() <= NEAR_DISCONTINUITY)
        .map(|((_, rho), r)| (rho - r.rho).abs())
        .fold(0.0, f64::max)
}

#[test]
fn c1_well_balanced_steady_preservation() {
    let start = Instant::now();
    let report = stationary_run(SchemeKind::WellBalanced, 1000, RunOptions::steps(2000));
    let secs = start.elapsed().as_secs_f64();
    let dev = report.max_deviation().unwrap();
    assert_eq!(report.series.step.len(), 2001);
    verdict(
        "C1 well-balanced steady preservation",
        dev <= STEADY_TOL && secs <= STEADY_MAX_SECONDS,
        format!("max |Δρ|,|Δu|,|Δp| over 2000 steps = {dev:.3e} (tol {STEADY_TOL:e}), {secs:.2} s"),
    );
}

#[test]
fn c2_baseline_fails_to_hold_the_steady_state() {
    let wb = stationary_run(SchemeKind::WellBalanced, 1000, RunOptions::steps(2000));
    let lf = stationary_run(SchemeKind::LfCentral, 1000, RunOptions::steps(2000));
    let wb_dev = density_deviation_near_jump(&wb, 1000);
    let lf_dev = density_deviation_near_jump(&lf, 1000);
    let ratio_ok = lf_dev >= BASELINE_FACTOR * wb_dev && lf_dev >= BASELINE_FLOOR;

    let ladder: Vec<(usize, f64)> = [500usize, 1000, 2000, 4000]
        .par_iter()
        .map(|&n| (n, density_deviation_near_jump(&stationary_run(SchemeKind::LfCentral, n, RunOptions::until(BASELINE_T_END)), n)))
        .collect();
    let ladder_ok = ladder.iter().all(|(_, d)| *d >= BASELINE_FLOOR);
    verdict(
        "C2 baseline (lf-central) departs from the steady state",
        ratio_ok && ladder_ok,
        format!(
            "near x=0: lf {lf_dev:.3e} vs wb {wb_dev:.3e}; ladder at t={BASELINE_T_END}: {}",
            ladder.iter().map(|(n, d)| format!("{n}:{d:.3e}")).collect::<Vec<_>>().join(" ")
        ),
    );
}

#[test]
fn c3_reference_stationary_pair() {
    let m = GasModel::ideal(1.4).unwrap();
    let left = PrimitiveState { rho: 2.0, u: 0.5, p: 2f64.powf(1.4), a: 1.0 };
    let sol = solve_stationary(&m, &left, 1.5).unwrap();
    let (dr, du) = ((sol.selected - STATIONARY_RHO_R).abs(), (sol.u_plus - STATIONARY_U_R).abs());
    verdict(
        "C3 reference stationary pair",
        dr <= PAIR_TOL && du <= PAIR_TOL,
        format!("rho+ = {:.15}, u+ = {:.15} (errors {dr:.1e}, {du:.1e})", sol.selected, sol.u_plus),
    );
}

struct RandomRun {
    seed: u64,
    min_rho: f64,
    violations: Vec<Violation>,
    max_residual: [f64; 3],
    error: Option<String>,
}

fn random_suite() -> &'static [RandomRun] {
    static SUITE: OnceLock<Vec<RandomRun>> = OnceLock::new();
    SUITE.get_or_init(|| {
        let cfg = RandomCaseConfig { n_cells: RANDOM_CELLS, n_steps: RANDOM_STEPS, ..Default::default() };
        (0..RANDOM_RUNS)
            .into_par_iter()
            .map(|seed| {
                let case = random_admissible_case(seed, &cfg).unwrap();
                let mut scheme = SchemeConfig::new(SchemeKind::WellBalanced, RANDOM_CELLS, case.domain);
                scheme.boundary = case.boundary;
                let mut monitors: Vec<Box<dyn Monitor>> = vec![
                    Box::new(PositivityMonitor),
                    Box::new(MinEntropyMonitor),
                    Box::new(ResidualTracker::new(2.0)),
                    Box::new(ResidualTracker::new(4.0)),
                    Box::new(ResidualTracker::new(8.0)),
                ];
                let init = case.initial_state(RANDOM_CELLS).unwrap();
                let result = run(&case.model, &scheme, init, &RunOptions::steps(RANDOM_STEPS), &mut monitors);
                let (report, error) = match result {
                    Ok(r) => (r, None),
                    Err(f) => (*f.report, Some(f.error.to_string())),
                };
                let mut max_residual = [f64::NEG_INFINITY; 3];
                for (k, m) in monitors[2..].iter().enumerate() {
                    max_residual[k] = m.residual().unwrap_or(f64::NEG_INFINITY);
                }
                RandomRun {
                    seed,
                    min_rho: report.series.min_rho.iter().cloned().fold(f64::INFINITY, f64::min),
                    violations: report.violations,
                    max_residual,
                    error,
                }
            })
            .collect()
    })
}

/// Entropy residual monitor that remembers the largest residual over the whole run.
struct ResidualTracker {
    inner: EntropyResidualMonitor,
    worst: f64,
}

impl ResidualTracker {
    fn new(p: f64) -> Self {
        Self { inner: EntropyResidualMonitor::new(p), worst: f64::NEG_INFINITY }
    }
}

impl Monitor for ResidualTracker {
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn observe(&mut self, ctx: &nozzleflow::diagnostics::StepContext<'_>) -> Result<Vec<Violation>, nozzleflow::scheme::SchemeError> {
        let v = self.inner.observe(ctx)?;
        self.worst = self.worst.max(self.inner.last_max);
        Ok(v)
    }

    fn residual(&self) -> Option<f64> {
        Some(self.worst)
    }
}

fn errors_in_suite() -> Vec<String> {
    random_suite().iter().filter_map(|r| r.error.as_ref().map(|e| format!("seed {}: {e}", r.seed))).collect()
}

#[test]
fn c4_positivity() {
    let suite = random_suite();
    let errors = errors_in_suite();
    let worst = suite.iter().map(|r| r.min_rho).fold(f64::INFINITY, f64::min);
    let flagged = suite
        .iter()
        .flat_map(|r| &r.violations)
        .filter(|v| v.kind == ViolationKind::Positivity)
        .count();
    verdict(
        "C4 positivity",
        errors.is_empty() && worst >= -POSITIVITY_SLACK && flagged == 0,
        format!("{} runs, min rho = {worst:.3e}, run errors {:?}", suite.len(), errors),
    );
}

#[test]
fn c5_discrete_minimum_entropy_principle() {
    let suite = random_suite();
    let errors = errors_in_suite();
    let count = |kind| suite.iter().flat_map(|r| &r.violations).filter(|v| v.kind == kind).count();
    let (cellwise, global) = (count(ViolationKind::MinEntropy), count(ViolationKind::GlobalMinEntropy));
    let worst = suite
        .iter()
        .flat_map(|r| &r.violations)
        .filter(|v| matches!(v.kind, ViolationKind::MinEntropy | ViolationKind::GlobalMinEntropy))
        .map(|v| v.bound - v.value)
        .fold(0.0, f64::max);
    verdict(
        "C5 discrete minimum entropy principle",
        errors.is_empty() && cellwise == 0 && global == 0,
        format!("{} runs: {cellwise} cell violations, {global} global-min decreases (tol {ENTROPY_TOL:e}, worst drop {worst:.2e})", suite.len()),
    );
}

#[test]
fn c7_discrete_entropy_inequality() {
    let suite = random_suite();
    let errors = errors_in_suite();
    let mut worst = [f64::NEG_INFINITY; 3];
    for r in suite {
        for (w, r) in worst.iter_mut().zip(r.max_residual) {
            *w = w.max(r);
        }
    }
    verdict(
        "C7 discrete entropy inequality",
        errors.is_empty() && worst.iter().all(|w| *w <= ENTROPY_TOL),
        format!("max scaled residual for p=2,4,8: {:.2e}, {:.2e}, {:.2e}", worst[0], worst[1], worst[2]),
    );
}

fn random_state(rng: &mut ChaCha8Rng) -> (GasModel, nozzleflow::CellState) {
    let gamma = rng.random_range(1.05..1.65);
    let p_inf = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..5.0) };
    let m = GasModel::new(gamma, p_inf, rng.random_range(-2.0..2.0)).unwrap();
    let rho = rng.random_range(0.05..5.0);
    let stiff = rng.random_range(0.05..5.0);
    let u = rng.random_range(-3.0..3.0);
    let a = rng.random_range(0.2..4.0);
    (m, PrimitiveState { rho, u, p: stiff - p_inf, a }.to_conserved(&m).unwrap())
}

#[test]
fn c6_entropy_pair_compatibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_b, mut worst_grad, mut worst_eig) = (0.0f64, 0.0f64, f64::INFINITY);
    for i in 0..COMPAT_SAMPLES {
        let (m, c) = random_state(&mut rng);
        let p_exp = [2.0, 4.0, 8.0][i % 3];
        let pair = EntropyPair::covering(&m, [&c], p_exp).unwrap();
        let (derived, _) = check_compatibility(&m, &c, &pair).unwrap();
        worst_b = worst_b.max(derived.relative);
        let g = entropy_gradient(&m, &c, &pair).unwrap();
        let fd = entropy_gradient_fd(&m, &c, &pair).unwrap();
        worst_grad = worst_grad.max((g - fd).abs().max() / g.abs().max());
        let (min, radius) = entropy_hessian_spectrum(&m, &c, &pair).unwrap();
        worst_eig = worst_eig.min(min / radius.max(1.0));
    }
    verdict(
        "C6 entropy-pair compatibility",
        worst_b <= COMPAT_TOL && worst_grad <= GRADIENT_TOL && worst_eig >= -HESSIAN_TOL,
        format!("{COMPAT_SAMPLES} states: max rel |B| = {worst_b:.2e}, gradient rel err = {worst_grad:.2e}, min scaled Hessian eigenvalue = {worst_eig:.2e}"),
    );
}

#[test]
fn c8_stationary_solver_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut worst_phi, mut worst_double, mut worst_inv) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..ROOT_SAMPLES {
        let gamma = rng.random_range(1.05..1.65);
        let p_inf = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..3.0) };
        let m = GasModel::new(gamma, p_inf, rng.random_range(-1.0..1.0)).unwrap();
        let rho = rng.random_range(0.1..5.0);
        let stiff = rng.random_range(0.1..5.0);
        let c = (gamma * stiff / rho).sqrt();
        let mach = if rng.random_bool(0.5) { rng.random_range(0.05..0.95) } else { rng.random_range(1.05..4.0) };
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let left = PrimitiveState { rho, u: sign * mach * c, p: stiff - p_inf, a: rng.random_range(0.2..3.0) };

        let am = a_min(&m, &left).unwrap();
        let a_plus = am * rng.random_range(1.01..3.0);
        let sol = solve_stationary(&m, &left, a_plus).unwrap();
        let target = (left.a * left.u * left.rho / a_plus).powi(2);
        for r in [sol.phi1, sol.phi2] {
            worst_phi = worst_phi.max((phi(&m, &left, r).unwrap() - target).abs() / target);
        }

        let at_min = solve_stationary(&m, &left, am).unwrap();
        worst_double = worst_double.max((at_min.phi2 - at_min.phi1).abs() / at_min.rho_max);

        let cell = left.to_conserved(&m).unwrap();
        let there = transport(&m, &cell, a_plus, ResonancePolicy::Fail).unwrap();
        let back = transport(&m, &there.state.with_area(a_plus), left.a, ResonancePolicy::Fail).unwrap();
        worst_inv = worst_inv
            .max((back.state.rho - left.rho).abs() / left.rho.max(1.0))
            .max((back.state.velocity() - left.u).abs() / left.u.abs().max(1.0));
    }
    verdict(
        "C8 stationary-solver structure",
        worst_phi <= ROOT_TOL && worst_double <= DOUBLE_ROOT_TOL && worst_inv <= INVOLUTION_TOL,
        format!("{ROOT_SAMPLES} left states: Φ rel err {worst_phi:.2e}, double-root gap {worst_double:.2e}, involution err {worst_inv:.2e}"),
    );
}
