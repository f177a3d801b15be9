//! Time loop with per-step monitors.

use thiserror::Error;

use crate::diagnostics::{Monitor, StepContext};
use crate::eos::GasModel;
use crate::report::{ConfigEcho, RunReport, Snapshot, StopAt, TimeSeries};
use crate::scheme::{choose_lambda, step_with, RunState, SchemeConfig, SchemeError};
use crate::states::PrimitiveState;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub stop: StopAt,
    /// Snapshot cadence in steps; the initial and final states are always kept.
    pub snapshot_every: Option<usize>,
    pub reference: Option<Vec<PrimitiveState>>,
}

impl RunOptions {
    pub fn steps(n: usize) -> Self {
        Self { stop: StopAt::Steps(n), snapshot_every: None, reference: None }
    }

    pub fn until(t_end: f64) -> Self {
        Self { stop: StopAt::Time(t_end), snapshot_every: None, reference: None }
    }
}

/// A run that stopped on an error, with everything recorded up to that point.
#[derive(Debug, Error)]
#[error("run stopped at step {step}: {error}")]
pub struct RunFailure {
    pub step: usize,
    pub error: SchemeError,
    pub report: Box<RunReport>,
}

/// `max_j max(|ρ − ρ⁰|, |u − u⁰|, |p − p⁰|)`.
pub fn deviation(model: &GasModel, state: &RunState, reference: &[PrimitiveState]) -> Result<f64, SchemeError> {
    let mut worst = 0.0f64;
    for (c, r) in state.cells.iter().zip(reference) {
        let (rho, u, p) = if c.is_vacuum() {
            (0.0, 0.0, 0.0)
        } else {
            let q = c.to_primitive(model)?;
            (q.rho, q.u, q.p)
        };
        worst = worst.max((rho - r.rho).abs()).max((u - r.u).abs()).max((p - r.p).abs());
    }
    Ok(worst)
}

struct Recorder<'a> {
    model: &'a GasModel,
    x: Vec<f64>,
    reference: Option<&'a [PrimitiveState]>,
    report: RunReport,
}

impl Recorder<'_> {
    fn record(&mut self, state: &RunState, residual: Option<f64>) -> Result<(), SchemeError> {
        let s = &mut self.report.series;
        s.step.push(state.step);
        s.t.push(state.t);
        let mut min_rho = f64::INFINITY;
        let mut min_s = f64::INFINITY;
        for c in &state.cells {
            min_rho = min_rho.min(c.w1 / c.a);
            if let Some(e) = c.entropy(self.model)? {
                min_s = min_s.min(e);
            }
        }
        s.min_rho.push(min_rho);
        s.min_s.push(min_s);
        s.max_entropy_residual.push(residual);
        let dev = match self.reference {
            Some(r) => Some(deviation(self.model, state, r)?),
            None => None,
        };
        self.report.series.max_deviation.push(dev);
        Ok(())
    }

    fn snapshot(&mut self, state: &RunState) -> Result<(), SchemeError> {
        if self.report.snapshots.last().map(|s| s.step) != Some(state.step) {
            self.report.snapshots.push(Snapshot::capture(self.model, &self.x, state)?);
        }
        Ok(())
    }
}

/// Advances `initial` until the stop condition, calling every monitor after each step.
pub fn run(
    model: &GasModel,
    cfg: &SchemeConfig,
    initial: RunState,
    opts: &RunOptions,
    monitors: &mut [Box<dyn Monitor>],
) -> Result<RunReport, RunFailure> {
    let report = RunReport {
        config: ConfigEcho { case: None, seed: None, model: *model, scheme: cfg.clone(), stop: opts.stop },
        snapshots: Vec::new(),
        series: TimeSeries::default(),
        violations: Vec::new(),
        resonance_events: Vec::new(),
        error: None,
    };
    let mut rec = Recorder { model, x: cfg.cell_centers(), reference: opts.reference.as_deref(), report };
    let mut state = initial;

    let outcome = (|| -> Result<(), SchemeError> {
        cfg.validate()?;
        if state.cells.len() != cfg.n_cells {
            return Err(SchemeError::Config(format!(
                "initial state has {} cells, config expects {}",
                state.cells.len(),
                cfg.n_cells
            )));
        }
        rec.record(&state, None)?;
        rec.snapshot(&state)?;
        let dx = cfg.dx();
        loop {
            let lambda = match opts.stop {
                StopAt::Steps(n) if state.step >= n => break,
                StopAt::Steps(_) => choose_lambda(model, &state.cells, cfg)?,
                StopAt::Time(t_end) => {
                    let remaining = t_end - state.t;
                    if remaining <= 1e-14 * t_end.abs().max(1.0) {
                        break;
                    }
                    choose_lambda(model, &state.cells, cfg)?.min(remaining / dx)
                }
            };
            let out = step_with(model, &state, cfg, lambda)?;
            if out.projections > 0 {
                rec.report.resonance_events.push((out.state.step, out.projections));
            }
            let ctx = StepContext { model, cfg, before: &state, after: &out.state, lambda };
            let mut residual: Option<f64> = None;
            for m in monitors.iter_mut() {
                rec.report.violations.extend(m.observe(&ctx)?);
                if let Some(r) = m.residual() {
                    residual = Some(residual.map_or(r, |x| x.max(r)));
                }
            }
            state = out.state;
            if let StopAt::Time(t_end) = opts.stop {
                if (state.t - t_end).abs() <= 1e-14 * t_end.abs().max(1.0) {
                    state.t = t_end;
                }
            }
            rec.record(&state, residual)?;
            if let Some(every) = opts.snapshot_every {
                if every > 0 && state.step.is_multiple_of(every) {
                    rec.snapshot(&state)?;
                }
            }
        }
        rec.snapshot(&state)?;
        Ok(())
    })();

    match outcome {
        Ok(()) => Ok(rec.report),
        Err(error) => {
            let mut report = rec.report;
            report.error = Some(error.to_string());
            Err(RunFailure { step: state.step, error, report: Box::new(report) })
        }
    }
}
