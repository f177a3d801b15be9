//! Time stepping.
//!
//! The well-balanced update for cell `j` is
//!
//! ```text
//! U_j^{n+1} = (U_{j−1,+} + U_{j+1,−}) / 2 + λ/2 (f(U_{j−1,+}) − f(U_{j+1,−}))
//! ```
//!
//! where `U = (ρ, ρu, ρe)` and the neighbour states have been carried to the
//! cross-section `a_j` along their stationary curves. The baseline schemes
//! apply the same Lax-Friedrichs update to `aU` and add `p ∂ₓa` to the
//! momentum equation with a central, forward or backward difference.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eos::{EosError, GasModel};
use crate::states::{CellState, Conserved, StateError};
use crate::stationary::{reconstruct_neighbors, velocity_bound, ResonancePolicy, StationaryError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("CFL violated: 1/lambda = {inv_lambda} < max signal speed {signal}")]
    Cfl { inv_lambda: f64, signal: f64 },
    #[error("no non-vacuum cell to set the time step")]
    NoSignal,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cell {cell}: {source}")]
    Cell { cell: usize, source: StationaryError },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Eos(#[from] EosError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    WellBalanced,
    LfCentral,
    LfForward,
    LfBackward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    #[default]
    Transmissive,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    /// Pinned `Δt/Δx`; recomputed from the CFL bound each step when `None`.
    pub lambda: Option<f64>,
    pub cfl_safety: f64,
    pub n_cells: usize,
    pub domain: (f64, f64),
    pub kind: SchemeKind,
    pub boundary: Boundary,
    pub resonance: ResonancePolicy,
}

impl SchemeConfig {
    pub fn new(kind: SchemeKind, n_cells: usize, domain: (f64, f64)) -> Self {
        Self {
            lambda: None,
            cfl_safety: 0.9,
            n_cells,
            domain,
            kind,
            boundary: Boundary::Transmissive,
            resonance: ResonancePolicy::Project,
        }
    }

    pub fn dx(&self) -> f64 {
        (self.domain.1 - self.domain.0) / self.n_cells as f64
    }

    pub fn cell_centers(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_cells).map(|j| self.domain.0 + (j as f64 + 0.5) * dx).collect()
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        if self.n_cells < 2 {
            return Err(SchemeError::Config("need at least two cells".into()));
        }
        if !(self.domain.1 > self.domain.0) {
            return Err(SchemeError::Config("domain must have positive length".into()));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(SchemeError::Config("cfl_safety must lie in (0, 1]".into()));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(SchemeError::Config("pinned lambda must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunState {
    pub cells: Vec<CellState>,
    pub t: f64,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub state: RunState,
    pub lambda: f64,
    /// Number of neighbour reconstructions that hit resonance and were projected.
    pub projections: usize,
}

/// Mesh extended by one ghost cell on each side.
pub fn with_ghosts(cells: &[CellState], boundary: Boundary) -> Vec<CellState> {
    let n = cells.len();
    let mut ext = Vec::with_capacity(n + 2);
    match boundary {
        Boundary::Transmissive => {
            ext.push(cells[0]);
            ext.extend_from_slice(cells);
            ext.push(cells[n - 1]);
        }
        Boundary::Periodic => {
            ext.push(cells[n - 1]);
            ext.extend_from_slice(cells);
            ext.push(cells[0]);
        }
    }
    ext
}

/// `|u| + √(2 p_ρ(ρ, S))` for a non-vacuum state.
pub fn signal_speed(model: &GasModel, cell: &CellState) -> Result<f64, StateError> {
    let prim = cell.to_primitive(model)?;
    let s = prim.entropy(model)?;
    Ok(prim.u.abs() + (2.0 * model.dp_drho_s(prim.rho, s)?).sqrt())
}

pub fn max_signal_speed(model: &GasModel, cells: &[CellState]) -> Result<f64, StateError> {
    let mut m = 0.0f64;
    for c in cells.iter().filter(|c| !c.is_vacuum()) {
        m = m.max(signal_speed(model, c)?);
    }
    Ok(m)
}

/// `|u| + √(2 p_ρ)` of a per-area state, zero in vacuum.
fn conserved_signal(model: &GasModel, u: &Conserved) -> Result<f64, EosError> {
    if u.rho == 0.0 {
        return Ok(0.0);
    }
    velocity_bound(model, u.rho, u.velocity(), u.entropy(model)?)
}

/// Largest signal speed over the states entering the well-balanced update:
/// the cells and their stationary reconstructions.
pub fn max_reconstructed_signal_speed(
    model: &GasModel,
    cells: &[CellState],
    cfg: &SchemeConfig,
) -> Result<f64, SchemeError> {
    let mut m = max_signal_speed(model, cells)?;
    for (l, r, _) in reconstruct_all(model, cells, cfg)? {
        m = m.max(conserved_signal(model, &l)?).max(conserved_signal(model, &r)?);
    }
    Ok(m)
}

/// `λ = Δt/Δx` for the next step. A pinned value is checked against the CFL bound.
///
/// For the well-balanced scheme the bound also covers the reconstructed
/// neighbour states, whose velocities may exceed those of the cells.
pub fn choose_lambda(model: &GasModel, cells: &[CellState], cfg: &SchemeConfig) -> Result<f64, SchemeError> {
    let signal = match cfg.kind {
        SchemeKind::WellBalanced => max_reconstructed_signal_speed(model, cells, cfg)?,
        _ => max_signal_speed(model, cells)?,
    };
    match cfg.lambda {
        Some(l) => {
            if 1.0 / l < signal {
                Err(SchemeError::Cfl { inv_lambda: 1.0 / l, signal })
            } else {
                Ok(l)
            }
        }
        None if signal > 0.0 => Ok(cfg.cfl_safety / signal),
        None => Err(SchemeError::NoSignal),
    }
}

/// Lax-Friedrichs flux `½(f(U) + f(V)) − (V − U)/(2λ)` between states at a common area.
pub fn lf_flux(model: &GasModel, u: &Conserved, v: &Conserved, lambda: f64) -> Result<Conserved, EosError> {
    let avg = u.flux(model)?.add(&v.flux(model)?).scaled(0.5);
    Ok(avg.sub(&v.sub(u).scaled(0.5 / lambda)))
}

fn lf_average(model: &GasModel, left: &Conserved, right: &Conserved, lambda: f64) -> Result<Conserved, EosError> {
    let fl = left.flux(model)?;
    let fr = right.flux(model)?;
    Ok(left.add(right).scaled(0.5).add(&fl.sub(&fr).scaled(0.5 * lambda)))
}

/// Stationary reconstructions `(U_{j−1,+}, U_{j+1,−})` for every cell.
pub fn reconstruct_all(
    model: &GasModel,
    cells: &[CellState],
    cfg: &SchemeConfig,
) -> Result<Vec<(Conserved, Conserved, usize)>, SchemeError> {
    let ext = with_ghosts(cells, cfg.boundary);
    (1..=cells.len())
        .into_par_iter()
        .map(|j| {
            reconstruct_neighbors(model, &ext, j, cfg.resonance)
                .map_err(|source| SchemeError::Cell { cell: j - 1, source })
        })
        .collect()
}

fn advance(state: &RunState, cells: Vec<CellState>, lambda: f64, dx: f64, projections: usize) -> StepResult {
    StepResult {
        state: RunState { cells, t: state.t + lambda * dx, step: state.step + 1 },
        lambda,
        projections,
    }
}

/// One step of the well-balanced scheme with the given `λ`.
pub fn step_well_balanced_with(
    model: &GasModel,
    state: &RunState,
    cfg: &SchemeConfig,
    lambda: f64,
) -> Result<StepResult, SchemeError> {
    let recon = reconstruct_all(model, &state.cells, cfg)?;
    let cells = recon
        .par_iter()
        .zip(state.cells.par_iter())
        .map(|((l, r, _), cell)| Ok(lf_average(model, l, r, lambda)?.with_area(cell.a)))
        .collect::<Result<Vec<_>, SchemeError>>()?;
    let projections = recon.iter().map(|r| r.2).sum();
    Ok(advance(state, cells, lambda, cfg.dx(), projections))
}

pub fn step_well_balanced(model: &GasModel, state: &RunState, cfg: &SchemeConfig) -> Result<StepResult, SchemeError> {
    let lambda = choose_lambda(model, &state.cells, cfg)?;
    step_well_balanced_with(model, state, cfg, lambda)
}

fn cell_vector(c: &CellState) -> Conserved {
    Conserved { rho: c.w1, mom: c.w2, ener: c.w3 }
}

/// Momentum source `p_j (Δa)_j` as discretised by the baseline variant.
fn area_difference(kind: SchemeKind, am: f64, a: f64, ap: f64) -> f64 {
    match kind {
        SchemeKind::LfCentral | SchemeKind::WellBalanced => 0.5 * (ap - am),
        SchemeKind::LfForward => ap - a,
        SchemeKind::LfBackward => a - am,
    }
}

/// One step of a baseline scheme with the given `λ`.
pub fn step_baseline_with(
    model: &GasModel,
    state: &RunState,
    cfg: &SchemeConfig,
    lambda: f64,
) -> Result<StepResult, SchemeError> {
    if cfg.kind == SchemeKind::WellBalanced {
        return Err(SchemeError::Config("baseline step requested with the well-balanced kind".into()));
    }
    let ext = with_ghosts(&state.cells, cfg.boundary);
    let area_flux = |c: &CellState| -> Result<Conserved, EosError> { Ok(c.per_area().flux(model)?.scaled(c.a)) };
    let cells = (1..=state.cells.len())
        .into_par_iter()
        .map(|j| {
            let (l, c, r) = (&ext[j - 1], &ext[j], &ext[j + 1]);
            let avg = cell_vector(l).add(&cell_vector(r)).scaled(0.5);
            let mut w = avg.add(&area_flux(l)?.sub(&area_flux(r)?).scaled(0.5 * lambda));
            let p = if c.is_vacuum() { 0.0 } else { c.per_area().pressure(model)? };
            w.mom += lambda * p * area_difference(cfg.kind, l.a, c.a, r.a);
            Ok(CellState { w1: w.rho, w2: w.mom, w3: w.ener, a: c.a })
        })
        .collect::<Result<Vec<_>, SchemeError>>()?;
    Ok(advance(state, cells, lambda, cfg.dx(), 0))
}

pub fn step_baseline(model: &GasModel, state: &RunState, cfg: &SchemeConfig) -> Result<StepResult, SchemeError> {
    let lambda = choose_lambda(model, &state.cells, cfg)?;
    step_baseline_with(model, state, cfg, lambda)
}

/// Dispatches on `cfg.kind`.
pub fn step_with(model: &GasModel, state: &RunState, cfg: &SchemeConfig, lambda: f64) -> Result<StepResult, SchemeError> {
    match cfg.kind {
        SchemeKind::WellBalanced => step_well_balanced_with(model, state, cfg, lambda),
        _ => step_baseline_with(model, state, cfg, lambda),
    }
}

pub fn step(model: &GasModel, state: &RunState, cfg: &SchemeConfig) -> Result<StepResult, SchemeError> {
    let lambda = choose_lambda(model, &state.cells, cfg)?;
    step_with(model, state, cfg, lambda)
}
