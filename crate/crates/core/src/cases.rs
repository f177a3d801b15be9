//! Initial-value setups.
//!
//! A case is a list of segments, each carrying a constant cross-section and
//! constant `(ρ, u, p)`. Cases serialise to a flat TOML file:
//!
//! ```toml
//! name = "paper-stationary"
//! domain = [-1.0, 1.0]
//! n_cells = 1000
//! n_steps = 2000
//! boundary = "transmissive"
//! reference = "initial"
//!
//! [model]
//! gamma = 1.4
//! p_inf = 0.0
//! eps_inf = 0.0
//!
//! [[segment]]
//! x_lo = -1.0
//! x_hi = 0.0
//! a = 1.0
//! rho = 2.0
//! u = 0.5
//! p = 2.6390158215457884
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eos::GasModel;
use crate::scheme::{Boundary, RunState};
use crate::states::{PrimitiveState, StateError};
use crate::stationary::{a_min, StationaryError};

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("unknown case `{0}`")]
    Unknown(String),
    #[error("no segment covers x = {0}")]
    Uncovered(f64),
    #[error("case `{name}`: {source}")]
    Inadmissible { name: String, source: StateError },
    #[error("random case generation failed after {0} attempts")]
    GeneratorExhausted(usize),
    #[error(transparent)]
    Stationary(#[from] StationaryError),
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config write error: {0}")]
    Write(#[from] toml::ser::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    #[default]
    None,
    /// The exact solution is the initial data for all time.
    Initial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub x_lo: f64,
    pub x_hi: f64,
    pub a: f64,
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub name: String,
    pub domain: (f64, f64),
    pub n_cells: usize,
    pub n_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub reference: Reference,
    pub model: GasModel,
    #[serde(rename = "segment")]
    pub segments: Vec<Segment>,
}

pub const SHIPPED: [&str; 4] = ["paper-stationary", "rest-nozzle", "shock-nozzle", "smooth-isentropic"];

// Downstream state of the reference stationary jump, to the digits given.
#[allow(clippy::excessive_precision)]
pub const STATIONARY_RHO_R: f64 = 2.080717229626240;
#[allow(clippy::excessive_precision)]
pub const STATIONARY_U_R: f64 = 0.320402338758170;

impl TestCase {
    pub fn segment_at(&self, x: f64) -> Result<&Segment, CaseError> {
        let last = self.segments.len().saturating_sub(1);
        self.segments
            .iter()
            .enumerate()
            .find(|(i, s)| x >= s.x_lo && (x < s.x_hi || (*i == last && x <= s.x_hi)))
            .map(|(_, s)| s)
            .ok_or(CaseError::Uncovered(x))
    }

    pub fn cell_centers(&self, n_cells: usize) -> Vec<f64> {
        let dx = (self.domain.1 - self.domain.0) / n_cells as f64;
        (0..n_cells).map(|j| self.domain.0 + (j as f64 + 0.5) * dx).collect()
    }

    pub fn primitives(&self, n_cells: usize) -> Result<Vec<PrimitiveState>, CaseError> {
        self.cell_centers(n_cells)
            .into_iter()
            .map(|x| {
                let s = self.segment_at(x)?;
                Ok(PrimitiveState { rho: s.rho, u: s.u, p: s.p, a: s.a })
            })
            .collect()
    }

    pub fn initial_state(&self, n_cells: usize) -> Result<RunState, CaseError> {
        let cells = self
            .primitives(n_cells)?
            .iter()
            .map(|p| {
                let c = p.to_conserved(&self.model)?;
                // admissibility: entropy and sound speed must exist
                p.sound_speed(&self.model)?;
                Ok(c)
            })
            .collect::<Result<Vec<_>, StateError>>()
            .map_err(|source| CaseError::Inadmissible { name: self.name.clone(), source })?;
        Ok(RunState { cells, t: 0.0, step: 0 })
    }

    /// Reference primitive fields on an `n_cells` mesh, when the case has one.
    pub fn reference_fields(&self, n_cells: usize) -> Result<Option<Vec<PrimitiveState>>, CaseError> {
        match self.reference {
            Reference::None => Ok(None),
            Reference::Initial => Ok(Some(self.primitives(n_cells)?)),
        }
    }

    pub fn to_toml(&self) -> Result<String, CaseError> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_toml(text: &str) -> Result<Self, CaseError> {
        Ok(toml::from_str(text)?)
    }
}

pub fn shipped_case(name: &str) -> Result<TestCase, CaseError> {
    match name {
        "paper-stationary" => Ok(paper_stationary_case()),
        "rest-nozzle" => Ok(rest_nozzle_case()),
        "shock-nozzle" => Ok(shock_nozzle_case()),
        "smooth-isentropic" => Ok(smooth_isentropic_case(200)),
        other => Err(CaseError::Unknown(other.to_string())),
    }
}

/// Two states joined by a stationary wave at `x = 0` where the area jumps from 1 to 1.5.
pub fn paper_stationary_case() -> TestCase {
    let gamma: f64 = 1.4;
    TestCase {
        name: "paper-stationary".into(),
        domain: (-1.0, 1.0),
        n_cells: 1000,
        n_steps: 2000,
        t_end: None,
        boundary: Boundary::Transmissive,
        reference: Reference::Initial,
        model: GasModel { gamma, p_inf: 0.0, eps_inf: 0.0 },
        segments: vec![
            Segment { x_lo: -1.0, x_hi: 0.0, a: 1.0, rho: 2.0, u: 0.5, p: 2f64.powf(gamma) },
            Segment { x_lo: 0.0, x_hi: 1.0, a: 1.5, rho: STATIONARY_RHO_R, u: STATIONARY_U_R, p: STATIONARY_RHO_R.powf(gamma) },
        ],
    }
}

/// Gas at rest through several area changes.
pub fn rest_nozzle_case() -> TestCase {
    let areas = [1.0, 0.6, 1.8, 0.9, 1.3];
    let w = 2.0 / areas.len() as f64;
    TestCase {
        name: "rest-nozzle".into(),
        domain: (-1.0, 1.0),
        n_cells: 500,
        n_steps: 500,
        t_end: None,
        boundary: Boundary::Transmissive,
        reference: Reference::Initial,
        model: GasModel { gamma: 1.4, p_inf: 0.0, eps_inf: 0.0 },
        segments: areas
            .iter()
            .enumerate()
            .map(|(i, &a)| Segment {
                x_lo: -1.0 + i as f64 * w,
                x_hi: if i + 1 == areas.len() { 1.0 } else { -1.0 + (i + 1) as f64 * w },
                a,
                rho: 1.0,
                u: 0.0,
                p: 1.0,
            })
            .collect(),
    }
}

/// Riemann data: one state on each side of `x = 0`.
pub fn riemann_case(name: &str, model: GasModel, left: PrimitiveState, right: PrimitiveState, domain: (f64, f64)) -> TestCase {
    let seg = |lo, hi, s: PrimitiveState| Segment { x_lo: lo, x_hi: hi, a: s.a, rho: s.rho, u: s.u, p: s.p };
    TestCase {
        name: name.into(),
        domain,
        n_cells: 500,
        n_steps: 300,
        t_end: None,
        boundary: Boundary::Transmissive,
        reference: Reference::None,
        model,
        segments: vec![seg(domain.0, 0.0, left), seg(0.0, domain.1, right)],
    }
}

/// Sod-type tube with a contraction at the diaphragm.
pub fn shock_nozzle_case() -> TestCase {
    riemann_case(
        "shock-nozzle",
        GasModel { gamma: 1.4, p_inf: 0.0, eps_inf: 0.0 },
        PrimitiveState { rho: 1.0, u: 0.0, p: 1.0, a: 1.0 },
        PrimitiveState { rho: 0.125, u: 0.0, p: 0.1, a: 0.8 },
        (-1.0, 1.0),
    )
}

/// Isentropic sine wave in a straight periodic duct, discretised into `n_segments` pieces.
pub fn smooth_isentropic_case(n_segments: usize) -> TestCase {
    let gamma: f64 = 1.4;
    let w = 1.0 / n_segments as f64;
    TestCase {
        name: "smooth-isentropic".into(),
        domain: (0.0, 1.0),
        n_cells: n_segments,
        n_steps: 200,
        t_end: None,
        boundary: Boundary::Periodic,
        reference: Reference::None,
        model: GasModel { gamma, p_inf: 0.0, eps_inf: 0.0 },
        segments: (0..n_segments)
            .map(|i| {
                let x = (i as f64 + 0.5) * w;
                let rho = 1.0 + 0.2 * (2.0 * std::f64::consts::PI * x).sin();
                Segment {
                    x_lo: i as f64 * w,
                    x_hi: if i + 1 == n_segments { 1.0 } else { (i + 1) as f64 * w },
                    a: 1.0,
                    rho,
                    u: 0.3,
                    p: rho.powf(gamma),
                }
            })
            .collect(),
    }
}

/// Knobs for [`random_admissible_case`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomCaseConfig {
    pub n_cells: usize,
    pub n_steps: usize,
    /// Range for the number of constant-state blocks.
    pub state_blocks: (usize, usize),
    /// Range for the number of constant-area blocks.
    pub area_blocks: (usize, usize),
    pub area_range: (f64, f64),
    pub rho_range: (f64, f64),
    pub entropy_range: (f64, f64),
    /// Subsonic blocks draw `|u|/c` from `[0, max_subsonic_mach]`.
    pub max_subsonic_mach: f64,
    /// Probability that a block is supersonic, with `|u|/c ∈ supersonic_mach`.
    pub supersonic_prob: f64,
    pub supersonic_mach: (f64, f64),
    /// Probability that one block is replaced by a near-vacuum patch. Only
    /// ideal-gas cases get one: with `p∞ > 0` the thermal part of `ρε` at
    /// `ρ → 0` sits below the roundoff of the `p∞` term, so `S` is not
    /// resolvable in double precision there.
    pub vacuum_patch_prob: f64,
    pub vacuum_rho: (f64, f64),
    pub stiffened_prob: f64,
    pub boundary: Boundary,
    pub max_attempts: usize,
}

impl Default for RandomCaseConfig {
    fn default() -> Self {
        Self {
            n_cells: 500,
            n_steps: 500,
            state_blocks: (3, 12),
            area_blocks: (1, 6),
            area_range: (0.8, 1.25),
            rho_range: (0.1, 3.0),
            entropy_range: (-1.0, 1.0),
            max_subsonic_mach: 0.4,
            supersonic_prob: 0.1,
            supersonic_mach: (1.8, 2.5),
            vacuum_patch_prob: 0.3,
            vacuum_rho: (1e-8, 1e-4),
            stiffened_prob: 0.3,
            boundary: Boundary::Transmissive,
            max_attempts: 100,
        }
    }
}

/// Sorted distinct interior cell boundaries splitting `n` cells into `k` blocks.
fn block_edges(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut edges: Vec<usize> = (0..k.saturating_sub(1)).map(|_| rng.random_range(1..n)).collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}

fn block_of(edges: &[usize], j: usize) -> usize {
    edges.partition_point(|&e| e <= j)
}

fn try_random_case(rng: &mut ChaCha8Rng, seed: u64, cfg: &RandomCaseConfig) -> Result<Option<TestCase>, CaseError> {
    let n = cfg.n_cells;
    let gamma = rng.random_range(1.1..1.6);
    let model = if rng.random_bool(cfg.stiffened_prob) {
        GasModel { gamma, p_inf: rng.random_range(0.0..2.0), eps_inf: rng.random_range(-1.0..1.0) }
    } else {
        GasModel { gamma, p_inf: 0.0, eps_inf: 0.0 }
    };

    let n_state = rng.random_range(cfg.state_blocks.0..=cfg.state_blocks.1);
    let state_edges = block_edges(rng, n, n_state);
    let n_area = rng.random_range(cfg.area_blocks.0..=cfg.area_blocks.1);
    let area_edges = block_edges(rng, n, n_area);

    let vacuum_block = rng
        .random_bool(cfg.vacuum_patch_prob)
        .then(|| rng.random_range(0..=state_edges.len()))
        .filter(|_| model.p_inf == 0.0);
    let states: Vec<(f64, f64, f64)> = (0..=state_edges.len())
        .map(|b| {
            let rho = if vacuum_block == Some(b) {
                (rng.random_range(cfg.vacuum_rho.0.ln()..cfg.vacuum_rho.1.ln())).exp()
            } else {
                rng.random_range(cfg.rho_range.0..cfg.rho_range.1)
            };
            let s = rng.random_range(cfg.entropy_range.0..cfg.entropy_range.1);
            let mach = if rng.random_bool(cfg.supersonic_prob) {
                rng.random_range(cfg.supersonic_mach.0..cfg.supersonic_mach.1)
            } else {
                rng.random_range(0.0..cfg.max_subsonic_mach)
            };
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let p = (s + gamma * rho.ln()).exp() - model.p_inf;
            let c = (gamma * (p + model.p_inf) / rho).sqrt();
            (rho, sign * mach * c, p)
        })
        .collect();
    let areas: Vec<f64> =
        (0..=area_edges.len()).map(|_| rng.random_range(cfg.area_range.0..cfg.area_range.1)).collect();

    let domain = (0.0, 1.0);
    let dx = 1.0 / n as f64;
    let mut edges: Vec<usize> = state_edges.iter().chain(&area_edges).cloned().collect();
    edges.sort_unstable();
    edges.dedup();
    let mut starts = vec![0];
    starts.extend(edges);
    let mut segments = Vec::with_capacity(starts.len());
    for (i, &j0) in starts.iter().enumerate() {
        let j1 = starts.get(i + 1).copied().unwrap_or(n);
        let (rho, u, p) = states[block_of(&state_edges, j0)];
        segments.push(Segment {
            x_lo: j0 as f64 * dx,
            x_hi: if j1 == n { domain.1 } else { j1 as f64 * dx },
            a: areas[block_of(&area_edges, j0)],
            rho,
            u,
            p,
        });
    }

    // every neighbour transport must exist initially
    let mut worst = 0.0f64;
    for s in &segments {
        worst = worst.max(a_min(&model, &PrimitiveState { rho: s.rho, u: s.u, p: s.p, a: s.a })?);
    }
    let smallest = areas.iter().cloned().fold(f64::INFINITY, f64::min);
    if smallest < worst {
        return Ok(None);
    }
    Ok(Some(TestCase {
        name: format!("random-{seed}"),
        domain,
        n_cells: n,
        n_steps: cfg.n_steps,
        t_end: None,
        boundary: cfg.boundary,
        reference: Reference::None,
        model,
        segments,
    }))
}

/// Reproducible random case with piecewise-constant data whose areas all
/// exceed the largest `a_min` of the initial states.
pub fn random_admissible_case(seed: u64, cfg: &RandomCaseConfig) -> Result<TestCase, CaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.max_attempts {
        if let Some(case) = try_random_case(&mut rng, seed, cfg)? {
            return Ok(case);
        }
    }
    Err(CaseError::GeneratorExhausted(cfg.max_attempts))
}
