//! Stationary jumps across a change of cross-section.
//!
//! A stationary wave keeps `S`, the mass flux `aρu` and the Bernoulli sum
//! `u²/2 + h(ρ, S)` constant. Eliminating `u` leaves a scalar equation in the
//! downstream density,
//!
//! ```text
//! Φ(ρ) = (u₋² + 2h(ρ₋, S₋)) ρ² − 2ρ² h(ρ, S₋) = (a₋ u₋ ρ₋ / a₊)²
//! ```
//!
//! `Φ` vanishes at `0`, rises to a single maximum at the sonic density
//! `ρ_max`, then decreases without bound. The equation is solvable iff
//! `a₊ ≥ a_min = a₋|u₋|ρ₋ / √Φ(ρ_max)`, with a supersonic root `φ1 ≤ ρ_max`
//! and a subsonic root `φ2 ≥ ρ_max`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eos::{EosError, GasModel};
use crate::states::{classify_velocity, CellState, Conserved, PrimitiveState, RegionTag, StateError};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum StationaryError {
    #[error(transparent)]
    Eos(#[from] EosError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("resonance: target area {a_plus} is below a_min = {a_min}")]
    Resonance { a_plus: f64, a_min: f64 },
    #[error("degenerate stationary curve: max Phi = {0}")]
    Degenerate(f64),
    #[error("cell {0} has no neighbour on both sides")]
    NoNeighbours(usize),
}

/// What to do when the requested area is below `a_min`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResonancePolicy {
    /// Use the sonic double root at `a_min` and record an event.
    #[default]
    Project,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Ok,
    DoubleRoot,
    NoRoot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarySolve {
    pub phi1: f64,
    pub phi2: f64,
    pub rho_max: f64,
    pub a_min: f64,
    pub selected: f64,
    pub u_plus: f64,
    pub regime: RegionTag,
    pub status: SolveStatus,
}

/// Upstream data of a jump in `(ρ, u, S, a)` form.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Source {
    rho: f64,
    u: f64,
    s: f64,
    a: f64,
    h: f64,
    c: f64,
}

impl Source {
    fn new(model: &GasModel, rho: f64, u: f64, s: f64, a: f64) -> Result<Self, EosError> {
        Ok(Self { rho, u, s, a, h: model.enthalpy(rho, s)?, c: model.sound_speed(rho, s)? })
    }

    fn from_primitive(model: &GasModel, left: &PrimitiveState) -> Result<Self, EosError> {
        Self::new(model, left.rho, left.u, left.entropy(model)?, left.a)
    }

    fn phi(&self, model: &GasModel, rho: f64) -> Result<f64, EosError> {
        let h = model.enthalpy(rho, self.s)?;
        Ok((self.u * self.u + 2.0 * self.h) * rho * rho - 2.0 * rho * rho * h)
    }

    fn mass_flux(&self) -> f64 {
        self.a * self.rho * self.u
    }
}

pub fn phi(model: &GasModel, left: &PrimitiveState, rho: f64) -> Result<f64, EosError> {
    Source::from_primitive(model, left)?.phi(model, rho)
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Maximiser of `Φ` by golden-section search.
fn rho_max_of(model: &GasModel, src: &Source) -> Result<f64, EosError> {
    // Φ(hi) ≤ 0 brackets the hump on (0, hi].
    let mut hi = src.rho;
    while src.phi(model, hi)? > 0.0 {
        hi *= 2.0;
    }
    let mut a = 0.0;
    let mut b = hi;
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = src.phi(model, x1)?;
    let mut f2 = src.phi(model, x2)?;
    for _ in 0..200 {
        if b - a <= 1e-12 * 0.5 * (a + b) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = src.phi(model, x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = src.phi(model, x1)?;
        }
    }
    Ok(if f1 > f2 { x1 } else { x2 })
}

pub fn rho_max(model: &GasModel, left: &PrimitiveState) -> Result<f64, EosError> {
    rho_max_of(model, &Source::from_primitive(model, left)?)
}

fn a_min_of(model: &GasModel, src: &Source, rho_max: f64) -> Result<f64, StationaryError> {
    if src.u == 0.0 {
        return Ok(0.0);
    }
    let peak = src.phi(model, rho_max)?;
    if !(peak > 0.0) {
        return Err(StationaryError::Degenerate(peak));
    }
    Ok(src.mass_flux().abs() / peak.sqrt())
}

pub fn a_min(model: &GasModel, left: &PrimitiveState) -> Result<f64, StationaryError> {
    let src = Source::from_primitive(model, left)?;
    let rm = rho_max_of(model, &src)?;
    a_min_of(model, &src, rm)
}

/// Bisection on a bracket where `f(lo)` and `f(hi)` have opposite signs,
/// run until the bracket cannot shrink further in floating point.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> Result<f64, EosError>) -> Result<f64, EosError> {
    let f_lo = f(lo)?;
    let lo_negative = f_lo < 0.0;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (flo, fhi) = (f(lo)?.abs(), f(hi)?.abs());
    Ok(if flo <= fhi { lo } else { hi })
}

/// Supersonic root `φ1 ∈ (0, ρ_max]`.
fn lower_root(model: &GasModel, src: &Source, rho_max: f64, target: f64) -> Result<f64, EosError> {
    let g = |r: f64| Ok(src.phi(model, r)? - target);
    if g(rho_max)? <= 0.0 {
        return Ok(rho_max);
    }
    let mut lo = 1e-12 * src.rho;
    while g(lo)? >= 0.0 && lo > f64::MIN_POSITIVE {
        lo *= 1e-3;
    }
    bisect(lo, rho_max, g)
}

/// Subsonic root `φ2 ∈ [ρ_max, ∞)`.
fn upper_root(model: &GasModel, src: &Source, rho_max: f64, target: f64) -> Result<f64, EosError> {
    let g = |r: f64| Ok(src.phi(model, r)? - target);
    if g(rho_max)? <= 0.0 {
        return Ok(rho_max);
    }
    let mut hi = 2.0 * rho_max.max(src.rho);
    while g(hi)? >= 0.0 {
        hi *= 2.0;
    }
    bisect(rho_max, hi, g)
}

/// Whether the downstream state should stay supersonic. Sonic sources are
/// assigned to the subsonic branch.
fn takes_supersonic_root(regime: RegionTag) -> bool {
    regime.is_supersonic()
}

fn solve_source(model: &GasModel, src: &Source, a_plus: f64) -> Result<StationarySolve, StationaryError> {
    let regime = classify_velocity(src.u, src.c);
    let rho_max = rho_max_of(model, src)?;
    if src.u == 0.0 {
        return Ok(StationarySolve {
            phi1: 0.0,
            phi2: src.rho,
            rho_max,
            a_min: 0.0,
            selected: src.rho,
            u_plus: 0.0,
            regime,
            status: SolveStatus::Ok,
        });
    }
    let a_min = a_min_of(model, src, rho_max)?;
    let flux = src.mass_flux();
    if a_plus < a_min {
        let peak = src.phi(model, rho_max)?;
        return Ok(StationarySolve {
            phi1: rho_max,
            phi2: rho_max,
            rho_max,
            a_min,
            selected: rho_max,
            // sonic state from the Bernoulli relation at the double root
            u_plus: src.u.signum() * peak.sqrt() / rho_max,
            regime,
            status: SolveStatus::NoRoot,
        });
    }
    let target = (flux / a_plus).powi(2);
    let phi1 = lower_root(model, src, rho_max, target)?;
    let phi2 = upper_root(model, src, rho_max, target)?;
    let status = if a_plus - a_min <= 1e-12 * a_min { SolveStatus::DoubleRoot } else { SolveStatus::Ok };
    let (selected, u_plus) = if a_plus == src.a {
        (src.rho, src.u)
    } else {
        let rho = if takes_supersonic_root(regime) { phi1 } else { phi2 };
        (rho, flux / (a_plus * rho))
    };
    Ok(StationarySolve { phi1, phi2, rho_max, a_min, selected, u_plus, regime, status })
}

pub fn solve_stationary(
    model: &GasModel,
    left: &PrimitiveState,
    a_plus: f64,
) -> Result<StationarySolve, StationaryError> {
    solve_source(model, &Source::from_primitive(model, left)?, a_plus)
}

/// Area along the stationary curve through `left` as a function of density:
/// `a(ρ) = a₋|u₋|ρ₋ / √Φ(ρ)`.
pub fn area_on_curve(model: &GasModel, left: &PrimitiveState, rho: f64) -> Result<f64, EosError> {
    let src = Source::from_primitive(model, left)?;
    Ok(src.mass_flux().abs() / src.phi(model, rho)?.sqrt())
}

/// Monotonicity Criterion check: `a(ρ)` sampled between `ρ₋` and `rho_plus`
/// never changes direction.
pub fn satisfies_monotonicity(
    model: &GasModel,
    left: &PrimitiveState,
    rho_plus: f64,
    samples: usize,
) -> Result<bool, EosError> {
    let (r0, r1) = (left.rho, rho_plus);
    let mut prev = area_on_curve(model, left, r0)?;
    let mut direction = 0.0f64;
    for k in 1..=samples {
        let r = r0 + (r1 - r0) * k as f64 / samples as f64;
        let a = area_on_curve(model, left, r)?;
        let d = a - prev;
        // ignore roundoff-level changes near the flat extremum
        if d.abs() > 1e-13 * a {
            if direction != 0.0 && d.signum() != direction {
                return Ok(false);
            }
            direction = d.signum();
        }
        prev = a;
    }
    Ok(true)
}

/// Result of carrying one cell's state to a neighbouring cross-section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transported {
    pub state: Conserved,
    /// Set when the target area was below `a_min` and the sonic projection was used.
    pub projected: bool,
    /// Whether `|u'| ≤ |u| + √(2 p_ρ(ρ, S))` holds for the carried state. It can
    /// fail for supersonic states carried to a much wider section.
    pub within_velocity_bound: bool,
}

/// `|u| + √(2 p_ρ(ρ, S))`.
pub fn velocity_bound(model: &GasModel, rho: f64, u: f64, s: f64) -> Result<f64, EosError> {
    Ok(u.abs() + (2.0 * model.dp_drho_s(rho, s)?).sqrt())
}

/// Carries a cell state along its stationary curve to area `a_target`,
/// keeping the cell's entropy. The result is per unit area.
pub fn transport(
    model: &GasModel,
    cell: &CellState,
    a_target: f64,
    policy: ResonancePolicy,
) -> Result<Transported, StationaryError> {
    if cell.a == a_target || cell.is_vacuum() {
        return Ok(Transported { state: cell.per_area(), projected: false, within_velocity_bound: true });
    }
    let prim = cell.to_primitive(model)?;
    if prim.u == 0.0 {
        return Ok(Transported { state: cell.per_area(), projected: false, within_velocity_bound: true });
    }
    let s = prim.entropy(model)?;
    let src = Source::new(model, prim.rho, prim.u, s, prim.a)?;
    let regime = classify_velocity(src.u, src.c);
    let rho_max = rho_max_of(model, &src)?;
    let a_min = a_min_of(model, &src, rho_max)?;
    let flux = src.mass_flux();
    let (rho, u, projected) = if a_target < a_min {
        if policy == ResonancePolicy::Fail {
            return Err(StationaryError::Resonance { a_plus: a_target, a_min });
        }
        let peak = src.phi(model, rho_max)?;
        (rho_max, src.u.signum() * peak.sqrt() / rho_max, true)
    } else {
        let target = (flux / a_target).powi(2);
        let rho = if takes_supersonic_root(regime) {
            lower_root(model, &src, rho_max, target)?
        } else {
            upper_root(model, &src, rho_max, target)?
        };
        (rho, flux / (a_target * rho), false)
    };
    let eps = model.eps_from_rho_s(rho, s)?;
    let state = Conserved { rho, mom: rho * u, ener: rho * (eps + 0.5 * u * u) };
    let within_velocity_bound = u.abs() <= velocity_bound(model, prim.rho, prim.u, s)? * (1.0 + 1e-10);
    Ok(Transported { state, projected, within_velocity_bound })
}

/// Neighbour states of cell `j` carried to `a_j`: `(U_{j−1,+}, U_{j+1,−})`
/// and the number of resonance projections used.
pub fn reconstruct_neighbors(
    model: &GasModel,
    cells: &[CellState],
    j: usize,
    policy: ResonancePolicy,
) -> Result<(Conserved, Conserved, usize), StationaryError> {
    if j == 0 || j + 1 >= cells.len() {
        return Err(StationaryError::NoNeighbours(j));
    }
    let a = cells[j].a;
    let left = transport(model, &cells[j - 1], a, policy)?;
    let right = transport(model, &cells[j + 1], a, policy)?;
    Ok((left.state, right.state, left.projected as usize + right.projected as usize))
}
