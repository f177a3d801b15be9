//! Conserved and primitive cell states and wave-region classification.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eos::{EosError, GasModel};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum StateError {
    #[error("vacuum cell: a*rho = {0}")]
    Vacuum(f64),
    #[error("non-positive cross-section {0}")]
    NonPositiveArea(f64),
    #[error(transparent)]
    Eos(#[from] EosError),
}

/// Area-weighted conserved variables `(aρ, aρu, aρe)` and the cross-section `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellState {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveState {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
    pub a: f64,
}

/// Per-unit-area conserved triple `(ρ, ρu, ρe)`; the variable the scheme updates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Conserved {
    pub rho: f64,
    pub mom: f64,
    pub ener: f64,
}

/// Position of `(λ1, λ2, λ3) = (u − c, u, u + c)` relative to the stationary speed `λ0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionTag {
    /// `u < −c`
    G1,
    /// `−c < u < 0`
    G2,
    /// `0 < u < c`
    G3,
    /// `u > c`
    G4,
    /// `u = c`
    SigmaPlus,
    /// `u = 0`
    Sigma0,
    /// `u = −c`
    SigmaMinus,
}

impl RegionTag {
    pub fn is_supersonic(self) -> bool {
        matches!(self, RegionTag::G1 | RegionTag::G4)
    }

    pub fn is_sonic(self) -> bool {
        matches!(self, RegionTag::SigmaPlus | RegionTag::SigmaMinus)
    }
}

impl PrimitiveState {
    pub fn entropy(&self, model: &GasModel) -> Result<f64, EosError> {
        model.entropy_from_rho_p(self.rho, self.p)
    }

    pub fn sound_speed(&self, model: &GasModel) -> Result<f64, EosError> {
        model.sound_speed(self.rho, self.entropy(model)?)
    }

    pub fn to_conserved(&self, model: &GasModel) -> Result<CellState, StateError> {
        if !(self.a > 0.0) {
            return Err(StateError::NonPositiveArea(self.a));
        }
        let eps = model.eps_from_rho_p(self.rho, self.p)?;
        let w1 = self.a * self.rho;
        Ok(CellState {
            w1,
            w2: w1 * self.u,
            w3: w1 * (eps + 0.5 * self.u * self.u),
            a: self.a,
        })
    }
}

impl CellState {
    pub fn is_vacuum(&self) -> bool {
        self.w1 == 0.0
    }

    pub fn velocity(&self) -> f64 {
        if self.w1 > 0.0 {
            self.w2 / self.w1
        } else {
            0.0
        }
    }

    pub fn specific_internal_energy(&self) -> Result<f64, StateError> {
        if !(self.w1 > 0.0) {
            return Err(StateError::Vacuum(self.w1));
        }
        let u = self.w2 / self.w1;
        Ok(self.w3 / self.w1 - 0.5 * u * u)
    }

    pub fn to_primitive(&self, model: &GasModel) -> Result<PrimitiveState, StateError> {
        if !(self.a > 0.0) {
            return Err(StateError::NonPositiveArea(self.a));
        }
        if !(self.w1 > 0.0) {
            return Err(StateError::Vacuum(self.w1));
        }
        let rho = self.w1 / self.a;
        let u = self.w2 / self.w1;
        let eps = self.w3 / self.w1 - 0.5 * u * u;
        let p = model.pressure(rho, eps)?;
        Ok(PrimitiveState { rho, u, p, a: self.a })
    }

    /// Specific entropy, or `None` for a vacuum cell.
    pub fn entropy(&self, model: &GasModel) -> Result<Option<f64>, StateError> {
        if self.is_vacuum() {
            return Ok(None);
        }
        let eps = self.specific_internal_energy()?;
        Ok(Some(model.entropy(self.w1 / self.a, eps)?))
    }

    pub fn per_area(&self) -> Conserved {
        Conserved { rho: self.w1 / self.a, mom: self.w2 / self.a, ener: self.w3 / self.a }
    }
}

impl Conserved {
    pub fn with_area(&self, a: f64) -> CellState {
        CellState { w1: a * self.rho, w2: a * self.mom, w3: a * self.ener, a }
    }

    pub fn velocity(&self) -> f64 {
        if self.rho > 0.0 {
            self.mom / self.rho
        } else {
            0.0
        }
    }

    pub fn specific_internal_energy(&self) -> f64 {
        let u = self.velocity();
        self.ener / self.rho - 0.5 * u * u
    }

    pub fn pressure(&self, model: &GasModel) -> Result<f64, EosError> {
        model.pressure(self.rho, self.specific_internal_energy())
    }

    pub fn entropy(&self, model: &GasModel) -> Result<f64, EosError> {
        model.entropy(self.rho, self.specific_internal_energy())
    }

    /// Euler flux `(ρu, ρu² + p, u(ρe + p))`; zero in vacuum.
    pub fn flux(&self, model: &GasModel) -> Result<Conserved, EosError> {
        if self.rho == 0.0 {
            return Ok(Conserved::default());
        }
        let u = self.mom / self.rho;
        let p = self.pressure(model)?;
        Ok(Conserved { rho: self.mom, mom: self.mom * u + p, ener: u * (self.ener + p) })
    }

    pub fn scaled(&self, k: f64) -> Conserved {
        Conserved { rho: k * self.rho, mom: k * self.mom, ener: k * self.ener }
    }

    pub fn add(&self, o: &Conserved) -> Conserved {
        Conserved { rho: self.rho + o.rho, mom: self.mom + o.mom, ener: self.ener + o.ener }
    }

    pub fn sub(&self, o: &Conserved) -> Conserved {
        Conserved { rho: self.rho - o.rho, mom: self.mom - o.mom, ener: self.ener - o.ener }
    }

    pub fn max_abs(&self) -> f64 {
        self.rho.abs().max(self.mom.abs()).max(self.ener.abs())
    }
}

/// Tolerance used to snap onto the boundary surfaces `u ∈ {−c, 0, c}`.
pub fn region_tolerance(u: f64, c: f64) -> f64 {
    1e-10 * 1f64.max(u.abs()).max(c)
}

pub fn classify_region(model: &GasModel, s: &PrimitiveState) -> Result<RegionTag, EosError> {
    let c = s.sound_speed(model)?;
    Ok(classify_velocity(s.u, c))
}

/// Region tag from velocity and sound speed alone.
pub fn classify_velocity(u: f64, c: f64) -> RegionTag {
    let tol = region_tolerance(u, c);
    if u.abs() <= tol {
        RegionTag::Sigma0
    } else if (u - c).abs() <= tol {
        RegionTag::SigmaPlus
    } else if (u + c).abs() <= tol {
        RegionTag::SigmaMinus
    } else if u > c {
        RegionTag::G4
    } else if u > 0.0 {
        RegionTag::G3
    } else if u > -c {
        RegionTag::G2
    } else {
        RegionTag::G1
    }
}
