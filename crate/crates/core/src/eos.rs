//! Stiffened-gas thermodynamics.
//!
//! The pressure law is `p = (γ − 1) ρ (ε − ε∞) − γ p∞`. The specific entropy
//! closure is `S = ln((p + p∞) / ρ^γ)` (unit heat capacity, zero reference),
//! which gives, along an isentrope,
//!
//! ```text
//! p(ρ, S) = e^S ρ^γ − p∞
//! ε(ρ, S) = ε∞ + e^S ρ^(γ−1) / (γ − 1) + p∞ / ρ
//! h(ρ, S) = ε∞ + γ / (γ − 1) · e^S ρ^(γ−1)
//! T       = ε − ε∞ − p∞ / ρ
//! ```
//!
//! All partial derivatives are closed form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EosError {
    #[error("non-positive density {0}")]
    NonPositiveDensity(f64),
    #[error("inadmissible state: p + p_inf = {0} must be positive")]
    Inadmissible(f64),
    #[error("loss of hyperbolicity: dp/drho at fixed entropy is {0}")]
    HyperbolicityLoss(f64),
    #[error("entropy weight undefined: S0 - S = {0} must be positive")]
    EntropyWeightDomain(f64),
    #[error("entropy weight exponent {0} must exceed 1")]
    EntropyWeightExponent(f64),
    #[error("invalid gas model: {0}")]
    InvalidModel(&'static str),
}

/// Stiffened-gas parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    pub gamma: f64,
    pub p_inf: f64,
    pub eps_inf: f64,
}

/// Every thermodynamic quantity at one `(ρ, ε)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPoint {
    pub rho: f64,
    pub eps: f64,
    pub s: f64,
    pub p: f64,
    pub t: f64,
    pub h: f64,
    pub c: f64,
}

/// Value and first two derivatives of `g(S) = (S0 − S)^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyWeight {
    pub g: f64,
    pub dg: f64,
    pub d2g: f64,
}

impl GasModel {
    pub fn new(gamma: f64, p_inf: f64, eps_inf: f64) -> Result<Self, EosError> {
        if !(gamma > 1.0 && gamma < 5.0 / 3.0) {
            return Err(EosError::InvalidModel("gamma must lie in (1, 5/3)"));
        }
        if !(p_inf >= 0.0) || !p_inf.is_finite() {
            return Err(EosError::InvalidModel("p_inf must be finite and non-negative"));
        }
        if !eps_inf.is_finite() {
            return Err(EosError::InvalidModel("eps_inf must be finite"));
        }
        Ok(Self { gamma, p_inf, eps_inf })
    }

    /// Polytropic ideal gas (`p∞ = ε∞ = 0`).
    pub fn ideal(gamma: f64) -> Result<Self, EosError> {
        Self::new(gamma, 0.0, 0.0)
    }

    fn check_rho(rho: f64) -> Result<(), EosError> {
        if rho > 0.0 {
            Ok(())
        } else {
            Err(EosError::NonPositiveDensity(rho))
        }
    }

    pub fn pressure(&self, rho: f64, eps: f64) -> Result<f64, EosError> {
        Self::check_rho(rho)?;
        Ok((self.gamma - 1.0) * rho * (eps - self.eps_inf) - self.gamma * self.p_inf)
    }

    /// Inverse of [`GasModel::pressure`] in `ε`.
    pub fn eps_from_rho_p(&self, rho: f64, p: f64) -> Result<f64, EosError> {
        Self::check_rho(rho)?;
        Ok(self.eps_inf + (p + self.gamma * self.p_inf) / ((self.gamma - 1.0) * rho))
    }

    pub fn entropy(&self, rho: f64, eps: f64) -> Result<f64, EosError> {
        let p = self.pressure(rho, eps)?;
        self.entropy_from_rho_p(rho, p)
    }

    pub fn entropy_from_rho_p(&self, rho: f64, p: f64) -> Result<f64, EosError> {
        Self::check_rho(rho)?;
        let stiff = p + self.p_inf;
        if !(stiff > 0.0) {
            return Err(EosError::Inadmissible(stiff));
        }
        Ok(stiff.ln() - self.gamma * rho.ln())
    }

    /// `e^S ρ^γ`, i.e. `p + p∞` on the isentrope through `S`.
    fn stiff_pressure(&self, rho: f64, s: f64) -> f64 {
        (s + self.gamma * rho.ln()).exp()
    }

    pub fn pressure_rho_s(&self, rho: f64, s: f64) -> Result<f64, EosError> {
        Self::check_rho(rho)?;
        Ok(self.stiff_pressure(rho, s) - self.p_inf)
    }

    pub fn eps_from_rho_s(&self, rho: f64, s: f64) -> Result<f64, EosError> {
        Self::check_rho(rho)?;
        Ok(self.eps_inf
            + self.stiff_pressure(rho, s) / ((self.gamma - 1.0) * rho)
            + self.p_inf / rho)
    }

    /// Temperature `∂ε/∂S` at fixed specific volume.
    pub fn temperature(&self, rho: f64, eps: f64) -> Result<f64, EosError> {
        Self::check_rho(rho)?;
        Ok(eps - self.eps_inf - self.p_inf / rho)
    }

    pub fn enthalpy(&self, rho: f64, s: f64) -> Result<f64, EosError> {
        Self::check_rho(rho)?;
        let g = self.gamma;
        Ok(self.eps_inf + g / (g - 1.0) * self.stiff_pressure(rho, s) / rho)
    }

    /// `∂p/∂ρ` at fixed `S`.
    pub fn dp_drho_s(&self, rho: f64, s: f64) -> Result<f64, EosError> {
        Self::check_rho(rho)?;
        Ok(self.gamma * self.stiff_pressure(rho, s) / rho)
    }

    /// `∂p/∂S` at fixed `ρ`.
    pub fn dp_ds(&self, rho: f64, s: f64) -> Result<f64, EosError> {
        Self::check_rho(rho)?;
        Ok(self.stiff_pressure(rho, s))
    }

    /// `∂p/∂ρ` at fixed `ε`.
    pub fn dp_drho_eps(&self, eps: f64) -> f64 {
        (self.gamma - 1.0) * (eps - self.eps_inf)
    }

    /// `∂p/∂ε` at fixed `ρ`.
    pub fn dp_deps(&self, rho: f64) -> f64 {
        (self.gamma - 1.0) * rho
    }

    /// `∂h/∂ρ` at fixed `S`; equals `p_ρ / ρ`.
    pub fn dh_drho(&self, rho: f64, s: f64) -> Result<f64, EosError> {
        Ok(self.dp_drho_s(rho, s)? / rho)
    }

    /// `∂²h/∂ρ²` at fixed `S`; equals `(γ − 2) p_ρ / ρ²`.
    pub fn d2h_drho2(&self, rho: f64, s: f64) -> Result<f64, EosError> {
        Ok((self.gamma - 2.0) * self.dp_drho_s(rho, s)? / (rho * rho))
    }

    pub fn sound_speed(&self, rho: f64, s: f64) -> Result<f64, EosError> {
        let p_rho = self.dp_drho_s(rho, s)?;
        if !(p_rho > 0.0) {
            return Err(EosError::HyperbolicityLoss(p_rho));
        }
        Ok(p_rho.sqrt())
    }

    pub fn thermo(&self, rho: f64, eps: f64) -> Result<ThermoPoint, EosError> {
        let p = self.pressure(rho, eps)?;
        let s = self.entropy_from_rho_p(rho, p)?;
        Ok(ThermoPoint {
            rho,
            eps,
            s,
            p,
            t: self.temperature(rho, eps)?,
            h: eps + p / rho,
            c: self.sound_speed(rho, s)?,
        })
    }
}

impl Default for GasModel {
    fn default() -> Self {
        Self { gamma: 1.4, p_inf: 0.0, eps_inf: 0.0 }
    }
}

/// `g(S) = (S0 − S)^p` with its first and second derivatives.
pub fn entropy_weight(s: f64, s0: f64, p_exp: f64) -> Result<EntropyWeight, EosError> {
    if !(p_exp > 1.0) {
        return Err(EosError::EntropyWeightExponent(p_exp));
    }
    let d = s0 - s;
    if !(d > 0.0) {
        return Err(EosError::EntropyWeightDomain(d));
    }
    Ok(EntropyWeight {
        g: d.powf(p_exp),
        dg: -p_exp * d.powf(p_exp - 1.0),
        d2g: p_exp * (p_exp - 1.0) * d.powf(p_exp - 2.0),
    })
}
