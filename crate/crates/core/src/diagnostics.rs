//! Verification oracles for the entropy pair `(𝒰, ℱ) = (aρg(S), aρug(S))`
//! and run-level monitors for positivity and the minimum entropy principle.
//!
//! The quasilinear matrix `A(w)` of the nonconservative system in
//! `w = (aρ, aρu, aρe, a)` is available twice: from the closed-form entries
//! (both the `w`-form and the simplified form) and by central differences of
//! the flux `F(w)` with the momentum source `p ∂ₓa` moved to the left. The
//! differenced matrix is the oracle.

use nalgebra::{Matrix3, Matrix4, RowVector4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::eos::{entropy_weight, EosError, GasModel};
use crate::scheme::{reconstruct_all, with_ghosts, Boundary, RunState, SchemeConfig, SchemeError};
use crate::states::{CellState, Conserved, StateError};

/// `g(S) = (S0 − S)^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyPair {
    pub s0: f64,
    pub p_exp: f64,
}

impl EntropyPair {
    pub fn new(s0: f64, p_exp: f64) -> Self {
        Self { s0, p_exp }
    }

    /// Pair with `S0 = max S + 1` over the given states.
    pub fn covering<'a>(
        model: &GasModel,
        cells: impl IntoIterator<Item = &'a CellState>,
        p_exp: f64,
    ) -> Result<Self, StateError> {
        let mut max_s = f64::NEG_INFINITY;
        for c in cells {
            if let Some(s) = c.entropy(model)? {
                max_s = max_s.max(s);
            }
        }
        Ok(Self { s0: if max_s.is_finite() { max_s + 1.0 } else { 1.0 }, p_exp })
    }

    /// `𝒰 = aρ g(S)` at a cell.
    pub fn entropy(&self, model: &GasModel, cell: &CellState) -> Result<f64, StateError> {
        match cell.entropy(model)? {
            None => Ok(0.0),
            Some(s) => Ok(cell.w1 * entropy_weight(s, self.s0, self.p_exp)?.g),
        }
    }

    /// `ℱ = aρu g(S)` at a cell.
    pub fn flux(&self, model: &GasModel, cell: &CellState) -> Result<f64, StateError> {
        Ok(cell.velocity() * self.entropy(model, cell)?)
    }

    /// Per-unit-area `(ρ g(S), ρu g(S))`.
    pub fn density_and_flux(&self, model: &GasModel, u: &Conserved) -> Result<(f64, f64), EosError> {
        if u.rho == 0.0 {
            return Ok((0.0, 0.0));
        }
        let e = u.rho * entropy_weight(u.entropy(model)?, self.s0, self.p_exp)?.g;
        Ok((e, u.velocity() * e))
    }
}

fn fd_step(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

fn to_array(c: &CellState) -> [f64; 4] {
    [c.w1, c.w2, c.w3, c.a]
}

fn from_array(w: [f64; 4]) -> CellState {
    CellState { w1: w[0], w2: w[1], w3: w[2], a: w[3] }
}

/// Thermodynamic quantities entering the matrix entries.
struct Local {
    rho: f64,
    u: f64,
    e: f64,
    p: f64,
    p_rho: f64,
    p_eps: f64,
}

fn local(model: &GasModel, c: &CellState) -> Result<Local, StateError> {
    let prim = c.to_primitive(model)?;
    let eps = c.specific_internal_energy()?;
    Ok(Local {
        rho: prim.rho,
        u: prim.u,
        e: c.w3 / c.w1,
        p: prim.p,
        p_rho: model.dp_drho_eps(eps),
        p_eps: model.dp_deps(prim.rho),
    })
}

/// Closed-form `A(w)`: `(w_form, simplified)`. `p_ρ` is taken at fixed `ε`.
pub fn matrix_a_printed(model: &GasModel, c: &CellState) -> Result<(Matrix4<f64>, Matrix4<f64>), StateError> {
    let Local { rho, u, e, p, p_rho, p_eps } = local(model, c)?;
    let (w1, w2, w3, w4) = (c.w1, c.w2, c.w3, c.a);

    let mut wf = Matrix4::zeros();
    wf[(0, 1)] = 1.0;
    wf[(1, 0)] = p_rho - p_eps * w3 * w4 / (w1 * w1) + p_eps * w2 * w2 * w4 / w1.powi(3) - w2 * w2 / (w1 * w1);
    wf[(1, 1)] = 2.0 * w2 / w1 - p_eps * w2 * w4 / (w1 * w1);
    wf[(1, 2)] = p_eps * w4 / w1;
    wf[(1, 3)] = -p_rho * w1 / w4;
    wf[(2, 0)] = w2 * w4 / w1 * (p_rho / w4 - p_eps * w3 / (w1 * w1) + p_eps * w2 * w2 / w1.powi(3) - p / w1)
        - w2 * w3 / (w1 * w1);
    wf[(2, 1)] = (w3 + p * w4) / w1 - p_eps * w2 * w2 * w4 / w1.powi(3);
    wf[(2, 2)] = p_eps * w2 * w4 / (w1 * w1) + (p + w2) / w1;
    wf[(2, 3)] = w2 / w1 * (p - p_rho * w1 / w4);

    let mut sf = Matrix4::zeros();
    sf[(0, 1)] = 1.0;
    sf[(1, 0)] = p_rho - u * u + p_eps / rho * (u * u - e);
    sf[(1, 1)] = 2.0 * u - p_eps * u / rho;
    sf[(1, 2)] = p_eps / rho;
    sf[(1, 3)] = -p_rho * rho;
    sf[(2, 0)] = u * (p_rho - e + (p_eps * (u * u - e) - p) / rho);
    sf[(2, 1)] = e + p / rho - p_eps * u * u / rho;
    sf[(2, 2)] = p_eps * u / rho + u;
    sf[(2, 3)] = u * (p - p_rho * rho);
    Ok((wf, sf))
}

/// Entries where the two closed forms disagree beyond `rel_tol`.
pub fn printed_form_mismatches(
    model: &GasModel,
    c: &CellState,
    rel_tol: f64,
) -> Result<Vec<EntryMismatch>, StateError> {
    let (wf, sf) = matrix_a_printed(model, c)?;
    let mut out = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            let (x, y) = (wf[(i, j)], sf[(i, j)]);
            if (x - y).abs() > rel_tol * x.abs().max(y.abs()).max(1.0) {
                out.push(EntryMismatch { row: i + 1, col: j + 1, w_form: x, simplified: y });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryMismatch {
    pub row: usize,
    pub col: usize,
    pub w_form: f64,
    pub simplified: f64,
}

/// Conservative part `F(w)` of the system: `(w2, w2²/w1 + w4 p, (w2/w1)(w3 + w4 p), 0)`.
fn system_flux(model: &GasModel, w: [f64; 4]) -> Result<[f64; 4], StateError> {
    let c = from_array(w);
    let p = c.to_primitive(model)?.p;
    let u = w[1] / w[0];
    Ok([w[1], w[1] * u + w[3] * p, u * (w[2] + w[3] * p), 0.0])
}

/// `A(w) = DF(w) − p e₂e₄ᵀ` by central differences.
pub fn matrix_a_derived(model: &GasModel, c: &CellState) -> Result<Matrix4<f64>, StateError> {
    let w = to_array(c);
    let mut a = Matrix4::zeros();
    for k in 0..4 {
        let h = fd_step(w[k]);
        let (mut wp, mut wm) = (w, w);
        wp[k] += h;
        wm[k] -= h;
        let (fp, fm) = (system_flux(model, wp)?, system_flux(model, wm)?);
        for i in 0..4 {
            a[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    a[(1, 3)] -= c.to_primitive(model)?.p;
    Ok(a)
}

/// Closed-form `D_w 𝒰`:
/// `(g + g'/T (u² − e − p/ρ), −g'u/T, g'/T, g'p/T)`.
pub fn entropy_gradient(model: &GasModel, c: &CellState, pair: &EntropyPair) -> Result<RowVector4<f64>, StateError> {
    let prim = c.to_primitive(model)?;
    let eps = c.specific_internal_energy()?;
    let s = model.entropy(prim.rho, eps)?;
    let t = model.temperature(prim.rho, eps)?;
    let w = entropy_weight(s, pair.s0, pair.p_exp)?;
    let (u, p, rho) = (prim.u, prim.p, prim.rho);
    let e = c.w3 / c.w1;
    Ok(RowVector4::new(
        w.g + w.dg / t * (u * u - e - p / rho),
        -w.dg * u / t,
        w.dg / t,
        w.dg * p / t,
    ))
}

/// `D_w 𝒰` by central differences of `𝒰(w)`.
pub fn entropy_gradient_fd(model: &GasModel, c: &CellState, pair: &EntropyPair) -> Result<RowVector4<f64>, StateError> {
    let w = to_array(c);
    let mut g = RowVector4::zeros();
    for k in 0..4 {
        let h = fd_step(w[k]);
        let (mut wp, mut wm) = (w, w);
        wp[k] += h;
        wm[k] -= h;
        g[k] = (pair.entropy(model, &from_array(wp))? - pair.entropy(model, &from_array(wm))?) / (2.0 * h);
    }
    Ok(g)
}

/// `D_w ℱ = u D_w𝒰 + 𝒰 D_w(w2/w1)`.
pub fn flux_gradient(model: &GasModel, c: &CellState, pair: &EntropyPair) -> Result<RowVector4<f64>, StateError> {
    let du = entropy_gradient(model, c, pair)?;
    let big_u = pair.entropy(model, c)?;
    let u = c.w2 / c.w1;
    let mut df = du * u;
    df[0] -= c.w2 / (c.w1 * c.w1) * big_u;
    df[1] += big_u / c.w1;
    Ok(df)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixMethod {
    PrintedMatrix,
    DerivedMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub state: CellState,
    pub residual_b: [f64; 4],
    pub method: MatrixMethod,
    pub max_abs: f64,
    /// `max|B|` divided by `max_j Σ_i |D𝒰_i A_ij| + |Dℱ_j|`.
    pub relative: f64,
}

fn compatibility(
    c: &CellState,
    du: &RowVector4<f64>,
    df: &RowVector4<f64>,
    a: &Matrix4<f64>,
    method: MatrixMethod,
) -> CompatibilityReport {
    let b = du * a - df;
    let mut scale = 0.0f64;
    for j in 0..4 {
        let s: f64 = (0..4).map(|i| (du[i] * a[(i, j)]).abs()).sum::<f64>() + df[j].abs();
        scale = scale.max(s);
    }
    let max_abs = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    CompatibilityReport {
        state: *c,
        residual_b: [b[0], b[1], b[2], b[3]],
        method,
        max_abs,
        relative: if scale > 0.0 { max_abs / scale } else { max_abs },
    }
}

/// `B = D𝒰 A − Dℱ` with the derived matrix and with the simplified closed form.
pub fn check_compatibility(
    model: &GasModel,
    c: &CellState,
    pair: &EntropyPair,
) -> Result<(CompatibilityReport, CompatibilityReport), StateError> {
    let du = entropy_gradient(model, c, pair)?;
    let df = flux_gradient(model, c, pair)?;
    let derived = matrix_a_derived(model, c)?;
    let (_, printed) = matrix_a_printed(model, c)?;
    Ok((
        compatibility(c, &du, &df, &derived, MatrixMethod::DerivedMatrix),
        compatibility(c, &du, &df, &printed, MatrixMethod::PrintedMatrix),
    ))
}

/// Hessian of `𝒰` in `(w1, w2, w3)` by central differences of the gradient,
/// symmetrised.
pub fn entropy_hessian_fd(model: &GasModel, c: &CellState, pair: &EntropyPair) -> Result<Matrix3<f64>, StateError> {
    let w = to_array(c);
    let mut h = Matrix3::zeros();
    for k in 0..3 {
        let step = fd_step(w[k]);
        let (mut wp, mut wm) = (w, w);
        wp[k] += step;
        wm[k] -= step;
        let gp = entropy_gradient(model, &from_array(wp), pair)?;
        let gm = entropy_gradient(model, &from_array(wm), pair)?;
        for i in 0..3 {
            h[(i, k)] = (gp[i] - gm[i]) / (2.0 * step);
        }
    }
    Ok((h + h.transpose()) * 0.5)
}

/// Smallest eigenvalue of the finite-difference Hessian and the Hessian's spectral radius.
pub fn entropy_hessian_spectrum(model: &GasModel, c: &CellState, pair: &EntropyPair) -> Result<(f64, f64), StateError> {
    let h = entropy_hessian_fd(model, c, pair)?;
    let eig = SymmetricEigen::new(h).eigenvalues;
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let radius = eig.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok((min, radius))
}

/// Per-cell numerical entropy inequality residual of one well-balanced step,
/// `𝒰(U_j^{n+1}) − ½(𝒰(U_{j−1,+}) + 𝒰(U_{j+1,−})) − λ/2 (ℱ(U_{j−1,+}) − ℱ(U_{j+1,−}))`,
/// per unit area and divided by `max(1, ½(|𝒰₋|+|𝒰₊|) + λ/2(|ℱ₋|+|ℱ₊|))`.
pub fn entropy_residual(
    model: &GasModel,
    before: &RunState,
    after: &RunState,
    cfg: &SchemeConfig,
    pair: &EntropyPair,
    lambda: f64,
) -> Result<Vec<f64>, SchemeError> {
    let recon = reconstruct_all(model, &before.cells, cfg)?;
    recon
        .iter()
        .zip(&after.cells)
        .map(|((l, r, _), new)| {
            let (ul, fl) = pair.density_and_flux(model, l)?;
            let (ur, fr) = pair.density_and_flux(model, r)?;
            let (un, _) = pair.density_and_flux(model, &new.per_area())?;
            let rhs = 0.5 * (ul + ur) + 0.5 * lambda * (fl - fr);
            let scale = (0.5 * (ul.abs() + ur.abs()) + 0.5 * lambda * (fl.abs() + fr.abs())).max(1.0);
            Ok((un - rhs) / scale)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Positivity,
    MinEntropy,
    GlobalMinEntropy,
    EntropyResidual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub step: usize,
    pub cell: Option<usize>,
    pub kind: ViolationKind,
    pub value: f64,
    pub bound: f64,
}

pub const POSITIVITY_SLACK: f64 = 1e-14;
pub const ENTROPY_TOL: f64 = 1e-10;

fn entropies(model: &GasModel, cells: &[CellState]) -> Result<Vec<Option<f64>>, StateError> {
    cells.iter().map(|c| c.entropy(model)).collect()
}

/// Cells with `ρ < −slack` after a step.
pub fn positivity_violations(after: &RunState, slack: f64) -> Vec<Violation> {
    after
        .cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.w1 / c.a < -slack)
        .map(|(j, c)| Violation {
            step: after.step,
            cell: Some(j),
            kind: ViolationKind::Positivity,
            value: c.w1 / c.a,
            bound: -slack,
        })
        .collect()
}

/// Cells where `S_j^{n+1} < min(S_{j−1}^n, S_{j+1}^n) − tol`, plus a
/// violation if the mesh-wide minimum of `S` decreased.
pub fn min_entropy_violations(
    model: &GasModel,
    before: &RunState,
    after: &RunState,
    boundary: Boundary,
    tol: f64,
) -> Result<Vec<Violation>, StateError> {
    let ext = entropies(model, &with_ghosts(&before.cells, boundary))?;
    let new = entropies(model, &after.cells)?;
    let mut out = Vec::new();
    for (j, s_new) in new.iter().enumerate() {
        let Some(s_new) = *s_new else { continue };
        let bound = match (ext[j], ext[j + 2]) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => continue,
        };
        if s_new < bound - tol {
            out.push(Violation {
                step: after.step,
                cell: Some(j),
                kind: ViolationKind::MinEntropy,
                value: s_new,
                bound,
            });
        }
    }
    let min_of = |v: &[Option<f64>]| v.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let (old_min, new_min) = (min_of(&ext[1..ext.len() - 1]), min_of(&new));
    if new_min < old_min - tol {
        out.push(Violation {
            step: after.step,
            cell: None,
            kind: ViolationKind::GlobalMinEntropy,
            value: new_min,
            bound: old_min,
        });
    }
    Ok(out)
}

/// Minimum entropy principle over a stored history of consecutive states.
pub fn min_entropy_monitor(
    model: &GasModel,
    history: &[RunState],
    boundary: Boundary,
) -> Result<Vec<Violation>, StateError> {
    let mut out = Vec::new();
    for pair in history.windows(2) {
        out.extend(min_entropy_violations(model, &pair[0], &pair[1], boundary, ENTROPY_TOL)?);
    }
    Ok(out)
}

/// `Σ_j a_j ρ_j g(S_j) Δx`.
pub fn total_entropy(model: &GasModel, state: &RunState, pair: &EntropyPair, dx: f64) -> Result<f64, StateError> {
    let mut sum = 0.0;
    for c in &state.cells {
        sum += pair.entropy(model, c)?;
    }
    Ok(sum * dx)
}

/// Everything a monitor may look at after one step.
pub struct StepContext<'a> {
    pub model: &'a GasModel,
    pub cfg: &'a SchemeConfig,
    pub before: &'a RunState,
    pub after: &'a RunState,
    pub lambda: f64,
}

pub trait Monitor: Send {
    fn name(&self) -> &'static str;
    fn observe(&mut self, ctx: &StepContext<'_>) -> Result<Vec<Violation>, SchemeError>;

    /// Largest entropy-inequality residual from the last step, for monitors that compute one.
    fn residual(&self) -> Option<f64> {
        None
    }
}

pub struct PositivityMonitor;

impl Monitor for PositivityMonitor {
    fn name(&self) -> &'static str {
        "positivity"
    }

    fn observe(&mut self, ctx: &StepContext<'_>) -> Result<Vec<Violation>, SchemeError> {
        Ok(positivity_violations(ctx.after, POSITIVITY_SLACK))
    }
}

pub struct MinEntropyMonitor;

impl Monitor for MinEntropyMonitor {
    fn name(&self) -> &'static str {
        "min-entropy"
    }

    fn observe(&mut self, ctx: &StepContext<'_>) -> Result<Vec<Violation>, SchemeError> {
        Ok(min_entropy_violations(ctx.model, ctx.before, ctx.after, ctx.cfg.boundary, ENTROPY_TOL)?)
    }
}

/// Numerical entropy inequality for `g = (S0 − S)^p`, with `S0` taken as
/// one above the largest entropy of the two states. Only meaningful for the
/// well-balanced scheme.
pub struct EntropyResidualMonitor {
    pub p_exp: f64,
    pub tol: f64,
    /// Largest residual seen by the most recent step.
    pub last_max: f64,
}

impl EntropyResidualMonitor {
    pub fn new(p_exp: f64) -> Self {
        Self { p_exp, tol: ENTROPY_TOL, last_max: f64::NEG_INFINITY }
    }
}

impl Monitor for EntropyResidualMonitor {
    fn name(&self) -> &'static str {
        "entropy-residual"
    }

    fn observe(&mut self, ctx: &StepContext<'_>) -> Result<Vec<Violation>, SchemeError> {
        let pair = EntropyPair::covering(ctx.model, ctx.before.cells.iter().chain(&ctx.after.cells), self.p_exp)?;
        let res = entropy_residual(ctx.model, ctx.before, ctx.after, ctx.cfg, &pair, ctx.lambda)?;
        self.last_max = res.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(res
            .iter()
            .enumerate()
            .filter(|(_, r)| **r > self.tol)
            .map(|(j, r)| Violation {
                step: ctx.after.step,
                cell: Some(j),
                kind: ViolationKind::EntropyResidual,
                value: *r,
                bound: self.tol,
            })
            .collect())
    }

    fn residual(&self) -> Option<f64> {
        self.last_max.is_finite().then_some(self.last_max)
    }
}
