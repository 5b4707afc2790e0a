//! Principal eigenvalue `λ₁` of the pulsed periodic linear problem.
//!
//! The linearized period map `P` evolves the linear system (growth replaced
//! by `f′(0)·u`) from `0⁺` to `τ` and then multiplies `u` by `g′(0)`. An
//! eigenpair with eigenvalue `λ` is an eigenvector of `P` with multiplier
//! `e^{−λτ}`, so `λ₁ = −ln r/τ` where `r` is the spectral radius of `P`.
//! The dominant eigenpair is simple with a positive eigenvector, which is
//! what makes power iteration from a positive start vector converge.
//!
//! The adjoint problem is discretized on its own: a forward march in
//! `s = τ − t` with the coupling coefficients swapped, followed by the
//! backward pulse. Its principal eigenvalue must agree with `λ₁`.

use crate::error::{Error, Result};
use crate::model::{mean_inv_rho_sq, ModelParams};
use crate::pde::{steps_per_period, Grid1D, Kinetics, Marcher, Scratch, StepOperator};
use crate::tridiag::Tridiagonal;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 2000;
/// Half-width of the indeterminate band in [`classify_threshold`].
pub const DEFAULT_MARGIN: f64 = 1e-3;

/// Discretization and stopping rule for the period map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodMapConfig {
    pub grid: Grid1D,
    pub dt: f64,
    pub theta: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl PeriodMapConfig {
    pub fn new(grid: Grid1D, tau: f64, steps_per_period: usize) -> Self {
        Self {
            grid,
            dt: tau / steps_per_period as f64,
            theta: 0.5,
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
        }
    }

    pub fn validate(&self, tau: f64) -> Result<usize> {
        if !(self.tol > 0.0) {
            return Err(Error::domain("tol must be positive"));
        }
        if self.max_iters < 10 {
            return Err(Error::domain("max_iters must be at least 10"));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::domain("theta must lie in [0, 1]"));
        }
        steps_per_period(tau, self.dt)
    }
}

/// A pair of fields `(u, v)` on the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FieldPair {
    pub fn zeros(n: usize) -> Self {
        Self {
            u: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.u.iter().chain(&self.v).fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scale(&mut self, factor: f64) {
        self.u.iter_mut().chain(self.v.iter_mut()).for_each(|x| *x *= factor);
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale(factor);
        out
    }

    pub fn sup_diff(&self, other: &Self) -> f64 {
        crate::pde::sup_diff(&self.u, &other.u).max(crate::pde::sup_diff(&self.v, &other.v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EigenMethod {
    PeriodMap,
    Adjoint,
    ExactFixed,
    UpperBound,
    LowerBound,
}

impl EigenMethod {
    pub fn name(&self) -> &'static str {
        match self {
            EigenMethod::PeriodMap => "period_map",
            EigenMethod::Adjoint => "adjoint",
            EigenMethod::ExactFixed => "exact_fixed",
            EigenMethod::UpperBound => "upper_bound",
            EigenMethod::LowerBound => "lower_bound",
        }
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self, EigenMethod::PeriodMap | EigenMethod::Adjoint)
    }
}

/// A principal eigenvalue estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub lambda1: f64,
    /// Spectral radius of the period map; `e^{−λ₁τ}` for closed forms.
    pub multiplier: f64,
    pub method: EigenMethod,
    pub iterations: usize,
    pub residual: f64,
    /// Node coordinates for `phi`/`psi`; empty for closed forms.
    pub nodes: Vec<f64>,
    /// Eigenfunction at `t = 0⁺`, normalized to unit sup-norm.
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl EigenResult {
    pub fn closed_form(method: EigenMethod, lambda1: f64, tau: f64) -> Self {
        Self {
            lambda1,
            multiplier: (-lambda1 * tau).exp(),
            method,
            iterations: 0,
            residual: 0.0,
            nodes: Vec::new(),
            phi: Vec::new(),
            psi: Vec::new(),
        }
    }

    pub fn eigenfunction(&self) -> FieldPair {
        FieldPair {
            u: self.phi.clone(),
            v: self.psi.clone(),
        }
    }
}

fn slopes(p: &ModelParams) -> Result<(f64, f64)> {
    let f0 = p.growth.prime_at_zero()?;
    let g0 = p.impulse.prime_at_zero()?;
    if !(f0 > 0.0) || !f0.is_finite() {
        return Err(Error::precondition(format!("f'(0) = {f0} must be positive")));
    }
    if !(g0 > 0.0 && g0 <= 1.0) {
        return Err(Error::precondition(format!("g'(0) = {g0} must lie in (0, 1]")));
    }
    Ok((f0, g0))
}

/// Evolves the linear system over one period from `0⁺`, optionally
/// recording every time level, and applies the linear pulse.
pub(crate) fn march_linearized(
    p: &ModelParams,
    cfg: &PeriodMapConfig,
    w: &FieldPair,
    mut levels: Option<&mut Vec<FieldPair>>,
) -> Result<FieldPair> {
    let steps = cfg.validate(p.tau)?;
    let (f0, g0) = (p.growth.prime_at_zero()?, p.impulse.prime_at_zero()?);
    let mut marcher = Marcher::new(
        p,
        cfg.grid,
        cfg.dt,
        cfg.theta,
        Kinetics::Linearized { growth_slope: f0 },
    );
    let (mut u, mut v) = (w.u.clone(), w.v.clone());
    if let Some(rec) = levels.as_deref_mut() {
        rec.push(FieldPair {
            u: u.clone(),
            v: v.clone(),
        });
    }
    for k in 0..steps {
        marcher.step(k as f64 * cfg.dt, &mut u, &mut v)?;
        if let Some(rec) = levels.as_deref_mut() {
            rec.push(FieldPair {
                u: u.clone(),
                v: v.clone(),
            });
        }
    }
    u.iter_mut().for_each(|x| *x *= g0);
    Ok(FieldPair { u, v })
}

/// The linearized period map `P`: `w` at `0⁺` to the value at the next `0⁺`.
pub fn linearized_period_map(p: &ModelParams, cfg: &PeriodMapConfig, w: &FieldPair) -> Result<FieldPair> {
    if w.u.len() != cfg.grid.interior() || w.v.len() != cfg.grid.interior() {
        return Err(Error::domain("field length does not match the grid"));
    }
    if w.u.iter().chain(&w.v).any(|x| !x.is_finite()) {
        return Err(Error::domain("period map input must be finite"));
    }
    march_linearized(p, cfg, w, None)
}

struct PowerOutcome {
    multiplier: f64,
    vector: FieldPair,
    iterations: usize,
    residual: f64,
}

fn power_iterate(
    cfg: &PeriodMapConfig,
    method: &'static str,
    mut map: impl FnMut(&FieldPair) -> Result<FieldPair>,
) -> Result<PowerOutcome> {
    let s = cfg.grid.sine_profile(1.0);
    let mut w = FieldPair { u: s.clone(), v: s };
    w.scale(1.0 / w.sup_norm());
    let mut prev = f64::NAN;
    let mut last_change = f64::INFINITY;
    for it in 1..=cfg.max_iters {
        let mut y = map(&w)?;
        let r = y.sup_norm();
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::NotConverged {
                method,
                iterations: it,
                residual: r,
            });
        }
        y.scale(1.0 / r);
        let residual = y.sup_diff(&w);
        last_change = (r - prev).abs();
        w = y;
        if last_change < cfg.tol {
            return Ok(PowerOutcome {
                multiplier: r,
                vector: w,
                iterations: it,
                residual,
            });
        }
        prev = r;
    }
    Err(Error::NotConverged {
        method,
        iterations: cfg.max_iters,
        residual: last_change,
    })
}

fn spectral_result(p: &ModelParams, cfg: &PeriodMapConfig, method: EigenMethod, out: PowerOutcome) -> EigenResult {
    EigenResult {
        lambda1: -out.multiplier.ln() / p.tau,
        multiplier: out.multiplier,
        method,
        iterations: out.iterations,
        residual: out.residual,
        nodes: cfg.grid.nodes(),
        phi: out.vector.u,
        psi: out.vector.v,
    }
}

/// `λ₁` by power iteration on the linearized period map, started from
/// `(sin(πx/L), sin(πx/L))`.
pub fn power_iteration_lambda1(p: &ModelParams, cfg: &PeriodMapConfig) -> Result<EigenResult> {
    p.validate()?;
    slopes(p)?;
    cfg.validate(p.tau)?;
    let out = power_iterate(cfg, "period-map power iteration", |w| march_linearized(p, cfg, w, None))?;
    Ok(spectral_result(p, cfg, EigenMethod::PeriodMap, out))
}

/// Step operator of the adjoint system at `s_mid`, i.e. at `t = τ − s_mid`.
fn adjoint_operator(p: &ModelParams, grid: &Grid1D, s_mid: f64, dt: f64, theta: f64) -> StepOperator {
    let t = p.tau - s_mid;
    let rho = p.rho.value(t);
    let inv_h2 = 1.0 / (grid.dx() * grid.dx());
    let n = grid.interior();
    let coeff = [p.d1 / (rho * rho), p.d2 / (rho * rho)];
    let side = |k: f64, w: f64| {
        let off = w * dt * k * inv_h2;
        Tridiagonal {
            lower: off,
            diag: 1.0 - 2.0 * off,
            upper: off,
            n,
        }
    };
    StepOperator {
        diffusion: coeff,
        dilution: p.n_dim as f64 * p.rho.derivative(t) / rho,
        laplacian: coeff.map(|k| Tridiagonal {
            lower: k * inv_h2,
            diag: -2.0 * k * inv_h2,
            upper: k * inv_h2,
            n,
        }),
        implicit: coeff.map(|k| side(k, -theta)),
        explicit: coeff.map(|k| side(k, 1.0 - theta)),
        dt,
    }
}

/// Adjoint period map: march `(ζ, η)` from `t = τ` back to `0⁺`, then
/// undo the pulse relation `ζ(0⁺) = ζ(0)/g′(0)`.
fn adjoint_period_map(p: &ModelParams, cfg: &PeriodMapConfig, w: &FieldPair) -> Result<FieldPair> {
    let steps = cfg.validate(p.tau)?;
    let (f0, g0) = slopes(p)?;
    let n = cfg.grid.interior();
    let (mut zeta, mut eta) = (w.u.clone(), w.v.clone());
    let (mut rz, mut re) = (vec![0.0; n], vec![0.0; n]);
    let (mut nz, mut ne) = (vec![0.0; n], vec![0.0; n]);
    let mut scratch = Scratch::new(n);
    for k in 0..steps {
        let s = k as f64 * cfg.dt;
        let op = adjoint_operator(p, &cfg.grid, s + 0.5 * cfg.dt, cfg.dt, cfg.theta);
        for j in 0..n {
            rz[j] = -(op.dilution + p.a11) * zeta[j] + f0 * eta[j];
            re[j] = -(op.dilution + p.a22) * eta[j] + p.a12 * zeta[j];
        }
        op.advance(0, &zeta, &rz, &mut nz, &mut scratch);
        op.advance(1, &eta, &re, &mut ne, &mut scratch);
        std::mem::swap(&mut zeta, &mut nz);
        std::mem::swap(&mut eta, &mut ne);
        if zeta.iter().chain(&eta).any(|x| !x.is_finite()) {
            return Err(Error::Blowup { t: p.tau - s - cfg.dt });
        }
    }
    zeta.iter_mut().for_each(|x| *x *= g0);
    Ok(FieldPair { u: zeta, v: eta })
}

/// `μ₁` of the adjoint problem by power iteration on its own period map.
pub fn adjoint_lambda1(p: &ModelParams, cfg: &PeriodMapConfig) -> Result<EigenResult> {
    p.validate()?;
    slopes(p)?;
    cfg.validate(p.tau)?;
    let out = power_iterate(cfg, "adjoint power iteration", |w| adjoint_period_map(p, cfg, w))?;
    Ok(spectral_result(p, cfg, EigenMethod::Adjoint, out))
}

fn require_unit_pulse(p: &ModelParams) -> Result<f64> {
    let g0 = p.impulse.prime_at_zero()?;
    if (g0 - 1.0).abs() > 1e-12 {
        return Err(Error::precondition(format!("requires g'(0) = 1, got {g0}")));
    }
    p.growth.prime_at_zero()
}

/// Smaller root of the 2×2 problem with diffusion weights `(k1, k2)`:
/// `[k1 + k2 + a11 + a22 − √((k1 − k2 + a11 − a22)² + 4·a12·f′(0))]/2`.
fn coupled_root(k1: f64, k2: f64, p: &ModelParams, f0: f64) -> f64 {
    let gap = k1 - k2 + p.a11 - p.a22;
    (k1 + k2 + p.a11 + p.a22 - (gap * gap + 4.0 * p.a12 * f0).sqrt()) / 2.0
}

/// Exact `λ₁` when `g′(0) = 1` and `ρ ≡ 1`.
pub fn exact_lambda1_fixed(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    let f0 = require_unit_pulse(p)?;
    if !p.rho.is_identically_one() {
        return Err(Error::precondition("exact formula requires rho ≡ 1"));
    }
    let l0 = p.lambda0();
    Ok(coupled_root(p.d1 * l0, p.d2 * l0, p, f0))
}

/// Upper bound on `λ₁` when `g′(0) = 1`, using the mean of `ρ⁻²`.
///
/// The radicand is `((d1 − d2)·λ₀·ρ̄⁻² + a11 − a22)² + 4·a12·f′(0)`.
pub fn lambda1_upper_bound(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    let f0 = require_unit_pulse(p)?;
    let w = p.lambda0() * mean_inv_rho_sq(&p.rho, p.tau)?;
    Ok(coupled_root(p.d1 * w, p.d2 * w, p, f0))
}

/// Lower bound `d1·λ₀·ρ̄⁻² − max(a12, f′(0))` when `g′(0) = 1` and `d1 = d2`.
pub fn lambda1_lower_bound(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    let f0 = require_unit_pulse(p)?;
    if (p.d1 - p.d2).abs() > 1e-12 * p.d1.max(p.d2) {
        return Err(Error::precondition(format!(
            "lower bound requires d1 = d2, got {} and {}",
            p.d1, p.d2
        )));
    }
    Ok(p.d1 * p.lambda0() * mean_inv_rho_sq(&p.rho, p.tau)? - p.a12.max(f0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Extinction,
    Persistence,
    Indeterminate,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Extinction => "extinction",
            Verdict::Persistence => "persistence",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

/// Threshold verdict with an indeterminate band of half-width `margin`.
///
/// Bounds only decide one side: a negative upper bound implies persistence,
/// a positive lower bound implies extinction.
pub fn classify_threshold(e: &EigenResult, margin: f64) -> Verdict {
    let l = e.lambda1;
    match e.method {
        EigenMethod::UpperBound if l < -margin => Verdict::Persistence,
        EigenMethod::LowerBound if l > margin => Verdict::Extinction,
        EigenMethod::UpperBound | EigenMethod::LowerBound => Verdict::Indeterminate,
        _ if l > margin => Verdict::Extinction,
        _ if l < -margin => Verdict::Persistence,
        _ => Verdict::Indeterminate,
    }
}
