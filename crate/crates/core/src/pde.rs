//! Finite-difference solver for the pulsed system on the fixed domain `[0, L]`.
//!
//! Space: second-order central differences on the `N` interior nodes of a
//! uniform grid, homogeneous Dirichlet values eliminated. Time: an IMEX
//! θ-scheme. Diffusion `d_i/ρ²` is frozen at the step midpoint and weighted
//! by θ implicitly; reaction and dilution are explicit at the old level with
//! the dilution coefficient taken at the midpoint. Each component costs one
//! Thomas solve per step.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::tridiag::Tridiagonal;

/// Smallest admissible interior node count.
pub const MIN_INTERIOR: usize = 8;
pub const DEFAULT_INTERIOR: usize = 200;
pub const DEFAULT_STEPS_PER_PERIOD: usize = 4000;
/// Snapshots stored per period by default.
pub const DEFAULT_SNAPSHOTS_PER_PERIOD: usize = 40;

/// Uniform grid on `[0, L]` with `N` interior nodes `x_j = j·dx`, `j = 1..N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    length: f64,
    interior: usize,
}

impl Grid1D {
    pub fn new(length: f64, interior: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::domain(format!("grid length must be positive, got {length}")));
        }
        if interior < MIN_INTERIOR {
            return Err(Error::domain(format!(
                "grid needs at least {MIN_INTERIOR} interior nodes, got {interior}"
            )));
        }
        Ok(Self { length, interior })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn interior(&self) -> usize {
        self.interior
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.interior + 1) as f64
    }

    /// Coordinate of interior node `j` (zero based).
    pub fn x(&self, j: usize) -> f64 {
        (j + 1) as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.interior).map(|j| self.x(j)).collect()
    }

    /// `amplitude·sin(πx/L)` sampled at the interior nodes.
    pub fn sine_profile(&self, amplitude: f64) -> Vec<f64> {
        (0..self.interior)
            .map(|j| amplitude * (PI * self.x(j) / self.length).sin())
            .collect()
    }
}

/// `(u, v)` on the interior nodes at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Marks values at `(kτ)⁺`, right after a pulse.
    pub post_impulse: bool,
}

impl StateField {
    pub fn new(t: f64, u: Vec<f64>, v: Vec<f64>) -> Self {
        Self {
            t,
            u,
            v,
            post_impulse: false,
        }
    }

    pub fn zeros(t: f64, n: usize) -> Self {
        Self::new(t, vec![0.0; n], vec![0.0; n])
    }

    pub fn sup_u(&self) -> f64 {
        sup_norm(&self.u)
    }

    pub fn sup_v(&self) -> f64 {
        sup_norm(&self.v)
    }

    fn check_finite(&self) -> Result<()> {
        if self.u.iter().chain(&self.v).all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::Blowup { t: self.t })
        }
    }
}

pub(crate) fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub(crate) fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Time-stepping controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Implicit weight of the diffusion term.
    pub theta: f64,
    /// Store every `snapshot_stride`-th step.
    pub snapshot_stride: usize,
}

impl SolverConfig {
    /// `dt = τ/steps_per_period`, θ = 1/2 and 40 snapshots per period.
    pub fn for_period(tau: f64, steps_per_period: usize, t_end: f64) -> Self {
        Self {
            dt: tau / steps_per_period as f64,
            t_end,
            theta: 0.5,
            snapshot_stride: (steps_per_period / DEFAULT_SNAPSHOTS_PER_PERIOD).max(1),
        }
    }

    pub fn validate(&self, tau: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::domain(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::domain(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::domain("snapshot_stride must be at least 1"));
        }
        steps_per_period(tau, self.dt).map(|_| ())
    }
}

/// Number of steps per period; fails unless `τ/dt` is an integer.
pub fn steps_per_period(tau: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    let ratio = tau / dt;
    let steps = ratio.round();
    if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::domain(format!("tau/dt = {ratio} is not an integer")));
    }
    Ok(steps as usize)
}

/// Pulse times `kτ`, `k = 0..=k_max`, aligned with the time grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulseSchedule {
    pub tau: f64,
    pub k_max: usize,
    pub steps_per_period: usize,
}

impl ImpulseSchedule {
    pub fn new(tau: f64, dt: f64, t_end: f64) -> Result<Self> {
        let steps_per_period = steps_per_period(tau, dt)?;
        Ok(Self {
            tau,
            k_max: (t_end / tau + 1e-9).floor() as usize,
            steps_per_period,
        })
    }

    pub fn dt(&self) -> f64 {
        self.tau / self.steps_per_period as f64
    }

    /// Time of global step index `n`, computed without accumulated drift.
    pub fn time_of_step(&self, n: usize) -> f64 {
        let k = n / self.steps_per_period;
        let j = n % self.steps_per_period;
        k as f64 * self.tau + j as f64 * self.dt()
    }

    pub fn pulse_times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.k_max).map(|k| k as f64 * self.tau)
    }
}

/// Matrices for one IMEX step of both components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOperator {
    /// `d_i/ρ²(t_mid)`.
    pub diffusion: [f64; 2],
    /// `n·ρ̇(t_mid)/ρ(t_mid)`.
    pub dilution: f64,
    /// `κ_i·(1, −2, 1)/dx²`.
    pub laplacian: [Tridiagonal; 2],
    /// `I − θ·dt·κ_i·Δ_h`.
    pub implicit: [Tridiagonal; 2],
    /// `I + (1 − θ)·dt·κ_i·Δ_h`.
    pub explicit: [Tridiagonal; 2],
    pub dt: f64,
}

pub fn assemble_step_operator(p: &ModelParams, grid: &Grid1D, t_mid: f64, dt: f64, theta: f64) -> StepOperator {
    let rho = p.rho.value(t_mid);
    let diffusion = [p.d1 / (rho * rho), p.d2 / (rho * rho)];
    build_operator(diffusion, p.dilution(t_mid), grid, dt, theta)
}

pub(crate) fn build_operator(diffusion: [f64; 2], dilution: f64, grid: &Grid1D, dt: f64, theta: f64) -> StepOperator {
    let n = grid.interior();
    let h2 = grid.dx() * grid.dx();
    let lap = |k: f64| Tridiagonal {
        lower: k / h2,
        diag: -2.0 * k / h2,
        upper: k / h2,
        n,
    };
    let shifted = |k: f64, w: f64| Tridiagonal {
        lower: w * dt * k / h2,
        diag: 1.0 - 2.0 * w * dt * k / h2,
        upper: w * dt * k / h2,
        n,
    };
    StepOperator {
        diffusion,
        dilution,
        laplacian: diffusion.map(lap),
        implicit: diffusion.map(|k| shifted(k, -theta)),
        explicit: diffusion.map(|k| shifted(k, 1.0 - theta)),
        dt,
    }
}

/// Reusable buffers for [`StepOperator::advance`].
#[derive(Debug, Clone)]
pub(crate) struct Scratch {
    thomas: Vec<f64>,
}

impl Scratch {
    pub(crate) fn new(n: usize) -> Self {
        Self { thomas: vec![0.0; n] }
    }
}

impl StepOperator {
    /// `out = implicit⁻¹·(explicit·x + dt·rate)` for component `comp`.
    pub(crate) fn advance(&self, comp: usize, x: &[f64], rate: &[f64], out: &mut [f64], scratch: &mut Scratch) {
        self.explicit[comp].apply(x, out);
        for (o, r) in out.iter_mut().zip(rate) {
            *o += self.dt * r;
        }
        self.implicit[comp].solve_in_place(out, &mut scratch.thomas);
    }
}

/// Which right-hand side drives the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kinetics {
    /// The full model with `f(u)`.
    Nonlinear,
    /// The linearization at zero, `f′(0)·u` in place of `f(u)`.
    Linearized { growth_slope: f64 },
}

impl Kinetics {
    pub(crate) fn rates(&self, p: &ModelParams, dilution: f64, u: &[f64], v: &[f64], ru: &mut [f64], rv: &mut [f64]) {
        let (ku, kv) = (dilution + p.a11, dilution + p.a22);
        for j in 0..u.len() {
            ru[j] = -ku * u[j] + p.a12 * v[j];
            let source = match self {
                Kinetics::Nonlinear => p.growth.apply(u[j]),
                Kinetics::Linearized { growth_slope } => growth_slope * u[j],
            };
            rv[j] = -kv * v[j] + source;
        }
    }
}

/// Stateful stepper reusing its buffers across steps.
#[derive(Debug, Clone)]
pub(crate) struct Marcher<'a> {
    p: &'a ModelParams,
    grid: Grid1D,
    dt: f64,
    theta: f64,
    kinetics: Kinetics,
    ru: Vec<f64>,
    rv: Vec<f64>,
    out_u: Vec<f64>,
    out_v: Vec<f64>,
    scratch: Scratch,
}

impl<'a> Marcher<'a> {
    pub(crate) fn new(p: &'a ModelParams, grid: Grid1D, dt: f64, theta: f64, kinetics: Kinetics) -> Self {
        let n = grid.interior();
        Self {
            p,
            grid,
            dt,
            theta,
            kinetics,
            ru: vec![0.0; n],
            rv: vec![0.0; n],
            out_u: vec![0.0; n],
            out_v: vec![0.0; n],
            scratch: Scratch::new(n),
        }
    }

    /// Advances `(u, v)` in place from `t` to `t + dt`.
    pub(crate) fn step(&mut self, t: f64, u: &mut Vec<f64>, v: &mut Vec<f64>) -> Result<()> {
        let op = assemble_step_operator(self.p, &self.grid, t + 0.5 * self.dt, self.dt, self.theta);
        self.kinetics
            .rates(self.p, op.dilution, u, v, &mut self.ru, &mut self.rv);
        op.advance(0, u, &self.ru, &mut self.out_u, &mut self.scratch);
        op.advance(1, v, &self.rv, &mut self.out_v, &mut self.scratch);
        std::mem::swap(u, &mut self.out_u);
        std::mem::swap(v, &mut self.out_v);
        if u.iter().chain(v.iter()).all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::Blowup { t: t + self.dt })
        }
    }
}

/// One IMEX step of the nonlinear model. The interval `(t, t + dt]` must
/// not contain a pulse time in its interior.
pub fn step(p: &ModelParams, grid: &Grid1D, state: &StateField, dt: f64, theta: f64) -> Result<StateField> {
    check_len(grid, &state.u, &state.v)?;
    let mut marcher = Marcher::new(p, *grid, dt, theta, Kinetics::Nonlinear);
    let (mut u, mut v) = (state.u.clone(), state.v.clone());
    marcher.step(state.t, &mut u, &mut v)?;
    Ok(StateField::new(state.t + dt, u, v))
}

fn check_len(grid: &Grid1D, u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != grid.interior() || v.len() != grid.interior() {
        return Err(Error::domain(format!(
            "field length ({}, {}) does not match the grid's {} interior nodes",
            u.len(),
            v.len(),
            grid.interior()
        )));
    }
    Ok(())
}

/// `u_j ← g(u_j)`, `v` unchanged. `state.t` must be a multiple of `τ`.
pub fn apply_impulse(p: &ModelParams, state: &StateField) -> Result<StateField> {
    let k = (state.t / p.tau).round();
    if (state.t - k * p.tau).abs() > 1e-6 * p.tau {
        return Err(Error::domain(format!(
            "impulse requested at t = {} which is not a multiple of tau = {}",
            state.t, p.tau
        )));
    }
    Ok(StateField {
        t: state.t,
        u: state.u.iter().map(|&x| p.impulse.apply(x)).collect(),
        v: state.v.clone(),
        post_impulse: true,
    })
}

/// One row of the summary series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryPoint {
    pub t: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub post_impulse: bool,
}

/// Stored snapshots of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid1D,
    pub tau: f64,
    pub dt: f64,
    pub theta: f64,
    /// Ordered by `(t, post_impulse)`.
    pub snapshots: Vec<StateField>,
    pub impulse_times: Vec<f64>,
    pub summary: Vec<SummaryPoint>,
}

impl Trajectory {
    pub fn new(grid: Grid1D, tau: f64, dt: f64, theta: f64) -> Self {
        Self {
            grid,
            tau,
            dt,
            theta,
            snapshots: Vec::new(),
            impulse_times: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn push(&mut self, state: StateField) {
        self.summary.push(SummaryPoint {
            t: state.t,
            sup_u: state.sup_u(),
            sup_v: state.sup_v(),
            post_impulse: state.post_impulse,
        });
        self.snapshots.push(state);
    }

    pub fn final_state(&self) -> Option<&StateField> {
        self.snapshots.last()
    }

    /// First recorded time at which both sup-norms are below `threshold`.
    pub fn first_time_below(&self, threshold: f64) -> Option<f64> {
        self.summary
            .iter()
            .find(|s| s.sup_u < threshold && s.sup_v < threshold)
            .map(|s| s.t)
    }

    /// Largest `sup_u` over snapshots with `t ≥ from`.
    pub fn peak_u_after(&self, from: f64) -> f64 {
        self.summary
            .iter()
            .filter(|s| s.t >= from)
            .fold(0.0, |m, s| m.max(s.sup_u))
    }

    pub fn peak_v_after(&self, from: f64) -> f64 {
        self.summary
            .iter()
            .filter(|s| s.t >= from)
            .fold(0.0, |m, s| m.max(s.sup_v))
    }
}

/// Integrates the pulsed model from `(u0, v0)`.
///
/// The pulse is applied at `t = 0` before the first step and again at every
/// `kτ ≤ t_end`; both the pre- and post-pulse states are stored at each
/// pulse time.
pub fn simulate(p: &ModelParams, grid: &Grid1D, cfg: &SolverConfig, u0: &[f64], v0: &[f64]) -> Result<Trajectory> {
    p.validate()?;
    cfg.validate(p.tau)?;
    check_len(grid, u0, v0)?;
    if u0.iter().chain(v0).any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::domain("initial data must be finite and nonnegative"));
    }
    let schedule = ImpulseSchedule::new(p.tau, cfg.dt, cfg.t_end)?;
    let spp = schedule.steps_per_period;
    let total_steps = (cfg.t_end / schedule.dt() + 1e-9).floor() as usize;

    let mut tr = Trajectory::new(*grid, p.tau, schedule.dt(), cfg.theta);
    let mut state = StateField::new(0.0, u0.to_vec(), v0.to_vec());
    tr.push(state.clone());
    state = apply_impulse(p, &state)?;
    tr.impulse_times.push(0.0);
    tr.push(state.clone());

    let mut marcher = Marcher::new(p, *grid, schedule.dt(), cfg.theta, Kinetics::Nonlinear);
    let (mut u, mut v) = (state.u, state.v);
    for n in 0..total_steps {
        marcher.step(schedule.time_of_step(n), &mut u, &mut v)?;
        let t = schedule.time_of_step(n + 1);
        if (n + 1) % spp == 0 {
            let pre = StateField::new(t, u.clone(), v.clone());
            tr.push(pre.clone());
            let post = apply_impulse(p, &pre)?;
            u.clone_from(&post.u);
            tr.impulse_times.push(t);
            tr.push(post);
        } else if (n + 1) % cfg.snapshot_stride == 0 || n + 1 == total_steps {
            tr.push(StateField::new(t, u.clone(), v.clone()));
        }
    }
    if let Some(last) = tr.final_state() {
        last.check_finite()?;
    }
    Ok(tr)
}

/// For every stored pair of snapshots exactly `τ` apart (same pulse flag),
/// the sup over nodes and components of their difference, keyed by the
/// later time.
pub fn periodicity_defect(tr: &Trajectory, tau: f64) -> Result<Vec<(f64, f64)>> {
    let (first, last) = match (tr.snapshots.first(), tr.snapshots.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(Error::domain("empty trajectory")),
    };
    if last - first < 2.0 * tau - 1e-9 * tau {
        return Err(Error::domain(format!(
            "trajectory spans {} but at least two periods ({}) are required",
            last - first,
            2.0 * tau
        )));
    }
    let key = |s: &StateField| ((s.t / tr.dt).round() as i64, s.post_impulse);
    let index: HashMap<(i64, bool), usize> = tr.snapshots.iter().enumerate().map(|(i, s)| (key(s), i)).collect();
    let shift = (tau / tr.dt).round() as i64;
    let mut out = Vec::new();
    for s in &tr.snapshots {
        let (step, flag) = key(s);
        if let Some(&i) = index.get(&(step - shift, flag)) {
            let earlier = &tr.snapshots[i];
            let d = sup_diff(&s.u, &earlier.u).max(sup_diff(&s.v, &earlier.v));
            out.push((s.t, d));
        }
    }
    Ok(out)
}

/// Fixed small constant replacing the "sufficiently small" ε₀ of the
/// boundedness argument.
pub const BOUND_EPSILON: f64 = 1e-6;

/// Upper bounds `(C₁, C₂)` for the solution started from `(u0, v0)`.
///
/// `G = 2·max(max u0, ((a12+ε₀)/(a11+m̌))·max v0, G*)` where `G*` is the
/// smallest `G` with `f(G) < ((a11+m̌)(a22+m̌)/(a12+ε₀))·G`; then `C₁ = G`
/// and `C₂ = (a11+m̌)·G/(a12+ε₀)`.
pub fn solution_bounds(p: &ModelParams, u0: &[f64], v0: &[f64]) -> Result<(f64, f64)> {
    let (m_check, _) = p.dilution_extrema();
    let shifted = p.a11 + m_check;
    if !(shifted > 0.0) || !(p.a22 + m_check > 0.0) {
        return Err(Error::precondition("a11 + m̌ and a22 + m̌ must be positive"));
    }
    let a12e = p.a12 + BOUND_EPSILON;
    let slope = shifted * (p.a22 + m_check) / a12e;
    let below = |g: f64| p.growth.apply(g) < slope * g;
    let g_star = if p.growth.initial_slope() < slope {
        0.0
    } else {
        if !(p.growth.ratio_at_infinity() < slope) {
            return Err(Error::precondition(
                "growth limit condition fails; no bounding G exists",
            ));
        }
        let mut hi = 1.0;
        while !below(hi) {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::precondition("no bounding G found"));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if below(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let g = 2.0 * sup_norm(u0).max(a12e / shifted * sup_norm(v0)).max(g_star);
    Ok((g, shifted * g / a12e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EvolutionRate, ResponseFn};

    fn params() -> ModelParams {
        ModelParams {
            d1: 0.05,
            d2: 1.0,
            a11: 0.2,
            a12: 0.2,
            a22: 0.15,
            tau: 2.0,
            n_dim: 1,
            growth: ResponseFn::BevertonHolt { m: 1.0, a: 10.0 },
            impulse: ResponseFn::BevertonHolt { m: 9.0, a: 10.0 },
            rho: EvolutionRate::fixed(),
            domain_length: PI,
        }
    }

    #[test]
    fn grid_layout() {
        let g = Grid1D::new(PI, 200).unwrap();
        assert!((g.dx() * 201.0 - PI).abs() < 1e-14);
        assert!((g.x(199) + g.dx() - PI).abs() < 1e-13);
        assert!(Grid1D::new(1.0, 7).is_err());
        assert!(Grid1D::new(0.0, 10).is_err());
    }

    #[test]
    fn laplacian_stencil_weights() {
        let mut p = params();
        p.d1 = 1.0;
        let grid = Grid1D::new(0.25 * 9.0, 8).unwrap();
        assert!((grid.dx() - 0.25).abs() < 1e-15);
        let op = assemble_step_operator(&p, &grid, 0.3, 0.01, 0.5);
        let lap = op.laplacian[0];
        assert!((lap.lower - 1.0 / 0.0625).abs() < 1e-12);
        assert!((lap.diag + 2.0 / 0.0625).abs() < 1e-12);
        assert!((lap.upper - 1.0 / 0.0625).abs() < 1e-12);
    }

    #[test]
    fn diffusion_multiplier_follows_rho() {
        let mut p = params();
        p.rho = EvolutionRate::ExpCos {
            amplitude: 1.0,
            exponent: 2.0,
        };
        let grid = Grid1D::new(PI, 16).unwrap();
        let op = assemble_step_operator(&p, &grid, 1.0, 0.01, 0.5);
        assert!((op.diffusion[0] - p.d1 * (-8.0f64).exp()).abs() < 1e-15);
        assert!((op.diffusion[1] - p.d2 * (-8.0f64).exp()).abs() < 1e-15);
        assert!(op.dilution.abs() < 1e-12);
    }

    #[test]
    fn theta_moves_diffusion_between_sides() {
        let p = params();
        let grid = Grid1D::new(PI, 16).unwrap();
        let implicit = assemble_step_operator(&p, &grid, 0.0, 0.01, 1.0);
        let explicit = assemble_step_operator(&p, &grid, 0.0, 0.01, 0.0);
        for c in 0..2 {
            assert_eq!(implicit.explicit[c], Tridiagonal::identity(16));
            assert_eq!(explicit.implicit[c], Tridiagonal::identity(16));
            assert!((implicit.implicit[c].lower + explicit.explicit[c].lower).abs() < 1e-15);
            assert!((implicit.implicit[c].diag - 2.0 + explicit.explicit[c].diag).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_state_is_an_equilibrium() {
        let p = params();
        let grid = Grid1D::new(PI, 32).unwrap();
        let s = StateField::zeros(0.0, 32);
        let next = step(&p, &grid, &s, 0.01, 0.5).unwrap();
        assert!(next.u.iter().chain(&next.v).all(|&x| x == 0.0));
        assert!((next.t - 0.01).abs() < 1e-15);
    }

    #[test]
    fn blowup_is_reported_with_time() {
        let p = params();
        let grid = Grid1D::new(PI, 16).unwrap();
        let mut s = StateField::zeros(0.5, 16);
        s.u[3] = f64::INFINITY;
        match step(&p, &grid, &s, 0.01, 0.5) {
            Err(Error::Blowup { t }) => assert!((t - 0.51).abs() < 1e-12),
            other => panic!("expected blowup, got {other:?}"),
        }
    }

    #[test]
    fn impulse_values() {
        let mut p = params();
        let s = StateField::new(4.0, vec![10.0, 0.0, 3.0], vec![1.0, 2.0, 3.0]);
        let out = apply_impulse(&p, &s).unwrap();
        assert!((out.u[0] - 4.5).abs() < 1e-15);
        assert_eq!(out.v, s.v);
        assert!(out.post_impulse);
        p.impulse = ResponseFn::identity();
        let same = apply_impulse(&p, &s).unwrap();
        assert_eq!(same.u, s.u);
        let off = StateField::new(1.0, vec![1.0], vec![1.0]);
        assert!(apply_impulse(&p, &off).is_err());
    }

    #[test]
    fn zero_initial_data_stays_zero() {
        let p = params();
        let grid = Grid1D::new(PI, 16).unwrap();
        let cfg = SolverConfig::for_period(p.tau, 200, 6.0);
        let tr = simulate(&p, &grid, &cfg, &[0.0; 16], &[0.0; 16]).unwrap();
        assert!(tr.snapshots.iter().all(|s| s.u.iter().chain(&s.v).all(|&x| x == 0.0)));
    }

    #[test]
    fn pulse_pairs_are_recorded() {
        let p = params();
        let grid = Grid1D::new(PI, 16).unwrap();
        let cfg = SolverConfig::for_period(p.tau, 200, 6.0);
        let u0 = grid.sine_profile(8.0);
        let v0 = grid.sine_profile(0.1);
        let tr = simulate(&p, &grid, &cfg, &u0, &v0).unwrap();
        assert_eq!(tr.impulse_times, vec![0.0, 2.0, 4.0, 6.0]);
        for &tk in &tr.impulse_times {
            let pre = tr.snapshots.iter().find(|s| s.t == tk && !s.post_impulse).unwrap();
            let post = tr.snapshots.iter().find(|s| s.t == tk && s.post_impulse).unwrap();
            assert!(post.sup_u() <= pre.sup_u());
        }
        for w in tr.snapshots.windows(2) {
            assert!(w[1].t > w[0].t || (w[1].t == w[0].t && w[1].post_impulse && !w[0].post_impulse));
        }
    }

    #[test]
    fn misaligned_period_rejected() {
        let p = params();
        let grid = Grid1D::new(PI, 16).unwrap();
        let cfg = SolverConfig {
            dt: 0.3,
            t_end: 3.0,
            theta: 0.5,
            snapshot_stride: 1,
        };
        assert!(simulate(&p, &grid, &cfg, &[0.0; 16], &[0.0; 16]).is_err());
    }

    #[test]
    fn synthetic_periodic_trajectory_has_zero_defect() {
        let grid = Grid1D::new(PI, 8).unwrap();
        let mut tr = Trajectory::new(grid, 1.0, 0.25, 0.5);
        for k in 0..=12 {
            let t = 0.25 * k as f64;
            let phase = (2.0 * PI * t).sin();
            tr.push(StateField::new(t, vec![1.0 + phase; 8], vec![2.0 - phase; 8]));
        }
        let defect = periodicity_defect(&tr, 1.0).unwrap();
        assert_eq!(defect.len(), 9);
        assert!(defect.iter().all(|&(_, d)| d < 1e-12));
        let short = Trajectory {
            snapshots: tr.snapshots[..5].to_vec(),
            ..tr.clone()
        };
        assert!(periodicity_defect(&short, 1.0).is_err());
    }

    #[test]
    fn bounds_for_example1() {
        let p = params();
        let grid = Grid1D::new(PI, 16).unwrap();
        let (c1, c2) = solution_bounds(&p, &grid.sine_profile(8.0), &grid.sine_profile(0.1)).unwrap();
        let peak = grid.sine_profile(8.0).iter().cloned().fold(0.0, f64::max);
        assert!((c1 - 2.0 * peak).abs() < 1e-12);
        assert!((c2 - 0.2 * c1 / (0.2 + BOUND_EPSILON)).abs() < 1e-12);
    }

    #[test]
    fn bounds_search_when_growth_is_strong() {
        let mut p = params();
        p.a12 = 0.9;
        p.growth = ResponseFn::BevertonHolt { m: 9.0, a: 10.0 };
        let (c1, _) = solution_bounds(&p, &[1.0; 8], &[0.0; 8]).unwrap();
        // f(G)/G < 0.2·0.15/(0.9+ε₀) ⇔ G > 9/K − 10 ≈ 260
        let k = 0.2 * 0.15 / (0.9 + BOUND_EPSILON);
        assert!((c1 - 2.0 * (9.0 / k - 10.0)).abs() < 1e-6);
    }
}
