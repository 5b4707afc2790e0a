//! Positive τ-periodic solution of the pulsed problem by monotone iteration
//! from ordered upper and lower solutions.
//!
//! Each iterate is one period of values on the solver's time grid. Level 0
//! holds the state at `0⁺` (after the pulse) and level `N = τ/dt` the state
//! at `τ` (before it). An iteration takes the previous iterate's values at
//! `τ` as new initial data, pulses `u`, and marches the shifted linear
//! problems with the nonlinear terms frozen on the previous iterate:
//!
//! `w_{n+1} = A⁻¹[B·w_n − dt·m·w_n + dt·(R(w̃_n) + m·w̃_n)]`
//!
//! where `w̃` is the previous iterate, `R` the reaction/dilution rate, and
//! `A`, `B` the θ-scheme diffusion matrices. At a fixed point this is the
//! pde-engine step, so the limit is a periodic orbit of the solver itself.
//! With `θ = 1` the step is order preserving, which makes the iterates from
//! the two seeds monotone in the discrete sense.

use crate::eigen::{
    classify_threshold, march_linearized, power_iteration_lambda1, EigenResult, FieldPair, PeriodMapConfig,
    DEFAULT_MARGIN,
};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::pde::{
    assemble_step_operator, simulate, steps_per_period, sup_diff, Grid1D, Kinetics, Scratch, SolverConfig,
    StepOperator, Trajectory,
};

pub const ITERATION_TOL: f64 = 1e-8;
pub const ITERATION_CAP: usize = 10_000;
/// Allowed violation of the ordering chain between iterates.
pub const ORDER_SLACK: f64 = 1e-10;
pub const EPSILON_START: f64 = 1e-3;
pub const MAX_HALVINGS: usize = 40;

/// Discretization and stopping rule for the monotone iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyConfig {
    pub grid: Grid1D,
    pub dt: f64,
    pub theta: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl SteadyConfig {
    /// Backward Euler in time, tolerance 1e-8, cap 10,000 iterations.
    pub fn new(grid: Grid1D, tau: f64, steps_per_period: usize) -> Self {
        Self {
            grid,
            dt: tau / steps_per_period as f64,
            theta: 1.0,
            tol: ITERATION_TOL,
            max_iters: ITERATION_CAP,
        }
    }

    /// Validates the settings and returns the steps per period.
    pub fn steps(&self, tau: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::domain("theta must lie in [0, 1]"));
        }
        if !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(Error::domain("tol must be positive and max_iters at least 1"));
        }
        steps_per_period(tau, self.dt)
    }

    /// The eigenproblem on the same grid, step and θ.
    pub fn period_map(&self) -> PeriodMapConfig {
        PeriodMapConfig {
            grid: self.grid,
            dt: self.dt,
            theta: self.theta,
            max_iters: crate::eigen::DEFAULT_MAX_ITERS,
            tol: crate::eigen::DEFAULT_TOL,
        }
    }
}

/// One period of `(U, V)` on the interior nodes at levels `0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodOrbit {
    n: usize,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl PeriodOrbit {
    pub fn filled(levels: usize, n: usize, u: f64, v: f64) -> Self {
        Self {
            n,
            u: vec![u; levels * n],
            v: vec![v; levels * n],
        }
    }

    pub fn levels(&self) -> usize {
        self.u.len() / self.n
    }

    pub fn interior(&self) -> usize {
        self.n
    }

    pub fn u(&self, k: usize) -> &[f64] {
        &self.u[k * self.n..(k + 1) * self.n]
    }

    pub fn v(&self, k: usize) -> &[f64] {
        &self.v[k * self.n..(k + 1) * self.n]
    }

    pub fn sup_u(&self) -> f64 {
        crate::pde::sup_norm(&self.u)
    }

    pub fn sup_v(&self) -> f64 {
        crate::pde::sup_norm(&self.v)
    }

    pub fn min_value(&self) -> f64 {
        self.u.iter().chain(&self.v).fold(f64::INFINITY, |m, &x| m.min(x))
    }

    pub fn sup_diff(&self, other: &Self) -> f64 {
        sup_diff(&self.u, &other.u).max(sup_diff(&self.v, &other.v))
    }

    /// `max(self − other)` over all entries: how far `self ≤ other` fails.
    pub fn excess_over(&self, other: &Self) -> f64 {
        self.u
            .iter()
            .zip(&other.u)
            .chain(self.v.iter().zip(&other.v))
            .fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seed {
    Upper,
    Lower,
    /// The trivial solution, used as a reference for extinction.
    Zero,
}

impl Seed {
    pub fn name(&self) -> &'static str {
        match self {
            Seed::Upper => "upper",
            Seed::Lower => "lower",
            Seed::Zero => "zero",
        }
    }
}

/// Converged periodic orbit with its discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSolution {
    pub grid: Grid1D,
    pub tau: f64,
    pub dt: f64,
    pub theta: f64,
    pub orbit: PeriodOrbit,
    /// `max(‖U(0⁺) − g(U(τ))‖∞, ‖V(0⁺) − V(τ)‖∞)`.
    pub defect: f64,
    pub seed: Seed,
    pub iterations: usize,
}

impl PeriodicSolution {
    pub fn zero(grid: Grid1D, tau: f64, dt: f64, theta: f64) -> Result<Self> {
        let steps = steps_per_period(tau, dt)?;
        Ok(Self {
            grid,
            tau,
            dt,
            theta,
            orbit: PeriodOrbit::filled(steps + 1, grid.interior(), 0.0, 0.0),
            defect: 0.0,
            seed: Seed::Zero,
            iterations: 0,
        })
    }

    pub fn steps(&self) -> usize {
        self.orbit.levels() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn is_positive(&self) -> bool {
        self.orbit.min_value() > 0.0
    }
}

/// Per-iteration diagnostics of one seeded run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub seed: Seed,
    pub m1: f64,
    pub m2: f64,
    pub sup_u: Vec<f64>,
    pub sup_v: Vec<f64>,
    /// Sup-norm of the difference to the previous iterate.
    pub diff: Vec<f64>,
    pub iterations: usize,
    /// Largest violation of the ordering chain seen so far.
    pub max_order_violation: f64,
}

impl IterationTrace {
    fn new(seed: Seed, m: [f64; 2]) -> Self {
        Self {
            seed,
            m1: m[0],
            m2: m[1],
            sup_u: Vec::new(),
            sup_v: Vec::new(),
            diff: Vec::new(),
            iterations: 0,
            max_order_violation: 0.0,
        }
    }

    fn record(&mut self, orbit: &PeriodOrbit, diff: f64) {
        self.sup_u.push(orbit.sup_u());
        self.sup_v.push(orbit.sup_v());
        self.diff.push(diff);
        self.iterations += 1;
    }
}

/// Shift constants `m₁ = m̂ + 1.5·a11`, `m₂ = m̂ + 1.5·a22`.
pub fn shift_constants(p: &ModelParams) -> [f64; 2] {
    let (_, m_hat) = p.dilution_extrema();
    [m_hat + 1.5 * p.a11, m_hat + 1.5 * p.a22]
}

/// Constant upper solution `(G, (a11 + m̌)·G/a12)`.
///
/// `G` is the smallest power of two with `G ≥ data_bound` and
/// `f(G) ≤ ((a11 + m̌)(a22 + m̌)/a12)·G`.
pub fn build_upper_solution(p: &ModelParams, data_bound: f64) -> Result<(f64, f64)> {
    p.validate()?;
    if !(data_bound >= 0.0) || !data_bound.is_finite() {
        return Err(Error::domain("data bound must be finite and nonnegative"));
    }
    let (m_check, _) = p.dilution_extrema();
    let (s1, s2) = (p.a11 + m_check, p.a22 + m_check);
    if !(s1 > 0.0 && s2 > 0.0) {
        return Err(Error::precondition(format!(
            "a11 + m̌ = {s1} and a22 + m̌ = {s2} must be positive for a constant upper solution"
        )));
    }
    let slope = s1 * s2 / p.a12;
    let mut g = 1.0f64;
    while g < data_bound || p.growth.apply(g) > slope * g {
        g *= 2.0;
        if g > 1e300 {
            return Err(Error::precondition(
                "no power of two satisfies the upper-solution inequality",
            ));
        }
    }
    Ok((g, s1 * g / p.a12))
}

/// Marches one monotone iteration on a fixed discretization.
struct Sweeper<'a> {
    p: &'a ModelParams,
    ops: Vec<StepOperator>,
    m: [f64; 2],
    ru: Vec<f64>,
    rv: Vec<f64>,
    scratch: Scratch,
}

impl<'a> Sweeper<'a> {
    fn new(p: &'a ModelParams, cfg: &SteadyConfig) -> Result<Self> {
        let steps = cfg.steps(p.tau)?;
        let m = shift_constants(p);
        if m.iter().any(|&mk| !(mk > 0.0) || mk * cfg.dt > 1.0) {
            return Err(Error::precondition(format!(
                "shift constants {m:?} must be positive with m·dt ≤ 1"
            )));
        }
        let ops = (0..steps)
            .map(|k| assemble_step_operator(p, &cfg.grid, (k as f64 + 0.5) * cfg.dt, cfg.dt, cfg.theta))
            .collect();
        let n = cfg.grid.interior();
        Ok(Self {
            p,
            ops,
            m,
            ru: vec![0.0; n],
            rv: vec![0.0; n],
            scratch: Scratch::new(n),
        })
    }

    fn levels(&self) -> usize {
        self.ops.len() + 1
    }

    fn apply(&mut self, old: &PeriodOrbit, new: &mut PeriodOrbit) -> Result<()> {
        let n = old.n;
        let last = self.ops.len();
        for j in 0..n {
            new.u[j] = self.p.impulse.apply(old.u(last)[j]);
            new.v[j] = old.v(last)[j];
        }
        for (k, op) in self.ops.iter().enumerate() {
            Kinetics::Nonlinear.rates(self.p, op.dilution, old.u(k), old.v(k), &mut self.ru, &mut self.rv);
            let (head, tail) = new.u.split_at_mut((k + 1) * n);
            let cur = &head[k * n..];
            for ((r, &o), &c) in self.ru.iter_mut().zip(old.u(k)).zip(cur) {
                *r += self.m[0] * (o - c);
            }
            op.advance(0, cur, &self.ru, &mut tail[..n], &mut self.scratch);
            let (head, tail) = new.v.split_at_mut((k + 1) * n);
            let cur = &head[k * n..];
            for ((r, &o), &c) in self.rv.iter_mut().zip(old.v(k)).zip(cur) {
                *r += self.m[1] * (o - c);
            }
            op.advance(1, cur, &self.rv, &mut tail[..n], &mut self.scratch);
        }
        if new.u.iter().chain(&new.v).all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::Blowup { t: self.p.tau })
        }
    }

    fn defect(&self, orbit: &PeriodOrbit) -> f64 {
        let last = self.ops.len();
        let du = orbit
            .u(0)
            .iter()
            .zip(orbit.u(last))
            .fold(0.0f64, |m, (a, b)| m.max((a - self.p.impulse.apply(*b)).abs()));
        du.max(sup_diff(orbit.v(0), orbit.v(last)))
    }
}

/// Normalized time-dependent eigenfunction `(φ̄, ψ̄)` over one period.
///
/// `φ(t) = e^{λ₁t}·E(t)·φ(0⁺)` with `E` the linear evolution, scaled so
/// that its maximum over the period and both components is 1.
pub fn eigen_orbit(p: &ModelParams, eig: &EigenResult, cfg: &SteadyConfig) -> Result<PeriodOrbit> {
    let n = cfg.grid.interior();
    if eig.phi.len() != n || eig.psi.len() != n {
        return Err(Error::precondition(
            "eigenfunction is not sampled on the steady-state grid",
        ));
    }
    let w = eig.eigenfunction();
    let mut levels = Vec::new();
    let image = march_linearized(p, &cfg.period_map(), &w, Some(&mut levels))?;
    let mismatch = image.scaled(1.0 / eig.multiplier).sup_diff(&w) / w.sup_norm();
    if !(mismatch < 1e-6) {
        return Err(Error::precondition(format!(
            "eigenpair does not match the steady-state discretization (relative mismatch {mismatch:e})"
        )));
    }
    let steps = levels.len() - 1;
    let mut orbit = PeriodOrbit::filled(steps + 1, n, 0.0, 0.0);
    let mut peak = 0.0f64;
    for (k, level) in levels.iter().enumerate() {
        let growth = (eig.lambda1 * k as f64 * cfg.dt).exp();
        for j in 0..n {
            orbit.u[k * n + j] = growth * level.u[j];
            orbit.v[k * n + j] = growth * level.v[j];
        }
    }
    peak = orbit.u.iter().chain(&orbit.v).fold(peak, |m, &x| m.max(x));
    if !(orbit.min_value() > 0.0) {
        return Err(Error::precondition("eigenfunction is not positive over the period"));
    }
    orbit.u.iter_mut().chain(orbit.v.iter_mut()).for_each(|x| *x /= peak);
    Ok(orbit)
}

/// Rate `α = −λ₁/2` of the lower-solution envelope.
pub fn envelope_rate(lambda1: f64) -> f64 {
    -0.5 * lambda1
}

/// `ε·e^{(λ₁+α)(τ−t)}·(φ̄, ψ̄)(t)` at every level.
pub fn build_lower_solution(
    p: &ModelParams,
    eig: &EigenResult,
    cfg: &SteadyConfig,
    epsilon: f64,
) -> Result<PeriodOrbit> {
    let base = eigen_orbit(p, eig, cfg)?;
    lower_from_orbit(p, eig.lambda1, cfg, &base, epsilon)
}

fn lower_from_orbit(
    p: &ModelParams,
    lambda1: f64,
    cfg: &SteadyConfig,
    base: &PeriodOrbit,
    epsilon: f64,
) -> Result<PeriodOrbit> {
    if !(lambda1 < 0.0) {
        return Err(Error::precondition(format!(
            "lower solution needs lambda1 < 0, got {lambda1} ({})",
            classify_threshold(
                &EigenResult::closed_form(crate::eigen::EigenMethod::PeriodMap, lambda1, p.tau),
                DEFAULT_MARGIN
            )
            .name()
        )));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::domain("epsilon must be positive"));
    }
    let rate = lambda1 + envelope_rate(lambda1);
    let n = base.n;
    let mut out = base.clone();
    for k in 0..base.levels() {
        let s = epsilon * (rate * (p.tau - k as f64 * cfg.dt)).exp();
        for x in out.u[k * n..(k + 1) * n]
            .iter_mut()
            .chain(&mut out.v[k * n..(k + 1) * n])
        {
            *x *= s;
        }
    }
    Ok(out)
}

/// A lower solution accepted by [`find_lower_solution`].
#[derive(Debug, Clone, PartialEq)]
pub struct LowerSeed {
    pub orbit: PeriodOrbit,
    pub epsilon: f64,
    pub alpha: f64,
    pub halvings: usize,
}

/// Whether the small-amplitude inequalities behind the lower solution hold.
fn smallness_holds(p: &ModelParams, lambda1: f64, cfg: &SteadyConfig, base: &PeriodOrbit, epsilon: f64) -> bool {
    let alpha = envelope_rate(lambda1);
    let rate = lambda1 + alpha;
    let wf = p.growth.lower_bound_witness();
    let wg = p.impulse.lower_bound_witness();
    let g0 = match p.impulse.prime_at_zero() {
        Ok(g) => g,
        Err(_) => return false,
    };
    if epsilon > wf.range.min(wg.range) {
        return false;
    }
    let last = base.levels() - 1;
    let tip = base.u(last).iter().fold(0.0f64, |m, &x| m.max(x));
    if g0 * ((rate * p.tau).exp() - 1.0) + wg.coefficient * (epsilon * tip).powf(wg.exponent - 1.0) > 0.0 {
        return false;
    }
    (0..base.levels()).all(|k| {
        let s = epsilon * (rate * (p.tau - k as f64 * cfg.dt)).exp();
        base.u(k)
            .iter()
            .zip(base.v(k))
            .all(|(&phi, &psi)| wf.coefficient * s.powf(wf.exponent - 1.0) * phi.powf(wf.exponent) <= alpha * psi)
    })
}

/// Halves `ε` from 1e-3 until the smallness inequalities hold, the seed
/// lies below `upper`, and one iteration does not decrease it.
pub fn find_lower_solution(
    p: &ModelParams,
    eig: &EigenResult,
    cfg: &SteadyConfig,
    upper: &PeriodOrbit,
) -> Result<LowerSeed> {
    let base = eigen_orbit(p, eig, cfg)?;
    let mut sweeper = Sweeper::new(p, cfg)?;
    let mut image = base.clone();
    let mut epsilon = EPSILON_START;
    for halvings in 0..=MAX_HALVINGS {
        if smallness_holds(p, eig.lambda1, cfg, &base, epsilon) {
            let seed = lower_from_orbit(p, eig.lambda1, cfg, &base, epsilon)?;
            sweeper.apply(&seed, &mut image)?;
            if seed.excess_over(upper) <= 0.0 && seed.excess_over(&image) <= ORDER_SLACK {
                return Ok(LowerSeed {
                    orbit: seed,
                    epsilon,
                    alpha: envelope_rate(eig.lambda1),
                    halvings,
                });
            }
        }
        epsilon *= 0.5;
    }
    Err(Error::precondition(format!(
        "no admissible epsilon after {MAX_HALVINGS} halvings from {EPSILON_START}"
    )))
}

/// Runs the monotone iteration from `seed` until successive iterates differ
/// by less than `cfg.tol`.
pub fn monotone_iterate(
    p: &ModelParams,
    seed: &PeriodOrbit,
    kind: Seed,
    cfg: &SteadyConfig,
) -> Result<(PeriodicSolution, IterationTrace)> {
    let mut run = SeededRun::new(p, seed, kind, cfg)?;
    while !run.converged {
        run.advance()?;
    }
    Ok(run.finish())
}

struct SeededRun<'a> {
    sweeper: Sweeper<'a>,
    cfg: SteadyConfig,
    kind: Seed,
    current: PeriodOrbit,
    next: PeriodOrbit,
    trace: IterationTrace,
    converged: bool,
}

impl<'a> SeededRun<'a> {
    fn new(p: &'a ModelParams, seed: &PeriodOrbit, kind: Seed, cfg: &SteadyConfig) -> Result<Self> {
        let sweeper = Sweeper::new(p, cfg)?;
        if seed.levels() != sweeper.levels() || seed.interior() != cfg.grid.interior() {
            return Err(Error::domain("seed does not match the steady-state discretization"));
        }
        let mut trace = IterationTrace::new(kind, sweeper.m);
        trace.sup_u.push(seed.sup_u());
        trace.sup_v.push(seed.sup_v());
        trace.diff.push(f64::NAN);
        Ok(Self {
            sweeper,
            cfg: *cfg,
            kind,
            current: seed.clone(),
            next: seed.clone(),
            trace,
            converged: false,
        })
    }

    /// One iteration; records the violation of the expected monotone direction.
    fn advance(&mut self) -> Result<()> {
        if self.trace.iterations >= self.cfg.max_iters {
            return Err(Error::NotConverged {
                method: "monotone iteration",
                iterations: self.trace.iterations,
                residual: self.trace.diff.last().copied().unwrap_or(f64::NAN),
            });
        }
        self.sweeper.apply(&self.current, &mut self.next)?;
        let violation = match self.kind {
            Seed::Upper => self.next.excess_over(&self.current),
            _ => self.current.excess_over(&self.next),
        };
        self.trace.max_order_violation = self.trace.max_order_violation.max(violation);
        let diff = self.next.sup_diff(&self.current);
        std::mem::swap(&mut self.current, &mut self.next);
        self.trace.record(&self.current, diff);
        self.converged = diff < self.cfg.tol;
        Ok(())
    }

    fn finish(self) -> (PeriodicSolution, IterationTrace) {
        let sol = PeriodicSolution {
            grid: self.cfg.grid,
            tau: self.sweeper.p.tau,
            dt: self.cfg.dt,
            theta: self.cfg.theta,
            defect: self.sweeper.defect(&self.current),
            orbit: self.current,
            seed: self.kind,
            iterations: self.trace.iterations,
        };
        (sol, self.trace)
    }
}

/// Outcome of the paired upper/lower iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyPair {
    pub eigen: EigenResult,
    pub upper_level: (f64, f64),
    pub lower_seed: LowerSeed,
    pub upper: PeriodicSolution,
    pub lower: PeriodicSolution,
    pub upper_trace: IterationTrace,
    pub lower_trace: IterationTrace,
    /// Sup-norm distance between the two limits.
    pub agreement: f64,
    /// Largest violation of `lower ≤ lower′ ≤ upper′ ≤ upper` over all iterations.
    pub max_order_violation: f64,
}

/// Computes `λ₁` on the steady-state discretization, builds both seeds and
/// iterates them in lockstep, checking the ordering chain every iteration.
pub fn solve_periodic_pair(p: &ModelParams, cfg: &SteadyConfig, data_bound: f64) -> Result<SteadyPair> {
    p.validate()?;
    let steps = cfg.steps(p.tau)?;
    let eigen = power_iteration_lambda1(p, &cfg.period_map())?;
    if !(eigen.lambda1 < 0.0) {
        return Err(Error::precondition(format!(
            "no positive periodic solution: lambda1 = {:.6} ({})",
            eigen.lambda1,
            classify_threshold(&eigen, DEFAULT_MARGIN).name()
        )));
    }
    let upper_level = build_upper_solution(p, data_bound)?;
    let upper_seed = PeriodOrbit::filled(steps + 1, cfg.grid.interior(), upper_level.0, upper_level.1);
    let lower_seed = find_lower_solution(p, &eigen, cfg, &upper_seed)?;

    let mut hi = SeededRun::new(p, &upper_seed, Seed::Upper, cfg)?;
    let mut lo = SeededRun::new(p, &lower_seed.orbit, Seed::Lower, cfg)?;
    let mut chain = lo.current.excess_over(&hi.current).max(0.0);
    while !(hi.converged && lo.converged) {
        let (a, b) = rayon::join(
            || if hi.converged { Ok(()) } else { hi.advance() },
            || if lo.converged { Ok(()) } else { lo.advance() },
        );
        a?;
        b?;
        chain = chain.max(lo.current.excess_over(&hi.current));
    }
    let (upper, upper_trace) = hi.finish();
    let (lower, lower_trace) = lo.finish();
    let max_order_violation = chain
        .max(upper_trace.max_order_violation)
        .max(lower_trace.max_order_violation);
    Ok(SteadyPair {
        agreement: upper.orbit.sup_diff(&lower.orbit),
        eigen,
        upper_level,
        lower_seed,
        upper,
        lower,
        upper_trace,
        lower_trace,
        max_order_violation,
    })
}

/// Evolves `sol` over one pulsed period with the pde-engine, starting from
/// its pre-pulse value `U(τ) = U(0)`, and returns the sup-norm distance to
/// `sol` over every time level.
pub fn fixed_point_residual(p: &ModelParams, sol: &PeriodicSolution) -> Result<f64> {
    let steps = sol.steps();
    let cfg = SolverConfig {
        dt: sol.dt,
        t_end: sol.tau,
        theta: sol.theta,
        snapshot_stride: 1,
    };
    let tr = simulate(p, &sol.grid, &cfg, sol.orbit.u(steps), sol.orbit.v(steps))?;
    let mut worst = 0.0f64;
    for s in tr.snapshots.iter().skip(1) {
        let mut k = (s.t / sol.dt).round() as usize;
        if s.post_impulse && k == steps {
            k = 0;
        }
        worst = worst
            .max(sup_diff(&s.u, sol.orbit.u(k)))
            .max(sup_diff(&s.v, sol.orbit.v(k)));
    }
    Ok(worst)
}

/// Distance of a trajectory's period sections to a periodic solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    /// `(m, max over stored snapshots of period m of the sup-norm distance)`.
    pub per_period: Vec<(usize, f64)>,
    pub final_distance: f64,
    /// Whether the distances over the second half of the run never increase.
    pub tail_nonincreasing: bool,
}

impl SandwichReport {
    /// First period from which every distance is below `tol`.
    pub fn settled_by(&self, tol: f64) -> Option<usize> {
        let last_bad = self.per_period.iter().rposition(|&(_, d)| !(d < tol));
        match last_bad {
            None => self.per_period.first().map(|&(m, _)| m),
            Some(i) => self.per_period.get(i + 1).map(|&(m, _)| m),
        }
    }
}

/// Compares `u(t + mτ)` of a simulation with `U(t)` period by period.
///
/// The trajectory must use the grid, step and θ of `sol`. Post-pulse
/// snapshots at `mτ` match level 0 of period `m`; pre-pulse ones match
/// level `N` of period `m − 1`.
pub fn verify_sandwich(p: &ModelParams, sol: &PeriodicSolution, tr: &Trajectory) -> Result<SandwichReport> {
    if tr.grid != sol.grid {
        return Err(Error::domain("trajectory and periodic solution use different grids"));
    }
    if (tr.dt - sol.dt).abs() > 1e-12 * sol.dt || tr.theta != sol.theta || (p.tau - sol.tau).abs() > 1e-12 {
        return Err(Error::domain(
            "trajectory and periodic solution use different time discretizations",
        ));
    }
    let steps = sol.steps();
    let mut per_period: Vec<(usize, f64)> = Vec::new();
    for s in &tr.snapshots {
        let global = (s.t / sol.dt).round() as usize;
        let (m, k) = match (global / steps, global % steps, s.post_impulse) {
            (0, 0, false) => continue,
            (m, 0, false) => (m - 1, steps),
            (m, k, _) => (m, k),
        };
        let d = sup_diff(&s.u, sol.orbit.u(k)).max(sup_diff(&s.v, sol.orbit.v(k)));
        match per_period.last_mut() {
            Some((last, worst)) if *last == m => *worst = worst.max(d),
            _ => per_period.push((m, d)),
        }
    }
    if per_period.is_empty() {
        return Err(Error::domain("trajectory holds no comparable snapshots"));
    }
    let half = per_period.len() / 2;
    let tail_nonincreasing = per_period[half..]
        .windows(2)
        .all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9) + 1e-14);
    Ok(SandwichReport {
        final_distance: per_period.last().map(|&(_, d)| d).unwrap_or(0.0),
        per_period,
        tail_nonincreasing,
    })
}

impl From<&PeriodicSolution> for FieldPair {
    /// The pre-pulse state `(U(τ), V(τ))`.
    fn from(sol: &PeriodicSolution) -> Self {
        let k = sol.steps();
        FieldPair {
            u: sol.orbit.u(k).to_vec(),
            v: sol.orbit.v(k).to_vec(),
        }
    }
}
