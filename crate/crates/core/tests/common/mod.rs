#![allow(dead_code)]

use std::f64::consts::PI;

use fo_pulse::model::{check_assumptions, EvolutionRate, ModelParams, ResponseFn};
use fo_pulse::pde::{apply_impulse, simulate, solution_bounds, Grid1D, SolverConfig, StateField, Trajectory};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const PROPERTY_SEED: u64 = 0x5eed_2024;
pub const PROPERTY_DRAWS: usize = 20;
pub const POSITIVITY_TOL: f64 = -1e-12;
pub const ORDER_TOL: f64 = 1e-10;

/// Separable test problem: `v ≡ 0`, so `u` solves a scalar heat equation
/// with decay `a11` and `u = e^{−(d1·λ₀ + a11)t}·sin(πx/L)`.
pub fn decoupled(d1: f64, a11: f64, tau: f64) -> ModelParams {
    ModelParams {
        d1,
        d2: 1.0,
        a11,
        a12: 1.0,
        a22: 0.1,
        tau,
        n_dim: 1,
        growth: ResponseFn::Linear { c: 0.0 },
        impulse: ResponseFn::identity(),
        rho: EvolutionRate::fixed(),
        domain_length: PI,
    }
}

pub fn example(a12: f64, m1: f64, tau: f64) -> ModelParams {
    ModelParams {
        d1: 0.05,
        d2: 1.0,
        a11: 0.2,
        a12,
        a22: 0.15,
        tau,
        n_dim: 1,
        growth: ResponseFn::BevertonHolt { m: m1, a: 10.0 },
        impulse: ResponseFn::identity(),
        rho: EvolutionRate::fixed(),
        domain_length: PI,
    }
}

/// One admissible random problem with a discretization satisfying the
/// discrete maximum principle of the θ = 1/2 scheme.
pub struct Draw {
    pub p: ModelParams,
    pub grid: Grid1D,
    pub cfg: SolverConfig,
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
}

fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    let a11 = rng.gen_range(0.05..0.5);
    let a22 = rng.gen_range(0.05..0.5);
    let a12 = rng.gen_range(0.05..1.0);
    let growth = if rng.gen_bool(0.8) {
        ResponseFn::BevertonHolt {
            m: rng.gen_range(0.5..20.0),
            a: rng.gen_range(2.0..20.0),
        }
    } else {
        ResponseFn::Linear {
            c: rng.gen_range(0.0..0.5) * a11 * a22 / a12,
        }
    };
    let impulse = match rng.gen_range(0..3) {
        0 => ResponseFn::identity(),
        1 => {
            let a = rng.gen_range(2.0..20.0);
            ResponseFn::BevertonHolt {
                m: a * rng.gen_range(0.3..1.0),
                a,
            }
        }
        _ => ResponseFn::Linear {
            c: rng.gen_range(0.4..1.0),
        },
    };
    let rho = if rng.gen_bool(0.5) {
        EvolutionRate::fixed()
    } else {
        EvolutionRate::ExpCos {
            amplitude: rng.gen_range(0.7..1.3),
            exponent: rng.gen_range(-0.8..0.8) * a11.min(a22) / PI,
        }
    };
    ModelParams {
        d1: rng.gen_range(0.02..1.0),
        d2: rng.gen_range(0.02..1.0),
        a11,
        a12,
        a22,
        // an evolving domain repeats every 2 time units
        tau: if rho.period().is_some() {
            2.0 * rng.gen_range(1..=2) as f64
        } else {
            0.5 * rng.gen_range(2..=8) as f64
        },
        n_dim: 1,
        growth,
        impulse,
        rho,
        domain_length: rng.gen_range(1.0..2.0 * PI),
    }
}

pub fn random_draw(rng: &mut ChaCha8Rng) -> Draw {
    let p = loop {
        let p = random_params(rng);
        if check_assumptions(&p, 64).map(|r| r.all_passed()).unwrap_or(false) {
            break p;
        }
    };
    let grid = Grid1D::new(p.domain_length, 32).unwrap();
    let rho_min = (0..=1000)
        .map(|k| p.rho.value(p.tau * k as f64 / 1000.0))
        .fold(f64::INFINITY, f64::min);
    let (_, m_hat) = p.dilution_extrema();
    let kappa = p.d1.max(p.d2) / (rho_min * rho_min * grid.dx() * grid.dx());
    let decay = m_hat.abs() + p.a11.max(p.a22);
    // r = dt·κ ≤ 1/2 and dt·(|δ| + a) ≤ 1/2 keep every update order preserving
    let steps = ((2.0 * p.tau * (kappa + decay)).ceil() as usize).max(20);
    let mut cfg = SolverConfig::for_period(p.tau, steps, 3.0 * p.tau);
    cfg.snapshot_stride = (steps / 10).max(1);
    let n = grid.interior();
    let amp_u = rng.gen_range(0.0..10.0);
    let amp_v = rng.gen_range(0.0..2.0);
    let u0 = (0..n).map(|_| rng.gen_range(0.0..=amp_u)).collect();
    let v0 = (0..n).map(|_| rng.gen_range(0.0..=amp_v)).collect();
    Draw { p, grid, cfg, u0, v0 }
}

pub fn check_positivity(tr: &Trajectory) -> Result<(), String> {
    for s in &tr.snapshots {
        let low = s.u.iter().chain(&s.v).fold(f64::INFINITY, |m, &x| m.min(x));
        if low < POSITIVITY_TOL {
            return Err(format!("negative value {low:e} at t={}", s.t));
        }
    }
    Ok(())
}

pub fn check_bounds(d: &Draw, tr: &Trajectory) -> Result<(), String> {
    let (c1, c2) = solution_bounds(&d.p, &d.u0, &d.v0).map_err(|e| e.to_string())?;
    for s in &tr.snapshots {
        if s.sup_u() > c1 || s.sup_v() > c2 {
            return Err(format!(
                "bound exceeded at t={}: ({}, {}) vs ({c1}, {c2})",
                s.t,
                s.sup_u(),
                s.sup_v()
            ));
        }
    }
    Ok(())
}

pub fn check_comparison(lo: &Trajectory, hi: &Trajectory) -> Result<(), String> {
    if lo.snapshots.len() != hi.snapshots.len() {
        return Err("snapshot counts differ".into());
    }
    for (a, b) in lo.snapshots.iter().zip(&hi.snapshots) {
        let excess =
            a.u.iter()
                .zip(&b.u)
                .chain(a.v.iter().zip(&b.v))
                .fold(f64::NEG_INFINITY, |m, (x, y)| m.max(x - y));
        if excess > ORDER_TOL {
            return Err(format!("ordering violated by {excess:e} at t={}", a.t));
        }
    }
    Ok(())
}

pub fn check_impulse(d: &Draw, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = d.grid.interior();
    for k in 0..10 {
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1e3)).collect();
        let s = StateField::new(k as f64 * d.p.tau, u, vec![0.0; n]);
        let out = apply_impulse(&d.p, &s).map_err(|e| e.to_string())?;
        if let Some(j) = (0..n).find(|&j| out.u[j] > s.u[j]) {
            return Err(format!("impulse increased u at node {j}: {} -> {}", s.u[j], out.u[j]));
        }
    }
    Ok(())
}

/// Positivity, boundedness, comparison and impulse checks for one draw.
pub fn check_draw(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let d = random_draw(rng);
    let tr = simulate(&d.p, &d.grid, &d.cfg, &d.u0, &d.v0).map_err(|e| e.to_string())?;
    check_positivity(&tr)?;
    check_bounds(&d, &tr)?;
    let u1: Vec<f64> = d.u0.iter().map(|&x| x + rng.gen_range(0.0..1.0)).collect();
    let v1: Vec<f64> = d.v0.iter().map(|&x| x + rng.gen_range(0.0..0.5)).collect();
    let hi = simulate(&d.p, &d.grid, &d.cfg, &u1, &v1).map_err(|e| e.to_string())?;
    check_comparison(&tr, &hi)?;
    check_impulse(&d, rng)
}
