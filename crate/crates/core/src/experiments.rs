//! Command implementations behind the `fo-pulse` binary.
//!
//! Each command writes its CSV files and a `manifest.txt` holding the
//! resolved configuration into the output directory.

use std::path::Path;

use rayon::prelude::*;

use crate::config::{RunConfig, SweepSpec};
use crate::eigen::{
    adjoint_lambda1, classify_threshold, exact_lambda1_fixed, lambda1_lower_bound, lambda1_upper_bound,
    power_iteration_lambda1, EigenMethod, EigenResult, Verdict, DEFAULT_MARGIN,
};
use crate::error::{Error, Result};
use crate::io;
use crate::model::{check_assumptions, AssumptionReport};
use crate::pde::{periodicity_defect, simulate, Trajectory};
use crate::steady::{fixed_point_residual, solve_periodic_pair, SteadyPair};

/// Threshold for the extinction time reported by `simulate`.
pub const EXTINCTION_THRESHOLD: f64 = 1e-3;
/// Periods at the end of a run over which the periodicity defect is taken.
pub const TAIL_PERIODS: f64 = 5.0;
/// Samples per axis for the assumption report.
pub const ASSUMPTION_SAMPLES: usize = 2001;
/// Slack for the monotone-direction check of a sweep.
pub const SWEEP_SLACK: f64 = 1e-6;
/// Time levels per period in the exported periodic solutions.
pub const STEADY_EXPORT_LEVELS: usize = 40;

fn prepare(cfg: &RunConfig, out: &Path) -> Result<()> {
    io::ensure_dir(out)?;
    io::write_text(&out.join("manifest.txt"), &cfg.to_manifest())
}

pub struct SimulateOutcome {
    pub trajectory: Trajectory,
    pub assumptions: AssumptionReport,
    /// First snapshot time with both sup-norms below [`EXTINCTION_THRESHOLD`].
    pub extinction_time: Option<f64>,
    /// Largest periodicity defect over the final periods, when the run is long enough.
    pub tail_defect: Option<f64>,
    /// Largest `sup_u` over the final periods.
    pub tail_peak_u: f64,
}

pub fn run_simulate(cfg: &RunConfig, out: &Path) -> Result<SimulateOutcome> {
    let p = &cfg.params;
    let assumptions = check_assumptions(p, ASSUMPTION_SAMPLES)?;
    prepare(cfg, out)?;
    let (u0, v0) = cfg.initial_data()?;
    let tr = simulate(p, &cfg.grid()?, &cfg.solver_config(), &u0, &v0)?;
    io::write_trajectory(&out.join("trajectory.csv"), &tr)?;
    io::write_summary(&out.join("summary.csv"), &tr)?;
    let t_last = tr.final_state().map(|s| s.t).unwrap_or(0.0);
    let from = t_last - TAIL_PERIODS * p.tau;
    let tail_defect = periodicity_defect(&tr, p.tau).ok().map(|series| {
        series
            .iter()
            .filter(|(t, _)| *t >= from - 1e-9)
            .fold(0.0f64, |m, &(_, d)| m.max(d))
    });
    Ok(SimulateOutcome {
        extinction_time: tr.first_time_below(EXTINCTION_THRESHOLD),
        tail_peak_u: tr.peak_u_after(from),
        tail_defect,
        assumptions,
        trajectory: tr,
    })
}

/// Methods requested from the `eigen` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenSelection {
    All,
    PeriodMap,
    Adjoint,
    Exact,
    Bounds,
}

impl EigenSelection {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "all" => Some(Self::All),
            "period_map" => Some(Self::PeriodMap),
            "adjoint" => Some(Self::Adjoint),
            "exact" => Some(Self::Exact),
            "bounds" => Some(Self::Bounds),
            _ => None,
        }
    }

    pub fn methods(&self) -> &'static [EigenMethod] {
        match self {
            Self::All => &[
                EigenMethod::PeriodMap,
                EigenMethod::Adjoint,
                EigenMethod::ExactFixed,
                EigenMethod::UpperBound,
                EigenMethod::LowerBound,
            ],
            Self::PeriodMap => &[EigenMethod::PeriodMap],
            Self::Adjoint => &[EigenMethod::Adjoint],
            Self::Exact => &[EigenMethod::ExactFixed],
            Self::Bounds => &[EigenMethod::UpperBound, EigenMethod::LowerBound],
        }
    }
}

pub fn compute_eigen(cfg: &RunConfig, method: EigenMethod) -> Result<EigenResult> {
    let p = &cfg.params;
    match method {
        EigenMethod::PeriodMap => power_iteration_lambda1(p, &cfg.period_map_config()?),
        EigenMethod::Adjoint => adjoint_lambda1(p, &cfg.period_map_config()?),
        EigenMethod::ExactFixed => exact_lambda1_fixed(p).map(|l| EigenResult::closed_form(method, l, p.tau)),
        EigenMethod::UpperBound => lambda1_upper_bound(p).map(|l| EigenResult::closed_form(method, l, p.tau)),
        EigenMethod::LowerBound => lambda1_lower_bound(p).map(|l| EigenResult::closed_form(method, l, p.tau)),
    }
}

pub struct EigenOutcome {
    pub results: Vec<EigenResult>,
    pub failures: Vec<(EigenMethod, Error)>,
    /// Verdict of the first spectral or exact result, else the first decisive bound.
    pub verdict: Verdict,
}

pub fn run_eigen(cfg: &RunConfig, selection: EigenSelection, out: &Path) -> Result<EigenOutcome> {
    prepare(cfg, out)?;
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for &m in selection.methods() {
        match compute_eigen(cfg, m) {
            Ok(r) => results.push(r),
            Err(e) => failures.push((m, e)),
        }
    }
    if results.is_empty() {
        return Err(failures.remove(0).1);
    }
    io::write_eigen_rows(&out.join("eigen.csv"), &results)?;
    for r in &results {
        match r.method {
            EigenMethod::PeriodMap => io::write_eigenfunction(&out.join("eigenfunction.csv"), r)?,
            EigenMethod::Adjoint => io::write_eigenfunction(&out.join("adjoint_eigenfunction.csv"), r)?,
            _ => {}
        }
    }
    let verdict = results
        .iter()
        .find(|r| !matches!(r.method, EigenMethod::UpperBound | EigenMethod::LowerBound))
        .map(|r| classify_threshold(r, DEFAULT_MARGIN))
        .or_else(|| {
            results
                .iter()
                .map(|r| classify_threshold(r, DEFAULT_MARGIN))
                .find(|v| *v != Verdict::Indeterminate)
        })
        .unwrap_or(Verdict::Indeterminate);
    Ok(EigenOutcome {
        results,
        failures,
        verdict,
    })
}

pub struct SteadyOutcome {
    pub pair: SteadyPair,
    pub fixed_point_residual: f64,
}

pub fn run_steady(cfg: &RunConfig, out: &Path) -> Result<SteadyOutcome> {
    let scfg = cfg.steady_config()?;
    let pair = solve_periodic_pair(&cfg.params, &scfg, cfg.data_bound())?;
    let residual = fixed_point_residual(&cfg.params, &pair.upper)?;
    prepare(cfg, out)?;
    let stride = (pair.upper.steps() / STEADY_EXPORT_LEVELS).max(1);
    io::write_periodic_solution(&out.join("steady_upper.csv"), &pair.upper, stride)?;
    io::write_periodic_solution(&out.join("steady_lower.csv"), &pair.lower, stride)?;
    io::write_trace(&out.join("trace_upper.csv"), &pair.upper_trace)?;
    io::write_trace(&out.join("trace_lower.csv"), &pair.lower_trace)?;
    let f = io::fmt_float;
    let report = [
        ("lambda1", f(pair.eigen.lambda1)),
        ("upper_u", f(pair.upper_level.0)),
        ("upper_v", f(pair.upper_level.1)),
        ("epsilon", f(pair.lower_seed.epsilon)),
        ("alpha", f(pair.lower_seed.alpha)),
        ("m1", f(pair.upper_trace.m1)),
        ("m2", f(pair.upper_trace.m2)),
        ("upper_iterations", pair.upper.iterations.to_string()),
        ("lower_iterations", pair.lower.iterations.to_string()),
        ("agreement", f(pair.agreement)),
        ("max_order_violation", f(pair.max_order_violation)),
        ("upper_defect", f(pair.upper.defect)),
        ("lower_defect", f(pair.lower.defect)),
        ("fixed_point_residual", f(residual)),
    ]
    .iter()
    .map(|(k, v)| format!("{k}={v}\n"))
    .collect::<String>();
    io::write_text(&out.join("steady_report.txt"), &report)?;
    Ok(SteadyOutcome {
        pair,
        fixed_point_residual: residual,
    })
}

pub struct SweepOutcome {
    pub rows: Vec<(f64, Result<f64>)>,
    /// Whether the expected direction held; `None` when none is asserted
    /// or fewer than two points succeeded.
    pub monotone: Option<bool>,
}

/// Whether `λ₁` moves in `direction` (±1) along the successful points.
pub fn check_direction(values: &[f64], lambdas: &[f64], direction: i8) -> bool {
    values.windows(2).zip(lambdas.windows(2)).all(|(v, l)| {
        let dv = (v[1] - v[0]).signum();
        let step = (l[1] - l[0]) * dv * f64::from(direction);
        step > SWEEP_SLACK
    })
}

pub fn run_sweep(spec: &SweepSpec, workers: usize, out: &Path) -> Result<SweepOutcome> {
    if workers == 0 {
        return Err(Error::config(None, "--workers must be at least 1"));
    }
    prepare(&spec.base, out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    let rows: Vec<(f64, Result<f64>)> = pool.install(|| {
        spec.values
            .par_iter()
            .map(|&v| {
                let l = spec
                    .point(v)
                    .and_then(|c| compute_eigen(&c, EigenMethod::PeriodMap))
                    .map(|r| r.lambda1);
                (v, l)
            })
            .collect()
    });
    let plain: Vec<(f64, Option<f64>)> = rows.iter().map(|(v, l)| (*v, l.as_ref().ok().copied())).collect();
    io::write_sweep(&out.join("sweep.csv"), &plain)?;
    let ok: Vec<(f64, f64)> = plain.iter().filter_map(|(v, l)| l.map(|l| (*v, l))).collect();
    let direction = spec.key.expected_direction();
    let monotone = (direction != 0 && ok.len() >= 2).then(|| {
        let (vs, ls): (Vec<f64>, Vec<f64>) = ok.into_iter().unzip();
        check_direction(&vs, &ls, direction)
    });
    Ok(SweepOutcome { rows, monotone })
}
