//! One PASS/FAIL line per acceptance criterion; exits nonzero on any failure.

mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fo_pulse::config::{Preset, RunConfig, SweepKey, SweepSpec};
use fo_pulse::eigen::{
    adjoint_lambda1, exact_lambda1_fixed, lambda1_lower_bound, lambda1_upper_bound, power_iteration_lambda1,
};
use fo_pulse::experiments::{run_simulate, run_steady, EXTINCTION_THRESHOLD};
use fo_pulse::model::{mean_inv_rho_sq, EvolutionRate, ResponseFn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

const EXACT_TOL: f64 = 5e-4;
const EXACT_BUDGET: Duration = Duration::from_millis(1);
const BOUND_TOL: f64 = 1e-3;
const BESSEL_TOL: f64 = 1e-8;
const COARSE_TOL: f64 = 1e-2;
const FINE_TOL: f64 = 3e-3;
const MIN_SPATIAL_ORDER: f64 = 1.8;
const EIGEN_BUDGET: Duration = Duration::from_secs(60);
const ADJOINT_TOL: f64 = 1e-2;
const MONOTONE_SLACK: f64 = 1e-6;
const PERIODICITY_TOL: f64 = 1e-4;
const ORDER_SLACK: f64 = 1e-10;
const AGREEMENT_TOL: f64 = 1e-4;
const FIXED_POINT_TOL: f64 = 1e-5;

type Check = std::result::Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn with_pulse(mut rc: RunConfig) -> RunConfig {
    rc.params.impulse = ResponseFn::BevertonHolt { m: 9.0, a: 10.0 };
    rc
}

fn closed_form_values() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for (preset, want) in [
        (Preset::Example1, 0.228),
        (Preset::Example2, -0.306),
        (Preset::Example3Fixed, 0.037),
    ] {
        let p = RunConfig::preset(preset).params;
        let start = Instant::now();
        let l = exact_lambda1_fixed(&p).map_err(err)?;
        let took = start.elapsed();
        ok &= (l - want).abs() <= EXACT_TOL && took < EXACT_BUDGET;
        lines.push(format!("{}={l:.5} ({:.1?})", preset.name(), took));
    }
    ensure(ok, lines.join(", "))
}

/// `A⁻²·e^{−2B}·I₀(2B)`, the period mean of `ρ⁻²` for `ρ = A·e^{B(1−cos πt)}`.
fn bessel_mean(amplitude: f64, exponent: f64) -> f64 {
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for k in 1..200 {
        term *= exponent * exponent / (k * k) as f64;
        sum += term;
    }
    (-2.0 * exponent).exp() * sum / (amplitude * amplitude)
}

fn closed_form_bounds() -> Check {
    let p3 = RunConfig::preset(Preset::Example3Evolving).params;
    let p4 = RunConfig::preset(Preset::Example4Evolving).params;
    let up = lambda1_upper_bound(&p3).map_err(err)?;
    let lo = lambda1_lower_bound(&p4).map_err(err)?;
    let mut gap = 0.0f64;
    for p in [&p3, &p4] {
        if let EvolutionRate::ExpCos { amplitude, exponent } = p.rho {
            let q = mean_inv_rho_sq(&p.rho, p.tau).map_err(err)?;
            gap = gap.max((q - bessel_mean(amplitude, exponent)).abs());
        }
    }
    ensure(
        (up + 0.0252).abs() <= BOUND_TOL && (lo - 0.113).abs() <= BOUND_TOL && gap <= BESSEL_TOL,
        format!("upper(example3_evolving)={up:.5}, lower(example4_evolving)={lo:.5}, bessel gap={gap:.1e}"),
    )
}

fn numeric_eigen(preset: Preset, n_interior: usize, steps: usize) -> Result<(f64, Duration), String> {
    let mut rc = RunConfig::preset(preset);
    rc.n_interior = n_interior;
    rc.steps_per_period = steps;
    let start = Instant::now();
    let r = power_iteration_lambda1(&rc.params, &rc.period_map_config().map_err(err)?).map_err(err)?;
    Ok((r.lambda1, start.elapsed()))
}

fn numeric_vs_exact() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut slowest = Duration::ZERO;
    for preset in [Preset::Example1, Preset::Example2, Preset::Example3Fixed] {
        let exact = exact_lambda1_fixed(&RunConfig::preset(preset).params).map_err(err)?;
        let (coarse, t1) = numeric_eigen(preset, 200, 4000)?;
        let (fine, t2) = numeric_eigen(preset, 400, 8000)?;
        slowest = slowest.max(t1).max(t2);
        let (e1, e2) = ((coarse - exact).abs(), (fine - exact).abs());
        ok &= e1 < COARSE_TOL && e2 < FINE_TOL;
        lines.push(format!("{} err {e1:.1e}/{e2:.1e}", preset.name()));
    }
    // N + 1 = 100, 200, 400 at a common step
    let ladder: Vec<f64> = [99, 199, 399]
        .iter()
        .map(|&n| numeric_eigen(Preset::Example1, n, 8000).map(|r| r.0))
        .collect::<Result<_, _>>()?;
    let order = ((ladder[0] - ladder[1]) / (ladder[1] - ladder[2])).abs().log2();
    ok &= order >= MIN_SPATIAL_ORDER && slowest < EIGEN_BUDGET;
    lines.push(format!("spatial order {order:.3}, slowest {slowest:.2?}"));
    ensure(ok, lines.join(", "))
}

fn adjoint_agreement() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for preset in [Preset::Example1, Preset::Example2] {
        let rc = RunConfig::preset(preset);
        let cfg = rc.period_map_config().map_err(err)?;
        let forward = power_iteration_lambda1(&rc.params, &cfg).map_err(err)?.lambda1;
        let adjoint = adjoint_lambda1(&rc.params, &cfg).map_err(err)?.lambda1;
        ok &= (forward - adjoint).abs() < ADJOINT_TOL;
        lines.push(format!("{} |diff|={:.1e}", preset.name(), (forward - adjoint).abs()));
    }
    ensure(ok, lines.join(", "))
}

fn sweep_lambdas(key: SweepKey, values: &[f64]) -> Result<Vec<f64>, String> {
    let spec = SweepSpec::new(key, values.to_vec(), RunConfig::preset(Preset::Example1)).map_err(err)?;
    values
        .iter()
        .map(|&v| {
            let rc = spec.point(v).map_err(err)?;
            let cfg = rc.period_map_config().map_err(err)?;
            power_iteration_lambda1(&rc.params, &cfg)
                .map(|r| r.lambda1)
                .map_err(err)
        })
        .collect()
}

fn monotonicity() -> Check {
    let gs = [1.0, 0.9, 0.8];
    let ls = [PI / 2.0, PI, 2.0 * PI];
    let by_g = sweep_lambdas(SweepKey::GPrime0Scale, &gs)?;
    let by_l = sweep_lambdas(SweepKey::DomainLength, &ls)?;
    let g_ok = by_g.windows(2).all(|w| w[1] - w[0] > MONOTONE_SLACK);
    let l_ok = by_l.windows(2).all(|w| w[0] - w[1] > MONOTONE_SLACK);
    ensure(g_ok && l_ok, format!("g'(0) sweep {by_g:.4?}, L sweep {by_l:.4?}"))
}

fn threshold_dynamics(dir: &Path) -> Check {
    let run = |rc: &RunConfig, name: &str| run_simulate(rc, &dir.join(name)).map_err(err);
    let e1 = run(&RunConfig::preset(Preset::Example1), "e1")?;
    let e1p = run(&with_pulse(RunConfig::preset(Preset::Example1)), "e1p")?;
    let e2 = run(&RunConfig::preset(Preset::Example2), "e2")?;
    let e2p = run(&with_pulse(RunConfig::preset(Preset::Example2)), "e2p")?;
    let ext_ok = matches!((e1.extinction_time, e1p.extinction_time), (Some(a), Some(b)) if b < a);
    let defect = e2.tail_defect.unwrap_or(f64::INFINITY);
    ensure(
        ext_ok && defect < PERIODICITY_TOL && e2p.tail_peak_u < e2.tail_peak_u,
        format!(
            "example1 below {EXTINCTION_THRESHOLD:e} at {:?} vs {:?} pulsed, example2 tail defect {defect:.1e}, peak {:.4} vs {:.4} pulsed",
            e1.extinction_time, e1p.extinction_time, e2.tail_peak_u, e2p.tail_peak_u
        ),
    )
}

fn periodic_steady_state(dir: &Path) -> Check {
    let o = run_steady(&RunConfig::preset(Preset::Example2), &dir.join("steady2")).map_err(err)?;
    let p = &o.pair;
    ensure(
        p.max_order_violation <= ORDER_SLACK && p.agreement < AGREEMENT_TOL && o.fixed_point_residual < FIXED_POINT_TOL,
        format!(
            "order violation {:.1e}, agreement {:.1e}, fixed-point residual {:.1e}, iterations {}/{}",
            p.max_order_violation, p.agreement, o.fixed_point_residual, p.upper.iterations, p.lower.iterations
        ),
    )
}

fn property_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(common::PROPERTY_SEED);
    for i in 0..common::PROPERTY_DRAWS {
        common::check_draw(&mut rng).map_err(|e| format!("draw {i}: {e}"))?;
    }
    Ok(format!("{} draws", common::PROPERTY_DRAWS))
}

fn fourth_example_fixed(dir: &Path) -> Check {
    let o = run_steady(&RunConfig::preset(Preset::Example4Fixed), &dir.join("steady4")).map_err(err)?;
    let p = &o.pair;
    ensure(
        p.eigen.lambda1 < 0.0 && p.upper.is_positive() && p.lower.is_positive(),
        format!(
            "lambda1={:.5}, min value {:.3e}, agreement {:.1e}",
            p.eigen.lambda1,
            p.upper.orbit.min_value(),
            p.agreement
        ),
    )
}

fn main() -> ExitCode {
    let dir = TempDir::new().expect("temporary directory");
    let checks: Vec<Criterion> = vec![
        ("closed-form eigenvalues", Box::new(closed_form_values)),
        ("closed-form bounds", Box::new(closed_form_bounds)),
        ("numeric vs exact eigenvalue", Box::new(numeric_vs_exact)),
        ("adjoint agreement", Box::new(adjoint_agreement)),
        ("monotonicity", Box::new(monotonicity)),
        ("threshold dynamics", Box::new(|| threshold_dynamics(dir.path()))),
        ("periodic steady state", Box::new(|| periodic_steady_state(dir.path()))),
        ("property suite", Box::new(property_suite)),
        (
            "fixed-domain fourth example",
            Box::new(|| fourth_example_fixed(dir.path())),
        ),
    ];
    let mut failed = 0;
    for (name, check) in &checks {
        let start = Instant::now();
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {name}: {detail} [{:.1?}]", start.elapsed());
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
