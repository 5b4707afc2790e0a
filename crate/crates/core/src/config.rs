//! Flat `key=value` run configuration with named presets.
//!
//! One pair per line, `#` starts a comment, blank lines are ignored. A
//! `preset` key is required; every other key overrides the preset. Numeric
//! values accept plain floats and multiples of `pi` (`pi`, `2*pi`, `pi/2`,
//! `3*pi/4`). The manifest written by [`RunConfig::to_manifest`] uses the
//! same format and reloads to an identical configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::eigen::{PeriodMapConfig, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::model::{EvolutionRate, ModelParams, PeriodicTable, ResponseFn, TabulatedResponse};
use crate::pde::{Grid1D, SolverConfig, DEFAULT_INTERIOR, DEFAULT_SNAPSHOTS_PER_PERIOD, DEFAULT_STEPS_PER_PERIOD};
use crate::steady::{SteadyConfig, ITERATION_CAP, ITERATION_TOL};

/// Default Beverton–Holt impulse `9u/(10+u)`.
pub const DEFAULT_IMPULSE_M: f64 = 9.0;
pub const DEFAULT_IMPULSE_A: f64 = 10.0;
/// End time of extinction presets.
pub const EXTINCTION_T_END: f64 = 200.0;
/// End time of persistence presets, in periods.
pub const PERSISTENCE_PERIODS: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Example1,
    Example2,
    Example3Fixed,
    Example3Evolving,
    Example4Fixed,
    Example4Evolving,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Example1,
        Preset::Example2,
        Preset::Example3Fixed,
        Preset::Example3Evolving,
        Preset::Example4Fixed,
        Preset::Example4Evolving,
        Preset::Custom,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Example1 => "example1",
            Preset::Example2 => "example2",
            Preset::Example3Fixed => "example3_fixed",
            Preset::Example3Evolving => "example3_evolving",
            Preset::Example4Fixed => "example4_fixed",
            Preset::Example4Evolving => "example4_evolving",
            Preset::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    /// Short description. The third example is stated with `ρ = 0.7·e^{2(1−cos πt)}`
    /// in one place and `e^{2(1−cos πt)}` in another; the preset uses amplitude 1.
    pub fn help(&self) -> &'static str {
        match self {
            Preset::Example1 => "fixed domain, weak growth (m1=1, a12=0.2, tau=2); extinction",
            Preset::Example2 => "fixed domain, strong growth (m1=9, a12=0.9, tau=5); persistence",
            Preset::Example3Fixed => "fixed domain, d2=0.1, a11=0.17, m1=1.5; extinction",
            Preset::Example3Evolving => {
                "rho(t)=exp(2(1-cos pi t)), amplitude 1 (the 0.7 variant is not used); persistence"
            }
            Preset::Example4Fixed => "fixed domain, d1=d2=0.75, m1=20; persistence",
            Preset::Example4Evolving => "rho(t)=0.7 exp(-0.15(1-cos pi t)); extinction",
            Preset::Custom => "no defaults for the rates; d1, d2, a11, a12, a22 and tau are required",
        }
    }

    /// Whether the preset's expected outcome is persistence.
    pub fn persists(&self) -> bool {
        matches!(
            self,
            Preset::Example2 | Preset::Example3Evolving | Preset::Example4Fixed
        )
    }
}

/// Parameter swept by the `sweep` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKey {
    /// `g′(0)` realized by a Beverton–Holt impulse with `m2 = value·a2`.
    GPrime0Scale,
    DomainLength,
    RhoAmplitude,
    RhoExponent,
}

impl SweepKey {
    pub fn name(&self) -> &'static str {
        match self {
            SweepKey::GPrime0Scale => "gprime0_scale",
            SweepKey::DomainLength => "domain_length",
            SweepKey::RhoAmplitude => "rho_amplitude",
            SweepKey::RhoExponent => "rho_exponent",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            SweepKey::GPrime0Scale,
            SweepKey::DomainLength,
            SweepKey::RhoAmplitude,
            SweepKey::RhoExponent,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }

    /// `+1` if `λ₁` must increase with the swept value, `−1` if it must
    /// decrease, `0` when no direction is asserted.
    pub fn expected_direction(&self) -> i8 {
        match self {
            // λ₁ increases as g′(0) decreases
            SweepKey::GPrime0Scale => -1,
            SweepKey::DomainLength => -1,
            SweepKey::RhoAmplitude | SweepKey::RhoExponent => 0,
        }
    }
}

/// A sweep over one key on top of a base configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub key: SweepKey,
    pub values: Vec<f64>,
    pub base: RunConfig,
}

impl SweepSpec {
    pub fn new(key: SweepKey, values: Vec<f64>, base: RunConfig) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config(None, "sweep_values must not be empty"));
        }
        let up = values.windows(2).all(|w| w[1] > w[0]);
        let down = values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::config(None, "sweep_values must be strictly monotone"));
        }
        Ok(Self { key, values, base })
    }

    /// The base configuration with the swept key set to `value`.
    pub fn point(&self, value: f64) -> Result<RunConfig> {
        let mut cfg = self.base.clone();
        let p = &mut cfg.params;
        match self.key {
            SweepKey::GPrime0Scale => {
                if !(value > 0.0 && value <= 1.0) {
                    return Err(Error::domain(format!("gprime0_scale must lie in (0, 1], got {value}")));
                }
                let a = match p.impulse {
                    ResponseFn::BevertonHolt { a, .. } => a,
                    _ => DEFAULT_IMPULSE_A,
                };
                p.impulse = ResponseFn::BevertonHolt { m: value * a, a };
            }
            SweepKey::DomainLength => p.domain_length = value,
            SweepKey::RhoAmplitude | SweepKey::RhoExponent => {
                let (mut amplitude, mut exponent) = match p.rho {
                    EvolutionRate::ExpCos { amplitude, exponent } => (amplitude, exponent),
                    EvolutionRate::Constant(c) => (c, 0.0),
                    EvolutionRate::Tabulated(_) => {
                        return Err(Error::config(None, "rho sweeps need an exp_cos or constant profile"))
                    }
                };
                if self.key == SweepKey::RhoAmplitude {
                    amplitude = value;
                } else {
                    exponent = value;
                }
                p.rho = EvolutionRate::ExpCos { amplitude, exponent };
            }
        }
        cfg.params.validate()?;
        Ok(cfg)
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Preset,
    pub params: ModelParams,
    pub u0_amp: f64,
    pub v0_amp: f64,
    pub n_interior: usize,
    pub steps_per_period: usize,
    pub theta: f64,
    pub t_end: f64,
    pub snapshots_per_period: usize,
    pub eigen_tol: f64,
    pub eigen_max_iters: usize,
    pub steady_theta: f64,
    pub steady_tol: f64,
    pub steady_max_iters: usize,
    pub sweep: Option<(SweepKey, Vec<f64>)>,
}

fn example1_params() -> ModelParams {
    ModelParams {
        d1: 0.05,
        d2: 1.0,
        a11: 0.2,
        a12: 0.2,
        a22: 0.15,
        tau: 2.0,
        n_dim: 1,
        growth: ResponseFn::BevertonHolt { m: 1.0, a: 10.0 },
        impulse: ResponseFn::identity(),
        rho: EvolutionRate::fixed(),
        domain_length: PI,
    }
}

impl RunConfig {
    /// Resolved defaults of a preset. `Custom` starts from the first
    /// example's values; [`parse_config`] requires the rates to be set.
    pub fn preset(preset: Preset) -> Self {
        let mut p = example1_params();
        match preset {
            Preset::Example1 | Preset::Custom => {}
            Preset::Example2 => {
                p.a12 = 0.9;
                p.growth = ResponseFn::BevertonHolt { m: 9.0, a: 10.0 };
                p.tau = 5.0;
            }
            Preset::Example3Fixed | Preset::Example3Evolving => {
                p.d2 = 0.1;
                p.a11 = 0.17;
                p.a22 = 0.1;
                p.growth = ResponseFn::BevertonHolt { m: 1.5, a: 10.0 };
                if preset == Preset::Example3Evolving {
                    p.rho = EvolutionRate::ExpCos {
                        amplitude: 1.0,
                        exponent: 2.0,
                    };
                }
            }
            Preset::Example4Fixed | Preset::Example4Evolving => {
                p.d1 = 0.75;
                p.d2 = 0.75;
                p.a11 = 0.1;
                p.a12 = 0.5;
                p.a22 = 0.1;
                p.growth = ResponseFn::BevertonHolt { m: 20.0, a: 10.0 };
                if preset == Preset::Example4Evolving {
                    p.rho = EvolutionRate::ExpCos {
                        amplitude: 0.7,
                        exponent: -0.15,
                    };
                }
            }
        }
        let t_end = if preset.persists() {
            PERSISTENCE_PERIODS * p.tau
        } else {
            EXTINCTION_T_END
        };
        Self {
            preset,
            params: p,
            u0_amp: 8.0,
            v0_amp: 0.1,
            n_interior: DEFAULT_INTERIOR,
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            theta: 0.5,
            t_end,
            snapshots_per_period: DEFAULT_SNAPSHOTS_PER_PERIOD,
            eigen_tol: DEFAULT_TOL,
            eigen_max_iters: DEFAULT_MAX_ITERS,
            steady_theta: 1.0,
            steady_tol: ITERATION_TOL,
            steady_max_iters: ITERATION_CAP,
            sweep: None,
        }
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.params.domain_length, self.n_interior)
    }

    pub fn dt(&self) -> f64 {
        self.params.tau / self.steps_per_period as f64
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            dt: self.dt(),
            t_end: self.t_end,
            theta: self.theta,
            snapshot_stride: (self.steps_per_period / self.snapshots_per_period).max(1),
        }
    }

    pub fn period_map_config(&self) -> Result<PeriodMapConfig> {
        Ok(PeriodMapConfig {
            grid: self.grid()?,
            dt: self.dt(),
            theta: self.theta,
            max_iters: self.eigen_max_iters,
            tol: self.eigen_tol,
        })
    }

    pub fn steady_config(&self) -> Result<SteadyConfig> {
        Ok(SteadyConfig {
            grid: self.grid()?,
            dt: self.dt(),
            theta: self.steady_theta,
            tol: self.steady_tol,
            max_iters: self.steady_max_iters,
        })
    }

    /// `(u0_amp·sin(πx/L), v0_amp·sin(πx/L))` on the grid.
    pub fn initial_data(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let g = self.grid()?;
        Ok((g.sine_profile(self.u0_amp), g.sine_profile(self.v0_amp)))
    }

    /// `max(u0_amp, a12/(a11 + m̌)·v0_amp)`, the data part of the upper level.
    pub fn data_bound(&self) -> f64 {
        let (m_check, _) = self.params.dilution_extrema();
        let scale = self.params.a12 / (self.params.a11 + m_check);
        if scale > 0.0 {
            self.u0_amp.max(scale * self.v0_amp)
        } else {
            self.u0_amp
        }
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        match &self.sweep {
            Some((key, values)) => SweepSpec::new(*key, values.clone(), self.clone()),
            None => Err(Error::config(
                None,
                "sweep_key and sweep_values are required for a sweep",
            )),
        }
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.u0_amp >= 0.0 && self.v0_amp >= 0.0) {
            return Err(Error::domain("initial amplitudes must be nonnegative"));
        }
        if self.snapshots_per_period == 0 {
            return Err(Error::domain("snapshots_per_period must be at least 1"));
        }
        if !(self.eigen_tol > 0.0) || self.eigen_max_iters < 10 {
            return Err(Error::domain(
                "eigen_tol must be positive and eigen_max_iters at least 10",
            ));
        }
        if !(self.steady_tol > 0.0) || self.steady_max_iters == 0 {
            return Err(Error::domain(
                "steady_tol must be positive and steady_max_iters at least 1",
            ));
        }
        self.grid()?;
        self.solver_config().validate(self.params.tau)?;
        if !(0.0..=1.0).contains(&self.steady_theta) {
            return Err(Error::domain("steady_theta must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Every resolved parameter as `key=value` lines, floats with 17
    /// significant digits.
    pub fn to_manifest(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        let f = |x: f64| format!("{x:.16e}");
        let p = &self.params;
        put("preset", self.preset.name().to_string());
        for (k, v) in [
            ("d1", p.d1),
            ("d2", p.d2),
            ("a11", p.a11),
            ("a12", p.a12),
            ("a22", p.a22),
            ("tau", p.tau),
            ("domain_length", p.domain_length),
        ] {
            put(k, f(v));
        }
        put("n_dim", p.n_dim.to_string());
        put("growth", p.growth.family_name().to_string());
        for (k, v) in response_keys(&p.growth, '1') {
            put(&k, v);
        }
        put("impulse", impulse_family(&p.impulse).to_string());
        for (k, v) in response_keys(&p.impulse, '2') {
            put(&k, v);
        }
        put("rho", p.rho.family_name().to_string());
        match &p.rho {
            EvolutionRate::Constant(c) => put("rho_constant", f(*c)),
            EvolutionRate::ExpCos { amplitude, exponent } => {
                put("rho_amplitude", f(*amplitude));
                put("rho_exponent", f(*exponent));
            }
            EvolutionRate::Tabulated(t) => put("rho_values", join(t.values().iter().map(|&x| f(x)))),
        }
        put("u0_amp", f(self.u0_amp));
        put("v0_amp", f(self.v0_amp));
        put("n_interior", self.n_interior.to_string());
        put("steps_per_period", self.steps_per_period.to_string());
        put("theta", f(self.theta));
        put("t_end", f(self.t_end));
        put("snapshots_per_period", self.snapshots_per_period.to_string());
        put("eigen_tol", f(self.eigen_tol));
        put("eigen_max_iters", self.eigen_max_iters.to_string());
        put("steady_theta", f(self.steady_theta));
        put("steady_tol", f(self.steady_tol));
        put("steady_max_iters", self.steady_max_iters.to_string());
        if let Some((key, values)) = &self.sweep {
            put("sweep_key", key.name().to_string());
            put("sweep_values", join(values.iter().map(|&x| f(x))));
        }
        out
    }
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(",")
}

fn impulse_family(g: &ResponseFn) -> &'static str {
    match g {
        ResponseFn::Linear { c } if *c == 1.0 => "identity",
        other => other.family_name(),
    }
}

fn response_keys(h: &ResponseFn, suffix: char) -> Vec<(String, String)> {
    let f = |x: f64| format!("{x:.16e}");
    match h {
        ResponseFn::Linear { c } if suffix == '2' && *c == 1.0 => vec![],
        ResponseFn::Linear { c } => vec![(format!("c{suffix}"), f(*c))],
        ResponseFn::BevertonHolt { m, a } => vec![(format!("m{suffix}"), f(*m)), (format!("a{suffix}"), f(*a))],
        ResponseFn::Exponential { b, r } => vec![(format!("b{suffix}"), f(*b)), (format!("r{suffix}"), f(*r))],
        ResponseFn::Tabulated(t) => vec![(
            format!("knots{suffix}"),
            join(t.knots().iter().map(|&(u, h)| format!("{}:{}", f(u), f(h)))),
        )],
    }
}

const KEYS: &[&str] = &[
    "preset",
    "d1",
    "d2",
    "a11",
    "a12",
    "a22",
    "tau",
    "n_dim",
    "domain_length",
    "L",
    "growth",
    "m1",
    "a1",
    "c1",
    "b1",
    "r1",
    "knots1",
    "impulse",
    "m2",
    "a2",
    "c2",
    "b2",
    "r2",
    "knots2",
    "rho",
    "rho_constant",
    "rho_amplitude",
    "rho_exponent",
    "rho_values",
    "u0_amp",
    "v0_amp",
    "n_interior",
    "steps_per_period",
    "theta",
    "t_end",
    "snapshots_per_period",
    "eigen_tol",
    "eigen_max_iters",
    "steady_theta",
    "steady_tol",
    "steady_max_iters",
    "sweep_key",
    "sweep_values",
];

/// Parses a number, allowing `pi` multiples such as `2*pi` or `3*pi/4`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return Some(x);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let coeff = match num.split_once('*') {
        Some((c, p)) if p.trim() == "pi" => c.trim().parse::<f64>().ok()?,
        None if num == "pi" => 1.0,
        None if num == "-pi" => -1.0,
        _ => return None,
    };
    Some(coeff * PI / den)
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn num(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => parse_number(&v)
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| Error::config(Some(line), format!("{key}: not a number: {v:?}"))),
        }
    }

    fn set(&mut self, key: &str, slot: &mut f64) -> Result<()> {
        if let Some(x) = self.num(key)? {
            *slot = x;
        }
        Ok(())
    }

    fn count(&mut self, key: &str, slot: &mut usize) -> Result<()> {
        if let Some((line, v)) = self.take(key) {
            *slot = v
                .parse()
                .map_err(|_| Error::config(Some(line), format!("{key}: not a nonnegative integer: {v:?}")))?;
        }
        Ok(())
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|s| parse_number(s).filter(|x| x.is_finite()))
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(|| Error::config(Some(line), format!("{key}: malformed list {v:?}"))),
        }
    }

    /// Rejects keys that do not belong to the selected family.
    fn forbid(&self, keys: &[&str], family: &str) -> Result<()> {
        for k in keys {
            if let Some((line, _)) = self.map.get(*k) {
                return Err(Error::config(Some(*line), format!("{k} does not apply to {family}")));
            }
        }
        Ok(())
    }
}

fn parse_response(e: &mut Entries, family_key: &str, s: char, current: &ResponseFn) -> Result<ResponseFn> {
    let key = |name: &str| format!("{name}{s}");
    let (line, family) = match e.take(family_key) {
        Some((l, f)) => (Some(l), f),
        None if s == '2' => (None, impulse_family(current).to_string()),
        None => (None, current.family_name().to_string()),
    };
    let all = [key("m"), key("a"), key("c"), key("b"), key("r"), key("knots")];
    let keep =
        |used: &[String]| -> Vec<&str> { all.iter().filter(|k| !used.contains(k)).map(|k| k.as_str()).collect() };
    let out = match family.as_str() {
        "identity" if s == '2' => {
            e.forbid(&keep(&[]), "the identity impulse")?;
            ResponseFn::identity()
        }
        "linear" => {
            e.forbid(&keep(&[key("c")]), "a linear response")?;
            let mut c = match current {
                ResponseFn::Linear { c } => *c,
                _ => 1.0,
            };
            e.set(&key("c"), &mut c)?;
            ResponseFn::Linear { c }
        }
        "beverton_holt" => {
            e.forbid(&keep(&[key("m"), key("a")]), "a Beverton-Holt response")?;
            let (mut m, mut a) = match current {
                ResponseFn::BevertonHolt { m, a } => (*m, *a),
                _ if s == '2' => (DEFAULT_IMPULSE_M, DEFAULT_IMPULSE_A),
                _ => (1.0, 10.0),
            };
            e.set(&key("m"), &mut m)?;
            e.set(&key("a"), &mut a)?;
            ResponseFn::BevertonHolt { m, a }
        }
        "exponential" => {
            e.forbid(&keep(&[key("b"), key("r")]), "an exponential response")?;
            let (mut b, mut r) = match current {
                ResponseFn::Exponential { b, r } => (*b, *r),
                _ => (1.0, 1.0),
            };
            e.set(&key("b"), &mut b)?;
            e.set(&key("r"), &mut r)?;
            ResponseFn::Exponential { b, r }
        }
        "tabulated" => {
            e.forbid(&keep(&[key("knots")]), "a tabulated response")?;
            let (kl, text) = e
                .take(&key("knots"))
                .ok_or_else(|| Error::config(line, format!("{} requires {}", family_key, key("knots"))))?;
            let knots = text
                .split(',')
                .map(|pair| {
                    let (u, h) = pair.split_once(':')?;
                    Some((parse_number(u)?, parse_number(h)?))
                })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::config(Some(kl), format!("malformed knots {text:?}")))?;
            ResponseFn::Tabulated(
                TabulatedResponse::new(knots).map_err(|err| Error::config(Some(kl), err.to_string()))?,
            )
        }
        other => {
            return Err(Error::config(line, format!("unknown {family_key} family {other:?}")));
        }
    };
    Ok(out)
}

fn parse_rho(e: &mut Entries, current: &EvolutionRate, tau: f64) -> Result<EvolutionRate> {
    let (line, family) = match e.take("rho") {
        Some((l, f)) => (Some(l), f),
        None => (None, current.family_name().to_string()),
    };
    let keys = ["rho_constant", "rho_amplitude", "rho_exponent", "rho_values"];
    match family.as_str() {
        "constant" => {
            e.forbid(&keys[1..], "a constant rho")?;
            let mut c = match current {
                EvolutionRate::Constant(c) => *c,
                _ => 1.0,
            };
            e.set("rho_constant", &mut c)?;
            Ok(EvolutionRate::Constant(c))
        }
        "exp_cos" => {
            e.forbid(&[keys[0], keys[3]], "an exp_cos rho")?;
            let (mut amplitude, mut exponent) = match current {
                EvolutionRate::ExpCos { amplitude, exponent } => (*amplitude, *exponent),
                _ => (1.0, 0.0),
            };
            e.set("rho_amplitude", &mut amplitude)?;
            e.set("rho_exponent", &mut exponent)?;
            Ok(EvolutionRate::ExpCos { amplitude, exponent })
        }
        "tabulated" => {
            e.forbid(&keys[..3], "a tabulated rho")?;
            let values = e
                .list("rho_values")?
                .ok_or_else(|| Error::config(line, "rho=tabulated requires rho_values"))?;
            Ok(EvolutionRate::Tabulated(
                PeriodicTable::new(tau, values).map_err(|err| Error::config(line, err.to_string()))?,
            ))
        }
        other => Err(Error::config(line, format!("unknown rho family {other:?}"))),
    }
}

/// Parses configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| Error::config(Some(line), format!("expected key=value, got {body:?}")))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(Error::config(Some(line), format!("unknown key {k:?}")));
        }
        let canonical = if k == "L" { "domain_length" } else { k };
        if map.insert(canonical.to_string(), (line, v.to_string())).is_some() {
            return Err(Error::config(Some(line), format!("duplicate key {k:?}")));
        }
    }
    let mut e = Entries { map };
    let (line, name) = e
        .take("preset")
        .ok_or_else(|| Error::config(None, "preset is required"))?;
    let preset = Preset::parse(&name).ok_or_else(|| {
        Error::config(
            Some(line),
            format!(
                "unknown preset {name:?}; expected one of {}",
                Preset::ALL.map(|p| p.name()).join(", ")
            ),
        )
    })?;
    if preset == Preset::Custom {
        for k in ["d1", "d2", "a11", "a12", "a22", "tau"] {
            if !e.map.contains_key(k) {
                return Err(Error::config(None, format!("preset=custom requires {k}")));
            }
        }
    }
    let mut cfg = RunConfig::preset(preset);
    let tau_given = e.map.contains_key("tau");
    let p = &mut cfg.params;
    e.set("d1", &mut p.d1)?;
    e.set("d2", &mut p.d2)?;
    e.set("a11", &mut p.a11)?;
    e.set("a12", &mut p.a12)?;
    e.set("a22", &mut p.a22)?;
    e.set("tau", &mut p.tau)?;
    e.set("domain_length", &mut p.domain_length)?;
    let mut n_dim = p.n_dim as usize;
    e.count("n_dim", &mut n_dim)?;
    p.n_dim = n_dim as u32;
    p.growth = parse_response(&mut e, "growth", '1', &p.growth)?;
    p.impulse = parse_response(&mut e, "impulse", '2', &p.impulse)?;
    p.rho = parse_rho(&mut e, &p.rho, p.tau)?;
    if tau_given && preset.persists() {
        cfg.t_end = PERSISTENCE_PERIODS * cfg.params.tau;
    }
    e.set("u0_amp", &mut cfg.u0_amp)?;
    e.set("v0_amp", &mut cfg.v0_amp)?;
    e.count("n_interior", &mut cfg.n_interior)?;
    e.count("steps_per_period", &mut cfg.steps_per_period)?;
    e.set("theta", &mut cfg.theta)?;
    e.set("t_end", &mut cfg.t_end)?;
    e.count("snapshots_per_period", &mut cfg.snapshots_per_period)?;
    e.set("eigen_tol", &mut cfg.eigen_tol)?;
    e.count("eigen_max_iters", &mut cfg.eigen_max_iters)?;
    e.set("steady_theta", &mut cfg.steady_theta)?;
    e.set("steady_tol", &mut cfg.steady_tol)?;
    e.count("steady_max_iters", &mut cfg.steady_max_iters)?;
    let sweep_key = e.take("sweep_key");
    let sweep_values = e.list("sweep_values")?;
    cfg.sweep = match (sweep_key, sweep_values) {
        (None, None) => None,
        (Some((line, k)), Some(values)) => {
            let key =
                SweepKey::parse(&k).ok_or_else(|| Error::config(Some(line), format!("unknown sweep_key {k:?}")))?;
            let spec = SweepSpec::new(key, values, cfg.clone())?;
            Some((spec.key, spec.values))
        }
        _ => return Err(Error::config(None, "sweep_key and sweep_values must be given together")),
    };
    if let Some((k, (line, _))) = e.map.iter().next() {
        return Err(Error::config(
            Some(*line),
            format!("key {k:?} is not used by this configuration"),
        ));
    }
    cfg.validate().map_err(|err| match err {
        Error::Domain(msg) => Error::config(None, msg),
        other => other,
    })?;
    Ok(cfg)
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Applies `key=value` overrides on top of an existing configuration text.
pub fn with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut lines: Vec<String> = Vec::new();
    let mut keys: Vec<&str> = Vec::new();
    let canonical = |k: &str| {
        if k.trim() == "L" {
            "domain_length".to_string()
        } else {
            k.trim().to_string()
        }
    };
    for o in overrides {
        let (k, _) = o
            .split_once('=')
            .ok_or_else(|| Error::config(None, format!("override must be key=value, got {o:?}")))?;
        keys.push(k);
        lines.push(o.clone());
    }
    let keys: Vec<String> = keys.into_iter().map(canonical).collect();
    let kept = text.lines().map(|l| {
        let body = l.split('#').next().unwrap_or("");
        match body.split_once('=') {
            Some((k, _)) if keys.contains(&canonical(k)) => String::new(),
            _ => l.to_string(),
        }
    });
    let merged: Vec<String> = kept.chain(lines).collect();
    parse_config(&merged.join("\n"))
}
