//! Model parameters, the admissible function families and the standing
//! assumption checks.
//!
//! The model couples a bacteria density `u` and an infected density `v` on a
//! domain `Ω_t = ρ(t)·[0, L]`. After the change of variables to the fixed
//! domain `[0, L]` the diffusion coefficients become `d_i/ρ²(t)` and a
//! dilution term `n·ρ̇(t)/ρ(t)` appears in both equations. The growth
//! function `f` drives `v` from `u`, and the impulse function `g` is applied
//! to `u` at every multiple of the period `τ`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Composite Simpson panel count used by [`mean_inv_rho_sq`].
pub const SIMPSON_PANELS: usize = 20_000;

/// Dense sample count used when locating the extrema of `n·ρ̇/ρ`.
pub const RATE_SAMPLES: usize = 10_001;

const GOLDEN_TOL: f64 = 1e-10;

/// A piecewise-linear response through the origin.
///
/// Knots are `(u, h(u))` with strictly increasing positive abscissae. The
/// last segment is extended linearly past the final knot.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedResponse {
    knots: Vec<(f64, f64)>,
}

impl TabulatedResponse {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::domain("tabulated response needs at least one knot"));
        }
        let mut prev = 0.0;
        for &(u, h) in &knots {
            if !(u > prev) || !u.is_finite() || !h.is_finite() {
                return Err(Error::domain(
                    "tabulated knots must have finite, strictly increasing positive abscissae",
                ));
            }
            prev = u;
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    fn segment_slope(&self, idx: usize) -> f64 {
        let (u1, h1) = self.knots[idx];
        let (u0, h0) = if idx == 0 { (0.0, 0.0) } else { self.knots[idx - 1] };
        (h1 - h0) / (u1 - u0)
    }

    fn value(&self, u: f64) -> f64 {
        let idx = self
            .knots
            .iter()
            .position(|&(k, _)| u <= k)
            .unwrap_or(self.knots.len() - 1);
        let (u0, h0) = if idx == 0 { (0.0, 0.0) } else { self.knots[idx - 1] };
        h0 + self.segment_slope(idx) * (u - u0)
    }
}

/// Admissible families for the growth function `f` and the impulse function `g`.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseFn {
    /// `h(u) = c·u`
    Linear {
        c: f64,
    },
    /// `h(u) = m·u/(a + u)`
    BevertonHolt {
        m: f64,
        a: f64,
    },
    /// `h(u) = b·u·e^{−r·u}`
    Exponential {
        b: f64,
        r: f64,
    },
    Tabulated(TabulatedResponse),
}

/// Growth function `f` feeding the infected compartment.
pub type GrowthFunction = ResponseFn;

/// Impulse map `g` applied to the bacteria density at every pulse.
pub type ImpulseFunction = ResponseFn;

/// Lower parabola witness `h(u) ≥ h′(0)·u − H·u^κ` on `0 ≤ u ≤ ϖ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundWitness {
    pub coefficient: f64,
    pub exponent: f64,
    pub range: f64,
}

impl ResponseFn {
    /// The identity map `g(u) = u`, i.e. no intervention.
    pub fn identity() -> Self {
        ResponseFn::Linear { c: 1.0 }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            ResponseFn::Linear { .. } => "linear",
            ResponseFn::BevertonHolt { .. } => "beverton_holt",
            ResponseFn::Exponential { .. } => "exponential",
            ResponseFn::Tabulated(_) => "tabulated",
        }
    }

    /// Checked evaluation; negative densities are rejected.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::domain(format!("density must be nonnegative, got {u}")));
        }
        Ok(self.apply(u))
    }

    /// Unchecked evaluation used inside the solvers.
    #[inline]
    pub fn apply(&self, u: f64) -> f64 {
        match self {
            ResponseFn::Linear { c } => c * u,
            ResponseFn::BevertonHolt { m, a } => m * u / (a + u),
            ResponseFn::Exponential { b, r } => b * u * (-r * u).exp(),
            ResponseFn::Tabulated(t) => t.value(u),
        }
    }

    /// Analytic derivative at zero for the closed-form families.
    pub fn prime_at_zero(&self) -> Result<f64> {
        match self {
            ResponseFn::Linear { c } => Ok(*c),
            ResponseFn::BevertonHolt { m, a } => Ok(m / a),
            ResponseFn::Exponential { b, .. } => Ok(*b),
            ResponseFn::Tabulated(_) => Err(Error::Unsupported("derivative at zero of a tabulated response".into())),
        }
    }

    /// Slope at zero for every family; the tabulated family uses its first segment.
    pub fn initial_slope(&self) -> f64 {
        match self {
            ResponseFn::Tabulated(t) => t.segment_slope(0),
            _ => self.prime_at_zero().expect("closed-form family"),
        }
    }

    /// `lim_{u→∞} h(u)/u`.
    pub fn ratio_at_infinity(&self) -> f64 {
        match self {
            ResponseFn::Linear { c } => *c,
            ResponseFn::BevertonHolt { .. } | ResponseFn::Exponential { .. } => 0.0,
            ResponseFn::Tabulated(t) => t.segment_slope(t.knots.len() - 1),
        }
    }

    /// Closed-form witness for the lower parabola bound near zero.
    pub fn lower_bound_witness(&self) -> LowerBoundWitness {
        match self {
            // exact: any positive H works
            ResponseFn::Linear { .. } => LowerBoundWitness {
                coefficient: 1.0,
                exponent: 2.0,
                range: 1.0,
            },
            // m·u/(a+u) ≥ (m/a)·u·(1 − u/a)
            ResponseFn::BevertonHolt { m, a } => LowerBoundWitness {
                coefficient: m / (a * a),
                exponent: 2.0,
                range: *a,
            },
            // e^{−x} ≥ 1 − x
            ResponseFn::Exponential { b, r } => LowerBoundWitness {
                coefficient: b * r,
                exponent: 2.0,
                range: 1.0 / r,
            },
            ResponseFn::Tabulated(t) => LowerBoundWitness {
                coefficient: 1.0,
                exponent: 2.0,
                range: t.knots[0].0,
            },
        }
    }
}

/// Evaluate the growth function; negative densities are a domain error.
pub fn eval_growth(gf: &GrowthFunction, u: f64) -> Result<f64> {
    gf.eval(u)
}

/// `f′(0)` for the closed-form families.
pub fn growth_prime_at_zero(gf: &GrowthFunction) -> Result<f64> {
    gf.prime_at_zero()
}

/// Uniformly sampled periodic profile interpolated by cubic Hermite
/// segments with centred-difference tangents (C¹).
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicTable {
    period: f64,
    values: Vec<f64>,
}

impl PeriodicTable {
    pub fn new(period: f64, values: Vec<f64>) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::domain("table period must be positive"));
        }
        if values.len() < 3 {
            return Err(Error::domain("periodic table needs at least three samples"));
        }
        if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::domain("evolution rate samples must be positive and finite"));
        }
        Ok(Self { period, values })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn locate(&self, t: f64) -> (usize, f64, f64) {
        let n = self.values.len();
        let h = self.period / n as f64;
        let s = t.rem_euclid(self.period) / h;
        let k = (s.floor() as usize).min(n - 1);
        (k, s - k as f64, h)
    }

    fn tangent(&self, k: usize, h: f64) -> f64 {
        let n = self.values.len();
        (self.values[(k + 1) % n] - self.values[(k + n - 1) % n]) / (2.0 * h)
    }

    fn value(&self, t: f64) -> f64 {
        let n = self.values.len();
        let (k, s, h) = self.locate(t);
        let (p0, p1) = (self.values[k], self.values[(k + 1) % n]);
        let (m0, m1) = (self.tangent(k, h) * h, self.tangent((k + 1) % n, h) * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * p0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * p1 + (s3 - s2) * m1
    }

    fn derivative(&self, t: f64) -> f64 {
        let n = self.values.len();
        let (k, s, h) = self.locate(t);
        let (p0, p1) = (self.values[k], self.values[(k + 1) % n]);
        let (m0, m1) = (self.tangent(k, h) * h, self.tangent((k + 1) % n, h) * h);
        let s2 = s * s;
        ((6.0 * s2 - 6.0 * s) * p0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * p1
            + (3.0 * s2 - 2.0 * s) * m1)
            / h
    }
}

/// The domain scale factor `ρ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum EvolutionRate {
    Constant(f64),
    /// `ρ(t) = A·e^{B(1 − cos πt)}`, period 2.
    ExpCos {
        amplitude: f64,
        exponent: f64,
    },
    Tabulated(PeriodicTable),
}

impl EvolutionRate {
    pub fn fixed() -> Self {
        EvolutionRate::Constant(1.0)
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            EvolutionRate::Constant(_) => "constant",
            EvolutionRate::ExpCos { .. } => "exp_cos",
            EvolutionRate::Tabulated(_) => "tabulated",
        }
    }

    /// Smallest period of the profile; `None` when it is constant.
    pub fn period(&self) -> Option<f64> {
        match self {
            EvolutionRate::Constant(_) => None,
            EvolutionRate::ExpCos { exponent, .. } => (*exponent != 0.0).then_some(2.0),
            EvolutionRate::Tabulated(tab) => Some(tab.period()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EvolutionRate::Constant(c) if !(*c > 0.0) || !c.is_finite() => {
                Err(Error::domain("constant evolution rate must be positive"))
            }
            EvolutionRate::ExpCos { amplitude, exponent }
                if !(*amplitude > 0.0) || !exponent.is_finite() || !amplitude.is_finite() =>
            {
                Err(Error::domain("exp_cos evolution rate needs A > 0 and finite B"))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match self {
            EvolutionRate::Constant(c) => *c,
            EvolutionRate::ExpCos { amplitude, exponent } => amplitude * (exponent * (1.0 - (PI * t).cos())).exp(),
            EvolutionRate::Tabulated(tab) => tab.value(t),
        }
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            EvolutionRate::Constant(_) => 0.0,
            EvolutionRate::ExpCos { exponent, .. } => self.value(t) * exponent * PI * (PI * t).sin(),
            EvolutionRate::Tabulated(tab) => tab.derivative(t),
        }
    }

    /// `ρ̇(t)/ρ(t)`.
    #[inline]
    pub fn log_derivative(&self, t: f64) -> f64 {
        match self {
            EvolutionRate::Constant(_) => 0.0,
            EvolutionRate::ExpCos { exponent, .. } => exponent * PI * (PI * t).sin(),
            EvolutionRate::Tabulated(tab) => tab.derivative(t) / tab.value(t),
        }
    }

    /// True when `ρ ≡ 1` holds by construction.
    pub fn is_identically_one(&self) -> bool {
        match self {
            EvolutionRate::Constant(c) => (c - 1.0).abs() <= 1e-12,
            EvolutionRate::ExpCos { amplitude, exponent } => (amplitude - 1.0).abs() <= 1e-12 && *exponent == 0.0,
            EvolutionRate::Tabulated(tab) => tab.values.iter().all(|v| (v - 1.0).abs() <= 1e-12),
        }
    }

    /// Whether the profile starts from the unscaled domain, `ρ(0) = 1`.
    pub fn starts_at_one(&self) -> bool {
        (self.value(0.0) - 1.0).abs() <= 1e-12
    }
}

/// `ρ(t)` for the given profile.
pub fn eval_rho(r: &EvolutionRate, t: f64) -> f64 {
    r.value(t)
}

/// `ρ̇(t)` for the given profile.
pub fn eval_rho_dot(r: &EvolutionRate, t: f64) -> f64 {
    r.derivative(t)
}

/// `(1/τ)∫₀^τ ρ(t)^{−2} dt` by composite Simpson with [`SIMPSON_PANELS`] panels.
pub fn mean_inv_rho_sq(r: &EvolutionRate, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::domain(format!("period must be positive, got {tau}")));
    }
    if let EvolutionRate::Constant(c) = r {
        return Ok(1.0 / (c * c));
    }
    let f = |t: f64| {
        let rho = r.value(t);
        1.0 / (rho * rho)
    };
    let n = SIMPSON_PANELS;
    let h = tau / n as f64;
    let mut acc = f(0.0) + f(tau);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(k as f64 * h);
    }
    Ok(acc * h / 3.0 / tau)
}

/// Principal Dirichlet eigenvalue of `−Δ` on `[0, L]`, namely `(π/L)²`.
pub fn dirichlet_lambda0(length: f64) -> Result<f64> {
    if !(length > 0.0) {
        return Err(Error::domain(format!("domain length must be positive, got {length}")));
    }
    Ok((PI / length).powi(2))
}

/// All scalar constants of the model together with `f`, `g` and `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub d1: f64,
    pub d2: f64,
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    pub tau: f64,
    pub n_dim: u32,
    pub growth: GrowthFunction,
    pub impulse: ImpulseFunction,
    pub rho: EvolutionRate,
    pub domain_length: f64,
}

impl ModelParams {
    /// Checks the construction invariants: positive rates, period and length.
    ///
    /// The side condition `a11, a22 > |m̌|` is not enforced here; it is
    /// reported by [`check_assumptions`] so that evolving profiles violating
    /// it can still be simulated.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d1", self.d1),
            ("d2", self.d2),
            ("a11", self.a11),
            ("a12", self.a12),
            ("a22", self.a22),
            ("tau", self.tau),
            ("domain_length", self.domain_length),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::domain(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if self.n_dim == 0 {
            return Err(Error::domain("n_dim must be a positive integer"));
        }
        self.rho.validate()?;
        if let Some(period) = self.rho.period() {
            let ratio = self.tau / period;
            if ratio < 0.5 || (ratio - ratio.round()).abs() > 1e-9 * ratio {
                return Err(Error::domain(format!(
                    "tau = {} is not a multiple of the evolution period {period}",
                    self.tau
                )));
            }
        }
        Ok(())
    }

    /// Dilution coefficient `n·ρ̇(t)/ρ(t)`.
    #[inline]
    pub fn dilution(&self, t: f64) -> f64 {
        self.n_dim as f64 * self.rho.log_derivative(t)
    }

    /// `(m̌, m̂)`: minimum and maximum of `n·ρ̇/ρ` over `[0, τ]`.
    pub fn dilution_extrema(&self) -> (f64, f64) {
        if let EvolutionRate::Constant(_) = self.rho {
            return (0.0, 0.0);
        }
        let lo = extremum(|t| self.dilution(t), self.tau);
        let hi = -extremum(|t| -self.dilution(t), self.tau);
        (lo, hi)
    }

    pub fn lambda0(&self) -> f64 {
        dirichlet_lambda0(self.domain_length).expect("validated length")
    }
}

/// Minimum of `h` on `[0, span]`: dense sampling then golden-section refinement.
fn extremum(h: impl Fn(f64) -> f64, span: f64) -> f64 {
    let n = RATE_SAMPLES - 1;
    let step = span / n as f64;
    let (best_k, best) = (0..=n)
        .map(|k| (k, h(k as f64 * step)))
        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    let mut a = (best_k.saturating_sub(1)) as f64 * step;
    let mut b = ((best_k + 1).min(n)) as f64 * step;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut hc, mut hd) = (h(c), h(d));
    while b - a > GOLDEN_TOL {
        if hc < hd {
            b = d;
            d = c;
            hd = hc;
            c = b - inv_phi * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + inv_phi * (b - a);
            hd = h(d);
        }
    }
    best.min(h(0.5 * (a + b)))
}

/// One concrete point where an assumption fails.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    /// `"f"`, `"g"`, `"rho"` or `"rates"`.
    pub subject: &'static str,
    pub u: Option<f64>,
    pub t: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssumptionCheck {
    pub passed: bool,
    pub counterexamples: Vec<Counterexample>,
}

impl AssumptionCheck {
    const MAX_COUNTEREXAMPLES: usize = 8;

    fn new() -> Self {
        Self {
            passed: true,
            counterexamples: Vec::new(),
        }
    }

    fn fail(&mut self, subject: &'static str, u: Option<f64>, t: Option<f64>, detail: String) {
        self.passed = false;
        if self.counterexamples.len() < Self::MAX_COUNTEREXAMPLES {
            self.counterexamples.push(Counterexample { subject, u, t, detail });
        }
    }
}

/// Sampled evidence for assumptions (A1)–(A4).
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    /// Regularity, sign and monotonicity of `f` and `g`.
    pub a1: AssumptionCheck,
    /// `f(u)/u` decreasing, the growth limit condition and `a11, a22 > |m̌|`.
    pub a2: AssumptionCheck,
    /// `0 < g(u)/u ≤ 1` and decreasing.
    pub a3: AssumptionCheck,
    /// Lower parabola bound near zero for `f` and `g`.
    pub a4: AssumptionCheck,
    pub u_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// Witnesses `(H, κ, ϖ)` for `f` and `g`.
    pub witnesses: [LowerBoundWitness; 2],
    pub m_check: f64,
    pub m_hat: f64,
    pub rho_starts_at_one: bool,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.a1.passed && self.a2.passed && self.a3.passed && self.a4.passed
    }
}

const REL_SLACK: f64 = 1e-12;

fn nonincreasing(prev: f64, next: f64) -> bool {
    next <= prev + REL_SLACK * prev.abs().max(f64::MIN_POSITIVE)
}

/// Checks (A1)–(A4) on a logarithmic `u` grid spanning `[1e−6, 1e6]` and a
/// uniform `t` grid on `[0, τ]`, both with `sample_count` points.
pub fn check_assumptions(p: &ModelParams, sample_count: usize) -> Result<AssumptionReport> {
    if sample_count < 16 {
        return Err(Error::domain(format!(
            "sample_count must be at least 16, got {sample_count}"
        )));
    }
    p.validate()?;
    let (lo, hi) = (1e-6f64.ln(), 1e6f64.ln());
    let u_grid: Vec<f64> = (0..sample_count)
        .map(|k| (lo + (hi - lo) * k as f64 / (sample_count - 1) as f64).exp())
        .collect();
    let t_grid: Vec<f64> = (0..sample_count)
        .map(|k| p.tau * k as f64 / (sample_count - 1) as f64)
        .collect();
    let (m_check, m_hat) = p.dilution_extrema();
    let fns: [(&'static str, &ResponseFn); 2] = [("f", &p.growth), ("g", &p.impulse)];

    let mut a1 = AssumptionCheck::new();
    for (name, h) in fns {
        let h0 = h.apply(0.0);
        if h0 != 0.0 {
            a1.fail(name, Some(0.0), None, format!("{name}(0) = {h0} ≠ 0"));
        }
        let slope = h.initial_slope();
        if !(slope > 0.0) || !slope.is_finite() {
            a1.fail(
                name,
                Some(0.0),
                None,
                format!("{name}′(0) = {slope} is not finite positive"),
            );
        }
        let mut prev = h0;
        for &u in &u_grid {
            let value = h.apply(u);
            if !(value > 0.0) {
                a1.fail(
                    name,
                    Some(u),
                    None,
                    format!("{name}({u:e}) = {value:e} is not positive"),
                );
            }
            if value < prev - REL_SLACK * prev.abs() {
                a1.fail(name, Some(u), None, format!("{name} decreases at u = {u:e}"));
            }
            prev = value;
        }
    }

    let mut a2 = AssumptionCheck::new();
    let mut prev_ratio = f64::INFINITY;
    for &u in &u_grid {
        let ratio = p.growth.apply(u) / u;
        if !nonincreasing(prev_ratio, ratio) {
            a2.fail("f", Some(u), None, format!("f(u)/u increases at u = {u:e}"));
        }
        prev_ratio = ratio;
    }
    let limit = p.growth.ratio_at_infinity();
    let threshold = (p.a11 + m_check) * (p.a22 + m_check) / p.a12;
    if !(limit < threshold) {
        a2.fail(
            "f",
            None,
            None,
            format!("lim f(u)/u = {limit} is not below (a11+m̌)(a22+m̌)/a12 = {threshold}"),
        );
    }
    for (name, rate) in [("a11", p.a11), ("a22", p.a22)] {
        if !(rate > m_check.abs()) {
            a2.fail(
                "rates",
                None,
                None,
                format!("{name} = {rate} does not exceed |m̌| = {}", m_check.abs()),
            );
        }
    }
    for &t in &t_grid {
        let rho = p.rho.value(t);
        if !(rho > 0.0) || !rho.is_finite() {
            a2.fail("rho", None, Some(t), format!("ρ({t}) = {rho} is not positive"));
        }
    }

    let mut a3 = AssumptionCheck::new();
    let mut prev_ratio = f64::INFINITY;
    for &u in &u_grid {
        let ratio = p.impulse.apply(u) / u;
        if !(ratio > 0.0) || ratio > 1.0 + REL_SLACK {
            a3.fail("g", Some(u), None, format!("g(u)/u = {ratio} outside (0, 1]"));
        }
        if !nonincreasing(prev_ratio, ratio) {
            a3.fail("g", Some(u), None, format!("g(u)/u increases at u = {u:e}"));
        }
        prev_ratio = ratio;
    }

    let mut a4 = AssumptionCheck::new();
    let witnesses = [p.growth.lower_bound_witness(), p.impulse.lower_bound_witness()];
    for ((name, h), w) in fns.into_iter().zip(witnesses) {
        let slope = h.initial_slope();
        for &u in u_grid.iter().filter(|&&u| u <= w.range) {
            let value = h.apply(u);
            let bound = slope * u - w.coefficient * u.powf(w.exponent);
            if value < bound - REL_SLACK * bound.abs().max(value.abs()) {
                a4.fail(
                    name,
                    Some(u),
                    None,
                    format!("{name}({u:e}) = {value:e} below witness bound {bound:e}"),
                );
            }
        }
    }

    Ok(AssumptionReport {
        a1,
        a2,
        a3,
        a4,
        u_grid,
        t_grid,
        witnesses,
        m_check,
        m_hat,
        rho_starts_at_one: p.rho.starts_at_one(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example1() -> ModelParams {
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
    fn growth_values() {
        let bh = ResponseFn::BevertonHolt { m: 1.0, a: 10.0 };
        assert_eq!(eval_growth(&bh, 0.0).unwrap(), 0.0);
        let bh = ResponseFn::BevertonHolt { m: 9.0, a: 10.0 };
        assert!((eval_growth(&bh, 10.0).unwrap() - 4.5).abs() < 1e-15);
        let lin = ResponseFn::Linear { c: 0.3 };
        assert!((eval_growth(&lin, 2.0).unwrap() - 0.6).abs() < 1e-15);
        assert!(matches!(eval_growth(&lin, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn growth_slopes() {
        let cases = [
            (ResponseFn::BevertonHolt { m: 1.0, a: 10.0 }, 0.1),
            (ResponseFn::BevertonHolt { m: 20.0, a: 10.0 }, 2.0),
            (ResponseFn::Linear { c: 0.7 }, 0.7),
        ];
        for (gf, want) in cases {
            assert!((growth_prime_at_zero(&gf).unwrap() - want).abs() < 1e-15);
        }
        let tab = ResponseFn::Tabulated(TabulatedResponse::new(vec![(1.0, 0.5), (2.0, 0.8)]).unwrap());
        assert!(matches!(growth_prime_at_zero(&tab), Err(Error::Unsupported(_))));
    }

    #[test]
    fn slope_matches_one_sided_difference() {
        let h = 1e-7;
        for gf in [
            ResponseFn::Linear { c: 0.7 },
            ResponseFn::BevertonHolt { m: 9.0, a: 10.0 },
            ResponseFn::BevertonHolt { m: 20.0, a: 10.0 },
            ResponseFn::Exponential { b: 0.4, r: 2.0 },
        ] {
            let exact = gf.prime_at_zero().unwrap();
            let fd = (gf.eval(h).unwrap() - 0.0) / h;
            assert!(((fd - exact) / exact).abs() < 1e-5, "{gf:?}");
        }
    }

    #[test]
    fn rho_values() {
        let c = EvolutionRate::fixed();
        assert_eq!(eval_rho(&c, 0.37), 1.0);
        assert_eq!(eval_rho_dot(&c, 0.37), 0.0);
        let e = EvolutionRate::ExpCos {
            amplitude: 1.0,
            exponent: 2.0,
        };
        assert!((eval_rho(&e, 0.0) - 1.0).abs() < 1e-15);
        assert!(eval_rho_dot(&e, 0.0).abs() < 1e-15);
        let e = EvolutionRate::ExpCos {
            amplitude: 0.7,
            exponent: -0.15,
        };
        assert!((eval_rho(&e, 1.0) - 0.7 * (-0.3f64).exp()).abs() < 1e-15);
        assert!((eval_rho(&e, 1.0) - 0.51864).abs() < 1e-4);
        assert!(eval_rho_dot(&e, 1.0).abs() < 1e-12);
        assert!(!e.starts_at_one());
    }

    #[test]
    fn rho_dot_matches_central_difference() {
        let e = EvolutionRate::ExpCos {
            amplitude: 1.3,
            exponent: 0.8,
        };
        let h = 1e-6;
        for k in 0..20 {
            let t = 0.1 * k as f64;
            let fd = (e.value(t + h) - e.value(t - h)) / (2.0 * h);
            assert!((fd - e.derivative(t)).abs() < 1e-6 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn evolving_profile_must_repeat_within_the_period() {
        let mut p = ModelParams {
            d1: 1.0,
            d2: 1.0,
            a11: 0.2,
            a12: 0.2,
            a22: 0.2,
            tau: 4.0,
            n_dim: 1,
            growth: ResponseFn::Linear { c: 0.1 },
            impulse: ResponseFn::identity(),
            rho: EvolutionRate::ExpCos {
                amplitude: 1.0,
                exponent: 0.1,
            },
            domain_length: PI,
        };
        assert!(p.validate().is_ok());
        p.tau = 5.0;
        assert!(matches!(p.validate(), Err(Error::Domain(_))));
        p.rho = EvolutionRate::fixed();
        assert!(p.validate().is_ok());
    }

    #[test]
    fn tabulated_rho_is_smooth_and_periodic() {
        let vals: Vec<f64> = (0..32)
            .map(|k| 1.0 + 0.3 * (2.0 * PI * k as f64 / 32.0).sin())
            .collect();
        let tab = EvolutionRate::Tabulated(PeriodicTable::new(2.0, vals).unwrap());
        assert!((tab.value(0.0) - 1.0).abs() < 1e-12);
        assert!((tab.value(0.5) - tab.value(2.5)).abs() < 1e-12);
        let h = 1e-6;
        for k in 0..40 {
            let t = 0.05 * k as f64 + 0.013;
            let fd = (tab.value(t + h) - tab.value(t - h)) / (2.0 * h);
            assert!((fd - tab.derivative(t)).abs() < 1e-5);
        }
    }

    #[test]
    fn mean_inv_rho_sq_constants() {
        for c in [0.3, 1.0, 2.5] {
            for tau in [0.7, 2.0, 5.0] {
                let m = mean_inv_rho_sq(&EvolutionRate::Constant(c), tau).unwrap();
                assert!((m - 1.0 / (c * c)).abs() < 1e-12);
            }
        }
        assert!(matches!(
            mean_inv_rho_sq(&EvolutionRate::fixed(), 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn mean_inv_rho_sq_full_period_invariance() {
        let e = EvolutionRate::ExpCos {
            amplitude: 1.0,
            exponent: 2.0,
        };
        let one = mean_inv_rho_sq(&e, 2.0).unwrap();
        let two = mean_inv_rho_sq(&e, 4.0).unwrap();
        assert!((one - two).abs() < 1e-10);
    }

    #[test]
    fn lambda0_scaling() {
        assert!((dirichlet_lambda0(PI).unwrap() - 1.0).abs() < 1e-15);
        assert!((dirichlet_lambda0(2.0 * PI).unwrap() - 0.25).abs() < 1e-15);
        assert!((dirichlet_lambda0(1.0).unwrap() - PI * PI).abs() < 1e-12);
        assert!(dirichlet_lambda0(0.0).is_err());
        for l in [0.1, 1.7, 30.0] {
            assert!((dirichlet_lambda0(l).unwrap() * l * l - PI * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn dilution_extrema_for_exp_cos() {
        let mut p = example1();
        p.rho = EvolutionRate::ExpCos {
            amplitude: 1.0,
            exponent: 2.0,
        };
        let (lo, hi) = p.dilution_extrema();
        assert!((lo + 2.0 * PI).abs() < 1e-9, "{lo}");
        assert!((hi - 2.0 * PI).abs() < 1e-9, "{hi}");
    }

    #[test]
    fn example1_passes_all_assumptions() {
        let report = check_assumptions(&example1(), 64).unwrap();
        assert!(report.all_passed(), "{report:#?}");
        assert!(report.rho_starts_at_one);
    }

    #[test]
    fn linear_impulse_above_one_fails_a3() {
        let mut p = example1();
        p.impulse = ResponseFn::Linear { c: 1.5 };
        let report = check_assumptions(&p, 32).unwrap();
        assert!(!report.a3.passed);
        let ce = &report.a3.counterexamples[0];
        assert_eq!(ce.subject, "g");
        assert!(ce.detail.contains("1.5"));
        assert!(report.a1.passed && report.a2.passed);
        assert!((p.impulse.eval(1.0).unwrap() / 1.0 - 1.5).abs() < 1e-15);
    }

    #[test]
    fn saturating_growth_passes_limit_condition() {
        let mut p = example1();
        p.growth = ResponseFn::BevertonHolt { m: 20.0, a: 10.0 };
        let report = check_assumptions(&p, 32).unwrap();
        assert!(report.a2.passed);
        assert_eq!(p.growth.ratio_at_infinity(), 0.0);
    }

    #[test]
    fn fast_evolution_violates_rate_side_condition() {
        let mut p = example1();
        p.rho = EvolutionRate::ExpCos {
            amplitude: 1.0,
            exponent: 2.0,
        };
        let report = check_assumptions(&p, 32).unwrap();
        assert!(!report.a2.passed);
        assert!(report.a2.counterexamples.iter().any(|c| c.subject == "rates"));
    }

    #[test]
    fn ricker_growth_is_not_monotone() {
        let mut p = example1();
        p.growth = ResponseFn::Exponential { b: 0.1, r: 0.5 };
        let report = check_assumptions(&p, 64).unwrap();
        assert!(!report.a1.passed);
        assert!(report.a4.passed);
    }

    #[test]
    fn witnesses_hold_on_fine_grid() {
        for h in [
            ResponseFn::BevertonHolt { m: 9.0, a: 10.0 },
            ResponseFn::Exponential { b: 0.8, r: 3.0 },
            ResponseFn::Linear { c: 0.4 },
        ] {
            let w = h.lower_bound_witness();
            let slope = h.prime_at_zero().unwrap();
            for k in 0..=1000 {
                let u = w.range * k as f64 / 1000.0;
                assert!(h.apply(u) >= slope * u - w.coefficient * u.powf(w.exponent) - 1e-14);
            }
        }
    }

    #[test]
    fn small_sample_count_rejected() {
        assert!(check_assumptions(&example1(), 8).is_err());
    }
}
