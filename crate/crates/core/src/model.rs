//! Model functions `d(v)`, `χ(v)`, `F(v)` and the scalar parameters.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{adaptive_simpson, GTable};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Named functional responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseKind {
    LotkaVolterra,
    Holling2,
    Holling3,
    Holling4,
    Custom,
}

impl ResponseKind {
    pub fn label(self) -> &'static str {
        match self {
            ResponseKind::LotkaVolterra => "lotka-volterra",
            ResponseKind::Holling2 => "holling2",
            ResponseKind::Holling3 => "holling3",
            ResponseKind::Holling4 => "holling4",
            ResponseKind::Custom => "custom",
        }
    }

    pub fn parse(label: &str) -> Option<Self> {
        Some(match label {
            "lotka-volterra" => ResponseKind::LotkaVolterra,
            "holling2" => ResponseKind::Holling2,
            "holling3" => ResponseKind::Holling3,
            "holling4" => ResponseKind::Holling4,
            _ => return None,
        })
    }
}

/// Functional response `F(v) = v 𝔽(v)` with its derivative.
#[derive(Clone)]
pub struct ResponseFunction {
    kind: ResponseKind,
    zeta: f64,
    custom: Option<(ScalarFn, ScalarFn)>,
}

impl fmt::Debug for ResponseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResponseFunction")
            .field("kind", &self.kind)
            .field("zeta", &self.zeta)
            .finish()
    }
}

impl ResponseFunction {
    /// Catalog response. `zeta` is ignored for Lotka-Volterra.
    pub fn new(kind: ResponseKind, zeta: f64) -> Result<Self> {
        match kind {
            ResponseKind::Custom => Err(Error::InvalidArgument(
                "custom responses are built with ResponseFunction::custom".into(),
            )),
            ResponseKind::LotkaVolterra => Ok(ResponseFunction {
                kind,
                zeta: 1.0,
                custom: None,
            }),
            _ if !(zeta > 0.0) => Err(Error::InvalidArgument(format!(
                "Holling shape constant must be positive, got {zeta}"
            ))),
            _ => Ok(ResponseFunction {
                kind,
                zeta,
                custom: None,
            }),
        }
    }

    pub fn lotka_volterra() -> Self {
        ResponseFunction {
            kind: ResponseKind::LotkaVolterra,
            zeta: 1.0,
            custom: None,
        }
    }

    /// User-supplied response with its derivative.
    pub fn custom(value: ScalarFn, derivative: ScalarFn) -> Self {
        ResponseFunction {
            kind: ResponseKind::Custom,
            zeta: f64::NAN,
            custom: Some((value, derivative)),
        }
    }

    pub fn kind(&self) -> ResponseKind {
        self.kind
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn value(&self, v: f64) -> f64 {
        let z = self.zeta;
        match self.kind {
            ResponseKind::LotkaVolterra => v,
            ResponseKind::Holling2 => v / (z + v),
            ResponseKind::Holling3 => v * v / (z + v * v),
            ResponseKind::Holling4 => v / (z + v * v),
            ResponseKind::Custom => (self.custom.as_ref().unwrap().0)(v),
        }
    }

    pub fn derivative(&self, v: f64) -> f64 {
        let z = self.zeta;
        match self.kind {
            ResponseKind::LotkaVolterra => 1.0,
            ResponseKind::Holling2 => z / ((z + v) * (z + v)),
            ResponseKind::Holling3 => {
                let s = z + v * v;
                2.0 * z * v / (s * s)
            }
            ResponseKind::Holling4 => {
                let s = z + v * v;
                (z - v * v) / (s * s)
            }
            ResponseKind::Custom => (self.custom.as_ref().unwrap().1)(v),
        }
    }

    /// `𝔽(v) = F(v)/v`, continuously extended by `F'(0)` at zero.
    pub fn reduced(&self, v: f64) -> f64 {
        let z = self.zeta;
        match self.kind {
            ResponseKind::LotkaVolterra => 1.0,
            ResponseKind::Holling2 => 1.0 / (z + v),
            ResponseKind::Holling3 => v / (z + v * v),
            ResponseKind::Holling4 => 1.0 / (z + v * v),
            ResponseKind::Custom => {
                if v == 0.0 {
                    self.derivative(0.0)
                } else {
                    self.value(v) / v
                }
            }
        }
    }

    pub fn slope_at_zero(&self) -> f64 {
        self.derivative(0.0)
    }

    /// `max_{[0, v_max]} F`, by dense sampling refined with golden sections.
    pub fn max_on(&self, v_max: f64) -> f64 {
        let samples = 2000;
        let mut best = (0.0, self.value(0.0));
        for k in 0..=samples {
            let v = v_max * k as f64 / samples as f64;
            let f = self.value(v);
            if f > best.1 {
                best = (v, f);
            }
        }
        let step = v_max / samples as f64;
        let (mut a, mut b) = ((best.0 - step).max(0.0), (best.0 + step).min(v_max));
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if self.value(c) > self.value(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best.1.max(self.value(0.5 * (a + b)))
    }
}

/// Predator motility `d(v)`.
#[derive(Clone)]
pub enum Motility {
    Constant(f64),
    /// `1 + a/(1 + b v)`
    Rational { a: f64, b: f64 },
    Custom { value: ScalarFn, derivative: ScalarFn },
}

impl fmt::Debug for Motility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Motility::Constant(c) => write!(f, "Constant({c})"),
            Motility::Rational { a, b } => write!(f, "Rational {{ a: {a}, b: {b} }}"),
            Motility::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl Motility {
    pub fn value(&self, v: f64) -> f64 {
        match self {
            Motility::Constant(c) => *c,
            Motility::Rational { a, b } => 1.0 + a / (1.0 + b * v),
            Motility::Custom { value, .. } => value(v),
        }
    }

    pub fn derivative(&self, v: f64) -> f64 {
        match self {
            Motility::Constant(_) => 0.0,
            Motility::Rational { a, b } => {
                let s = 1.0 + b * v;
                -a * b / (s * s)
            }
            Motility::Custom { derivative, .. } => derivative(v),
        }
    }
}

/// Taxis sensitivity `χ(v)`.
#[derive(Clone)]
pub enum Taxis {
    Constant(f64),
    /// `χ = -d'(v)`
    NegativeMotilitySlope,
    Custom(ScalarFn),
}

impl fmt::Debug for Taxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Taxis::Constant(c) => write!(f, "Constant({c})"),
            Taxis::NegativeMotilitySlope => write!(f, "NegativeMotilitySlope"),
            Taxis::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Scalar parameters plus the three model functions.
///
/// The motility, taxis and response are fixed at construction because the
/// cached antiderivative of `χ/d` depends on them; the scalar rates are
/// public and may be changed freely.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub lambda: f64,
    pub mu: f64,
    pub gamma: f64,
    /// Prey diffusion `D`.
    pub diffusion: f64,
    motility: Motility,
    taxis: Taxis,
    response: ResponseFunction,
    g_table: Arc<GTable>,
}

impl ModelParams {
    pub fn new(
        lambda: f64,
        mu: f64,
        gamma: f64,
        diffusion: f64,
        motility: Motility,
        taxis: Taxis,
        response: ResponseFunction,
    ) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
        }
        if !(gamma >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be non-negative, got {gamma}"
            )));
        }
        if !(diffusion > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "D must be positive, got {diffusion}"
            )));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument("lambda must be finite".into()));
        }
        let d = {
            let m = motility.clone();
            move |v: f64| m.value(v)
        };
        let chi = {
            let m = motility.clone();
            let t = taxis.clone();
            move |v: f64| taxis_value(&t, &m, v)
        };
        let g_table = GTable::build(&d, &chi, 1.25 * mu.max(1.0))?;
        Ok(ModelParams {
            lambda,
            mu,
            gamma,
            diffusion,
            motility,
            taxis,
            response,
            g_table: Arc::new(g_table),
        })
    }

    /// Parameter set of the figure experiments: `d ≡ 1`, `χ ≡ 1`, `D = 1`,
    /// `μ = 2`, `γ = 0.6`.
    pub fn figure(lambda: f64, response: ResponseFunction) -> Self {
        ModelParams::new(
            lambda,
            2.0,
            0.6,
            1.0,
            Motility::Constant(1.0),
            Taxis::Constant(1.0),
            response,
        )
        .expect("figure parameters are valid")
    }

    pub fn figure2(lambda: f64) -> Self {
        Self::figure(lambda, ResponseFunction::lotka_volterra())
    }

    pub fn figure4(lambda: f64) -> Self {
        Self::figure(
            lambda,
            ResponseFunction::new(ResponseKind::Holling3, 1.0).unwrap(),
        )
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        let mut p = self.clone();
        p.lambda = lambda;
        p
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        ModelParams::new(
            self.lambda,
            mu,
            self.gamma,
            self.diffusion,
            self.motility.clone(),
            self.taxis.clone(),
            self.response.clone(),
        )
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        let mut p = self.clone();
        p.gamma = gamma;
        p
    }

    pub fn motility(&self) -> &Motility {
        &self.motility
    }

    pub fn taxis(&self) -> &Taxis {
        &self.taxis
    }

    pub fn response(&self) -> &ResponseFunction {
        &self.response
    }

    pub fn d(&self, v: f64) -> f64 {
        self.motility.value(v)
    }

    pub fn d_prime(&self, v: f64) -> f64 {
        self.motility.derivative(v)
    }

    pub fn chi(&self, v: f64) -> f64 {
        taxis_value(&self.taxis, &self.motility, v)
    }

    pub fn chi_over_d(&self, v: f64) -> f64 {
        self.chi(v) / self.d(v)
    }

    pub fn f(&self, v: f64) -> f64 {
        self.response.value(v)
    }

    pub fn f_prime(&self, v: f64) -> f64 {
        self.response.derivative(v)
    }

    /// `g(v) = ∫_0^v χ/d`.
    pub fn g(&self, v: f64) -> f64 {
        if let Some(g) = self.g_table.eval(v) {
            return g;
        }
        let integrand = |t: f64| self.chi_over_d(t);
        if v < 0.0 {
            -adaptive_simpson(&integrand, v, 0.0, 1e-15)
        } else {
            let top = self.g_table.v_max();
            self.g_table.eval(top).unwrap() + adaptive_simpson(&integrand, top, v, 1e-15)
        }
    }

    pub fn g_field(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|&x| self.g(x)).collect()
    }

    /// A priori bounds `(max u, max v)` for positive steady states.
    pub fn steady_bounds(&self) -> (f64, f64) {
        let u_max = self.g(self.mu).exp()
            * (self.lambda.abs() + self.gamma * self.response.max_on(self.mu));
        (u_max, self.mu)
    }
}

fn taxis_value(taxis: &Taxis, motility: &Motility, v: f64) -> f64 {
    match taxis {
        Taxis::Constant(c) => *c,
        Taxis::NegativeMotilitySlope => -motility.derivative(v),
        Taxis::Custom(f) => f(v),
    }
}

/// Outcome of one sampled hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub passed: bool,
    /// First violating sample `(v, offending value)`.
    pub first_violation: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub motility: HypothesisCheck,
    pub taxis: HypothesisCheck,
    pub response: HypothesisCheck,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.motility.passed && self.taxis.passed && self.response.passed
    }

    pub fn failures(&self) -> Vec<&HypothesisCheck> {
        [&self.motility, &self.taxis, &self.response]
            .into_iter()
            .filter(|c| !c.passed)
            .collect()
    }
}

/// Default number of sampling intervals on `[0, v_max]`.
pub const HYPOTHESIS_SAMPLES: usize = 1000;

/// Samples the sign hypotheses on `[0, v_max]` at `intervals + 1` points.
pub fn validate_hypotheses_with(params: &ModelParams, v_max: f64, intervals: usize) -> HypothesisReport {
    let samples = (0..=intervals).map(|k| v_max * k as f64 / intervals as f64);
    let mut motility = None;
    let mut taxis = None;
    let mut response = None;
    let resp = params.response();
    if resp.value(0.0) != 0.0 {
        response = Some((0.0, resp.value(0.0)));
    } else if resp.slope_at_zero() < 0.0 {
        response = Some((0.0, resp.slope_at_zero()));
    }
    for v in samples {
        if motility.is_none() {
            let (d, dp) = (params.d(v), params.d_prime(v));
            if !(d > 0.0) {
                motility = Some((v, d));
            } else if dp > 0.0 {
                motility = Some((v, dp));
            }
        }
        if taxis.is_none() {
            let c = params.chi(v);
            if !(c >= 0.0) {
                taxis = Some((v, c));
            }
        }
        if response.is_none() && v > 0.0 {
            let f = resp.value(v);
            let reduced = resp.reduced(v);
            if !(f > 0.0) {
                response = Some((v, f));
            } else if (f - v * reduced).abs() > 1e-12 * f.abs().max(1.0) {
                response = Some((v, f - v * reduced));
            }
        }
    }
    let check = |name, violation: Option<(f64, f64)>| HypothesisCheck {
        name,
        passed: violation.is_none(),
        first_violation: violation,
    };
    HypothesisReport {
        motility: check("H_d", motility),
        taxis: check("H_chi", taxis),
        response: check("H_F", response),
    }
}

pub fn validate_hypotheses(params: &ModelParams, v_max: f64) -> Result<HypothesisReport> {
    if !(v_max > 0.0) {
        return Err(Error::InvalidArgument(format!("v_max must be positive, got {v_max}")));
    }
    Ok(validate_hypotheses_with(params, v_max, HYPOTHESIS_SAMPLES))
}
