//! Line-oriented run configuration.
//!
//! Each non-blank line is `section.key = value`; `#` starts a comment. Every
//! key has a default and unknown keys are rejected with their line number.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::continuation::Controls;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::model::{validate_hypotheses, ModelParams, Motility, ResponseFunction, ResponseKind, Taxis};
use crate::steady::NewtonOptions;
use crate::timestepper::SimulationConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotilitySpec {
    Constant(f64),
    Rational { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TaxisSpec {
    Constant(f64),
    NegativeMotilitySlope,
}

/// Initial or starting profile on the interior nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `0.1 + 0.1 sin 5x`
    Figure,
    Constant(f64),
    /// `a sin(π x / L)`
    Sine(f64),
}

impl Profile {
    pub fn field(self, grid: &Grid) -> Field {
        let l = grid.length();
        match self {
            Profile::Figure => Field::from_fn(grid, |x| 0.1 + 0.1 * (5.0 * x).sin()),
            Profile::Constant(c) => Field::constant(grid.n(), c),
            Profile::Sine(a) => Field::from_fn(grid, |x| a * (std::f64::consts::PI * x / l).sin()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSection {
    pub lambda: f64,
    pub mu: f64,
    pub gamma: f64,
    pub diffusion: f64,
    pub motility: MotilitySpec,
    pub taxis: TaxisSpec,
    pub response: ResponseKind,
    pub zeta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSection {
    pub length: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSection {
    pub newton_tolerance: f64,
    pub newton_max_iterations: usize,
    pub classify_threshold: f64,
    pub initial_amplitude: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub lambda_cap: f64,
    pub max_steps: usize,
    pub max_folds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSection {
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_stride: usize,
    pub regime_threshold: f64,
    pub u0: Profile,
    pub v0: Profile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadySection {
    pub u0: Profile,
    pub v0: Profile,
}

/// Constant-coefficient eigenproblem `−(p φ')' + q φ = σ r φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigSection {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

/// `−(p θ')' = a θ − b θ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticSection {
    pub p: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub command: String,
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub dir: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub solver: SolverSection,
    pub time: TimeSection,
    pub steady: SteadySection,
    pub eig: EigSection,
    pub logistic: LogisticSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

pub const SWEEP_COMMANDS: [&str; 5] = ["steady", "branch", "simulate", "thresholds", "logistic"];

impl Default for RunConfig {
    fn default() -> Self {
        let controls = Controls::default();
        let newton = NewtonOptions::default();
        RunConfig {
            model: ModelSection {
                lambda: 1.5,
                mu: 2.0,
                gamma: 0.6,
                diffusion: 1.0,
                motility: MotilitySpec::Constant(1.0),
                taxis: TaxisSpec::Constant(1.0),
                response: ResponseKind::LotkaVolterra,
                zeta: 1.0,
            },
            grid: GridSection { length: 4.0, n: 256 },
            solver: SolverSection {
                newton_tolerance: newton.tolerance,
                newton_max_iterations: newton.max_iterations,
                classify_threshold: newton.classify_threshold,
                initial_amplitude: controls.initial_amplitude,
                initial_step: controls.initial_step,
                min_step: controls.min_step,
                max_step: controls.max_step,
                lambda_cap: controls.lambda_cap,
                max_steps: controls.max_steps,
                max_folds: controls.max_folds,
            },
            time: TimeSection {
                dt: 1e-3,
                t_final: 500.0,
                snapshot_stride: 0,
                regime_threshold: 1e-2,
                u0: Profile::Figure,
                v0: Profile::Figure,
            },
            steady: SteadySection {
                u0: Profile::Figure,
                v0: Profile::Figure,
            },
            eig: EigSection { p: 1.0, q: 0.0, r: 1.0 },
            logistic: LogisticSection { p: 1.0, a: 2.0, b: 1.0 },
            sweep: SweepSection {
                command: "simulate".into(),
                lambdas: vec![-1.0, 1.5, 5.0],
            },
            output: OutputSection { dir: "out".into() },
        }
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_motility(m: MotilitySpec) -> String {
    match m {
        MotilitySpec::Constant(c) => format!("constant({})", fmt_f(c)),
        MotilitySpec::Rational { a, b } => format!("rational({}, {})", fmt_f(a), fmt_f(b)),
    }
}

fn fmt_taxis(t: TaxisSpec) -> String {
    match t {
        TaxisSpec::Constant(c) => format!("constant({})", fmt_f(c)),
        TaxisSpec::NegativeMotilitySlope => "negative-d-slope".into(),
    }
}

fn fmt_profile(p: Profile) -> String {
    match p {
        Profile::Figure => "figure".into(),
        Profile::Constant(c) => format!("constant({})", fmt_f(c)),
        Profile::Sine(a) => format!("sine({})", fmt_f(a)),
    }
}

/// Splits `name(a, b, …)` into the name and its numeric arguments.
fn call(value: &str) -> std::result::Result<(&str, Vec<f64>), String> {
    let value = value.trim();
    let Some(open) = value.find('(') else {
        return Ok((value, Vec::new()));
    };
    let inner = value[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| format!("missing ')' in '{value}'"))?;
    let args = inner
        .split(',')
        .map(|a| a.trim().parse::<f64>().map_err(|_| format!("bad number '{}' in '{value}'", a.trim())))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((value[..open].trim(), args))
}

fn parse_motility(v: &str) -> std::result::Result<MotilitySpec, String> {
    match call(v)? {
        ("constant", a) if a.len() == 1 => Ok(MotilitySpec::Constant(a[0])),
        ("rational", a) if a.len() == 2 => Ok(MotilitySpec::Rational { a: a[0], b: a[1] }),
        _ => Err(format!("expected constant(c) or rational(a, b), got '{v}'")),
    }
}

fn parse_taxis(v: &str) -> std::result::Result<TaxisSpec, String> {
    match call(v)? {
        ("constant", a) if a.len() == 1 => Ok(TaxisSpec::Constant(a[0])),
        ("negative-d-slope", a) if a.is_empty() => Ok(TaxisSpec::NegativeMotilitySlope),
        _ => Err(format!("expected constant(c) or negative-d-slope, got '{v}'")),
    }
}

fn parse_profile(v: &str) -> std::result::Result<Profile, String> {
    match call(v)? {
        ("figure", a) if a.is_empty() => Ok(Profile::Figure),
        ("constant", a) if a.len() == 1 && a[0] >= 0.0 => Ok(Profile::Constant(a[0])),
        ("sine", a) if a.len() == 1 && a[0] >= 0.0 => Ok(Profile::Sine(a[0])),
        _ => Err(format!("expected figure, constant(c >= 0) or sine(a >= 0), got '{v}'")),
    }
}

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    let x: f64 = v.trim().parse().map_err(|_| format!("bad number '{}'", v.trim()))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("non-finite number '{}'", v.trim()))
    }
}

fn parse_usize(v: &str) -> std::result::Result<usize, String> {
    v.trim().parse().map_err(|_| format!("bad integer '{}'", v.trim()))
}

fn parse_list(v: &str) -> std::result::Result<Vec<f64>, String> {
    let xs = v.split(',').map(parse_f64).collect::<std::result::Result<Vec<_>, _>>()?;
    if xs.is_empty() {
        Err("empty list".into())
    } else {
        Ok(xs)
    }
}

impl RunConfig {
    /// Applies one `section.key = value` assignment.
    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let f = parse_f64;
        match key {
            "model.lambda" => self.model.lambda = f(value)?,
            "model.mu" => self.model.mu = f(value)?,
            "model.gamma" => self.model.gamma = f(value)?,
            "model.D" => self.model.diffusion = f(value)?,
            "model.d" => self.model.motility = parse_motility(value)?,
            "model.chi" => self.model.taxis = parse_taxis(value)?,
            "model.F" => {
                self.model.response = match ResponseKind::parse(value.trim()) {
                    Some(ResponseKind::Custom) | None => {
                        return Err(format!(
                            "expected lotka-volterra, holling2, holling3 or holling4, got '{}'",
                            value.trim()
                        ))
                    }
                    Some(k) => k,
                }
            }
            "model.zeta" => self.model.zeta = f(value)?,
            "grid.L" => self.grid.length = f(value)?,
            "grid.n" => self.grid.n = parse_usize(value)?,
            "solver.newton_tolerance" => self.solver.newton_tolerance = f(value)?,
            "solver.newton_max_iterations" => self.solver.newton_max_iterations = parse_usize(value)?,
            "solver.classify_threshold" => self.solver.classify_threshold = f(value)?,
            "solver.initial_amplitude" => self.solver.initial_amplitude = f(value)?,
            "solver.initial_step" => self.solver.initial_step = f(value)?,
            "solver.min_step" => self.solver.min_step = f(value)?,
            "solver.max_step" => self.solver.max_step = f(value)?,
            "solver.lambda_cap" => self.solver.lambda_cap = f(value)?,
            "solver.max_steps" => self.solver.max_steps = parse_usize(value)?,
            "solver.max_folds" => self.solver.max_folds = parse_usize(value)?,
            "time.dt" => self.time.dt = f(value)?,
            "time.T" => self.time.t_final = f(value)?,
            "time.snapshot_stride" => self.time.snapshot_stride = parse_usize(value)?,
            "time.regime_threshold" => self.time.regime_threshold = f(value)?,
            "time.u0" => self.time.u0 = parse_profile(value)?,
            "time.v0" => self.time.v0 = parse_profile(value)?,
            "steady.u0" => self.steady.u0 = parse_profile(value)?,
            "steady.v0" => self.steady.v0 = parse_profile(value)?,
            "eig.p" => self.eig.p = f(value)?,
            "eig.q" => self.eig.q = f(value)?,
            "eig.r" => self.eig.r = f(value)?,
            "logistic.p" => self.logistic.p = f(value)?,
            "logistic.a" => self.logistic.a = f(value)?,
            "logistic.b" => self.logistic.b = f(value)?,
            "sweep.command" => {
                let c = value.trim();
                if !SWEEP_COMMANDS.contains(&c) {
                    return Err(format!("sweep.command must be one of {SWEEP_COMMANDS:?}, got '{c}'"));
                }
                self.sweep.command = c.into();
            }
            "sweep.lambdas" => self.sweep.lambdas = parse_list(value)?,
            "output.dir" => {
                let d = value.trim();
                if d.is_empty() {
                    return Err("output.dir must not be empty".into());
                }
                self.output.dir = d.into();
            }
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Serialises every key; [`parse_config`] reads it back unchanged.
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let s = &self.solver;
        let t = &self.time;
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("model.lambda", fmt_f(m.lambda));
        line("model.mu", fmt_f(m.mu));
        line("model.gamma", fmt_f(m.gamma));
        line("model.D", fmt_f(m.diffusion));
        line("model.d", fmt_motility(m.motility));
        line("model.chi", fmt_taxis(m.taxis));
        line("model.F", m.response.label().into());
        line("model.zeta", fmt_f(m.zeta));
        line("grid.L", fmt_f(self.grid.length));
        line("grid.n", self.grid.n.to_string());
        line("solver.newton_tolerance", fmt_f(s.newton_tolerance));
        line("solver.newton_max_iterations", s.newton_max_iterations.to_string());
        line("solver.classify_threshold", fmt_f(s.classify_threshold));
        line("solver.initial_amplitude", fmt_f(s.initial_amplitude));
        line("solver.initial_step", fmt_f(s.initial_step));
        line("solver.min_step", fmt_f(s.min_step));
        line("solver.max_step", fmt_f(s.max_step));
        line("solver.lambda_cap", fmt_f(s.lambda_cap));
        line("solver.max_steps", s.max_steps.to_string());
        line("solver.max_folds", s.max_folds.to_string());
        line("time.dt", fmt_f(t.dt));
        line("time.T", fmt_f(t.t_final));
        line("time.snapshot_stride", t.snapshot_stride.to_string());
        line("time.regime_threshold", fmt_f(t.regime_threshold));
        line("time.u0", fmt_profile(t.u0));
        line("time.v0", fmt_profile(t.v0));
        line("steady.u0", fmt_profile(self.steady.u0));
        line("steady.v0", fmt_profile(self.steady.v0));
        line("eig.p", fmt_f(self.eig.p));
        line("eig.q", fmt_f(self.eig.q));
        line("eig.r", fmt_f(self.eig.r));
        line("logistic.p", fmt_f(self.logistic.p));
        line("logistic.a", fmt_f(self.logistic.a));
        line("logistic.b", fmt_f(self.logistic.b));
        line("sweep.command", self.sweep.command.clone());
        line(
            "sweep.lambdas",
            self.sweep.lambdas.iter().map(|x| fmt_f(*x)).collect::<Vec<_>>().join(", "),
        );
        line("output.dir", self.output.dir.clone());
        out
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.length, self.grid.n)
    }

    pub fn response(&self) -> Result<ResponseFunction> {
        match self.model.response {
            ResponseKind::LotkaVolterra => Ok(ResponseFunction::lotka_volterra()),
            k => ResponseFunction::new(k, self.model.zeta),
        }
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let m = &self.model;
        let motility = match m.motility {
            MotilitySpec::Constant(c) => Motility::Constant(c),
            MotilitySpec::Rational { a, b } => Motility::Rational { a, b },
        };
        let taxis = match m.taxis {
            TaxisSpec::Constant(c) => Taxis::Constant(c),
            TaxisSpec::NegativeMotilitySlope => Taxis::NegativeMotilitySlope,
        };
        ModelParams::new(m.lambda, m.mu, m.gamma, m.diffusion, motility, taxis, self.response()?)
    }

    pub fn newton_options(&self) -> NewtonOptions {
        NewtonOptions {
            tolerance: self.solver.newton_tolerance,
            max_iterations: self.solver.newton_max_iterations,
            classify_threshold: self.solver.classify_threshold,
            ..NewtonOptions::default()
        }
    }

    pub fn controls(&self) -> Controls {
        let s = &self.solver;
        Controls {
            initial_amplitude: s.initial_amplitude,
            initial_step: s.initial_step,
            min_step: s.min_step,
            max_step: s.max_step,
            lambda_cap: s.lambda_cap,
            max_steps: s.max_steps,
            max_folds: s.max_folds,
            corrector_tolerance: s.newton_tolerance,
            ..Controls::default()
        }
    }

    pub fn simulation(&self, params: ModelParams) -> Result<SimulationConfig> {
        let grid = self.grid()?;
        let mut c = SimulationConfig::new(params, grid.clone(), self.time.u0.field(&grid), self.time.v0.field(&grid));
        c.dt = self.time.dt;
        c.t_final = self.time.t_final;
        c.snapshot_stride = self.time.snapshot_stride;
        c.regime_threshold = self.time.regime_threshold;
        Ok(c)
    }
}

/// Parses and validates a configuration, then applies `overrides`
/// (`section.key=value`), numbered after the last line of `text`.
pub fn parse_config_with(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    let mut lines: HashMap<String, usize> = HashMap::new();
    let extra = overrides.iter().map(String::as_str);
    for (idx, raw) in text.lines().chain(extra).enumerate() {
        let number = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config {
                line: number,
                message: format!("expected 'section.key = value', got '{content}'"),
            });
        };
        let key = key.trim();
        config.set(key, value).map_err(|message| Error::Config { line: number, message })?;
        lines.insert(key.to_string(), number);
    }
    validate(&config, &lines)?;
    Ok(config)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &[])
}

/// Line that last set one of `keys`; 0 when all are defaults.
fn line_of(lines: &HashMap<String, usize>, keys: &[&str]) -> usize {
    keys.iter().filter_map(|k| lines.get(*k)).copied().max().unwrap_or(0)
}

fn validate(config: &RunConfig, lines: &HashMap<String, usize>) -> Result<()> {
    let err = |keys: &[&str], message: String| Error::Config {
        line: line_of(lines, keys),
        message,
    };
    if config.grid.n < 3 {
        return Err(err(&["grid.n"], format!("grid.n must be at least 3, got {}", config.grid.n)));
    }
    if !(config.grid.length > 0.0) {
        return Err(err(&["grid.L"], "grid.L must be positive".into()));
    }
    if !(config.time.dt > 0.0) || !(config.time.t_final >= config.time.dt) {
        return Err(err(&["time.dt", "time.T"], "need time.dt > 0 and time.T >= time.dt".into()));
    }
    let s = &config.solver;
    if !(0.0 < s.min_step && s.min_step <= s.initial_step && s.initial_step <= s.max_step) {
        return Err(err(
            &["solver.min_step", "solver.initial_step", "solver.max_step"],
            "need 0 < solver.min_step <= solver.initial_step <= solver.max_step".into(),
        ));
    }
    if !(s.newton_tolerance > 0.0) || !(s.initial_amplitude > 0.0) || !(s.classify_threshold > 0.0) {
        return Err(err(
            &["solver.newton_tolerance", "solver.initial_amplitude", "solver.classify_threshold"],
            "solver tolerances and amplitudes must be positive".into(),
        ));
    }
    if !(config.time.regime_threshold > 0.0) {
        return Err(err(&["time.regime_threshold"], "time.regime_threshold must be positive".into()));
    }
    const MODEL_KEYS: [&str; 8] = [
        "model.lambda",
        "model.mu",
        "model.gamma",
        "model.D",
        "model.d",
        "model.chi",
        "model.F",
        "model.zeta",
    ];
    let params = config.model_params().map_err(|e| err(&MODEL_KEYS, e.to_string()))?;
    let report = validate_hypotheses(&params, params.mu.max(1.0)).map_err(|e| err(&MODEL_KEYS, e.to_string()))?;
    if let Some(check) = report.failures().first() {
        let keys: &[&str] = match check.name {
            "H_d" => &["model.d"],
            "H_chi" => &["model.chi", "model.d"],
            _ => &["model.F", "model.zeta"],
        };
        let (v, value) = check.first_violation.unwrap_or((f64::NAN, f64::NAN));
        return Err(err(
            keys,
            format!("model hypothesis {} fails at v = {v} (value {value})", check.name),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn response_label_parses() {
        let c = parse_config("model.F = lotka-volterra\n").unwrap();
        assert_eq!(c.response().unwrap().slope_at_zero(), 1.0);
        let c = parse_config("model.F = holling3 # sigmoid\nmodel.zeta = 2\n").unwrap();
        assert_eq!(c.response().unwrap().slope_at_zero(), 0.0);
    }

    #[test]
    fn small_grid_is_rejected() {
        assert!(matches!(parse_config("\ngrid.n = 0"), Err(Error::Config { line: 2, .. })));
    }

    #[test]
    fn unknown_key_reports_line() {
        match parse_config("# header\nmodel.mu = 2\nmodel.muu = 3\n") {
            Err(Error::Config { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("model.muu"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hypothesis_violation_reports_line() {
        match parse_config("model.mu = 2\nmodel.chi = constant(-1)\n") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overrides_apply_after_file() {
        let c = parse_config_with("model.lambda = 1\n", &["model.lambda=5".into()]).unwrap();
        assert_eq!(c.model.lambda, 5.0);
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e3..1e3f64, 1e-9..1e-3f64]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn text_round_trip(
            lambda in finite(), gamma in 0.0..5.0f64, mu in 0.1..10.0f64,
            a in 0.0..3.0f64, b in 0.01..3.0f64, rational in any::<bool>(),
            n in 3usize..2000, lambdas in prop::collection::vec(finite(), 1..6),
            dt in 1e-5..1e-1f64, amp in 0.0..1.0f64,
        ) {
            let mut c = RunConfig::default();
            c.model.lambda = lambda;
            c.model.gamma = gamma;
            c.model.mu = mu;
            c.model.motility = if rational { MotilitySpec::Rational { a, b } } else { MotilitySpec::Constant(b) };
            c.grid.n = n;
            c.sweep.lambdas = lambdas;
            c.time.dt = dt;
            c.time.u0 = Profile::Sine(amp);
            c.steady.v0 = Profile::Constant(amp);
            let back = parse_config(&c.to_text()).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
