//! Pseudo-arclength continuation of the coexistence branch that leaves the
//! prey-only state, endpoint detection, and an eigenvalue scan locating the
//! bifurcation point independently.
//!
//! Unknowns are `(w, v, λ)` with `w` and `v` interleaved. Distances use the
//! inner product `h Σ e^{g(v)} w² + h Σ v² + λ²`.

use crate::bifurcation::BifurcationBundle;
use crate::error::{Error, Result};
use crate::grid::{sup_distance, sup_norm, Field, Grid, TridiagonalOperator};
use crate::linalg::{dot, solve_tridiagonal, BorderedSystem};
use crate::model::ModelParams;
use crate::scalar::{discrete_sigma1, predator_only_state, prey_only_state};
use crate::steady::{jacobian_w, residual_norm, residual_w, untransform_w};

/// Step-size and termination settings.
#[derive(Debug, Clone)]
pub struct Controls {
    /// Amplitude `∫ e^{g(ω)} w Φ` of the first point off the prey-only state.
    pub initial_amplitude: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub growth: f64,
    pub successes_before_growth: usize,
    pub lambda_cap: f64,
    pub max_steps: usize,
    pub max_folds: usize,
    pub max_start_halvings: usize,
    pub corrector_tolerance: f64,
    pub corrector_iterations: usize,
    /// Sup-norm below which a component counts as vanished at an endpoint.
    pub endpoint_sup: f64,
    /// Sup-distance to the semitrivial state required at an endpoint.
    pub endpoint_distance: f64,
}

impl Default for Controls {
    fn default() -> Self {
        Controls {
            initial_amplitude: 1e-3,
            initial_step: 1e-2,
            min_step: 1e-5,
            max_step: 0.1,
            growth: 1.3,
            successes_before_growth: 3,
            lambda_cap: 50.0,
            max_steps: 10_000,
            max_folds: 10,
            max_start_halvings: 10,
            corrector_tolerance: 1e-9,
            corrector_iterations: 15,
            endpoint_sup: 1e-6,
            endpoint_distance: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub lambda: f64,
    pub u: Field,
    pub v: Field,
    /// Accumulated distance from the bifurcation point.
    pub s: f64,
    pub positive: bool,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Origin {
    /// Leaves `(λ_μ, 0, ω_μ)` on the prey-only branch.
    PreyOnlyBranch { lambda_mu: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    /// Reaches the predator-only branch: `v → 0`, `u → θ_λ`.
    HitsGammaU,
    /// Returns to the prey-only branch: `u → 0`, `v → ω_μ`.
    HitsGammaV,
    LambdaCap,
    FoldLimit,
    StepFailure,
}

impl Endpoint {
    pub fn label(self) -> &'static str {
        match self {
            Endpoint::HitsGammaU => "hits-gamma-u",
            Endpoint::HitsGammaV => "hits-gamma-v",
            Endpoint::LambdaCap => "reached-lambda-cap",
            Endpoint::FoldLimit => "fold-limit",
            Endpoint::StepFailure => "step-failure",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Branch {
    /// First point is the bifurcation point itself.
    pub points: Vec<BranchPoint>,
    pub origin: Origin,
    pub endpoint: Endpoint,
    pub folds: usize,
    /// `(λ(s) − λ_μ)/s` at the two start amplitudes.
    pub start_slopes: [f64; 2],
    pub start_amplitudes: [f64; 2],
}

impl Branch {
    pub fn lambda_range(&self) -> (f64, f64) {
        self.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.lambda), hi.max(p.lambda))
        })
    }

    pub fn last(&self) -> &BranchPoint {
        self.points.last().expect("branch has at least the bifurcation point")
    }

    /// Point closest to `lambda` by linear interpolation index.
    pub fn nearest(&self, lambda: f64) -> &BranchPoint {
        self.points
            .iter()
            .filter(|p| p.positive)
            .min_by(|a, b| (a.lambda - lambda).abs().total_cmp(&(b.lambda - lambda).abs()))
            .unwrap_or(&self.points[0])
    }
}

/// Number of reversals of the direction of `λ` along the points.
pub fn count_folds(points: &[BranchPoint]) -> usize {
    let mut folds = 0;
    let mut last_sign = 0.0;
    for pair in points.windows(2) {
        let d = pair[1].lambda - pair[0].lambda;
        if d == 0.0 {
            continue;
        }
        let sign = d.signum();
        if last_sign != 0.0 && sign != last_sign {
            folds += 1;
        }
        last_sign = sign;
    }
    folds
}

/// Endpoint reached by the last point of `tail`, if any.
pub fn classify_endpoint(
    tail: &[BranchPoint],
    params: &ModelParams,
    grid: &Grid,
    controls: &Controls,
) -> Result<Option<Endpoint>> {
    if tail.len() < 2 {
        return Err(Error::InvalidArgument("endpoint classification needs two points".into()));
    }
    let last = &tail[tail.len() - 1];
    if sup_norm(&last.u) < controls.endpoint_sup {
        if let Some(omega) = prey_only_state(params, grid)? {
            if sup_distance(&last.v, &omega.theta) < controls.endpoint_distance {
                return Ok(Some(Endpoint::HitsGammaV));
            }
        }
    }
    if sup_norm(&last.v) < controls.endpoint_sup {
        if let Some(theta) = predator_only_state(params, last.lambda, grid)? {
            if sup_distance(&last.u, &theta.theta) < controls.endpoint_distance {
                return Ok(Some(Endpoint::HitsGammaU));
            }
        }
    }
    if last.lambda > controls.lambda_cap {
        return Ok(Some(Endpoint::LambdaCap));
    }
    if count_folds(tail) > controls.max_folds {
        return Ok(Some(Endpoint::FoldLimit));
    }
    Ok(None)
}

/// Point in `(w, v, λ)` space.
#[derive(Debug, Clone)]
struct State {
    /// `(w_0, v_0, w_1, v_1, …)`
    z: Vec<f64>,
    lambda: f64,
}

impl State {
    fn from_parts(w: &[f64], v: &[f64], lambda: f64) -> Self {
        State {
            z: w.iter().zip(v).flat_map(|(&a, &b)| [a, b]).collect(),
            lambda,
        }
    }

    fn w(&self) -> Vec<f64> {
        self.z.iter().step_by(2).copied().collect()
    }

    fn v(&self) -> Vec<f64> {
        self.z.iter().skip(1).step_by(2).copied().collect()
    }

    fn axpy(&self, t: f64, dir: &State) -> State {
        State {
            z: self.z.iter().zip(&dir.z).map(|(a, b)| a + t * b).collect(),
            lambda: self.lambda + t * dir.lambda,
        }
    }

    fn minus(&self, other: &State) -> State {
        self.axpy(-1.0, other)
    }

    fn is_positive(&self) -> bool {
        self.z.iter().all(|&x| x > 0.0)
    }
}

/// Diagonal of the weighted inner product, evaluated at `at`.
fn weights(at: &State, params: &ModelParams, grid: &Grid) -> Vec<f64> {
    let h = grid.h();
    at.v().iter().flat_map(|&vi| [h * params.g(vi).exp(), h]).collect()
}

fn weighted_dot(a: &State, b: &State, wt: &[f64]) -> f64 {
    a.z.iter().zip(&b.z).zip(wt).map(|((x, y), c)| x * y * c).sum::<f64>() + a.lambda * b.lambda
}

/// Linear side condition `c·z + d λ = rhs`.
struct Constraint {
    c: Vec<f64>,
    d: f64,
    rhs: f64,
}

impl Constraint {
    fn residual(&self, x: &State) -> f64 {
        dot(&self.c, &x.z) + self.d * x.lambda - self.rhs
    }
}

/// Newton on the steady residual augmented by one linear constraint.
fn correct(
    start: &State,
    constraint: &Constraint,
    params: &ModelParams,
    grid: &Grid,
    controls: &Controls,
) -> Option<(State, f64)> {
    let n = grid.n();
    let eval = |x: &State| {
        let r = residual_w(&x.w(), &x.v(), x.lambda, params, grid);
        let norm = residual_norm(&r);
        (r, norm)
    };
    let scale = |x: &State| sup_norm(&x.z).max(x.lambda.abs()).max(1.0);
    let mut x = start.clone();
    let (mut r, mut norm) = eval(&x);
    let mut g = constraint.residual(&x);
    for _ in 0..controls.corrector_iterations {
        if norm <= controls.corrector_tolerance && g.abs() <= 1e-12 * scale(&x) {
            return Some((x, norm));
        }
        let w = x.w();
        let v = x.v();
        let band = jacobian_w(&w, &v, x.lambda, params, grid).to_band();
        let u = untransform_w(&w, &v, params);
        let b: Vec<f64> = u.iter().flat_map(|&ui| [-ui, 0.0]).collect();
        let system = BorderedSystem::new(&band, b, constraint.c.clone(), constraint.d).ok()?;
        let f: Vec<f64> = (0..n).flat_map(|i| [-r.0[i], -r.1[i]]).collect();
        let (dz, dl) = system.solve(&f, -g);
        let step = State { z: dz, lambda: dl };
        let merit = norm.max(g.abs());
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let trial = x.axpy(t, &step);
            let (rt, nt) = eval(&trial);
            let gt = constraint.residual(&trial);
            if nt.max(gt.abs()) < merit && nt.is_finite() {
                x = trial;
                r = rt;
                norm = nt;
                g = gt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (norm <= controls.corrector_tolerance && g.abs() <= 1e-12 * scale(&x)).then_some((x, norm))
}

fn to_point(x: &State, s: f64, residual: f64, params: &ModelParams) -> BranchPoint {
    let w = x.w();
    let v = x.v();
    BranchPoint {
        lambda: x.lambda,
        u: untransform_w(&w, &v, params),
        v: v.into(),
        s,
        positive: x.is_positive(),
        residual_norm: residual,
    }
}

/// Traces the coexistence branch leaving `(λ_μ, 0, ω_μ)` in the direction
/// of positive predator density.
pub fn branch_from_prey_bifurcation(
    bundle: &BifurcationBundle,
    params: &ModelParams,
    grid: &Grid,
    controls: &Controls,
) -> Result<Branch> {
    let n = grid.n();
    let h = grid.h();
    let origin = State::from_parts(&vec![0.0; n], &bundle.omega, bundle.lambda_mu);
    let direction = State::from_parts(&bundle.big_phi, &bundle.psi, bundle.lambda_prime0);
    let amplitude_row: Vec<f64> = (0..n)
        .flat_map(|i| [h * bundle.weight[i] * bundle.big_phi[i], 0.0])
        .collect();
    let amplitude = |s: f64| Constraint {
        c: amplitude_row.clone(),
        d: 0.0,
        rhs: s,
    };

    let mut s0 = controls.initial_amplitude;
    let mut start = None;
    for _ in 0..=controls.max_start_halvings {
        let first = correct(&origin.axpy(s0, &direction), &amplitude(s0), params, grid, controls);
        if let Some((x1, r1)) = first.filter(|(x, _)| x.is_positive()) {
            let guess = origin.axpy(2.0, &x1.minus(&origin));
            if let Some((x2, r2)) = correct(&guess, &amplitude(2.0 * s0), params, grid, controls)
                .filter(|(x, _)| x.is_positive())
            {
                start = Some(((x1, r1), (x2, r2)));
                break;
            }
        }
        s0 *= 0.5;
    }
    let Some(((x1, r1), (x2, r2))) = start else {
        return Err(Error::BifurcationStart(format!(
            "no positive corrector solution near lambda_mu = {} down to amplitude {s0:e}",
            bundle.lambda_mu
        )));
    };

    let distance = |a: &State, b: &State| {
        let d = a.minus(b);
        weighted_dot(&d, &d, &weights(b, params, grid)).sqrt()
    };
    let mut s = distance(&x1, &origin);
    let mut points = vec![to_point(&origin, 0.0, 0.0, params), to_point(&x1, s, r1, params)];
    s += distance(&x2, &x1);
    points.push(to_point(&x2, s, r2, params));
    let start_slopes = [
        (x1.lambda - bundle.lambda_mu) / s0,
        (x2.lambda - bundle.lambda_mu) / (2.0 * s0),
    ];

    let mut prev = x1;
    let mut cur = x2;
    let mut ds = controls.initial_step.clamp(controls.min_step, controls.max_step);
    let mut successes = 0;
    let mut folds = 0;
    let mut last_sign = (cur.lambda - prev.lambda).signum();
    let mut endpoint = Endpoint::StepFailure;

    for _ in 0..controls.max_steps {
        let wt = weights(&cur, params, grid);
        let secant = cur.minus(&prev);
        let norm = weighted_dot(&secant, &secant, &wt).sqrt();
        let tangent = State {
            z: secant.z.iter().map(|x| x / norm).collect(),
            lambda: secant.lambda / norm,
        };
        let c: Vec<f64> = tangent.z.iter().zip(&wt).map(|(t, w)| t * w).collect();
        let rhs = dot(&c, &cur.z) + tangent.lambda * cur.lambda + ds;
        let arclength = Constraint {
            c,
            d: tangent.lambda,
            rhs,
        };
        let corrected = correct(&cur.axpy(ds, &tangent), &arclength, params, grid, controls)
            .filter(|(x, _)| distance(x, &cur) <= 2.0 * ds);

        let mut accepted = None;
        if let Some((x, r)) = corrected {
            if x.is_positive() {
                accepted = Some((x, r));
            } else if let Some((end, r_end, kind)) = refine_endpoint(&cur, &x, bundle, params, grid, controls)? {
                s += distance(&end, &cur);
                points.push(to_point(&end, s, r_end, params));
                endpoint = kind;
                break;
            }
        }
        match accepted {
            Some((x, r)) => {
                s += distance(&x, &cur);
                let sign = (x.lambda - cur.lambda).signum();
                if sign != 0.0 && last_sign != 0.0 && sign != last_sign {
                    folds += 1;
                }
                if sign != 0.0 {
                    last_sign = sign;
                }
                points.push(to_point(&x, s, r, params));
                prev = cur;
                cur = x;
                if cur.lambda > controls.lambda_cap {
                    endpoint = Endpoint::LambdaCap;
                    break;
                }
                if folds > controls.max_folds {
                    endpoint = Endpoint::FoldLimit;
                    break;
                }
                successes += 1;
                if successes >= controls.successes_before_growth {
                    ds = (ds * controls.growth).min(controls.max_step);
                    successes = 0;
                }
            }
            None => {
                ds *= 0.5;
                successes = 0;
                if ds < controls.min_step {
                    break;
                }
            }
        }
    }

    Ok(Branch {
        points,
        origin: Origin::PreyOnlyBranch {
            lambda_mu: bundle.lambda_mu,
        },
        endpoint,
        folds,
        start_slopes,
        start_amplitudes: [s0, 2.0 * s0],
    })
}

/// Locates where the branch leaves the positive cone between `inside`
/// (positive) and `outside` by pinning the vanishing component to a tiny
/// amplitude, then checks which semitrivial state it meets.
fn refine_endpoint(
    inside: &State,
    outside: &State,
    bundle: &BifurcationBundle,
    params: &ModelParams,
    grid: &Grid,
    controls: &Controls,
) -> Result<Option<(State, f64, Endpoint)>> {
    let n = grid.n();
    let h = grid.h();
    let prey_vanishes = outside.v().iter().any(|&x| x <= 0.0);
    // 0 selects w, 1 selects v in the interleaved layout
    let slot = usize::from(prey_vanishes);
    let component = |x: &State| -> Vec<f64> { x.z.iter().skip(slot).step_by(2).copied().collect() };
    let c_in = component(inside);
    let mass_in: f64 = h * c_in.iter().sum::<f64>();
    let mass_out: f64 = h * component(outside).iter().sum::<f64>();
    let target = 0.5 * controls.endpoint_sup * mass_in / sup_norm(&c_in);
    let alpha = if mass_in > mass_out {
        ((mass_in - target) / (mass_in - mass_out)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let guess = inside.axpy(alpha, &outside.minus(inside));
    let mut c = vec![0.0; 2 * n];
    for i in 0..n {
        c[2 * i + slot] = h;
    }
    let constraint = Constraint { c, d: 0.0, rhs: target };
    let Some((x, r)) = correct(&guess, &constraint, params, grid, controls) else {
        return Ok(None);
    };
    if !x.is_positive() {
        return Ok(None);
    }
    let point = to_point(&x, 0.0, r, params);
    let prev = to_point(inside, 0.0, 0.0, params);
    let expected = if prey_vanishes {
        Endpoint::HitsGammaU
    } else {
        Endpoint::HitsGammaV
    };
    let found = match expected {
        Endpoint::HitsGammaV => {
            sup_norm(&point.u) < controls.endpoint_sup
                && sup_distance(&point.v, &bundle.omega) < controls.endpoint_distance
        }
        _ => classify_endpoint(&[prev, point], params, grid, controls)? == Some(Endpoint::HitsGammaU),
    };
    Ok(found.then_some((x, r, expected)))
}

/// Jacobian block `∂R₁/∂u` at `(0, ω_μ)`; its principal eigenvalue has the
/// sign of `λ_μ − λ`.
fn predator_linearization(lambda: f64, omega: &[f64], params: &ModelParams, grid: &Grid) -> TridiagonalOperator {
    let zero = vec![0.0; omega.len()];
    crate::steady::jacobian(&zero, omega, lambda, params, grid).uu
}

/// Smallest eigenvalue of a tridiagonal matrix with positive off-diagonal
/// products, by shifted inverse iteration.
pub fn smallest_eigenvalue(a: &TridiagonalOperator) -> Result<f64> {
    let n = a.n();
    let mut gershgorin = f64::INFINITY;
    for i in 0..n {
        let left = if i > 0 { a.sub[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { a.sup[i].abs() } else { 0.0 };
        gershgorin = gershgorin.min(a.diag[i] - left - right);
    }
    let mut shift = gershgorin - 1e-3 * gershgorin.abs().max(1.0);
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut estimate = f64::INFINITY;
    let mut refined = false;
    for _ in 0..10_000 {
        let shifted = TridiagonalOperator {
            sub: a.sub.clone(),
            diag: a.diag.iter().map(|d| d - shift).collect(),
            sup: a.sup.clone(),
        };
        let y = solve_tridiagonal(&shifted, &x)?;
        let next = shift + 1.0 / dot(&x, &y);
        let norm = dot(&y, &y).sqrt();
        x = y.iter().map(|v| v / norm).collect();
        let change = (next - estimate).abs();
        let scale = next.abs().max(1.0);
        estimate = next;
        if change <= 1e-14 * scale {
            return Ok(estimate);
        }
        if !refined && change <= 1e-6 * scale {
            shift = estimate - 1e-3 * scale;
            refined = true;
        }
    }
    Err(Error::Convergence {
        what: "tridiagonal inverse iteration",
        iterations: 10_000,
        residual: f64::NAN,
    })
}

pub const SCAN_TOLERANCE: f64 = 1e-12;

/// Values of `λ` in `range` at which the principal eigenvalue of the predator
/// linearization at `(0, ω_μ)` changes sign.
pub fn bifurcation_point_scan(params: &ModelParams, grid: &Grid, range: (f64, f64), samples: usize) -> Result<Vec<f64>> {
    let omega = prey_only_state(params, grid)?
        .ok_or(Error::PreyStateMissing {
            mu: params.mu,
            threshold: params.diffusion * discrete_sigma1(grid),
        })?
        .theta;
    if samples < 2 || !(range.1 > range.0) {
        return Err(Error::InvalidArgument("scan needs two samples on a nonempty range".into()));
    }
    let kappa = |lambda: f64| smallest_eigenvalue(&predator_linearization(lambda, &omega, params, grid));
    let ladder: Vec<f64> = (0..samples)
        .map(|k| range.0 + (range.1 - range.0) * k as f64 / (samples - 1) as f64)
        .collect();
    let values = ladder.iter().map(|&l| kappa(l)).collect::<Result<Vec<_>>>()?;
    let mut found = Vec::new();
    for k in 0..samples - 1 {
        let (mut lo, mut hi) = (ladder[k], ladder[k + 1]);
        let (f_lo, f_hi) = (values[k], values[k + 1]);
        if f_lo == 0.0 {
            found.push(lo);
            continue;
        }
        if f_lo.signum() == f_hi.signum() || f_hi == 0.0 {
            continue;
        }
        while hi - lo > SCAN_TOLERANCE * hi.abs().max(1.0) {
            let mid = 0.5 * (lo + hi);
            let f_mid = kappa(mid)?;
            if f_mid == 0.0 {
                lo = mid;
                hi = mid;
            } else if f_mid.signum() == f_lo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        found.push(0.5 * (lo + hi));
    }
    if let Some(&last) = values.last() {
        if last == 0.0 {
            found.push(range.1);
        }
    }
    Ok(found)
}
