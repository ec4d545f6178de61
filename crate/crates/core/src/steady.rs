//! Discrete steady system, its transformed form `w = e^{-g(v)} u`, analytic
//! Jacobians and a damped Newton solver.
//!
//! The predator flux `d(v) u' − u χ(v) v'` is discretised at faces as
//! `a_f (w_{i+1} − w_i)/h` with `a = d(v) e^{g(v)}` averaged arithmetically
//! and `w = e^{-g(v)} u`. This is the same flux in both sets of variables, so
//! the original and transformed residuals share their roots exactly.

use crate::error::{Error, NewtonFailure, Result};
use crate::grid::{laplacian, sup_norm, Field, Grid, TridiagonalOperator};
use crate::linalg::BandMatrix;
use crate::model::ModelParams;

/// Which species survive in a steady state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Coexistence,
    PreyOnly,
    PredatorOnly,
    Trivial,
}

impl StateKind {
    pub fn label(self) -> &'static str {
        match self {
            StateKind::Coexistence => "coexistence",
            StateKind::PreyOnly => "prey-only",
            StateKind::PredatorOnly => "predator-only",
            StateKind::Trivial => "trivial",
        }
    }
}

/// Sup-norm below which a component counts as absent.
pub const CLASSIFY_THRESHOLD: f64 = 1e-8;

pub fn classify(u_sup: f64, v_sup: f64, threshold: f64) -> StateKind {
    match (u_sup > threshold, v_sup > threshold) {
        (true, true) => StateKind::Coexistence,
        (false, true) => StateKind::PreyOnly,
        (true, false) => StateKind::PredatorOnly,
        (false, false) => StateKind::Trivial,
    }
}

/// Converged root of the steady system.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub lambda: f64,
    pub u: Field,
    pub v: Field,
    pub residual_norm: f64,
    pub kind: StateKind,
}

impl SteadyState {
    /// Checks `max v ≤ μ` and `max u ≤ e^{g(μ)} (|λ| + γ max F)` with relative
    /// slack `slack`.
    pub fn check_bounds(&self, params: &ModelParams, slack: f64) -> Result<()> {
        check_bounds(&self.u, &self.v, self.lambda, params, slack)
    }
}

pub fn check_bounds(u: &[f64], v: &[f64], lambda: f64, params: &ModelParams, slack: f64) -> Result<()> {
    let (u_bound, v_bound) = params.with_lambda(lambda).steady_bounds();
    let u_max = u.iter().copied().fold(0.0, f64::max);
    let v_max = v.iter().copied().fold(0.0, f64::max);
    if v_max > v_bound * (1.0 + slack) {
        return Err(Error::Invariant(format!(
            "max v = {v_max} exceeds bound {v_bound} at lambda = {lambda}"
        )));
    }
    if u_max > u_bound * (1.0 + slack) {
        return Err(Error::Invariant(format!(
            "max u = {u_max} exceeds bound {u_bound} at lambda = {lambda}"
        )));
    }
    Ok(())
}

pub fn transform_w(u: &[f64], v: &[f64], params: &ModelParams) -> Field {
    u.iter().zip(v).map(|(&ui, &vi)| (-params.g(vi)).exp() * ui).collect::<Vec<_>>().into()
}

pub fn untransform_w(w: &[f64], v: &[f64], params: &ModelParams) -> Field {
    w.iter().zip(v).map(|(&wi, &vi)| params.g(vi).exp() * wi).collect::<Vec<_>>().into()
}

/// Node-wise quantities shared by residuals and Jacobians.
struct Nodal {
    e: Vec<f64>,
    /// `a = d(v) e^{g(v)}` at the interior nodes
    a: Vec<f64>,
    /// `a'(v) = (d'(v) + χ(v)) e^{g(v)}`
    a_prime: Vec<f64>,
    chi_over_d: Vec<f64>,
    f: Vec<f64>,
    f_prime: Vec<f64>,
    a_boundary: f64,
}

impl Nodal {
    fn new(v: &[f64], params: &ModelParams) -> Self {
        let n = v.len();
        let mut s = Nodal {
            e: Vec::with_capacity(n),
            a: Vec::with_capacity(n),
            a_prime: Vec::with_capacity(n),
            chi_over_d: Vec::with_capacity(n),
            f: Vec::with_capacity(n),
            f_prime: Vec::with_capacity(n),
            a_boundary: params.d(0.0),
        };
        for &vi in v {
            let e = params.g(vi).exp();
            s.e.push(e);
            s.a.push(params.d(vi) * e);
            s.a_prime.push((params.d_prime(vi) + params.chi(vi)) * e);
            s.chi_over_d.push(params.chi_over_d(vi));
            s.f.push(params.f(vi));
            s.f_prime.push(params.f_prime(vi));
        }
        s
    }

    fn faces(&self) -> Vec<f64> {
        let n = self.a.len();
        let ext = |j: usize| {
            if j == 0 || j == n + 1 {
                self.a_boundary
            } else {
                self.a[j - 1]
            }
        };
        (0..=n).map(|j| 0.5 * (ext(j) + ext(j + 1))).collect()
    }
}

fn flux_operator(faces: &[f64], grid: &Grid) -> TridiagonalOperator {
    let n = grid.n();
    let ih2 = 1.0 / (grid.h() * grid.h());
    TridiagonalOperator {
        sub: (0..n - 1).map(|i| -faces[i + 1] * ih2).collect(),
        diag: (0..n).map(|i| (faces[i] + faces[i + 1]) * ih2).collect(),
        sup: (0..n - 1).map(|i| -faces[i + 1] * ih2).collect(),
    }
}

/// Transformed residual in `(w, v)`.
pub fn residual_w(w: &[f64], v: &[f64], lambda: f64, params: &ModelParams, grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let nodal = Nodal::new(v, params);
    residual_w_with(w, v, lambda, params, grid, &nodal)
}

fn residual_w_with(
    w: &[f64],
    v: &[f64],
    lambda: f64,
    params: &ModelParams,
    grid: &Grid,
    nodal: &Nodal,
) -> (Vec<f64>, Vec<f64>) {
    let n = grid.n();
    let aw = flux_operator(&nodal.faces(), grid).apply(w);
    let dv = laplacian(grid, params.diffusion).apply(v);
    let mut r1 = vec![0.0; n];
    let mut r2 = vec![0.0; n];
    for i in 0..n {
        let u = nodal.e[i] * w[i];
        r1[i] = aw[i] - u * (lambda - u + params.gamma * nodal.f[i]);
        r2[i] = dv[i] - params.mu * v[i] + v[i] * v[i] + u * nodal.f[i];
    }
    (r1, r2)
}

/// Steady residual in the original variables `(u, v)`.
pub fn residual(u: &[f64], v: &[f64], lambda: f64, params: &ModelParams, grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let w = transform_w(u, v, params);
    residual_w(&w, v, lambda, params, grid)
}

pub fn residual_norm(r: &(Vec<f64>, Vec<f64>)) -> f64 {
    sup_norm(&r.0).max(sup_norm(&r.1))
}

/// 2×2 block operator; `uv` is the derivative of the first equation with
/// respect to the second unknown, and so on.
#[derive(Debug, Clone)]
pub struct BlockJacobian {
    pub uu: TridiagonalOperator,
    pub uv: TridiagonalOperator,
    pub vu: TridiagonalOperator,
    pub vv: TridiagonalOperator,
}

impl BlockJacobian {
    pub fn apply(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let a = self.uu.apply(x);
        let b = self.uv.apply(y);
        let c = self.vu.apply(x);
        let d = self.vv.apply(y);
        (
            a.iter().zip(&b).map(|(p, q)| p + q).collect(),
            c.iter().zip(&d).map(|(p, q)| p + q).collect(),
        )
    }

    /// Interleaved band matrix with unknown order `(x_0, y_0, x_1, y_1, …)`.
    pub fn to_band(&self) -> BandMatrix {
        let n = self.uu.n();
        let mut m = BandMatrix::zeros(2 * n, 3, 3);
        for i in 0..n {
            for j in i.saturating_sub(1)..=(i + 1).min(n - 1) {
                m.add(2 * i, 2 * j, self.uu.get(i, j));
                m.add(2 * i, 2 * j + 1, self.uv.get(i, j));
                m.add(2 * i + 1, 2 * j, self.vu.get(i, j));
                m.add(2 * i + 1, 2 * j + 1, self.vv.get(i, j));
            }
        }
        m
    }
}

fn add(a: &TridiagonalOperator, b: &TridiagonalOperator) -> TridiagonalOperator {
    let s = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p + q).collect();
    TridiagonalOperator {
        sub: s(&a.sub, &b.sub),
        diag: s(&a.diag, &b.diag),
        sup: s(&a.sup, &b.sup),
    }
}

/// Jacobian of [`residual_w`] with respect to `(w, v)`.
pub fn jacobian_w(w: &[f64], v: &[f64], lambda: f64, params: &ModelParams, grid: &Grid) -> BlockJacobian {
    let nodal = Nodal::new(v, params);
    jacobian_w_with(w, v, lambda, params, grid, &nodal)
}

fn jacobian_w_with(
    w: &[f64],
    v: &[f64],
    lambda: f64,
    params: &ModelParams,
    grid: &Grid,
    nodal: &Nodal,
) -> BlockJacobian {
    let n = grid.n();
    let ih2 = 1.0 / (grid.h() * grid.h());
    let gamma = params.gamma;

    let mut uu = flux_operator(&nodal.faces(), grid);
    let mut uv = TridiagonalOperator::zeros(n);
    let mut vu = TridiagonalOperator::zeros(n);
    let mut vv = laplacian(grid, params.diffusion);
    for i in 0..n {
        let e = nodal.e[i];
        let u = e * w[i];
        let f = nodal.f[i];
        let e_prime = nodal.chi_over_d[i] * e;
        uu.diag[i] += -e * (lambda - 2.0 * u + gamma * f);

        // face-coefficient dependence on v
        let left = if i > 0 { w[i] - w[i - 1] } else { w[i] };
        let right = if i + 1 < n { w[i] - w[i + 1] } else { w[i] };
        uv.diag[i] += 0.5 * nodal.a_prime[i] * (left + right) * ih2;
        if i + 1 < n {
            uv.sup[i] += 0.5 * nodal.a_prime[i + 1] * right * ih2;
        }
        if i > 0 {
            uv.sub[i - 1] += 0.5 * nodal.a_prime[i - 1] * left * ih2;
        }
        uv.diag[i] -= e_prime * w[i] * (lambda - u + gamma * f) + u * (-e_prime * w[i] + gamma * nodal.f_prime[i]);

        vu.diag[i] = e * f;
        vv.diag[i] += -params.mu + 2.0 * v[i] + u * (nodal.f_prime[i] + nodal.chi_over_d[i] * f);
    }
    BlockJacobian { uu, uv, vu, vv }
}

/// Jacobian of [`residual`] with respect to `(u, v)`.
pub fn jacobian(u: &[f64], v: &[f64], lambda: f64, params: &ModelParams, grid: &Grid) -> BlockJacobian {
    let w = transform_w(u, v, params);
    let jw = jacobian_w(&w, v, lambda, params, grid);
    let inv_e: Vec<f64> = v.iter().map(|&vi| (-params.g(vi)).exp()).collect();
    // ∂w/∂v = -(χ/d) w
    let dw_dv: Vec<f64> = w
        .iter()
        .zip(v)
        .map(|(&wi, &vi)| -params.chi_over_d(vi) * wi)
        .collect();
    BlockJacobian {
        uu: jw.uu.times_diagonal(&inv_e),
        uv: add(&jw.uv, &jw.uu.times_diagonal(&dw_dv)),
        vu: jw.vu.times_diagonal(&inv_e),
        vv: add(&jw.vv, &jw.vu.times_diagonal(&dw_dv)),
    }
}

/// Variables Newton iterates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// `(u, v)`
    Original,
    /// `(w, v)` with `w = e^{-g(v)} u`
    Transformed,
}

#[derive(Debug, Clone)]
pub struct NewtonOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    pub classify_threshold: f64,
    pub form: Form,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tolerance: 1e-9,
            max_iterations: 50,
            max_halvings: 30,
            classify_threshold: CLASSIFY_THRESHOLD,
            form: Form::Transformed,
        }
    }
}

/// Damped Newton from `(u0, v0)` at fixed `λ`.
pub fn newton_solve(
    u0: &[f64],
    v0: &[f64],
    lambda: f64,
    params: &ModelParams,
    grid: &Grid,
    options: &NewtonOptions,
) -> Result<SteadyState> {
    let n = grid.n();
    if u0.len() != n || v0.len() != n {
        return Err(Error::InvalidArgument("initial guess length mismatch".into()));
    }
    let form = options.form;
    let to_u = |x: &[f64], v: &[f64]| -> Vec<f64> {
        match form {
            Form::Original => x.to_vec(),
            Form::Transformed => untransform_w(x, v, params).into_inner(),
        }
    };
    let eval = |x: &[f64], v: &[f64]| match form {
        Form::Original => residual(x, v, lambda, params, grid),
        Form::Transformed => residual_w(x, v, lambda, params, grid),
    };
    let mut x = match form {
        Form::Original => u0.to_vec(),
        Form::Transformed => transform_w(u0, v0, params).into_inner(),
    };
    let mut v = v0.to_vec();
    let mut r = eval(&x, &v);
    let mut norm = residual_norm(&r);
    let mut history = vec![norm];
    let fail = |x: &[f64], v: &[f64], history: Vec<f64>| {
        Error::NoConvergence(Box::new(NewtonFailure {
            u: to_u(x, v),
            v: v.to_vec(),
            lambda,
            history,
        }))
    };

    let mut iterations = 0;
    while norm > options.tolerance {
        if iterations == options.max_iterations || !norm.is_finite() {
            return Err(fail(&x, &v, history));
        }
        iterations += 1;
        let jac = match form {
            Form::Original => jacobian(&x, &v, lambda, params, grid),
            Form::Transformed => jacobian_w(&x, &v, lambda, params, grid),
        };
        let rhs: Vec<f64> = (0..n).flat_map(|i| [-r.0[i], -r.1[i]]).collect();
        let step = match jac.to_band().factor() {
            Ok(lu) => lu.solve(&rhs),
            Err(_) => return Err(fail(&x, &v, history)),
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=options.max_halvings {
            let xt: Vec<f64> = (0..n).map(|i| x[i] + t * step[2 * i]).collect();
            let vt: Vec<f64> = (0..n).map(|i| v[i] + t * step[2 * i + 1]).collect();
            let rt = eval(&xt, &vt);
            let nt = residual_norm(&rt);
            if nt < norm {
                x = xt;
                v = vt;
                r = rt;
                norm = nt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        history.push(norm);
        if !accepted {
            return Err(fail(&x, &v, history));
        }
    }

    let u = to_u(&x, &v);
    finalize(u, v, lambda, norm, options.classify_threshold)
}

/// Classifies a converged root, zeroes absent components and rejects roots
/// with genuinely negative entries.
pub fn finalize(mut u: Vec<f64>, mut v: Vec<f64>, lambda: f64, residual_norm: f64, threshold: f64) -> Result<SteadyState> {
    let u_sup = sup_norm(&u);
    let v_sup = sup_norm(&v);
    let kind = classify(u_sup, v_sup, threshold);
    if u_sup <= threshold {
        u.iter_mut().for_each(|x| *x = 0.0);
    }
    if v_sup <= threshold {
        v.iter_mut().for_each(|x| *x = 0.0);
    }
    let min_u = u.iter().copied().fold(f64::INFINITY, f64::min);
    let min_v = v.iter().copied().fold(f64::INFINITY, f64::min);
    let strict = kind == StateKind::Coexistence;
    let bad = |m: f64, present: bool| if strict && present { !(m > 0.0) } else { m < 0.0 };
    if bad(min_u, u_sup > threshold) || bad(min_v, v_sup > threshold) {
        return Err(Error::NonPhysicalRoot { min_u, min_v });
    }
    Ok(SteadyState {
        lambda,
        u: u.into(),
        v: v.into(),
        residual_norm,
        kind,
    })
}
