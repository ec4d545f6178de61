//! Bifurcation of coexistence states from the prey-only state, the predator
//! branch threshold, linear stability of semitrivial states and the explicit
//! nonexistence bound.

use crate::error::{Error, Result};
use crate::grid::{laplacian, nodal_gradient, Coefficient, Field, Grid};
use crate::linalg::solve_tridiagonal;
use crate::model::ModelParams;
use crate::scalar::{
    discrete_sigma1, eigen_residual, predator_only_state, prey_only_state, principal_eigen, EigenPair,
};
use crate::steady::StateKind;

/// Data at the point where coexistence states branch off `(0, ω_μ)`.
#[derive(Debug, Clone)]
pub struct BifurcationBundle {
    pub lambda_mu: f64,
    /// `Φ_μ > 0` with `∫ e^{g(ω_μ)} Φ_μ² = 1`
    pub big_phi: Field,
    /// `φ_μ = e^{g(ω_μ)} Φ_μ`, the predator direction of the kernel
    pub phi: Field,
    /// `ψ_μ < 0`, the prey direction of the kernel
    pub psi: Field,
    pub lambda_prime0: f64,
    pub omega: Field,
    /// `e^{g(ω_μ)}`
    pub weight: Field,
    pub eigen_residual: f64,
}

fn require_prey_state(params: &ModelParams, grid: &Grid) -> Result<Field> {
    prey_only_state(params, grid)?
        .map(|s| s.theta)
        .ok_or(Error::PreyStateMissing {
            mu: params.mu,
            threshold: params.diffusion * discrete_sigma1(grid),
        })
}

pub fn lambda_mu_bundle(params: &ModelParams, grid: &Grid) -> Result<BifurcationBundle> {
    let omega = require_prey_state(params, grid)?;
    let n = grid.n();
    let weight: Vec<f64> = omega.iter().map(|&w| params.g(w).exp()).collect();
    let p = Coefficient::of_field(&omega, |w| params.d(w) * params.g(w).exp());
    let q: Vec<f64> = (0..n)
        .map(|i| -params.gamma * params.f(omega[i]) * weight[i])
        .collect();
    let EigenPair { sigma, phi: big_phi } = principal_eigen(&p, &q, &weight, grid)?;
    let eig_res = eigen_residual(
        &p,
        &q,
        &weight,
        grid,
        &EigenPair {
            sigma,
            phi: big_phi.clone(),
        },
    )?;

    let phi: Vec<f64> = (0..n).map(|i| weight[i] * big_phi[i]).collect();
    let mut op = laplacian(grid, params.diffusion);
    let shift: Vec<f64> = omega.iter().map(|&w| 2.0 * w - params.mu).collect();
    op.add_diagonal(&shift);
    let rhs: Vec<f64> = (0..n).map(|i| -params.f(omega[i]) * phi[i]).collect();
    let psi = solve_tridiagonal(&op, &rhs)?;

    let mut bundle = BifurcationBundle {
        lambda_mu: sigma,
        big_phi,
        phi: phi.into(),
        psi: psi.into(),
        lambda_prime0: 0.0,
        omega,
        weight: weight.into(),
        eigen_residual: eig_res,
    };
    bundle.lambda_prime0 = lambda_prime0(&bundle, params, grid);
    Ok(bundle)
}

/// Slope `λ'(0)` of the coexistence branch at the bifurcation point.
pub fn lambda_prime0(bundle: &BifurcationBundle, params: &ModelParams, grid: &Grid) -> f64 {
    let n = grid.n();
    let om = &bundle.omega;
    let e = &bundle.weight;
    let bp = &bundle.big_phi;
    let psi = &bundle.psi;
    let grad = nodal_gradient(grid, bp);
    let mut gradient_term = vec![0.0; n];
    let mut cubic = vec![0.0; n];
    let mut lambda_term = vec![0.0; n];
    let mut response_term = vec![0.0; n];
    let mut norm = vec![0.0; n];
    for i in 0..n {
        let w = om[i];
        let cd = params.chi_over_d(w);
        let p2 = bp[i] * bp[i];
        gradient_term[i] = (params.d_prime(w) + params.chi(w)) * e[i] * psi[i] * grad[i] * grad[i];
        cubic[i] = e[i] * e[i] * p2 * bp[i];
        lambda_term[i] = cd * e[i] * psi[i] * p2;
        response_term[i] = (params.f_prime(w) + cd * params.f(w)) * e[i] * psi[i] * p2;
        norm[i] = e[i] * p2;
    }
    let num = grid.integrate(&gradient_term) + grid.integrate(&cubic)
        - bundle.lambda_mu * grid.integrate(&lambda_term)
        - params.gamma * grid.integrate(&response_term);
    num / grid.integrate(&norm)
}

/// `μ_λ = σ₁(D, θ_λ F'(0); 1)`; equals `D σ₁` when `θ_λ` does not exist.
pub fn mu_lambda(lambda: f64, params: &ModelParams, grid: &Grid) -> Result<f64> {
    let n = grid.n();
    let slope = params.f_prime(0.0);
    let q: Vec<f64> = match predator_only_state(params, lambda, grid)? {
        Some(s) => s.theta.iter().map(|t| t * slope).collect(),
        None => return Ok(params.diffusion * discrete_sigma1(grid)),
    };
    Ok(principal_eigen(&Coefficient::constant(n, params.diffusion), &q, &vec![1.0; n], grid)?.sigma)
}

pub const LAMBDA_STAR_TOLERANCE: f64 = 1e-8;
const MAX_EXPANSIONS: usize = 60;

/// Solves `μ_λ = μ` for `λ`.
pub fn lambda_star(mu: f64, params: &ModelParams, grid: &Grid) -> Result<f64> {
    if !(params.f_prime(0.0) > 0.0) {
        return Err(Error::NotApplicable(
            "predator branch threshold requires F'(0) > 0".into(),
        ));
    }
    let params = params.with_mu(mu)?;
    let threshold = params.diffusion * discrete_sigma1(grid);
    if mu <= threshold {
        return Err(Error::PreyStateMissing { mu, threshold });
    }
    let lo0 = params.d(0.0) * discrete_sigma1(grid);
    let mut excess = mu;
    let mut hi = lo0 + excess;
    let mut expansions = 0;
    while mu_lambda(hi, &params, grid)? <= mu {
        expansions += 1;
        if expansions > MAX_EXPANSIONS {
            return Err(Error::Divergence(format!(
                "mu_lambda stayed below mu = {mu} up to lambda = {hi}"
            )));
        }
        excess *= 2.0;
        hi = lo0 + excess;
    }
    // μ_λ at the lower end is D σ₁ < μ
    let mut lo = lo0;
    while hi - lo > LAMBDA_STAR_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mu_lambda(mid, &params, grid)? > mu {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Linear stability of a semitrivial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityVerdict {
    pub kind: StateKind,
    pub stable: bool,
    /// Decisive eigenvalue gap; positive exactly when stable.
    pub margin: f64,
}

/// `which` must be [`StateKind::PredatorOnly`] or [`StateKind::PreyOnly`].
pub fn classify_semitrivial(which: StateKind, lambda: f64, params: &ModelParams, grid: &Grid) -> Result<StabilityVerdict> {
    let margin = match which {
        StateKind::PredatorOnly => {
            if predator_only_state(params, lambda, grid)?.is_none() {
                return Err(Error::PredatorStateMissing {
                    lambda,
                    threshold: params.d(0.0) * discrete_sigma1(grid),
                });
            }
            mu_lambda(lambda, params, grid)? - params.mu
        }
        StateKind::PreyOnly => lambda_mu_bundle(params, grid)?.lambda_mu - lambda,
        other => {
            return Err(Error::InvalidArgument(format!(
                "{} is not a semitrivial state",
                other.label()
            )))
        }
    };
    Ok(StabilityVerdict {
        kind: which,
        stable: margin > 0.0,
        margin,
    })
}

pub const DEGENERATE_TOLERANCE: f64 = 1e-10;

/// `λ` at or below which no positive steady state exists.
pub fn nonexistence_lower_bound(params: &ModelParams, grid: &Grid) -> Result<f64> {
    require_prey_state(params, grid)?;
    let mu = params.mu;
    let e = params.g(mu).exp();
    let f_max = params.response().max_on(mu);
    // constant coefficients: σ₁(c, q; r) = (c σ₁ + q) / r
    let s = params.d(mu) * discrete_sigma1(grid) - params.gamma * e * f_max;
    Ok(if s.abs() <= DEGENERATE_TOLERANCE {
        0.0
    } else if s > 0.0 {
        s / e
    } else {
        s
    })
}
