//! Principal eigenvalues `σ₁(p, q; r)` and diffusive logistic solutions
//! `θ_{p,a,b}`, including the semitrivial states `θ_λ` and `ω_μ`.

use crate::error::{Error, Result};
use crate::grid::{assemble_div_form, sup_norm, Coefficient, Field, Grid, TridiagonalOperator};
use crate::linalg::{solve_spd_tridiagonal, BandMatrix};
use crate::model::ModelParams;

/// Principal eigenvalue with its positive eigenfunction, normalised so that
/// `∫ r φ² dx = 1`.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub sigma: f64,
    pub phi: Field,
}

/// Hard cap on inverse-iteration sweeps.
pub const EIGEN_MAX_ITERATIONS: usize = 10_000;

/// Smallest eigenvalue of `-(p φ')' + q φ = σ r φ` with Dirichlet conditions.
///
/// Shifted inverse iteration from a Gershgorin lower bound, then a second
/// phase with the shift moved just below the current Rayleigh quotient.
pub fn principal_eigen(p: &Coefficient, q: &[f64], r: &[f64], grid: &Grid) -> Result<EigenPair> {
    let n = grid.n();
    if r.len() != n {
        return Err(Error::InvalidArgument("weight length mismatch".into()));
    }
    for (i, &ri) in r.iter().enumerate() {
        if !(ri > 0.0) {
            return Err(Error::CoefficientSign {
                what: "r",
                index: i,
                value: ri,
            });
        }
    }
    let a = assemble_div_form(p, q, grid)?;
    principal_eigen_of(&a, r, grid)
}

/// Principal eigenpair of an assembled symmetric operator against weight `r`.
pub fn principal_eigen_of(a: &TridiagonalOperator, r: &[f64], grid: &Grid) -> Result<EigenPair> {
    let n = a.n();
    let gersh = (0..n)
        .map(|i| {
            let mut off = 0.0;
            if i > 0 {
                off += a.sub[i - 1].abs() / (r[i] * r[i - 1]).sqrt();
            }
            if i + 1 < n {
                off += a.sup[i].abs() / (r[i] * r[i + 1]).sqrt();
            }
            a.diag[i] / r[i] - off
        })
        .fold(f64::INFINITY, f64::min);
    let mut shift = gersh - 1.0;

    let rayleigh = |x: &[f64]| -> f64 {
        let ax = a.apply(x);
        let num: f64 = x.iter().zip(&ax).map(|(xi, yi)| xi * yi).sum();
        let den: f64 = x.iter().zip(r).map(|(xi, ri)| ri * xi * xi).sum();
        num / den
    };
    let shifted = |tau: f64| {
        let mut m = a.clone();
        for (d, ri) in m.diag.iter_mut().zip(r) {
            *d -= tau * ri;
        }
        m
    };

    let length = grid.length();
    let mut x: Vec<f64> = (0..n)
        .map(|i| (std::f64::consts::PI * grid.node(i) / length).sin())
        .collect();
    let mut sigma = rayleigh(&x);
    let mut m = shifted(shift);
    let mut refined = false;
    let mut last_increment = f64::INFINITY;
    for _ in 0..EIGEN_MAX_ITERATIONS {
        let rx: Vec<f64> = x.iter().zip(r).map(|(xi, ri)| xi * ri).collect();
        let y = match solve_spd_tridiagonal(&m, &rx) {
            Some(y) => y,
            None => {
                // shift landed above σ₁: back off towards the safe bound
                shift = 0.5 * (shift + gersh - 1.0);
                m = shifted(shift);
                continue;
            }
        };
        let norm = y.iter().zip(r).map(|(yi, ri)| ri * yi * yi).sum::<f64>().sqrt();
        x = y.iter().map(|yi| yi / norm).collect();
        let next = rayleigh(&x);
        last_increment = (next - sigma).abs();
        sigma = next;
        let scale = sigma.abs().max(1.0);
        if !refined && last_increment <= 1e-8 * scale {
            refined = true;
            shift = sigma - 0.01 * (sigma - shift).abs().max(1e-6 * scale);
            m = shifted(shift);
        } else if refined && last_increment <= 1e-12 * scale {
            return finish(sigma, x, r, grid);
        }
    }
    Err(Error::Convergence {
        what: "principal eigenvalue",
        iterations: EIGEN_MAX_ITERATIONS,
        residual: last_increment,
    })
}

fn finish(sigma: f64, mut x: Vec<f64>, r: &[f64], grid: &Grid) -> Result<EigenPair> {
    if x.iter().sum::<f64>() < 0.0 {
        for xi in x.iter_mut() {
            *xi = -*xi;
        }
    }
    let norm = (grid.h() * x.iter().zip(r).map(|(xi, ri)| ri * xi * xi).sum::<f64>()).sqrt();
    for xi in x.iter_mut() {
        *xi /= norm;
    }
    if let Some(i) = x.iter().position(|&xi| !(xi > 0.0)) {
        return Err(Error::Invariant(format!(
            "principal eigenfunction not positive at node {i}"
        )));
    }
    Ok(EigenPair {
        sigma,
        phi: Field::from(x),
    })
}

/// `‖A φ − σ r φ‖_∞` for an eigenpair of `-(p φ')' + q φ = σ r φ`.
pub fn eigen_residual(
    p: &Coefficient,
    q: &[f64],
    r: &[f64],
    grid: &Grid,
    pair: &EigenPair,
) -> Result<f64> {
    let a = assemble_div_form(p, q, grid)?;
    let ax = a.apply(&pair.phi);
    Ok(ax
        .iter()
        .zip(pair.phi.iter())
        .zip(r)
        .fold(0.0f64, |m, ((y, x), ri)| m.max((y - pair.sigma * ri * x).abs())))
}

/// Exact principal eigenvalue of the discrete Dirichlet Laplacian `-Δ_h`.
pub fn discrete_sigma1(grid: &Grid) -> f64 {
    let h = grid.h();
    2.0 / (h * h) * (1.0 - (std::f64::consts::PI * h / grid.length()).cos())
}

/// Positive solution of `-(p θ')' = a θ − b θ²`.
#[derive(Debug, Clone)]
pub struct LogisticSolution {
    pub theta: Field,
    pub a: f64,
    pub p: Coefficient,
    pub b: Vec<f64>,
    /// Threshold `σ₁(p, 0; 1)`.
    pub sigma1: f64,
    /// Sub-solution `(a − σ₁)/(‖b‖ ‖φ‖) φ` used as the starting guess.
    pub lower_bound: Field,
    pub residual: f64,
}

impl LogisticSolution {
    /// Upper bound `a / min b`.
    pub fn upper_bound(&self) -> f64 {
        self.a / self.b.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

const NEWTON_MAX_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 30;

/// Solves the diffusive logistic equation; `None` when `a ≤ σ₁(p, 0; 1)`.
pub fn solve_logistic(p: &Coefficient, a: f64, b: &[f64], grid: &Grid) -> Result<Option<LogisticSolution>> {
    let n = grid.n();
    if b.len() != n {
        return Err(Error::InvalidArgument("b length mismatch".into()));
    }
    for (i, &bi) in b.iter().enumerate() {
        if !(bi > 0.0) {
            return Err(Error::CoefficientSign {
                what: "b",
                index: i,
                value: bi,
            });
        }
    }
    let zeros = vec![0.0; n];
    let ones = vec![1.0; n];
    let eig = principal_eigen(p, &zeros, &ones, grid)?;
    if a <= eig.sigma {
        return Ok(None);
    }
    let lap = assemble_div_form(p, &zeros, grid)?;
    let b_max = b.iter().copied().fold(0.0, f64::max);
    let eps = (a - eig.sigma) / (b_max * eig.phi.sup_norm());
    let lower: Vec<f64> = eig.phi.iter().map(|&x| eps * x).collect();

    let residual = |theta: &[f64]| -> Vec<f64> {
        let at = lap.apply(theta);
        (0..n)
            .map(|i| at[i] - a * theta[i] + b[i] * theta[i] * theta[i])
            .collect()
    };

    let mut theta = lower.clone();
    let mut res = residual(&theta);
    let mut res_norm = sup_norm(&res);
    for _ in 0..NEWTON_MAX_ITERATIONS {
        let mut jac = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            jac.add(i, i, lap.diag[i] - a + 2.0 * b[i] * theta[i]);
            if i > 0 {
                jac.add(i, i - 1, lap.sub[i - 1]);
            }
            if i + 1 < n {
                jac.add(i, i + 1, lap.sup[i]);
            }
        }
        let rhs: Vec<f64> = res.iter().map(|x| -x).collect();
        let step = jac.factor()?.solve(&rhs);
        let step_norm = sup_norm(&step);

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = (0..n)
                .map(|i| (theta[i] + t * step[i]).max(lower[i]).max(1e-14))
                .collect();
            let r = residual(&trial);
            let rn = sup_norm(&r);
            if rn < res_norm || rn <= 1e-12 {
                accepted = Some((trial, r, rn));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, r, rn)) = accepted else {
            // no decrease possible: either converged to roundoff or stuck
            if res_norm <= 1e-10 {
                break;
            }
            return Err(Error::Convergence {
                what: "logistic Newton (damping exhausted)",
                iterations: NEWTON_MAX_ITERATIONS,
                residual: res_norm,
            });
        };
        theta = trial;
        res = r;
        res_norm = rn;
        let scale = sup_norm(&theta).max(1.0);
        if res_norm <= 1e-12 || (step_norm <= 1e-14 * scale && res_norm <= 1e-10) {
            break;
        }
    }
    if res_norm > 1e-10 {
        return Err(Error::Convergence {
            what: "logistic Newton",
            iterations: NEWTON_MAX_ITERATIONS,
            residual: res_norm,
        });
    }
    if let Some(i) = theta.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::Invariant(format!("logistic solution not positive at node {i}")));
    }
    Ok(Some(LogisticSolution {
        theta: Field::from(theta),
        a,
        p: p.clone(),
        b: b.to_vec(),
        sigma1: eig.sigma,
        lower_bound: Field::from(lower),
        residual: res_norm,
    }))
}

/// `θ_λ = θ_{d(0), λ}` and `ω_μ = θ_{D, μ}`; either may be absent.
#[derive(Debug, Clone)]
pub struct SemitrivialStates {
    pub predator: Option<LogisticSolution>,
    pub prey: Option<LogisticSolution>,
}

pub fn predator_only_state(params: &ModelParams, lambda: f64, grid: &Grid) -> Result<Option<LogisticSolution>> {
    let n = grid.n();
    solve_logistic(&Coefficient::constant(n, params.d(0.0)), lambda, &vec![1.0; n], grid)
}

pub fn prey_only_state(params: &ModelParams, grid: &Grid) -> Result<Option<LogisticSolution>> {
    let n = grid.n();
    solve_logistic(&Coefficient::constant(n, params.diffusion), params.mu, &vec![1.0; n], grid)
}

pub fn semitrivial_states(params: &ModelParams, grid: &Grid) -> Result<SemitrivialStates> {
    Ok(SemitrivialStates {
        predator: predator_only_state(params, params.lambda, grid)?,
        prey: prey_only_state(params, grid)?,
    })
}
