//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use preytaxis::Grid;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations,
/// sorted ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Dense symmetric form `R^{-1/2} A R^{-1/2}` of the weighted Dirichlet
/// problem `−(p φ')' + q φ = σ r φ`, assembled from nodal `p` values with
/// boundary values `p_left`, `p_right` and arithmetic face averages.
pub fn dense_weighted_operator(p_nodes: &[f64], p_left: f64, p_right: f64, q: &[f64], r: &[f64], grid: &Grid) -> Vec<Vec<f64>> {
    let n = grid.n();
    let h2 = grid.h() * grid.h();
    let ext: Vec<f64> = std::iter::once(p_left).chain(p_nodes.iter().copied()).chain(std::iter::once(p_right)).collect();
    let face = |j: usize| 0.5 * (ext[j] + ext[j + 1]);
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = (face(i) + face(i + 1)) / h2 + q[i];
        if i + 1 < n {
            a[i][i + 1] = -face(i + 1) / h2;
            a[i + 1][i] = -face(i + 1) / h2;
        }
    }
    for i in 0..n {
        for j in 0..n {
            a[i][j] /= (r[i] * r[j]).sqrt();
        }
    }
    a
}

/// Long-time limit of `θ_t = (p θ')' + a θ − b θ²` with constant `p` by
/// explicit Euler from `θ₀`.
pub fn march_logistic(p: f64, a: f64, b: &[f64], theta0: &[f64], grid: &Grid, t_final: f64) -> Vec<f64> {
    let n = grid.n();
    let h2 = grid.h() * grid.h();
    let dt = 0.4 * h2 / p / (1.0 + a.abs() * h2);
    let mut th = theta0.to_vec();
    let steps = (t_final / dt).ceil() as usize;
    let mut next = vec![0.0; n];
    for _ in 0..steps {
        for i in 0..n {
            let l = if i > 0 { th[i - 1] } else { 0.0 };
            let r = if i + 1 < n { th[i + 1] } else { 0.0 };
            next[i] = th[i] + dt * (p * (l - 2.0 * th[i] + r) / h2 + a * th[i] - b[i] * th[i] * th[i]);
        }
        std::mem::swap(&mut th, &mut next);
    }
    th
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Checks the a priori bounds `max v ≤ μ` and
/// `max u ≤ e^{g(μ)} (|λ| + γ max_{[0,μ]} F)` with relative slack.
pub fn within_steady_bounds(u: &[f64], v: &[f64], lambda: f64, params: &preytaxis::ModelParams, slack: f64) -> bool {
    let mu = params.mu;
    let f_max = params.response().max_on(mu);
    let u_bound = params.g(mu).exp() * (lambda.abs() + params.gamma * f_max);
    let u_max = u.iter().copied().fold(0.0, f64::max);
    let v_max = v.iter().copied().fold(0.0, f64::max);
    v_max <= mu * (1.0 + slack) && u_max <= u_bound * (1.0 + slack)
}

/// Smooth random profile with values in `[lo, hi]`.
pub fn smooth(rng: &mut ChaCha8Rng, g: &Grid, lo: f64, hi: f64) -> Vec<f64> {
    let a: [f64; 3] = [rng.random(), rng.random(), rng.random()];
    let ph: [f64; 3] = [rng.random_range(0.0..6.3), rng.random_range(0.0..6.3), rng.random_range(0.0..6.3)];
    g.nodes()
        .iter()
        .map(|x| {
            let s: f64 = (0..3).map(|k| a[k] * ((k + 1) as f64 * x + ph[k]).sin()).sum::<f64>() / 3.0;
            lo + (hi - lo) * 0.5 * (1.0 + s)
        })
        .collect()
}
