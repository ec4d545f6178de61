mod common;

use common::{sup_diff, within_steady_bounds};
use preytaxis::bifurcation::lambda_mu_bundle;
use preytaxis::scalar::discrete_sigma1;
use preytaxis::steady::{
    newton_solve, residual, residual_norm, residual_w, transform_w, untransform_w, Form, NewtonOptions, StateKind,
};
use preytaxis::{Grid, ModelParams, Motility, ResponseFunction, Taxis};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn near_bifurcation(params: &ModelParams, grid: &Grid, s: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let b = lambda_mu_bundle(params, grid).unwrap();
    let u: Vec<f64> = b.phi.iter().map(|x| s * x).collect();
    let v: Vec<f64> = (0..grid.n()).map(|i| b.omega[i] + s * b.psi[i]).collect();
    (u, v, b.lambda_mu + s * b.lambda_prime0)
}

fn options(form: Form) -> NewtonOptions {
    NewtonOptions {
        form,
        ..NewtonOptions::default()
    }
}

#[test]
fn newton_near_bifurcation_finds_small_coexistence_state() {
    let g = Grid::new(4.0, 128).unwrap();
    let p = ModelParams::figure2(1.0);
    let (u0, v0, lambda) = near_bifurcation(&p, &g, 0.005);
    let s = newton_solve(&u0, &v0, lambda, &p, &g, &NewtonOptions::default()).unwrap();
    assert_eq!(s.kind, StateKind::Coexistence);
    assert!(s.u.is_positive() && s.v.is_positive());
    assert!(s.u.sup_norm() < 0.05);
    assert!(s.residual_norm <= 1e-9);
    assert!(within_steady_bounds(&s.u, &s.v, lambda, &p, 1e-8));
    s.check_bounds(&p, 1e-8).unwrap();
}

#[test]
fn roots_of_either_form_are_roots_of_the_other() {
    let g = Grid::new(4.0, 128).unwrap();
    for p in [ModelParams::figure2(1.0), ModelParams::figure4(1.0)] {
        let (u0, v0, lambda) = near_bifurcation(&p, &g, 0.2);
        let tol = NewtonOptions::default().tolerance;
        let sw = newton_solve(&u0, &v0, lambda, &p, &g, &options(Form::Transformed)).unwrap();
        assert!(residual_norm(&residual(&sw.u, &sw.v, lambda, &p, &g)) <= 10.0 * tol);
        let su = newton_solve(&u0, &v0, lambda, &p, &g, &options(Form::Original)).unwrap();
        let w = transform_w(&su.u, &su.v, &p);
        assert!(residual_norm(&residual_w(&w, &su.v, lambda, &p, &g)) <= 10.0 * tol);
        assert!(residual_norm(&residual_w(&w, &su.v, lambda, &p, &g)) <= 1e-8);
    }
}

#[test]
fn dual_forms_agree_when_taxis_is_minus_motility_slope() {
    let g = Grid::new(4.0, 128).unwrap();
    let p = ModelParams::new(
        1.0,
        2.0,
        0.6,
        1.0,
        Motility::Rational { a: 1.0, b: 1.0 },
        Taxis::NegativeMotilitySlope,
        ResponseFunction::lotka_volterra(),
    )
    .unwrap();
    let (u0, v0, lambda) = near_bifurcation(&p, &g, 0.3);
    let a = newton_solve(&u0, &v0, lambda, &p, &g, &options(Form::Transformed)).unwrap();
    let b = newton_solve(&u0, &v0, lambda, &p, &g, &options(Form::Original)).unwrap();
    assert_eq!(a.kind, StateKind::Coexistence);
    assert_eq!(b.kind, StateKind::Coexistence);
    assert!(sup_diff(&a.u, &b.u).max(sup_diff(&a.v, &b.v)) <= 1e-7);
}

#[test]
fn no_coexistence_when_prey_cannot_persist() {
    let g = Grid::new(4.0, 64).unwrap();
    let n = g.n();
    let mu = 0.9 * discrete_sigma1(&g);
    let p = ModelParams::figure2(1.5).with_mu(mu).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let u0: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..3.0)).collect();
        let v0: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..3.0)).collect();
        if let Ok(s) = newton_solve(&u0, &v0, 1.5, &p, &g, &NewtonOptions::default()) {
            assert_ne!(s.kind, StateKind::Coexistence);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_round_trip(seed in any::<u64>(), chi in 0.0..3.0f64) {
        let g = Grid::new(4.0, 50).unwrap();
        let p = ModelParams::new(1.0, 2.0, 0.6, 1.0, Motility::Rational { a: 1.0, b: 0.5 }, Taxis::Constant(chi), ResponseFunction::lotka_volterra()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..g.n()).map(|_| rng.random_range(1e-3..10.0)).collect();
        let v: Vec<f64> = (0..g.n()).map(|_| rng.random_range(0.0..4.0)).collect();
        let back = untransform_w(&transform_w(&u, &v, &p), &v, &p);
        for (a, b) in back.iter().zip(&u) {
            prop_assert!((a - b).abs() <= 1e-13 * b);
        }
    }
}
