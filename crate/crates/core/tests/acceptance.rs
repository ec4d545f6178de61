//! Acceptance runner: prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use common::{dense_weighted_operator, jacobi_eigenvalues, smooth, sup_diff};
use preytaxis::bifurcation::{
    classify_semitrivial, lambda_mu_bundle, lambda_star, nonexistence_lower_bound, BifurcationBundle,
};
use preytaxis::continuation::{bifurcation_point_scan, branch_from_prey_bifurcation, Branch, Controls, Endpoint};
use preytaxis::grid::Coefficient;
use preytaxis::par;
use preytaxis::scalar::{discrete_sigma1, predator_only_state, prey_only_state, principal_eigen, solve_logistic};
use preytaxis::steady::{newton_solve, NewtonOptions, StateKind};
use preytaxis::timestepper::{simulate, Regime, SimulationConfig, Trajectory};
use preytaxis::{Field, Grid, ModelParams, Motility, ResponseFunction, ResponseKind, Taxis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIGURE_LAMBDAS: [f64; 3] = [-1.0, 1.5, 5.0];
const BOUND_SLACK: f64 = 1e-8;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Positive steady state gathered for the global bound check.
struct Collected {
    source: String,
    params: ModelParams,
    lambda: f64,
    u: Field,
    v: Field,
}

struct Figure {
    name: &'static str,
    make: fn(f64) -> ModelParams,
    grid: Grid,
    bundle: Result<BifurcationBundle, String>,
    branch: Result<Branch, String>,
    runs: Vec<Result<Trajectory, String>>,
}

impl Figure {
    fn bundle(&self) -> Result<&BifurcationBundle, String> {
        self.bundle.as_ref().map_err(|e| format!("{} bifurcation bundle: {e}", self.name))
    }

    fn branch(&self) -> Result<&Branch, String> {
        self.branch.as_ref().map_err(|e| format!("{} branch: {e}", self.name))
    }

    fn run(&self, k: usize) -> Result<&Trajectory, String> {
        self.runs[k].as_ref().map_err(|e| format!("{} simulation at lambda {}: {e}", self.name, FIGURE_LAMBDAS[k]))
    }
}

struct Context {
    figures: [Figure; 2],
    states: Vec<Collected>,
}

fn prepare() -> Context {
    let grid = Grid::new(4.0, 256).unwrap();
    let jobs: Vec<(usize, f64)> = (0..2).flat_map(|f| FIGURE_LAMBDAS.map(|l| (f, l))).collect();
    let makes: [fn(f64) -> ModelParams; 2] = [ModelParams::figure2, ModelParams::figure4];
    let runs = par::map(&jobs, 0, |&(f, lambda)| {
        simulate(&SimulationConfig::figure(makes[f](lambda))).map_err(|e| e.to_string())
    });
    let mut runs = runs.into_iter();
    let figures = [("figure 2", makes[0]), ("figure 4", makes[1])].map(|(name, make)| {
        let p = make(1.0);
        let bundle = lambda_mu_bundle(&p, &grid).map_err(|e| e.to_string());
        let branch = match &bundle {
            Ok(b) => branch_from_prey_bifurcation(b, &p, &grid, &Controls::default()).map_err(|e| e.to_string()),
            Err(e) => Err(e.clone()),
        };
        Figure {
            name,
            make,
            grid: grid.clone(),
            bundle,
            branch,
            runs: runs.by_ref().take(3).collect(),
        }
    });
    Context {
        figures,
        states: Vec::new(),
    }
}

fn sigma(p: &Coefficient, q: &[f64], r: &[f64], g: &Grid) -> Result<f64, String> {
    principal_eigen(p, q, r, g).map(|e| e.sigma).map_err(|e| e.to_string())
}

fn analytic_eigenvalue() -> Outcome {
    let laplace = |n: usize| -> Result<f64, String> {
        let g = Grid::new(std::f64::consts::PI, n).unwrap();
        sigma(&Coefficient::constant(n, 1.0), &vec![0.0; n], &vec![1.0; n], &g)
    };
    let s400 = laplace(400)?;
    ensure((s400 - 1.0).abs() <= 1e-3, || format!("sigma1(n=400) = {s400}"))?;
    let order = ((laplace(100)? - 1.0).abs() / (laplace(200)? - 1.0).abs()).log2();
    ensure(order >= 1.9, || format!("observed order {order}"))?;
    Ok(format!("sigma1 = {s400:.9}, order = {order:.3}"))
}

fn eigenvalue_monotonicity() -> Outcome {
    let g = Grid::new(3.0, 48).unwrap();
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut violations = 0;
    for _ in 0..100 {
        let p1 = smooth(&mut rng, &g, 0.3, 2.0);
        let p2: Vec<f64> = p1.iter().zip(smooth(&mut rng, &g, 0.0, 1.0)).map(|(a, b)| a + b).collect();
        let q1 = smooth(&mut rng, &g, -4.0, 4.0);
        let q2: Vec<f64> = q1.iter().zip(smooth(&mut rng, &g, 0.0, 2.0)).map(|(a, b)| a + b).collect();
        let r = smooth(&mut rng, &g, 0.5, 2.0);
        let c1 = Coefficient::new(p1, 1.0, 1.0);
        let c2 = Coefficient::new(p2, 1.0, 1.0);
        let base = sigma(&c1, &q1, &r, &g)?;
        let tol = 1e-10 * base.abs().max(1.0);
        violations += usize::from(sigma(&c2, &q1, &r, &g)? < base - tol);
        violations += usize::from(sigma(&c1, &q2, &r, &g)? < base - tol);
    }
    let ones = vec![1.0; n];
    let mut shifts = 0;
    for _ in 0..100 {
        let p = Coefficient::new(smooth(&mut rng, &g, 0.3, 2.0), 1.0, 1.0);
        let q0 = smooth(&mut rng, &g, -2.0, 2.0);
        let r1 = smooth(&mut rng, &g, 0.3, 1.5);
        let r2: Vec<f64> = r1.iter().zip(smooth(&mut rng, &g, 0.0, 1.0)).map(|(a, b)| a + b).collect();
        let s0 = sigma(&p, &q0, &ones, &g)?;
        for target in [rng.random_range(-3.0..-0.05), 0.0, rng.random_range(0.05..3.0)] {
            let q: Vec<f64> = q0.iter().map(|x| x - s0 + target).collect();
            let a = sigma(&p, &q, &r1, &g)?;
            let b = sigma(&p, &q, &r2, &g)?;
            let tol = 1e-9;
            let ok = if target > 0.0 {
                a > 0.0 && b > 0.0 && b <= a + tol
            } else if target < 0.0 {
                a < 0.0 && b < 0.0 && b >= a - tol
            } else {
                a.abs() <= tol && b.abs() <= tol
            };
            violations += usize::from(!ok);
            shifts += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok(format!("200 p/q comparisons and {shifts} weight shifts, 0 violations"))
}

fn logistic_suite() -> Outcome {
    let g = Grid::new(3.0, 96).unwrap();
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = Coefficient::new(smooth(&mut rng, &g, 0.5, 1.5), 1.0, 1.0);
    let b = smooth(&mut rng, &g, 0.5, 2.0);
    let s1 = sigma(&p, &vec![0.0; n], &vec![1.0; n], &g)?;
    let offsets = [
        -1.0, -0.3, -0.1, -0.03, -0.01, -3e-3, -1e-3, -3e-4, -1e-4, -1e-5, 1e-5, 1e-4, 3e-4, 1e-3, 3e-3, 0.01, 0.1, 0.3,
        1.0, 3.0,
    ];
    let mut previous: Option<Vec<f64>> = None;
    let mut solutions = 0;
    for da in offsets {
        let sol = solve_logistic(&p, s1 + da, &b, &g).map_err(|e| e.to_string())?;
        ensure(sol.is_some() == (da > 0.0), || format!("existence wrong at a - sigma1 = {da}"))?;
        let Some(sol) = sol else { continue };
        solutions += 1;
        let upper = sol.upper_bound();
        for i in 0..n {
            ensure(sol.lower_bound[i] <= sol.theta[i] * (1.0 + 1e-12), || format!("lower bound fails at node {i}, offset {da}"))?;
            ensure(sol.theta[i] <= upper * (1.0 + 1e-12), || format!("upper bound fails at node {i}, offset {da}"))?;
        }
        if let Some(prev) = &previous {
            ensure(sol.theta.iter().zip(prev).all(|(x, y)| x >= y), || format!("not monotone at offset {da}"))?;
        }
        previous = Some(sol.theta.to_vec());
    }
    Ok(format!("20 values of a, {solutions} solutions, bounds and monotonicity hold"))
}

fn bifurcation_cross_validation(ctx: &Context) -> Outcome {
    let fig = &ctx.figures[0];
    let g = &fig.grid;
    let p = (fig.make)(1.0);
    let b = fig.bundle()?;
    let scan = bifurcation_point_scan(&p, g, (-5.0, 5.0), 21).map_err(|e| e.to_string())?;
    ensure(scan.len() == 1, || format!("scan found {} crossings", scan.len()))?;
    let scan_gap = (scan[0] - b.lambda_mu).abs();
    ensure(scan_gap <= 1e-8, || format!("scan {} vs bundle {}", scan[0], b.lambda_mu))?;
    let omega = prey_only_state(&p, g).map_err(|e| e.to_string())?.ok_or("prey state missing")?.theta;
    let e: Vec<f64> = omega.iter().map(|&w| p.g(w).exp()).collect();
    let pn: Vec<f64> = omega.iter().zip(&e).map(|(&w, e)| p.d(w) * e).collect();
    let q: Vec<f64> = omega.iter().zip(&e).map(|(&w, e)| -p.gamma * p.f(w) * e).collect();
    let dense = jacobi_eigenvalues(dense_weighted_operator(&pn, p.d(0.0), p.d(0.0), &q, &e, g))[0];
    let dense_gap = (dense - b.lambda_mu).abs();
    ensure(dense_gap <= 1e-9, || format!("dense {dense} vs bundle {}", b.lambda_mu))?;
    Ok(format!("lambda_mu = {:.10}, scan gap {scan_gap:.1e}, dense gap {dense_gap:.1e}", b.lambda_mu))
}

fn direction_formula(ctx: &Context) -> Outcome {
    let mut detail = Vec::new();
    for fig in &ctx.figures {
        let slope = fig.bundle()?.lambda_prime0;
        let secants = fig.branch()?.start_slopes;
        for s in secants {
            ensure((s - slope).abs() <= 0.2 * slope.abs(), || format!("{}: secant {s} vs lambda'(0) {slope}", fig.name))?;
        }
        detail.push(format!("{} lambda'(0) = {slope:.5} secants {:.5}/{:.5}", fig.name, secants[0], secants[1]));
    }
    let g = Grid::new(4.0, 128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let kinds = [ResponseKind::LotkaVolterra, ResponseKind::Holling2, ResponseKind::Holling3, ResponseKind::Holling4];
    let mut min_slope = f64::INFINITY;
    for _ in 0..30 {
        let response = ResponseFunction::new(kinds[rng.random_range(0..4)], rng.random_range(0.5..2.0)).unwrap();
        let p = ModelParams::new(
            1.0,
            rng.random_range(1.0..4.0),
            rng.random_range(0.0..2.0),
            rng.random_range(0.5..1.5),
            Motility::Constant(rng.random_range(0.5..2.0)),
            Taxis::Constant(0.0),
            response,
        )
        .unwrap();
        let s = lambda_mu_bundle(&p, &g).map_err(|e| e.to_string())?.lambda_prime0;
        ensure(s > 0.0, || format!("lambda'(0) = {s} without taxis for {p:?}"))?;
        min_slope = min_slope.min(s);
    }
    detail.push(format!("30 taxis-free draws, min lambda'(0) = {min_slope:.4}"));
    Ok(detail.join("; "))
}

fn collect_branch(ctx: &mut Context, f: usize) {
    let fig = &ctx.figures[f];
    let p = (fig.make)(1.0);
    let Ok(branch) = &fig.branch else { return };
    let states: Vec<Collected> = branch.points[1..]
        .iter()
        .filter(|pt| pt.positive)
        .map(|pt| Collected {
            source: format!("{} branch", fig.name),
            params: p.with_lambda(pt.lambda),
            lambda: pt.lambda,
            u: pt.u.clone(),
            v: pt.v.clone(),
        })
        .collect();
    ctx.states.extend(states);
}

fn branch_connectivity(ctx: &Context) -> Outcome {
    let fig = &ctx.figures[0];
    let p = (fig.make)(1.0);
    let branch = fig.branch()?;
    let ls = lambda_star(p.mu, &p, &fig.grid).map_err(|e| e.to_string())?;
    let end = branch.last().lambda;
    ensure(branch.endpoint == Endpoint::HitsGammaU, || format!("endpoint {}", branch.endpoint.label()))?;
    ensure((end - ls).abs() <= 0.02 * ls, || format!("end {end} vs lambda* {ls}"))?;
    let bad = branch.points[1..].iter().filter(|q| !q.positive).count();
    ensure(bad == 0, || format!("{bad} non-positive branch points"))?;
    Ok(format!(
        "{} at lambda = {end:.7}, lambda* = {ls:.7}, {} positive points",
        branch.endpoint.label(),
        branch.points.len() - 1
    ))
}

fn unbounded_projection(ctx: &Context) -> Outcome {
    let fig = &ctx.figures[1];
    let branch = fig.branch()?;
    let target = fig.bundle()?.lambda_mu + 10.0;
    let reach = branch.lambda_range().1;
    ensure(reach >= target, || format!("branch stops at {reach} before {target}"))?;
    ensure(branch.endpoint == Endpoint::LambdaCap, || format!("endpoint {}", branch.endpoint.label()))?;
    Ok(format!("{} at lambda = {reach:.4} (target {target:.4}), {} folds", branch.endpoint.label(), branch.folds))
}

fn lambda_star_limits() -> Outcome {
    let g = Grid::new(4.0, 256).unwrap();
    let p = ModelParams::figure2(1.0);
    let values: Vec<f64> = [0.8, 1.2, 2.0, 4.0]
        .iter()
        .map(|&mu| lambda_star(mu, &p, &g).map_err(|e| format!("mu = {mu}: {e}")))
        .collect::<Result<_, _>>()?;
    ensure(values.windows(2).all(|w| w[1] > w[0]), || format!("not increasing: {values:?}"))?;
    let s1 = discrete_sigma1(&g);
    let near = lambda_star(p.diffusion * s1 * (1.0 + 1e-3), &p, &g).map_err(|e| e.to_string())?;
    let floor = p.d(0.0) * s1;
    ensure((near - floor).abs() <= 1e-2, || format!("lambda* = {near} vs d(0) sigma1 = {floor}"))?;
    Ok(format!(
        "lambda* = {:.5}, {:.5}, {:.5}, {:.5}; near threshold {near:.6} vs {floor:.6}",
        values[0], values[1], values[2], values[3]
    ))
}

fn regimes(fig: &Figure, expected: [Regime; 3]) -> Outcome {
    let mut parts = Vec::new();
    for (k, want) in expected.iter().enumerate() {
        let traj = fig.run(k)?;
        ensure(traj.regime == *want, || {
            format!("lambda {}: {} expected {} (rate {:.2e})", FIGURE_LAMBDAS[k], traj.regime.label(), want.label(), traj.rate)
        })?;
        let config = SimulationConfig::figure((fig.make)(FIGURE_LAMBDAS[k]));
        ensure(traj.max_v <= config.v0.max().max(config.params.mu) * (1.0 + BOUND_SLACK), || {
            format!("lambda {}: max v {} exceeds comparison bound", FIGURE_LAMBDAS[k], traj.max_v)
        })?;
        parts.push(format!("{}: {}", FIGURE_LAMBDAS[k], traj.regime.label()));
    }
    Ok(parts.join(", "))
}

fn figure2_reproduction(ctx: &mut Context) -> Outcome {
    let fig = &ctx.figures[0];
    let head = regimes(fig, [Regime::PreyOnly, Regime::Coexistence, Regime::PredatorOnly])?;
    let lambda = FIGURE_LAMBDAS[1];
    let p = (fig.make)(lambda);
    let g = &fig.grid;
    let traj = fig.run(1)?;
    let opts = NewtonOptions::default();
    let polished = newton_solve(&traj.u, &traj.v, lambda, &p, g, &opts).map_err(|e| format!("polish: {e}"))?;
    let start = fig.branch()?.nearest(lambda);
    let reference = newton_solve(&start.u, &start.v, lambda, &p, g, &opts).map_err(|e| format!("branch Newton: {e}"))?;
    ensure(polished.kind == StateKind::Coexistence, || format!("polished state is {}", polished.kind.label()))?;
    let gap = sup_diff(&polished.u, &reference.u).max(sup_diff(&polished.v, &reference.v));
    let raw = sup_diff(&traj.u, &reference.u).max(sup_diff(&traj.v, &reference.v));
    let mut out = Vec::new();
    for (source, s) in [("time-limit", polished), ("newton", reference)] {
        out.push(Collected {
            source: format!("figure 2 {source}"),
            params: p.clone(),
            lambda,
            u: s.u,
            v: s.v,
        });
    }
    ctx.states.extend(out);
    ensure(gap <= 1e-4, || format!("polished vs Newton gap {gap}"))?;
    Ok(format!("{head}; polished gap {gap:.1e}, unpolished {raw:.1e}"))
}

fn figure4_reproduction(ctx: &Context) -> Outcome {
    regimes(&ctx.figures[1], [Regime::PreyOnly, Regime::Coexistence, Regime::Coexistence])
}

fn stability_consistency(ctx: &Context) -> Outcome {
    let mut parts = Vec::new();
    for fig in &ctx.figures {
        for (k, &lambda) in FIGURE_LAMBDAS.iter().enumerate() {
            let p = (fig.make)(lambda);
            let g = &fig.grid;
            let prey = classify_semitrivial(StateKind::PreyOnly, lambda, &p, g).map_err(|e| e.to_string())?;
            let predator = match predator_only_state(&p, lambda, g).map_err(|e| e.to_string())? {
                Some(_) => Some(classify_semitrivial(StateKind::PredatorOnly, lambda, &p, g).map_err(|e| e.to_string())?),
                None => None,
            };
            let predicted = match (prey.stable, predator.is_some_and(|v| v.stable)) {
                (true, false) => Regime::PreyOnly,
                (false, true) => Regime::PredatorOnly,
                (false, false) => Regime::Coexistence,
                (true, true) => return Err(format!("{} lambda {lambda}: both semitrivial states stable", fig.name)),
            };
            let realized = fig.run(k)?.regime;
            ensure(predicted == realized, || {
                format!("{} lambda {lambda}: verdicts predict {} but dynamics give {}", fig.name, predicted.label(), realized.label())
            })?;
            parts.push(predicted.label());
        }
    }
    Ok(format!("6/6 agree ({})", parts.join(", ")))
}

fn random_starts(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let amp = rng.random_range(0.1..5.0);
    let u = (0..n).map(|_| amp * rng.random_range(0.01..1.0)).collect();
    let v = (0..n).map(|_| rng.random_range(0.01..3.0)).collect();
    (u, v)
}

fn coexistence_roots(p: &ModelParams, lambda: f64, g: &Grid, attempts: usize, rng: &mut ChaCha8Rng) -> (usize, usize) {
    let mut converged = 0;
    let mut coexistence = 0;
    for _ in 0..attempts {
        let (u0, v0) = random_starts(rng, g.n());
        if let Ok(s) = newton_solve(&u0, &v0, lambda, p, g, &NewtonOptions::default()) {
            converged += 1;
            coexistence += usize::from(s.kind == StateKind::Coexistence);
        }
    }
    (converged, coexistence)
}

fn nonexistence_floor() -> Outcome {
    let g = Grid::new(4.0, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut parts = Vec::new();
    for (name, p) in [("figure 2", ModelParams::figure2(1.0)), ("figure 4", ModelParams::figure4(1.0))] {
        let lambda = nonexistence_lower_bound(&p, &g).map_err(|e| e.to_string())? - 0.1;
        let (conv, co) = coexistence_roots(&p, lambda, &g, 20, &mut rng);
        ensure(co == 0, || format!("{name}: {co} coexistence roots at lambda {lambda}"))?;
        parts.push(format!("{name} at lambda {lambda:.4}: {conv}/20 converged, 0 coexistence"));
    }
    let p = ModelParams::figure2(1.5).with_mu(0.9 * discrete_sigma1(&g)).unwrap();
    let (conv, co) = coexistence_roots(&p, 1.5, &g, 50, &mut rng);
    ensure(co == 0, || format!("{co} coexistence roots below the prey threshold"))?;
    parts.push(format!("mu = 0.9 D sigma1: {conv}/50 converged, 0 coexistence"));
    Ok(parts.join("; "))
}

/// Extra Newton solves off the branches so the bound check sees that pathway
/// at several parameter values.
fn collect_newton(ctx: &mut Context) {
    let mut out = Vec::new();
    for fig in &ctx.figures {
        let Ok(branch) = &fig.branch else { continue };
        for lambda in [0.0, 1.0, 3.0, 20.0] {
            let start = branch.nearest(lambda);
            let p = (fig.make)(lambda);
            let u0: Vec<f64> = start.u.iter().map(|x| 1.05 * x).collect();
            if let Ok(s) = newton_solve(&u0, &start.v, lambda, &p, &fig.grid, &NewtonOptions::default()) {
                if s.kind == StateKind::Coexistence {
                    out.push(Collected {
                        source: format!("{} newton", fig.name),
                        params: p,
                        lambda,
                        u: s.u,
                        v: s.v,
                    });
                }
            }
        }
    }
    ctx.states.extend(out);
}

fn global_bounds(ctx: &Context) -> Outcome {
    ensure(!ctx.states.is_empty(), || "no positive states collected".into())?;
    let mut worst: f64 = 0.0;
    let mut sources: Vec<&str> = Vec::new();
    for s in &ctx.states {
        let (v_bound, u_bound) = (s.params.mu, {
            let f_max = s.params.response().max_on(s.params.mu);
            s.params.g(s.params.mu).exp() * (s.lambda.abs() + s.params.gamma * f_max)
        });
        let ratio = (s.v.max() / v_bound).max(s.u.max() / u_bound);
        ensure(ratio <= 1.0 + BOUND_SLACK, || format!("{} at lambda {}: ratio {ratio}", s.source, s.lambda))?;
        worst = worst.max(ratio);
        if !sources.contains(&s.source.as_str()) {
            sources.push(&s.source);
        }
    }
    Ok(format!("{} states from {} pathways, worst ratio {worst:.6}", ctx.states.len(), sources.len()))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut ctx = prepare();
    collect_branch(&mut ctx, 0);
    collect_branch(&mut ctx, 1);
    collect_newton(&mut ctx);

    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "analytic eigenvalue", guarded(analytic_eigenvalue)),
        (2, "eigenvalue monotonicity", guarded(eigenvalue_monotonicity)),
        (3, "logistic existence and bounds", guarded(logistic_suite)),
        (5, "bifurcation point cross-validation", guarded(|| bifurcation_cross_validation(&ctx))),
        (6, "bifurcation direction", guarded(|| direction_formula(&ctx))),
        (7, "branch connectivity", guarded(|| branch_connectivity(&ctx))),
        (8, "unbounded projection", guarded(|| unbounded_projection(&ctx))),
        (9, "predator threshold limits", guarded(lambda_star_limits)),
        (10, "figure 2 reproduction", guarded(|| figure2_reproduction(&mut ctx))),
        (11, "figure 4 reproduction", guarded(|| figure4_reproduction(&ctx))),
        (12, "stability and dynamics agree", guarded(|| stability_consistency(&ctx))),
        (13, "nonexistence floor", guarded(nonexistence_floor)),
    ];
    results.push((4, "a priori bounds on positive states", guarded(|| global_bounds(&ctx))));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (id, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        results.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
