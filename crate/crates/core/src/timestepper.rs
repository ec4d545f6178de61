//! IMEX integrator for the parabolic predator–prey system.
//!
//! One step applies the explicit upwinded taxis flux and explicit reactions,
//! then implicit diffusion: `d(v)`-weighted for `u` with `v` frozen at the
//! old level, constant `D` for `v`.

use crate::error::{Error, Result};
use crate::grid::{laplacian, sup_norm, Field, Grid, TridiagonalOperator};
use crate::linalg::solve_tridiagonal;
use crate::model::ModelParams;
use crate::steady::{newton_solve, NewtonOptions, SteadyState};

/// Entries in `(-CLAMP_TOLERANCE, 0)` are roundoff and reset to zero.
pub const CLAMP_TOLERANCE: f64 = 1e-12;
pub const REGIME_THRESHOLD: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    PreyOnly,
    PredatorOnly,
    Coexistence,
    Trivial,
    Undecided,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::PreyOnly => "prey-only",
            Regime::PredatorOnly => "predator-only",
            Regime::Coexistence => "coexistence",
            Regime::Trivial => "trivial",
            Regime::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub params: ModelParams,
    pub grid: Grid,
    pub dt: f64,
    pub t_final: f64,
    pub u0: Field,
    pub v0: Field,
    /// Steps between stored snapshots; 0 keeps only the initial and final.
    pub snapshot_stride: usize,
    pub regime_threshold: f64,
    /// A final time derivative above this leaves the regime undecided.
    pub settle_rate: f64,
    /// Smallest step allowed after automatic halving, relative to `dt`.
    pub min_dt_ratio: f64,
    /// Reactions off leaves pure taxis and diffusion.
    pub reaction: bool,
}

impl SimulationConfig {
    pub fn new(params: ModelParams, grid: Grid, u0: Field, v0: Field) -> Self {
        SimulationConfig {
            params,
            grid,
            dt: 1e-3,
            t_final: 500.0,
            u0,
            v0,
            snapshot_stride: 0,
            regime_threshold: REGIME_THRESHOLD,
            settle_rate: 1e-3,
            min_dt_ratio: 1.0 / 1024.0,
            reaction: true,
        }
    }

    /// Figure protocol: `n = 256` on `(0, 4)`, `u₀ = v₀ = 0.1 + 0.1 sin 5x`
    /// restricted to interior nodes.
    pub fn figure(params: ModelParams) -> Self {
        let grid = Grid::new(4.0, 256).expect("valid grid");
        let init = Field::from_fn(&grid, |x| 0.1 + 0.1 * (5.0 * x).sin());
        SimulationConfig::new(params, grid, init.clone(), init)
    }

    fn validate(&self) -> Result<()> {
        let n = self.grid.n();
        if self.u0.len() != n || self.v0.len() != n {
            return Err(Error::InvalidArgument("initial data length mismatch".into()));
        }
        if !(self.dt > 0.0) || !(self.t_final >= self.dt) {
            return Err(Error::InvalidArgument(format!(
                "need dt > 0 and T >= dt (dt = {}, T = {})",
                self.dt, self.t_final
            )));
        }
        if let Some(i) = self.u0.iter().chain(self.v0.iter()).position(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidArgument(format!("negative initial value at entry {i}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<(Field, Field)>,
    pub u: Field,
    pub v: Field,
    pub t: f64,
    pub dt: f64,
    /// `‖(u, v)^{n+1} − (u, v)^n‖_∞ / dt` at the last step.
    pub rate: f64,
    pub max_v: f64,
    pub regime: Regime,
}

/// Outcome of one IMEX step.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// `dt` times the largest explicit loss rate; positivity needs `≤ 1`.
    pub cfl: f64,
    /// Predator mass leaving through the two boundary points during the step.
    pub boundary_outflow: f64,
}

/// Advances `(u, v)` by `dt`; the step is rejected with
/// [`Error::UnstableStep`] when the explicit part would lose positivity.
pub fn imex_step(
    u: &[f64],
    v: &[f64],
    params: &ModelParams,
    grid: &Grid,
    dt: f64,
    t: f64,
    reaction: bool,
) -> Result<StepReport> {
    let n = grid.n();
    let h = grid.h();
    let ext = |f: &[f64], j: usize| if j == 0 || j == n + 1 { 0.0 } else { f[j - 1] };

    // face j joins extended nodes j and j + 1
    let mut flux = vec![0.0; n + 1];
    let mut velocity = vec![0.0; n + 1];
    for j in 0..=n {
        let (vl, vr) = (ext(v, j), ext(v, j + 1));
        let a = 0.5 * (params.chi(vl) + params.chi(vr)) * (vr - vl) / h;
        velocity[j] = a;
        flux[j] = if a > 0.0 { a * ext(u, j) } else { a * ext(u, j + 1) };
    }

    let mut us = vec![0.0; n];
    let mut vs = vec![0.0; n];
    let mut rate_max: f64 = 0.0;
    for i in 0..n {
        let out = (velocity[i + 1].max(0.0) - velocity[i].min(0.0)) / h;
        let mut loss_u = out;
        let mut loss_v = 0.0;
        let (mut ru, mut rv) = (0.0, 0.0);
        if reaction {
            let growth_u = params.lambda - u[i] + params.gamma * params.f(v[i]);
            let growth_v = params.mu - v[i] - u[i] * params.response().reduced(v[i]);
            loss_u += (-growth_u).max(0.0);
            loss_v += (-growth_v).max(0.0);
            ru = u[i] * growth_u;
            rv = v[i] * growth_v;
        }
        rate_max = rate_max.max(loss_u).max(loss_v);
        us[i] = u[i] + dt * (ru - (flux[i + 1] - flux[i]) / h);
        vs[i] = v[i] + dt * rv;
    }
    let cfl = dt * rate_max;
    if cfl > 1.0 {
        return Err(Error::UnstableStep { t, dt, cfl });
    }

    let faces: Vec<f64> = (0..=n)
        .map(|j| 0.5 * (params.d(ext(v, j)) + params.d(ext(v, j + 1))))
        .collect();
    let r = dt / (h * h);
    let diff_u = TridiagonalOperator {
        sub: (0..n - 1).map(|i| -r * faces[i + 1]).collect(),
        diag: (0..n).map(|i| 1.0 + r * (faces[i] + faces[i + 1])).collect(),
        sup: (0..n - 1).map(|i| -r * faces[i + 1]).collect(),
    };
    let mut diff_v = laplacian(grid, params.diffusion).scaled(dt);
    diff_v.add_diagonal(&vec![1.0; n]);
    let mut un = solve_tridiagonal(&diff_u, &us)?;
    let mut vn = solve_tridiagonal(&diff_v, &vs)?;

    let diffusive_out = dt * (faces[0] * un[0] + faces[n] * un[n - 1]) / h;
    let advective_out = dt * (flux[n] - flux[0]);
    for (idx, x) in un.iter_mut().chain(vn.iter_mut()).enumerate() {
        if *x < 0.0 {
            if *x > -CLAMP_TOLERANCE {
                *x = 0.0;
            } else {
                return Err(Error::Positivity {
                    t: t + dt,
                    index: idx,
                    value: *x,
                });
            }
        }
    }
    Ok(StepReport {
        u: un,
        v: vn,
        cfl,
        boundary_outflow: diffusive_out + advective_out,
    })
}

fn classify_regime(u: &[f64], v: &[f64], rate: f64, config: &SimulationConfig) -> Regime {
    if rate > config.settle_rate {
        return Regime::Undecided;
    }
    let thr = config.regime_threshold;
    match (sup_norm(u) > thr, sup_norm(v) > thr) {
        (true, true) => Regime::Coexistence,
        (false, true) => Regime::PreyOnly,
        (true, false) => Regime::PredatorOnly,
        (false, false) => Regime::Trivial,
    }
}

/// Integrates until `t_final`, or until the time derivative falls below
/// `stop_rate` when given.
fn integrate(config: &SimulationConfig, stop_rate: Option<f64>) -> Result<Trajectory> {
    config.validate()?;
    let params = &config.params;
    let grid = &config.grid;
    let mut u = config.u0.to_vec();
    let mut v = config.v0.to_vec();
    let mut t = 0.0;
    let mut dt = config.dt;
    let min_dt = config.dt * config.min_dt_ratio;
    let mut times = vec![0.0];
    let mut snapshots = vec![(config.u0.clone(), config.v0.clone())];
    let mut max_v = sup_norm(&v);
    let mut rate = f64::INFINITY;
    let mut steps = 0usize;
    while t < config.t_final - 1e-9 * dt {
        // a remainder within roundoff of dt is taken as one full step
        let remaining = config.t_final - t;
        let h_step = if remaining < dt * (1.0 + 1e-9) { remaining } else { dt };
        let report = match imex_step(&u, &v, params, grid, h_step, t, config.reaction) {
            Ok(r) => r,
            Err(Error::UnstableStep { cfl, .. }) => {
                if dt * 0.5 < min_dt {
                    return Err(Error::UnstableStep { t, dt, cfl });
                }
                dt *= 0.5;
                continue;
            }
            Err(e) => return Err(e),
        };
        let change = u
            .iter()
            .zip(&report.u)
            .chain(v.iter().zip(&report.v))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        rate = change / h_step;
        u = report.u;
        v = report.v;
        t += h_step;
        steps += 1;
        max_v = max_v.max(sup_norm(&v));
        if config.snapshot_stride > 0 && steps % config.snapshot_stride == 0 {
            times.push(t);
            snapshots.push((u.clone().into(), v.clone().into()));
        }
        if stop_rate.is_some_and(|tol| rate < tol) {
            break;
        }
    }
    if times.last() != Some(&t) {
        times.push(t);
        snapshots.push((u.clone().into(), v.clone().into()));
    }
    let regime = classify_regime(&u, &v, rate, config);
    Ok(Trajectory {
        times,
        snapshots,
        u: u.into(),
        v: v.into(),
        t,
        dt,
        rate,
        max_v,
        regime,
    })
}

pub fn simulate(config: &SimulationConfig) -> Result<Trajectory> {
    integrate(config, None)
}

#[derive(Debug, Clone)]
pub enum SteadyLimit {
    Converged(SteadyState),
    Undecided(Trajectory),
}

/// Runs until the time derivative drops below `tolerance` (or `t_final`),
/// then polishes the state with the steady Newton solver.
pub fn steady_limit(config: &SimulationConfig, tolerance: f64) -> Result<SteadyLimit> {
    let traj = integrate(config, Some(tolerance))?;
    if !(traj.rate < tolerance) {
        return Ok(SteadyLimit::Undecided(traj));
    }
    let state = newton_solve(
        &traj.u,
        &traj.v,
        config.params.lambda,
        &config.params,
        &config.grid,
        &NewtonOptions::default(),
    )?;
    Ok(SteadyLimit::Converged(state))
}
