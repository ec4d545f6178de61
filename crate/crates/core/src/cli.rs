//! Command-line front end: commands, output files and exit codes.
//!
//! Every numeric CSV field is written with 17 significant digits so repeated
//! runs of the same configuration produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::bifurcation::{classify_semitrivial, lambda_mu_bundle, lambda_star, nonexistence_lower_bound};
use crate::config::{parse_config_with, RunConfig};
use crate::continuation::branch_from_prey_bifurcation;
use crate::error::{Error, Result};
use crate::grid::{Coefficient, Grid};
use crate::model::ModelParams;
use crate::par;
use crate::scalar::{principal_eigen, solve_logistic};
use crate::steady::{newton_solve, StateKind};
use crate::timestepper::{simulate, SimulationConfig, Trajectory};

#[derive(Debug, Parser)]
#[command(name = "preytaxis", version, about = "Steady states, bifurcation and dynamics of a prey-taxis predator-prey model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file in `section.key = value` format.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one configuration key; may be repeated.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for `sweep` and the figure commands (0 = all cores, 1 = sequential).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Principal eigenvalue of a constant-coefficient problem.
    Eig,
    /// Diffusive logistic solution.
    Logistic,
    /// Bifurcation point, branch slope, predator threshold, nonexistence bound and semitrivial stability.
    Thresholds,
    /// Newton solve of the steady system from the configured start.
    Steady,
    /// Continuation of the coexistence branch.
    Branch,
    /// Time integration and regime classification.
    Simulate,
    /// Runs `sweep.command` over `sweep.lambdas`.
    Sweep,
    /// Figure protocol with the linear response.
    Figure2,
    /// Figure protocol with the sigmoid response.
    Figure4,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eig => "eig",
            Command::Logistic => "logistic",
            Command::Thresholds => "thresholds",
            Command::Steady => "steady",
            Command::Branch => "branch",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Figure2 => "figure2",
            Command::Figure4 => "figure4",
        }
    }

    fn from_sweep(name: &str) -> Option<Self> {
        match name {
            "steady" => Some(Command::Steady),
            "branch" => Some(Command::Branch),
            "simulate" => Some(Command::Simulate),
            "thresholds" => Some(Command::Thresholds),
            "logistic" => Some(Command::Logistic),
            _ => None,
        }
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// One-row summary of a command, reused as a row of the sweep table.
#[derive(Debug, Clone)]
pub struct Summary {
    pub header: Vec<&'static str>,
    pub row: Vec<String>,
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn plot_data(grid: &Grid, values: &[f64]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", num(0.0), num(0.0));
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{} {}", num(grid.node(i)), num(*v));
    }
    let _ = writeln!(s, "{} {}", num(grid.length()), num(0.0));
    s
}

struct Output {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, content)?;
        self.written.push(path);
        Ok(())
    }
}

fn run_eig(cfg: &RunConfig, out: &mut Output) -> Result<Summary> {
    let grid = cfg.grid()?;
    let n = grid.n();
    let e = &cfg.eig;
    let pair = principal_eigen(&Coefficient::constant(n, e.p), &vec![e.q; n], &vec![e.r; n], &grid)?;
    let header = vec!["p", "q", "r", "L", "n", "sigma1"];
    let row = vec![num(e.p), num(e.q), num(e.r), num(grid.length()), n.to_string(), num(pair.sigma)];
    out.write("eig.csv", &csv(&header, &[row.clone()]))?;
    out.write("eig_phi.dat", &plot_data(&grid, &pair.phi))?;
    Ok(Summary { header, row })
}

fn run_logistic(cfg: &RunConfig, out: &mut Output) -> Result<Summary> {
    let grid = cfg.grid()?;
    let n = grid.n();
    let l = &cfg.logistic;
    let p = Coefficient::constant(n, l.p);
    let sol = solve_logistic(&p, l.a, &vec![l.b; n], &grid)?;
    let sigma1 = principal_eigen(&p, &vec![0.0; n], &vec![1.0; n], &grid)?.sigma;
    let header = vec!["p", "a", "b", "sigma1", "exists", "max_theta", "residual"];
    let row = match &sol {
        Some(s) => vec![num(l.p), num(l.a), num(l.b), num(sigma1), "true".into(), num(s.theta.max()), num(s.residual)],
        None => vec![num(l.p), num(l.a), num(l.b), num(sigma1), "false".into(), num(0.0), num(0.0)],
    };
    out.write("logistic.csv", &csv(&header, &[row.clone()]))?;
    if let Some(s) = &sol {
        out.write("logistic_theta.dat", &plot_data(&grid, &s.theta))?;
    }
    Ok(Summary { header, row })
}

fn run_thresholds(cfg: &RunConfig, out: &mut Output) -> Result<Summary> {
    let grid = cfg.grid()?;
    let params = cfg.model_params()?;
    let bundle = lambda_mu_bundle(&params, &grid)?;
    let star = match lambda_star(params.mu, &params, &grid) {
        Ok(x) => num(x),
        Err(Error::NotApplicable(_)) => "NA".into(),
        Err(e) => return Err(e),
    };
    let lower = nonexistence_lower_bound(&params, &grid)?;
    let header = vec!["lambda_mu", "lambda_star", "nonexistence_lower", "lambda_prime0"];
    let row = vec![num(bundle.lambda_mu), star, num(lower), num(bundle.lambda_prime0)];
    out.write("thresholds.csv", &csv(&header, &[row.clone()]))?;

    let mut rows = Vec::new();
    for &lambda in &cfg.sweep.lambdas {
        let p = params.with_lambda(lambda);
        for which in [StateKind::PredatorOnly, StateKind::PreyOnly] {
            let r = match classify_semitrivial(which, lambda, &p, &grid) {
                Ok(v) => vec![
                    num(lambda),
                    which.label().into(),
                    "true".into(),
                    if v.stable { "stable" } else { "unstable" }.into(),
                    num(v.margin),
                ],
                Err(Error::PredatorStateMissing { .. } | Error::PreyStateMissing { .. }) => {
                    vec![num(lambda), which.label().into(), "false".into(), "NA".into(), "NA".into()]
                }
                Err(e) => return Err(e),
            };
            rows.push(r);
        }
    }
    out.write("stability.csv", &csv(&["lambda", "state", "exists", "verdict", "margin"], &rows))?;
    Ok(Summary { header, row })
}

fn run_steady(cfg: &RunConfig, out: &mut Output) -> Result<Summary> {
    let grid = cfg.grid()?;
    let params = cfg.model_params()?;
    let u0 = cfg.steady.u0.field(&grid);
    let v0 = cfg.steady.v0.field(&grid);
    let s = newton_solve(&u0, &v0, params.lambda, &params, &grid, &cfg.newton_options())?;
    let header = vec!["lambda", "kind", "residual_norm", "max_u", "max_v"];
    let row = vec![num(s.lambda), s.kind.label().into(), num(s.residual_norm), num(s.u.max()), num(s.v.max())];
    out.write("steady.csv", &csv(&header, &[row.clone()]))?;
    out.write("steady_u.dat", &plot_data(&grid, &s.u))?;
    out.write("steady_v.dat", &plot_data(&grid, &s.v))?;
    Ok(Summary { header, row })
}

fn run_branch(cfg: &RunConfig, out: &mut Output) -> Result<Summary> {
    let grid = cfg.grid()?;
    let params = cfg.model_params()?;
    let bundle = lambda_mu_bundle(&params, &grid)?;
    let branch = branch_from_prey_bifurcation(&bundle, &params, &grid, &cfg.controls())?;

    let mut points = Vec::new();
    let mut profiles = String::from("index,x,u,v\n");
    let mut diagram = String::new();
    for (k, p) in branch.points.iter().enumerate() {
        points.push(vec![
            k.to_string(),
            num(p.s),
            num(p.lambda),
            num(p.u.max()),
            num(p.v.max()),
            p.positive.to_string(),
            num(p.residual_norm),
        ]);
        for i in 0..grid.n() {
            let _ = writeln!(profiles, "{k},{},{},{}", num(grid.node(i)), num(p.u[i]), num(p.v[i]));
        }
        let _ = writeln!(diagram, "{} {}", num(p.lambda), num(p.u.max()));
    }
    out.write(
        "branch.csv",
        &csv(&["index", "s", "lambda", "max_u", "max_v", "positive", "residual_norm"], &points),
    )?;
    out.write("branch_profiles.csv", &profiles)?;
    out.write("branch.dat", &diagram)?;

    let (lo, hi) = branch.lambda_range();
    let header = vec![
        "lambda_mu",
        "lambda_prime0",
        "endpoint",
        "folds",
        "lambda_min",
        "lambda_max",
        "end_lambda",
        "points",
    ];
    let row = vec![
        num(bundle.lambda_mu),
        num(bundle.lambda_prime0),
        branch.endpoint.label().into(),
        branch.folds.to_string(),
        num(lo),
        num(hi),
        num(branch.last().lambda),
        branch.points.len().to_string(),
    ];
    out.write("branch_summary.csv", &csv(&header, &[row.clone()]))?;
    Ok(Summary { header, row })
}

fn trajectory_files(prefix: &str, grid: &Grid, traj: &Trajectory, out: &mut Output) -> Result<()> {
    out.write(&format!("{prefix}_u.dat"), &plot_data(grid, &traj.u))?;
    out.write(&format!("{prefix}_v.dat"), &plot_data(grid, &traj.v))?;
    if traj.snapshots.len() > 2 {
        let mut s = String::from("t,x,u,v\n");
        for (t, (u, v)) in traj.times.iter().zip(&traj.snapshots) {
            for i in 0..grid.n() {
                let _ = writeln!(s, "{},{},{},{}", num(*t), num(grid.node(i)), num(u[i]), num(v[i]));
            }
        }
        out.write(&format!("{prefix}_snapshots.csv"), &s)?;
    }
    Ok(())
}

const SIMULATE_HEADER: [&str; 8] = ["lambda", "regime", "t", "dt", "sup_u", "sup_v", "max_v", "rate"];

fn trajectory_row(lambda: f64, traj: &Trajectory) -> Vec<String> {
    vec![
        num(lambda),
        traj.regime.label().into(),
        num(traj.t),
        num(traj.dt),
        num(traj.u.sup_norm()),
        num(traj.v.sup_norm()),
        num(traj.max_v),
        num(traj.rate),
    ]
}

fn run_simulate(cfg: &RunConfig, out: &mut Output) -> Result<Summary> {
    let params = cfg.model_params()?;
    let sim = cfg.simulation(params.clone())?;
    let traj = simulate(&sim)?;
    let row = trajectory_row(params.lambda, &traj);
    out.write("simulate.csv", &csv(&SIMULATE_HEADER, &[row.clone()]))?;
    trajectory_files("simulate", &sim.grid, &traj, out)?;
    Ok(Summary {
        header: SIMULATE_HEADER.to_vec(),
        row,
    })
}

pub const FIGURE_LAMBDAS: [f64; 3] = [-1.0, 1.5, 5.0];

fn run_figure(cfg: &RunConfig, name: &str, make: fn(f64) -> ModelParams, workers: usize, out: &mut Output) -> Result<Summary> {
    let configs: Vec<SimulationConfig> = FIGURE_LAMBDAS
        .iter()
        .map(|&l| {
            let mut c = SimulationConfig::figure(make(l));
            c.dt = cfg.time.dt;
            c.t_final = cfg.time.t_final;
            c.snapshot_stride = cfg.time.snapshot_stride;
            c.regime_threshold = cfg.time.regime_threshold;
            c
        })
        .collect();
    let results = par::map(&configs, workers, simulate);
    let mut rows = Vec::new();
    for ((res, c), panel) in results.into_iter().zip(&configs).zip(["a", "b", "c"]) {
        let traj = res?;
        rows.push(trajectory_row(c.params.lambda, &traj));
        trajectory_files(&format!("{name}_{panel}"), &c.grid, &traj, out)?;
    }
    out.write(&format!("{name}.csv"), &csv(&SIMULATE_HEADER, &rows))?;
    Ok(Summary {
        header: vec!["regimes"],
        row: vec![rows.iter().map(|r| r[1].clone()).collect::<Vec<_>>().join(";")],
    })
}

fn run_sweep(cfg: &RunConfig, workers: usize, out: &mut Output) -> Result<Summary> {
    let command = Command::from_sweep(&cfg.sweep.command)
        .ok_or_else(|| Error::InvalidArgument(format!("cannot sweep '{}'", cfg.sweep.command)))?;
    let jobs: Vec<(usize, f64)> = cfg.sweep.lambdas.iter().copied().enumerate().collect();
    let base = out.dir.clone();
    let results = par::map(&jobs, workers, |&(k, lambda)| {
        let mut c = cfg.clone();
        c.model.lambda = lambda;
        let dir = base.join(format!("sweep_{k:03}"));
        let mut o = Output::new(&dir)?;
        let s = dispatch(command, &c, 1, &mut o)?;
        Ok::<_, Error>((s, o.written))
    });
    let mut header: Option<Vec<&'static str>> = None;
    let mut rows = Vec::new();
    for ((k, lambda), res) in jobs.iter().zip(results) {
        match res {
            Ok((s, files)) => {
                header.get_or_insert(s.header.clone());
                let mut r = vec![k.to_string(), num(*lambda), "ok".into()];
                r.extend(s.row);
                rows.push(r);
                out.written.extend(files);
            }
            Err(e) => rows.push(vec![k.to_string(), num(*lambda), e.kind().into()]),
        }
    }
    let inner = header.unwrap_or_default();
    let width = inner.len();
    for r in &mut rows {
        r.resize(3 + width, String::new());
    }
    let mut full = vec!["index", "lambda", "status"];
    full.extend(inner);
    out.write(&format!("sweep_{}.csv", command.name()), &csv(&full, &rows))?;
    let failed = rows.iter().filter(|r| r[2] != "ok").count();
    Ok(Summary {
        header: vec!["runs", "failed"],
        row: vec![rows.len().to_string(), failed.to_string()],
    })
}

fn dispatch(command: Command, cfg: &RunConfig, workers: usize, out: &mut Output) -> Result<Summary> {
    match command {
        Command::Eig => run_eig(cfg, out),
        Command::Logistic => run_logistic(cfg, out),
        Command::Thresholds => run_thresholds(cfg, out),
        Command::Steady => run_steady(cfg, out),
        Command::Branch => run_branch(cfg, out),
        Command::Simulate => run_simulate(cfg, out),
        Command::Sweep => run_sweep(cfg, workers, out),
        Command::Figure2 => run_figure(cfg, "figure2", ModelParams::figure2, workers, out),
        Command::Figure4 => run_figure(cfg, "figure4", ModelParams::figure4, workers, out),
    }
}

/// Runs `command`, writing into `out_dir`; returns the files written.
pub fn run(command: Command, config: &RunConfig, out_dir: &Path, workers: usize) -> Result<Vec<PathBuf>> {
    let mut out = Output::new(out_dir)?;
    dispatch(command, config, workers, &mut out)?;
    Ok(out.written)
}

/// Loads the configuration named on the command line and applies overrides.
pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let text = match &cli.config {
        Some(path) => fs::read_to_string(path).map_err(|e| Error::Config {
            line: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })?,
        None => String::new(),
    };
    parse_config_with(&text, &cli.set)
}

/// Entry point shared by the binary; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let result = load_config(&cli).and_then(|cfg| {
        let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
        run(cli.command, &cfg, &dir, cli.workers)
    });
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: code={} kind={} message={}", e.exit_code(), e.kind(), e);
            e.exit_code()
        }
    }
}
