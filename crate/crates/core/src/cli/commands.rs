//! The five workflows. Each returns a [`Table`]; writing it is the caller's job.

use std::time::Instant;

use crate::cim_solver::{error_decay_fit, roundoff_floor, DecayPoint, SolutionSample, WindowSolver};
use crate::contours::ContourKind;
use crate::error::{FkError, Result};
use crate::occupation::{asymptote_fit, equilibrium_weights, occupation_average};
use crate::time_marching::{tm_solve, TmGrid, TmReference};

use super::config::RunConfig;
use super::output::{Cell, Table};

/// Number of evaluation times per window in `converge` and `bench`.
pub const ERROR_GRID_POINTS: usize = 17;

/// A command's table plus non-fatal diagnostics for stderr.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub table: Table,
    pub warnings: Vec<String>,
}

impl From<Table> for CommandOutput {
    fn from(table: Table) -> Self {
        CommandOutput {
            table,
            warnings: Vec::new(),
        }
    }
}

fn sample_rows(table: &mut Table, samples: &[SolutionSample]) {
    for s in samples {
        table.push(vec![Cell::Float(s.t), Cell::Float(s.g1), Cell::Float(s.g2)]);
    }
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<CommandOutput> {
    let times = cfg.output_times()?;
    let solver = WindowSolver::new(
        &cfg.params(),
        cfg.contour,
        cfg.n_nodes,
        cfg.t0,
        cfg.t1,
        &cfg.solver_options(),
    )?;
    let mut warnings = Vec::new();
    let mut samples = Vec::with_capacity(times.len());
    for t in times {
        if !solver.in_window(t) {
            warnings.push(format!("t = {t} lies outside the design window"));
        }
        samples.push(solver.evaluate(t)?);
    }
    let mut table = Table::new(vec!["t", "G1", "G2"]);
    sample_rows(&mut table, &samples);
    Ok(CommandOutput { table, warnings })
}

pub fn cmd_reference(cfg: &RunConfig) -> Result<CommandOutput> {
    let grid = TmGrid::new(cfg.t1, cfg.reference.m)?;
    let samples = tm_solve(&cfg.params(), grid, cfg.tm_scheme)?;
    let mut table = Table::new(vec!["t", "G1", "G2"]);
    sample_rows(&mut table, &samples);
    Ok(table.into())
}

/// [`ERROR_GRID_POINTS`] equally spaced times in `[t0, t1]`, each moved to the
/// nearest point of `grid` that stays inside the window.
pub fn error_grid(t0: f64, t1: f64, grid: &TmGrid) -> Vec<f64> {
    let h = grid.h();
    let lo = (t0 / h - 1e-9).ceil() as usize;
    let hi = ((t1 / h + 1e-9).floor() as usize).min(grid.m);
    let k = (ERROR_GRID_POINTS - 1) as f64;
    (0..ERROR_GRID_POINTS)
        .map(|i| {
            let t = t0 + (t1 - t0) * i as f64 / k;
            let n = ((t / h).round() as usize).clamp(lo, hi.max(lo));
            grid.time(n)
        })
        .collect()
}

fn max_errors(solver: &WindowSolver, reference: &[SolutionSample]) -> Result<(f64, f64)> {
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for r in reference {
        let s = solver.evaluate(r.t)?;
        e1 = e1.max((s.g1 - r.g1).abs());
        e2 = e2.max((s.g2 - r.g2).abs());
    }
    Ok((e1, e2))
}

fn median_ns(repeats: usize, mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        f()?;
        times.push(start.elapsed().as_nanos() as f64);
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    Ok(times[times.len() / 2])
}

/// Largest first-order error estimate `max |ref_M − ref_{M/2}|` over `times`.
fn reference_error_estimate(cfg: &RunConfig, fine: &TmReference, times: &[f64]) -> Result<f64> {
    let m = cfg.converge.ref_m;
    if m < 2 {
        return Ok(0.0);
    }
    let coarse = TmReference::new(&cfg.params(), cfg.t1, m / 2, cfg.tm_scheme)?;
    let mut worst = 0.0f64;
    for &t in times {
        let (a, b) = (fine.lookup(t)?, coarse.lookup(t)?);
        worst = worst.max((a.g1 - b.g1).abs()).max((a.g2 - b.g2).abs());
    }
    Ok(worst)
}

pub fn cmd_converge(cfg: &RunConfig) -> Result<CommandOutput> {
    let params = cfg.params();
    let opts = cfg.solver_options();
    let reference = TmReference::new(&params, cfg.t1, cfg.converge.ref_m, cfg.tm_scheme)?;
    let times = error_grid(cfg.t0, cfg.t1, reference.grid());
    let ref_samples: Vec<SolutionSample> =
        times.iter().map(|&t| reference.lookup(t)).collect::<Result<_>>()?;
    let ref_floor = 2.0 * reference_error_estimate(cfg, &reference, &times)?;

    let mut table = Table::new(vec!["N", "error_G1", "error_G2", "wall_time_ns"]);
    let mut points = Vec::new();
    let mut last_contour = None;
    for n in cfg.converge.n_min..=cfg.converge.n_max {
        let start = Instant::now();
        let solver = WindowSolver::new(&params, cfg.contour, n, cfg.t0, cfg.t1, &opts)?;
        let (e1, e2) = max_errors(&solver, &ref_samples)?;
        let ns = start.elapsed().as_nanos() as u64;
        table.push(vec![Cell::Int(n as u64), Cell::Float(e1), Cell::Float(e2), Cell::Int(ns)]);
        points.push(DecayPoint {
            n,
            error: e1.max(e2),
            floor: roundoff_floor(solver.contour(), cfg.t1).max(ref_floor),
        });
        last_contour = Some(*solver.contour());
    }
    let lambda = cfg.t1 / cfg.t0;
    match error_decay_fit(&points) {
        Ok(fit) => {
            table.summarize("decay_rate", Cell::Float(fit.rate));
            let used: Vec<String> = fit.used.iter().map(usize::to_string).collect();
            table.summarize("decay_fit_nodes", Cell::Text(used.join(" ")));
        }
        Err(e) => {
            table.summarize("decay_rate", Cell::Float(f64::NAN));
            table.summarize("decay_fit_note", Cell::Text(e.to_string()));
        }
    }
    if let Some(c) = last_contour {
        table.summarize("theoretical_rate", Cell::Float(c.decay_rate(lambda)?));
    }
    table.summarize("reference_error_estimate", Cell::Float(ref_floor / 2.0));
    Ok(table.into())
}

fn method_name(kind: ContourKind) -> &'static str {
    match kind {
        ContourKind::Parabolic => "CIM-PC",
        ContourKind::Hyperbolic => "CIM-HC",
    }
}

pub fn cmd_bench(cfg: &RunConfig) -> Result<CommandOutput> {
    let params = cfg.params();
    let opts = cfg.solver_options();
    let bench = &cfg.bench;
    let times = crate::cli::config::TimesSpec {
        count: ERROR_GRID_POINTS,
        spacing: crate::cli::config::Spacing::Linear,
    }
    .generate(cfg.t0, cfg.t1)?;

    let reference_of = |kind| -> Result<Vec<SolutionSample>> {
        let s = WindowSolver::new(&params, kind, bench.ref_n, cfg.t0, cfg.t1, &opts)?;
        times.iter().map(|&t| s.evaluate(t)).collect()
    };
    let reference = reference_of(ContourKind::Hyperbolic)?;
    let cross = reference_of(ContourKind::Parabolic)?
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a.g1 - b.g1).abs().max((a.g2 - b.g2).abs()))
        .fold(0.0f64, f64::max);

    let mut table = Table::new(vec!["target", "method", "count", "time_ns"]);
    let emit = |table: &mut Table, target: f64, method: &str, found: Option<(usize, f64)>, bound: usize| {
        let (count, time) = match found {
            Some((c, t)) => (c.to_string(), t),
            None => (format!(">{bound}"), f64::NAN),
        };
        table.push(vec![
            Cell::Float(target),
            Cell::Text(method.to_string()),
            Cell::Text(count),
            Cell::Float(time),
        ]);
    };

    for kind in [ContourKind::Parabolic, ContourKind::Hyperbolic] {
        let mut errors = Vec::new();
        for n in 2..=bench.n_max {
            let err = match WindowSolver::new(&params, kind, n, cfg.t0, cfg.t1, &opts) {
                Ok(s) => {
                    let (e1, e2) = max_errors(&s, &reference)?;
                    e1.max(e2)
                }
                Err(FkError::ContourInvalid(_)) | Err(FkError::Pole { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            errors.push((n, err));
        }
        for &target in &bench.targets {
            let found = match errors.iter().find(|(_, e)| *e <= target) {
                Some(&(n, _)) => {
                    let ns = median_ns(bench.repeats, || {
                        let s = WindowSolver::new(&params, kind, n, cfg.t0, cfg.t1, &opts)?;
                        for &t in &times {
                            std::hint::black_box(s.evaluate(t)?);
                        }
                        Ok(())
                    })?;
                    Some((n, ns))
                }
                None => None,
            };
            emit(&mut table, target, method_name(kind), found, bench.n_max);
        }
    }

    let mut tm_errors = Vec::new();
    let mut m = 8usize;
    while m <= bench.m_max {
        let r = TmReference::new(&params, cfg.t1, m, cfg.tm_scheme)?;
        let mut err = 0.0f64;
        for s in &reference {
            let v = r.lookup(s.t)?;
            err = err.max((v.g1 - s.g1).abs()).max((v.g2 - s.g2).abs());
        }
        tm_errors.push((m, err));
        m *= 2;
    }
    for &target in &bench.targets {
        let found = match tm_errors.iter().find(|(_, e)| *e <= target) {
            Some(&(m, _)) => {
                let grid = TmGrid::new(cfg.t1, m)?;
                let ns = median_ns(bench.repeats, || {
                    std::hint::black_box(tm_solve(&params, grid, cfg.tm_scheme)?);
                    Ok(())
                })?;
                Some((m, ns))
            }
            None => None,
        };
        emit(&mut table, target, "TM", found, bench.m_max);
    }
    table.summarize("reference", Cell::Text(format!("CIM-HC N={}", bench.ref_n)));
    table.summarize("reference_cross_difference", Cell::Float(cross));
    Ok(table.into())
}

pub fn cmd_occupation(cfg: &RunConfig) -> Result<CommandOutput> {
    let occ = cfg.occupation.to_config()?;
    let params = cfg.params();
    let samples = occupation_average(&occ, &params, cfg.contour, cfg.n_nodes, &cfg.solver_options())?;
    let mut table = Table::new(vec!["t", "A_mean", "theory"]);
    for s in &samples {
        table.push(vec![Cell::Float(s.t), Cell::Float(s.mean), Cell::Float(s.theory)]);
    }
    let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.t, s.mean)).collect();
    match asymptote_fit(&pairs) {
        Ok(fit) => {
            table.summarize("slope", Cell::Float(fit.slope));
            table.summarize("coefficient", Cell::Float(fit.coefficient));
        }
        Err(e) => {
            table.summarize("slope", Cell::Float(f64::NAN));
            table.summarize("coefficient", Cell::Float(f64::NAN));
            table.summarize("fit_note", Cell::Text(e.to_string()));
        }
    }
    table.summarize("theory_fraction", Cell::Float(occ.theory_fraction()));
    if let Ok(w) = equilibrium_weights(&occ.apply(&params)) {
        table.summarize("equilibrium_fraction", Cell::Float(w[occ.state as usize - 1]));
    }
    Ok(table.into())
}
