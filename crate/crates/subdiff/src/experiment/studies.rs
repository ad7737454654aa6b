//! Study runners: mesh refinement, time step refinement, noise-coupled
//! convergence, semi-convergence over the time step, and per-iteration
//! diagnostics of the fixed-point method.
//!
//! Study points are independent and run on a rayon pool; every point draws
//! its noise from a stream derived from (master seed, point index), so the
//! output is independent of scheduling order. Failed points are recorded as
//! rows with a NaN error and the sweep continues.

use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{lp_seq_norm, NormSpec};
use crate::observation::{add_noise, add_noise_with_level, ObservationSeries};

use super::{
    generate_exact_data, point_seed, run_inversion, run_inversion_on, ExperimentConfig,
    GeneratedData, ProblemKind,
};

/// The five study kinds exposed by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    H,
    Tau,
    Delta,
    SemiConv,
    Iter,
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h" => Ok(StudyKind::H),
            "tau" => Ok(StudyKind::Tau),
            "delta" => Ok(StudyKind::Delta),
            "semiconv" => Ok(StudyKind::SemiConv),
            "iter" => Ok(StudyKind::Iter),
            other => Err(Error::Config(format!("unknown study kind '{other}'"))),
        }
    }
}

/// One line of a study table. `seconds` is written as zero by the runners;
/// per-point wall time goes to stderr so the CSVs stay byte-reproducible
/// from config + seed.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub kind: String,
    pub param: f64,
    pub h: f64,
    pub tau: f64,
    /// Realized noise level of the data behind this row (not the nominal
    /// epsilon).
    pub delta: f64,
    pub error: f64,
    pub iters: usize,
    pub seconds: f64,
}

/// Dispatches to the requested runner.
pub fn run_study(kind: StudyKind, cfg: &ExperimentConfig) -> Result<Vec<StudyRow>> {
    match kind {
        StudyKind::H => run_h_study(cfg),
        StudyKind::Tau => run_tau_study(cfg),
        StudyKind::Delta => run_delta_study(cfg),
        StudyKind::SemiConv => run_semiconv_study(cfg),
        StudyKind::Iter => run_iter_study(cfg),
    }
}

fn failed_row(kind: &str, param: f64, h: f64, tau: f64, delta: f64) -> StudyRow {
    StudyRow {
        kind: kind.into(),
        param,
        h,
        tau,
        delta,
        error: f64::NAN,
        iters: 0,
        seconds: 0.0,
    }
}

fn exact_point_row(kind: &str, cfg: &ExperimentConfig, param_is_h: bool) -> StudyRow {
    let start = Instant::now();
    let tau = cfg.t_end / cfg.n_steps as f64;
    let h = match cfg.problem.build_mesh(cfg.n_cells) {
        Ok(mesh) => mesh.h(),
        Err(_) => 1.0 / cfg.n_cells as f64,
    };
    let param = if param_is_h { h } else { tau };
    match run_inversion(cfg) {
        Ok(run) => {
            eprintln!(
                "[study-{kind}] {}={param:.4e} error={:.4e} iters={} ({:.2} s)",
                if param_is_h { "h" } else { "tau" },
                run.error_l2,
                run.result.iterations_used,
                start.elapsed().as_secs_f64()
            );
            StudyRow {
                kind: kind.into(),
                param,
                h,
                tau,
                delta: run.data.noisy.delta(),
                error: run.error_l2,
                iters: run.result.iterations_used,
                seconds: 0.0,
            }
        }
        Err(e) => {
            eprintln!("[study-{kind}] {param:.4e} FAILED: {e}");
            failed_row(kind, param, h, tau, 0.0)
        }
    }
}

/// Mesh refinement with exact data: the time step is pinned to `T/1000`
/// and the cell counts of `h_sweep` are run independently.
///
/// The data's time grid matches the inversion grid here (space stays
/// refined): differentiating data from a different time discretization
/// carries an irreducible initial-layer defect of order `sqrt(tau)` that
/// sits far above the spatial branch this study measures.
pub fn run_h_study(cfg: &ExperimentConfig) -> Result<Vec<StudyRow>> {
    let rows = cfg
        .h_sweep
        .par_iter()
        .map(|&cells| {
            let point = ExperimentConfig {
                n_cells: cells,
                n_steps: 1000,
                fine_time_factor: 1,
                epsilon: 0.0,
                ..cfg.clone()
            };
            exact_point_row("h", &point, true)
        })
        .collect();
    Ok(rows)
}

/// Time step refinement with exact data: the mesh is pinned to `h = 1e-2`
/// and the step counts of `tau_sweep` are run independently.
pub fn run_tau_study(cfg: &ExperimentConfig) -> Result<Vec<StudyRow>> {
    let rows = cfg
        .tau_sweep
        .par_iter()
        .map(|&steps| {
            let point = ExperimentConfig {
                n_cells: 100,
                n_steps: steps,
                epsilon: 0.0,
                ..cfg.clone()
            };
            exact_point_row("tau", &point, false)
        })
        .collect();
    Ok(rows)
}

/// A priori coupling of the noise-convergence study:
/// `tau_i = T / 2^i`, `delta_i = tau_i^{alpha + 1/2}`,
/// `h_i = max(tau_i^{1/4} / 4, 1/512)`. The noise sample is rescaled to hit
/// `delta_i` in the max norm exactly.
fn delta_point_config(cfg: &ExperimentConfig, exponent: u32) -> (ExperimentConfig, f64) {
    let n_steps = 1usize << exponent;
    let tau = cfg.t_end / n_steps as f64;
    let delta = tau.powf(cfg.alpha + 0.5);
    let h = (tau.powf(0.25) / 4.0).max(1.0 / 512.0);
    let cap = match cfg.problem {
        ProblemKind::OneD => 512,
        // 2D runs stay on modest meshes.
        ProblemKind::TwoD => 32,
    };
    let n_cells = ((1.0 / h).round() as usize).clamp(4, cap);
    let point = ExperimentConfig {
        n_steps,
        n_cells,
        epsilon: 0.0,
        ..cfg.clone()
    };
    (point, delta)
}

struct NoisySweepPoint {
    cfg: ExperimentConfig,
    delta_target: Option<f64>,
    epsilon: f64,
    param: f64,
}

/// Runs a family of noisy sweeps: exact data generated once per sweep
/// value, then `study_seeds` independent noise realizations and inversions
/// per value. Rows are ordered sweep-major, seed-minor.
fn run_noisy_sweep(
    kind: &str,
    cfg: &ExperimentConfig,
    points: Vec<NoisySweepPoint>,
) -> Vec<StudyRow> {
    let exact: Vec<Result<ObservationSeries>> = points
        .par_iter()
        .map(|p| generate_exact_data(&p.cfg))
        .collect();
    let seeds = cfg.study_seeds;
    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|pi| (0..seeds).map(move |s| (pi, s)))
        .collect();
    tasks
        .par_iter()
        .map(|&(pi, s)| {
            let point = &points[pi];
            let tau = point.cfg.t_end / point.cfg.n_steps as f64;
            let h = match point.cfg.problem.build_mesh(point.cfg.n_cells) {
                Ok(mesh) => mesh.h(),
                Err(_) => 1.0 / point.cfg.n_cells as f64,
            };
            let seed = point_seed(cfg.seed, (pi * seeds + s) as u64);
            let exact_series = match &exact[pi] {
                Ok(series) => series,
                Err(e) => {
                    eprintln!("[study-{kind}] param={:.4e} data generation FAILED: {e}", point.param);
                    return failed_row(kind, point.param, h, tau, 0.0);
                }
            };
            let start = Instant::now();
            let noisy = match point.delta_target {
                Some(delta) => add_noise_with_level(exact_series, delta, seed),
                None => add_noise(exact_series, point.epsilon, seed),
            };
            let outcome = noisy.and_then(|noisy| {
                let delta = noisy.delta();
                let data = GeneratedData {
                    exact: exact_series.clone(),
                    noisy,
                    m_star: exact_series.min_value(),
                };
                run_inversion_on(&point.cfg, data).map(|run| (run, delta))
            });
            match outcome {
                Ok((run, delta)) => {
                    eprintln!(
                        "[study-{kind}] param={:.4e} seed#{s} delta={delta:.4e} error={:.4e} iters={} ({:.2} s)",
                        point.param,
                        run.error_l2,
                        run.result.iterations_used,
                        start.elapsed().as_secs_f64()
                    );
                    StudyRow {
                        kind: kind.into(),
                        param: point.param,
                        h,
                        tau,
                        delta: run.data.noisy.delta(),
                        error: run.error_l2,
                        iters: run.result.iterations_used,
                        seconds: 0.0,
                    }
                }
                Err(e) => {
                    eprintln!("[study-{kind}] param={:.4e} seed#{s} FAILED: {e}", point.param);
                    failed_row(kind, point.param, h, tau, 0.0)
                }
            }
        })
        .collect()
}

/// Noise-convergence study with the coupled parameter choice; the swept
/// parameter (and realized noise level) is `delta_i`.
pub fn run_delta_study(cfg: &ExperimentConfig) -> Result<Vec<StudyRow>> {
    if cfg.delta_exponents.is_empty() {
        return Err(Error::Config(
            "delta study needs at least one exponent".into(),
        ));
    }
    let points = cfg
        .delta_exponents
        .iter()
        .map(|&i| {
            let (point, delta) = delta_point_config(cfg, i);
            NoisySweepPoint {
                cfg: point,
                delta_target: Some(delta),
                epsilon: 0.0,
                param: delta,
            }
        })
        .collect();
    Ok(run_noisy_sweep("delta", cfg, points))
}

/// Semi-convergence of the regularization-by-discretization effect: fixed
/// noise magnitude (1% unless the config overrides it), time steps
/// `tau_i = T * 2^{-i}` over `semiconv_exponents`. The swept parameter is
/// `tau_i`.
pub fn run_semiconv_study(cfg: &ExperimentConfig) -> Result<Vec<StudyRow>> {
    if cfg.semiconv_exponents.is_empty() {
        return Err(Error::Config(
            "semi-convergence study needs at least one exponent".into(),
        ));
    }
    let epsilon = if cfg.epsilon > 0.0 { cfg.epsilon } else { 0.01 };
    let points = cfg
        .semiconv_exponents
        .iter()
        .map(|&i| {
            let n_steps = 1usize << i;
            let point = ExperimentConfig {
                n_steps,
                epsilon: 0.0,
                ..cfg.clone()
            };
            let param = cfg.t_end / n_steps as f64;
            NoisySweepPoint {
                cfg: point,
                delta_target: None,
                epsilon,
                param,
            }
        })
        .collect();
    Ok(run_noisy_sweep("semiconv", cfg, points))
}

/// Per-iteration convergence diagnostics of one reconstruction: the error
/// against the reference potential after every sweep, in the plain l2 norm
/// (`kind = iter`) and in the exponentially weighted norm with the
/// configured lambda (`kind = iter-weighted`).
pub fn run_iter_study(cfg: &ExperimentConfig) -> Result<Vec<StudyRow>> {
    let start = Instant::now();
    let run = run_inversion(cfg)?;
    let grid = run.grid;
    let tau = grid.tau();
    let h = cfg.problem.build_mesh(cfg.n_cells)?.h();
    let delta = run.data.noisy.delta();
    let truth: Vec<f64> = (1..=grid.n_steps())
        .map(|n| {
            cfg.potential
                .value(grid.time(n), cfg.t_end)
                .expect("t in range")
        })
        .collect();
    let plain = NormSpec::plain(2.0, tau);
    let weighted = NormSpec::weighted(2.0, cfg.inverse.lambda, tau);
    let errors: Vec<(f64, f64)> = run
        .result
        .iterates
        .iter()
        .map(|q| {
            let diff: Vec<f64> = q
                .values()
                .iter()
                .zip(&truth)
                .map(|(qi, ti)| ti - qi)
                .collect();
            (
                lp_seq_norm(&diff, &plain).expect("valid norm"),
                lp_seq_norm(&diff, &weighted).expect("valid norm"),
            )
        })
        .collect();
    eprintln!(
        "[study-iter] {} iterations, final error {:.4e} ({:.2} s)",
        run.result.iterations_used,
        run.error_l2,
        start.elapsed().as_secs_f64()
    );
    let mut rows = Vec::with_capacity(2 * errors.len());
    for (k, (e_plain, _)) in errors.iter().enumerate() {
        rows.push(StudyRow {
            kind: "iter".into(),
            param: k as f64,
            h,
            tau,
            delta,
            error: *e_plain,
            iters: k,
            seconds: 0.0,
        });
    }
    for (k, (_, e_weighted)) in errors.iter().enumerate() {
        rows.push(StudyRow {
            kind: "iter-weighted".into(),
            param: k as f64,
            h,
            tau,
            delta,
            error: *e_weighted,
            iters: k,
            seconds: 0.0,
        });
    }
    Ok(rows)
}
