//! Experiment presets, reference potentials, configuration files, and the
//! synthetic data pipeline feeding the study runners.

mod config;
pub mod io;
mod studies;

pub use config::ExperimentConfig;
pub use studies::{run_study, StudyKind, StudyRow};

use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{build_interval_mesh, build_unit_square_mesh, FemSystem, Mesh};
use crate::forward::{solve_forward, PotentialGrid, ProblemSpec, TimeGrid};
use crate::inverse::{reconstruct, ReconstructionResult};
use crate::metrics::reconstruction_error;
use crate::observation::{add_noise, check_admissible, downsample, observe, ObservationSeries};

/// The three reference potentials driving every experiment: a smooth
/// cosine, a saw with slopes `±8/T`, and a piecewise constant profile
/// (right-continuous at its breakpoints).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferencePotential {
    Q1,
    Q2,
    Q3,
}

impl ReferencePotential {
    pub fn value(&self, t: f64, t_end: f64) -> Result<f64> {
        if !(0.0..=t_end).contains(&t) {
            return Err(Error::InvalidParameter(format!(
                "potential evaluated at t = {t} outside [0, {t_end}]"
            )));
        }
        let quarter = 0.25 * t_end;
        Ok(match self {
            ReferencePotential::Q1 => 1.0 + (5.0 * t).cos(),
            ReferencePotential::Q2 => {
                let slope = 8.0 / t_end;
                if t < quarter {
                    -slope * t + 2.7
                } else if t < 2.0 * quarter {
                    slope * t - 1.3
                } else if t < 3.0 * quarter {
                    -slope * t + 6.7
                } else {
                    slope * t - 5.3
                }
            }
            ReferencePotential::Q3 => {
                if t < quarter {
                    2.5
                } else if t < 2.0 * quarter {
                    1.0
                } else if t < 3.0 * quarter {
                    2.0
                } else {
                    1.5
                }
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ReferencePotential::Q1 => "q1",
            ReferencePotential::Q2 => "q2",
            ReferencePotential::Q3 => "q3",
        }
    }
}

impl FromStr for ReferencePotential {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "q1" => Ok(ReferencePotential::Q1),
            "q2" => Ok(ReferencePotential::Q2),
            "q3" => Ok(ReferencePotential::Q3),
            other => Err(Error::Config(format!(
                "unknown potential '{other}' (expected q1, q2 or q3)"
            ))),
        }
    }
}

/// Spatial problem preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// Interval (0,1): `f(u) = u^2`, `g = 0`, `u0 = 1 + cos(2 pi x)`.
    OneD,
    /// Unit square: `f(u) = u^2`, `g = 0`,
    /// `u0 = (1 + cos(pi x1))(1 + cos(pi x2))`.
    TwoD,
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::OneD => "1d",
            ProblemKind::TwoD => "2d",
        }
    }

    pub fn build_mesh(&self, n_cells: usize) -> Result<Mesh> {
        match self {
            ProblemKind::OneD => build_interval_mesh(n_cells),
            ProblemKind::TwoD => build_unit_square_mesh(n_cells),
        }
    }

    /// Problem data with `a = 1`; the diffusion coefficient is not pinned
    /// by the experiments, so the presets keep it overridable in the
    /// config.
    pub fn problem_spec(&self, alpha: f64, t_end: f64) -> Result<ProblemSpec> {
        use std::f64::consts::PI;
        type U0 = Arc<dyn Fn(&[f64; 2]) -> f64 + Send + Sync>;
        let u0: U0 = match self {
            ProblemKind::OneD => Arc::new(|x: &[f64; 2]| 1.0 + (2.0 * PI * x[0]).cos()),
            ProblemKind::TwoD => {
                Arc::new(|x: &[f64; 2]| (1.0 + (PI * x[0]).cos()) * (1.0 + (PI * x[1]).cos()))
            }
        };
        ProblemSpec::new(
            alpha,
            t_end,
            u0,
            Arc::new(|u: f64, _x: &[f64; 2], _t: f64| u * u),
            Arc::new(|_x: &[f64; 2], _t: f64| 0.0),
            Arc::new(|_x: &[f64; 2]| 1.0),
        )
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1d" => Ok(ProblemKind::OneD),
            "2d" => Ok(ProblemKind::TwoD),
            other => Err(Error::Config(format!(
                "unknown problem '{other}' (expected 1d or 2d)"
            ))),
        }
    }
}

/// Synthetic observation data for one configuration.
#[derive(Debug, Clone)]
pub struct GeneratedData {
    /// Exact series on the coarse (inversion) grid, downsampled from the
    /// fine forward solve.
    pub exact: ObservationSeries,
    /// Noisy series on the coarse grid (equal to `exact` when epsilon = 0).
    pub noisy: ObservationSeries,
    /// Minimum of the exact series, the `m_star` surrogate for the
    /// admissibility check.
    pub m_star: f64,
}

/// Generates observation data the way every study does: solve the forward
/// problem with the reference potential on a finer space-time grid, observe,
/// downsample in time to the inversion grid, then add noise on the coarse
/// grid. Noising after downsampling is the pipeline contract — the noise
/// law is defined at the measurement times.
pub fn generate_data(cfg: &ExperimentConfig) -> Result<GeneratedData> {
    let exact = generate_exact_data(cfg)?;
    let noisy = add_noise(&exact, cfg.epsilon, cfg.seed)?;
    let m_star = exact.min_value();
    Ok(GeneratedData {
        exact,
        noisy,
        m_star,
    })
}

/// The exact-data half of [`generate_data`]; studies reuse it across noise
/// seeds.
pub fn generate_exact_data(cfg: &ExperimentConfig) -> Result<ObservationSeries> {
    if cfg.fine_time_factor == 0 || cfg.fine_space_factor == 0 {
        return Err(Error::Config("fine grid factors must be at least 1".into()));
    }
    let spec = cfg.problem.problem_spec(cfg.alpha, cfg.t_end)?;
    let fine_grid = TimeGrid::new(cfg.t_end, cfg.n_steps * cfg.fine_time_factor)?;
    let fine_mesh = cfg
        .problem
        .build_mesh(cfg.n_cells * cfg.fine_space_factor)?;
    let fine_system = FemSystem::build(fine_mesh, spec.diffusion())?;
    let q_fine = PotentialGrid::sample(
        &|t| cfg.potential.value(t, cfg.t_end).expect("t within [0,T]"),
        &fine_grid,
        cfg.inverse.c0,
    )?;
    let trajectory = solve_forward(&spec, &fine_system, &fine_grid, &q_fine)?;
    let fine_series = observe(&trajectory, &fine_system)?;
    downsample(&fine_series, cfg.fine_time_factor)
}

/// One full synthetic inversion: data generation, admissibility check,
/// reconstruction, and the l2 error against the reference potential.
#[derive(Debug)]
pub struct InversionRun {
    pub data: GeneratedData,
    pub result: ReconstructionResult,
    pub error_l2: f64,
    pub grid: TimeGrid,
}

pub fn run_inversion(cfg: &ExperimentConfig) -> Result<InversionRun> {
    let data = generate_data(cfg)?;
    run_inversion_on(cfg, data)
}

/// Like [`run_inversion`], but on already generated (or externally
/// provided) data.
pub fn run_inversion_on(cfg: &ExperimentConfig, data: GeneratedData) -> Result<InversionRun> {
    check_admissible(&data.noisy, data.m_star)?;
    let spec = cfg.problem.problem_spec(cfg.alpha, cfg.t_end)?;
    let grid = TimeGrid::new(cfg.t_end, cfg.n_steps)?;
    let mesh = cfg.problem.build_mesh(cfg.n_cells)?;
    let system = FemSystem::build(mesh, spec.diffusion())?;
    let result = reconstruct(&spec, &system, &grid, &data.noisy, &cfg.inverse)?;
    let error_l2 = reconstruction_error(
        &result.q_star,
        &|t| cfg.potential.value(t, cfg.t_end).expect("t within [0,T]"),
        &grid,
        2.0,
    )?;
    Ok(InversionRun {
        data,
        result,
        error_l2,
        grid,
    })
}

/// Deterministic per-point RNG stream: mixes the master seed with the
/// point index so results do not depend on scheduling order.
pub(crate) fn point_seed(master: u64, index: u64) -> u64 {
    let mut x = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    x
}
