//! Projected fixed-point reconstruction of the time-dependent potential
//! from an integral observation series.
//!
//! Each sweep solves the forward problem with the current potential and
//! updates
//!
//! ```text
//! q[n] <- clamp( (int f(u[n-1], t_n) - D[n] + int g(t_n)) / m[n], 0, c0 )
//! ```
//!
//! where `D` is the discrete Caputo derivative of the (noisy) data,
//! computed once up front, and the source enters lagged exactly as in the
//! forward scheme. No explicit regularization is applied: the
//! discretization itself regularizes, which is why the error over time
//! step refinement is U-shaped for noisy data.

use crate::cq::cq_caputo;
use crate::error::{Error, Result};
use crate::fem::{assemble_boundary_load, FemSystem};
use crate::forward::{evaluate_source, solve_forward, PotentialGrid, ProblemSpec, TimeGrid};
use crate::metrics::{lp_seq_norm, NormSpec};
use crate::observation::ObservationSeries;

/// Knobs of the fixed-point iteration.
#[derive(Debug, Clone, Copy)]
pub struct InverseConfig {
    /// Upper bound of the admissible box `[0, c0]`. Must sit above the
    /// maximum of the potential being recovered.
    pub c0: f64,
    pub max_iterations: usize,
    /// Relative successive-difference threshold (tau-scaled l2 norm).
    pub stop_tolerance: f64,
    /// Norm exponent used by the error theory; diagnostics only.
    pub p: f64,
    /// Weight rate of the exponentially weighted norm used for the
    /// convergence diagnostics.
    pub lambda: f64,
}

impl Default for InverseConfig {
    fn default() -> Self {
        InverseConfig {
            c0: 3.0,
            max_iterations: 50,
            stop_tolerance: 1e-10,
            p: 2.0,
            lambda: 25.0,
        }
    }
}

impl InverseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cutoff bound c0 must be positive, got {}",
                self.c0
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "the iteration needs at least one sweep".into(),
            ));
        }
        if !(self.stop_tolerance >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "stop tolerance must be nonnegative, got {}",
                self.stop_tolerance
            )));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "norm exponent must satisfy 1 < p < infinity, got {}",
                self.p
            )));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weight rate lambda must be nonnegative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Full record of one reconstruction run.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub q_star: PotentialGrid,
    /// `iterates[0]` is the zero initial guess, `iterates[k]` the k-th
    /// update; every entry satisfies the box constraint.
    pub iterates: Vec<PotentialGrid>,
    pub converged: bool,
    pub iterations_used: usize,
    /// Tau-scaled l2 distances between consecutive iterates, one per sweep.
    pub successive_diffs: Vec<f64>,
}

/// Runs the projected fixed-point iteration, starting from zero.
///
/// The data must be strictly positive (the update divides by it); callers
/// with access to exact data should apply
/// [`crate::observation::check_admissible`] first for the stronger
/// `min m >= m_star / 2` guarantee.
pub fn reconstruct(
    spec: &ProblemSpec,
    system: &FemSystem,
    grid: &TimeGrid,
    m_delta: &ObservationSeries,
    cfg: &InverseConfig,
) -> Result<ReconstructionResult> {
    cfg.validate()?;
    let n_steps = grid.n_steps();
    if m_delta.grid().n_steps() != n_steps {
        return Err(Error::DimensionMismatch(format!(
            "observation has {} steps but the inversion grid has {n_steps}",
            m_delta.grid().n_steps()
        )));
    }
    if (m_delta.grid().tau() - grid.tau()).abs() > 1e-12 * grid.tau() {
        return Err(Error::DimensionMismatch(
            "observation and inversion grids disagree on the time step".into(),
        ));
    }
    let data = m_delta.values();
    let min = m_delta.min_value();
    if !(min > 0.0) {
        return Err(Error::Inadmissible {
            min,
            required: f64::MIN_POSITIVE,
        });
    }

    // The numerical differentiation of the data happens exactly once; the
    // iteration never touches it again.
    let d = cq_caputo(data, spec.alpha(), grid.tau())?;
    let g_int: Vec<f64> = (1..=n_steps)
        .map(|n| {
            assemble_boundary_load(system.mesh(), &|x| spec.neumann(x, grid.time(n)))
                .iter()
                .sum()
        })
        .collect();

    let norm_spec = NormSpec::plain(2.0, grid.tau());
    let mut iterates = vec![PotentialGrid::zeros(n_steps, cfg.c0)?];
    let mut successive_diffs = Vec::new();
    let mut converged = false;

    for k in 0..cfg.max_iterations {
        let current = iterates.last().expect("nonempty history");
        let trajectory =
            solve_forward(spec, system, grid, current).map_err(|e| Error::Reconstruction {
                iteration: k,
                source: Box::new(e),
            })?;
        let mut next = Vec::with_capacity(n_steps);
        for n in 1..=n_steps {
            // The source enters lagged at the previous state, exactly as the
            // forward scheme discretizes it at step n. With same-grid data
            // the reconstruction then reproduces the sampled potential up to
            // iteration tolerance, and the mesh study can expose the spatial
            // error instead of a lag-induced floor at the initial layer.
            let f_nodal =
                evaluate_source(spec, system.mesh(), trajectory.state(n - 1), grid.time(n))
                    .map_err(|e| Error::Reconstruction {
                        iteration: k,
                        source: Box::new(e),
                    })?;
            let f_int = system.integrate_dofs(&f_nodal)?;
            let raw = (f_int - d[n - 1] + g_int[n - 1]) / data[n];
            next.push(raw.clamp(0.0, cfg.c0));
        }
        let next = PotentialGrid::new(next, cfg.c0)?;
        let diff_seq: Vec<f64> = next
            .values()
            .iter()
            .zip(current.values())
            .map(|(a, b)| a - b)
            .collect();
        let diff = lp_seq_norm(&diff_seq, &norm_spec)?;
        let scale = lp_seq_norm(next.values(), &norm_spec)?.max(f64::MIN_POSITIVE);
        iterates.push(next);
        successive_diffs.push(diff);
        if diff / scale <= cfg.stop_tolerance {
            converged = true;
            break;
        }
    }

    Ok(ReconstructionResult {
        q_star: iterates.last().expect("nonempty history").clone(),
        iterations_used: successive_diffs.len(),
        iterates,
        converged,
        successive_diffs,
    })
}
