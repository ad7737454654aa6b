//! Integral observations of a trajectory, seeded uniform noise, the
//! admissibility check guarding the inversion, and downsampling of data
//! generated on finer grids.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::fem::FemSystem;
use crate::forward::{TimeGrid, Trajectory};

/// Provenance of an observation series.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseMeta {
    Exact,
    Noisy {
        /// Nominal noise magnitude of the additive model `m + eps * zeta`.
        epsilon: f64,
        seed: u64,
        /// Realized noise level: `max_n |m_noisy[n] - m[n]|`.
        delta: f64,
    },
}

/// Scalar series `m[n] ~ integral of u_h(t_n)`, `n = 0..=N`.
#[derive(Debug, Clone)]
pub struct ObservationSeries {
    values: Vec<f64>,
    grid: TimeGrid,
    noise: NoiseMeta,
}

impl ObservationSeries {
    pub fn exact(values: Vec<f64>, grid: TimeGrid) -> Result<Self> {
        if values.len() != grid.n_steps() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "observation series needs {} values (grid has {} steps), got {}",
                grid.n_steps() + 1,
                grid.n_steps(),
                values.len()
            )));
        }
        Ok(ObservationSeries {
            values,
            grid,
            noise: NoiseMeta::Exact,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn noise(&self) -> &NoiseMeta {
        &self.noise
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Realized noise level; zero for exact data.
    pub fn delta(&self) -> f64 {
        match self.noise {
            NoiseMeta::Exact => 0.0,
            NoiseMeta::Noisy { delta, .. } => delta,
        }
    }
}

/// Observes a trajectory: `m[n] = integral of u_h(t_n)`.
pub fn observe(trajectory: &Trajectory, system: &FemSystem) -> Result<ObservationSeries> {
    let values = trajectory
        .states()
        .iter()
        .map(|state| system.integrate_dofs(state))
        .collect::<Result<Vec<f64>>>()?;
    ObservationSeries::exact(values, *trajectory.grid())
}

fn uniform_sample(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    // Affine map of the generator's unit-interval output onto [-1, 1].
    (0..n).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect()
}

/// Adds seeded i.i.d. uniform noise: `m[n] + epsilon * zeta_n` for
/// `n = 1..=N` with `zeta_n` uniform on [-1, 1]. The initial value stays
/// exact: the discrete Caputo operator anchors every term at `m[0]`, and a
/// noisy anchor would inject a systematic `tau^{-alpha}`-amplified bias
/// that the additive model does not contain.
pub fn add_noise(series: &ObservationSeries, epsilon: f64, seed: u64) -> Result<ObservationSeries> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise magnitude must be nonnegative, got {epsilon}"
        )));
    }
    let n = series.grid.n_steps();
    let zeta = uniform_sample(seed, n);
    let mut values = series.values.clone();
    for (v, z) in values[1..].iter_mut().zip(&zeta) {
        *v += epsilon * z;
    }
    // The recorded level is the max-norm distance of the realized sample,
    // not the nominal magnitude.
    let delta = max_distance(&values, &series.values);
    Ok(ObservationSeries {
        values,
        grid: series.grid,
        noise: NoiseMeta::Noisy {
            epsilon,
            seed,
            delta,
        },
    })
}

fn max_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Adds seeded uniform noise rescaled so the realized level
/// `max_n |m_noisy[n] - m[n]|` equals `delta` exactly. Used by the studies
/// that couple the discretization parameters to a prescribed noise level.
pub fn add_noise_with_level(
    series: &ObservationSeries,
    delta: f64,
    seed: u64,
) -> Result<ObservationSeries> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise level must be nonnegative, got {delta}"
        )));
    }
    let n = series.grid.n_steps();
    let zeta = uniform_sample(seed, n);
    let max = zeta.iter().map(|z| z.abs()).fold(0.0, f64::max);
    let mut values = series.values.clone();
    if max > 0.0 && delta > 0.0 {
        let scale = delta / max;
        for (v, z) in values[1..].iter_mut().zip(&zeta) {
            *v += scale * z;
        }
    }
    let realized = max_distance(&values, &series.values);
    Ok(ObservationSeries {
        values,
        grid: series.grid,
        noise: NoiseMeta::Noisy {
            epsilon: delta,
            seed,
            delta: realized,
        },
    })
}

/// Outcome of the admissibility check.
#[derive(Debug, Clone, Copy)]
pub struct Admissibility {
    /// Attained minimum of the series.
    pub min_value: f64,
    /// Required lower bound `m_star / 2`.
    pub threshold: f64,
}

impl Admissibility {
    pub fn margin(&self) -> f64 {
        self.min_value - self.threshold
    }
}

/// Data entering the inversion must stay away from zero:
/// `min_n m[n] >= m_star / 2`. Failure is an error the inversion refuses to
/// proceed past.
pub fn check_admissible(series: &ObservationSeries, m_star: f64) -> Result<Admissibility> {
    if !(m_star > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lower observation bound m_star must be positive, got {m_star}"
        )));
    }
    let min_value = series.min_value();
    let threshold = 0.5 * m_star;
    if min_value >= threshold {
        Ok(Admissibility {
            min_value,
            threshold,
        })
    } else {
        Err(Error::Inadmissible {
            min: min_value,
            required: threshold,
        })
    }
}

/// Keeps every `factor`-th sample: `coarse[k] = fine[k * factor]`. The fine
/// step count must be divisible by `factor`. Noise metadata is carried over
/// unchanged; it describes the sample before downsampling, which is why the
/// data pipeline always adds noise after downsampling, at the measurement
/// times.
pub fn downsample(series: &ObservationSeries, factor: usize) -> Result<ObservationSeries> {
    if factor == 0 {
        return Err(Error::InvalidParameter(
            "downsampling factor must be positive".into(),
        ));
    }
    let n = series.grid.n_steps();
    if n % factor != 0 {
        return Err(Error::InvalidParameter(format!(
            "downsampling factor {factor} does not divide {n} steps"
        )));
    }
    let coarse_grid = TimeGrid::new(series.grid.t_end(), n / factor)?;
    let values = series
        .values
        .iter()
        .step_by(factor)
        .copied()
        .collect::<Vec<f64>>();
    Ok(ObservationSeries {
        values,
        grid: coarse_grid,
        noise: series.noise.clone(),
    })
}
