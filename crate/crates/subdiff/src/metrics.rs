//! Discrete sequence norms (plain and exponentially weighted), the
//! reconstruction error, and log-log rate fitting.

use crate::error::{Error, Result};
use crate::forward::{PotentialGrid, TimeGrid};

/// Parameters of the tau-scaled discrete norm
/// `||v||^p = tau * sum_n (e^{-lambda t_n} |v_n|)^p` (max-form for
/// `p = infinity`). `lambda = 0` recovers the plain norm. The tau factor
/// makes values comparable across grids with different step counts.
#[derive(Debug, Clone, Copy)]
pub struct NormSpec {
    pub p: f64,
    pub lambda: f64,
    pub tau: f64,
}

impl NormSpec {
    pub fn plain(p: f64, tau: f64) -> Self {
        NormSpec {
            p,
            lambda: 0.0,
            tau,
        }
    }

    pub fn weighted(p: f64, lambda: f64, tau: f64) -> Self {
        NormSpec { p, lambda, tau }
    }

    fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "norm exponent must satisfy p >= 1, got {}",
                self.p
            )));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "norm weight rate must be nonnegative, got {}",
                self.lambda
            )));
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "norm time step must be positive, got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

/// Norm of the sequence `v[1..=N]` (slice index `i` holds `v_{i+1}`, so
/// `t = (i+1) tau`).
pub fn lp_seq_norm(v: &[f64], spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    if v.is_empty() {
        return Err(Error::InvalidInput("norm of an empty sequence".into()));
    }
    if spec.p.is_infinite() {
        let mut worst = 0.0f64;
        for (i, &vi) in v.iter().enumerate() {
            let t = (i + 1) as f64 * spec.tau;
            worst = worst.max((-spec.lambda * t).exp() * vi.abs());
        }
        Ok(worst)
    } else {
        let mut acc = 0.0f64;
        for (i, &vi) in v.iter().enumerate() {
            let t = (i + 1) as f64 * spec.tau;
            acc += ((-spec.lambda * t).exp() * vi.abs()).powf(spec.p);
        }
        Ok((spec.tau * acc).powf(1.0 / spec.p))
    }
}

/// `||q_true(t_n) - q_star[n]||` in the plain tau-scaled p-norm.
pub fn reconstruction_error(
    q_star: &PotentialGrid,
    q_true: &dyn Fn(f64) -> f64,
    grid: &TimeGrid,
    p: f64,
) -> Result<f64> {
    if q_star.len() != grid.n_steps() {
        return Err(Error::DimensionMismatch(format!(
            "reconstruction has {} entries but the grid has {} steps",
            q_star.len(),
            grid.n_steps()
        )));
    }
    let diffs: Vec<f64> = (1..=grid.n_steps())
        .map(|n| q_true(grid.time(n)) - q_star.at_step(n))
        .collect();
    lp_seq_norm(&diffs, &NormSpec::plain(p, grid.tau()))
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_rate(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "rate fit needs matching lengths, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidInput(
            "rate fit needs at least two points".into(),
        ));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(
            "rate fit needs strictly positive finite data".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        return Err(Error::InvalidInput(
            "rate fit needs at least two distinct abscissae".into(),
        ));
    }
    Ok(num / den)
}
