//! Backward Euler convolution quadrature for the Caputo derivative, plus a
//! Mittag-Leffler evaluator used as an independent oracle for the
//! time-stepping schemes.

use crate::error::{Error, Result};

/// Convolution quadrature weights of the generating function `(1-s)^alpha`.
///
/// Invariants for `alpha` in (0,1): `w[0] = 1`, `w[j] < 0` for `j >= 1`, and
/// the partial sums are strictly positive and strictly decreasing.
#[derive(Debug, Clone)]
pub struct CqWeights {
    alpha: f64,
    weights: Vec<f64>,
    partial_sums: Vec<f64>,
}

impl CqWeights {
    /// Computes `w[0..=n]` by the multiplicative recurrence
    /// `w[0] = 1`, `w[j] = w[j-1] * (j - 1 - alpha) / j`, which avoids the
    /// overflow and cancellation of direct Gamma evaluations at large `j`.
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fractional order alpha must lie in (0,1), got {alpha}"
            )));
        }
        let mut weights = Vec::with_capacity(n + 1);
        let mut partial_sums = Vec::with_capacity(n + 1);
        weights.push(1.0);
        partial_sums.push(1.0);
        for j in 1..=n {
            let next = weights[j - 1] * ((j as f64 - 1.0 - alpha) / j as f64);
            weights.push(next);
            partial_sums.push(partial_sums[j - 1] + next);
        }
        Ok(CqWeights {
            alpha,
            weights,
            partial_sums,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Partial sum `s_n = w[0] + ... + w[n]`.
    pub fn partial_sum(&self, n: usize) -> f64 {
        self.partial_sums[n]
    }

    pub fn partial_sums(&self) -> &[f64] {
        &self.partial_sums
    }
}

/// Discrete Caputo derivative of a sampled function.
///
/// Given samples `phi[0..=N]` on a uniform grid with step `tau`, returns
/// `d[n] = tau^{-alpha} * sum_{j=0}^{n} w[j] * (phi[n-j] - phi[0])` for
/// `n = 1..=N` (index `n-1` of the returned vector). Subtracting `phi[0]`
/// term by term makes the operator annihilate constant sequences exactly.
pub fn cq_caputo(phi: &[f64], alpha: f64, tau: f64) -> Result<Vec<f64>> {
    if phi.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "discrete Caputo derivative needs at least two samples, got {}",
            phi.len()
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time step must be positive, got {tau}"
        )));
    }
    let n_steps = phi.len() - 1;
    let w = CqWeights::new(alpha, n_steps)?;
    let scale = tau.powf(-alpha);
    let mut out = Vec::with_capacity(n_steps);
    for n in 1..=n_steps {
        let mut acc = 0.0;
        for j in 0..=n {
            acc += w.weights[j] * (phi[n - j] - phi[0]);
        }
        out.push(scale * acc);
    }
    Ok(out)
}

/// Largest argument magnitude accepted by [`mittag_leffler`].
pub const MITTAG_LEFFLER_MAX_ARG: f64 = 50.0;

/// One-parameter Mittag-Leffler function `E_alpha(z)` for `alpha` in (0,1]
/// and `|z| <= 50`.
///
/// The power series `sum_k z^k / Gamma(alpha k + 1)` is summed with
/// compensated accumulation until the next term falls below `1e-14` in
/// relative magnitude. For negative arguments the alternating series can
/// cancel catastrophically in double precision; when the tracked
/// cancellation exceeds what the target accuracy allows, the value is
/// recovered from the completely monotone spectral representation
/// `E_alpha(-x) = sin(alpha*pi)/(alpha*pi) * Int_0^inf exp(-(u x)^{1/alpha})
/// / (u^2 + 2 u cos(alpha*pi) + 1) du` instead.
pub fn mittag_leffler(alpha: f64, z: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Mittag-Leffler order must lie in (0,1], got {alpha}"
        )));
    }
    if !z.is_finite() || z.abs() > MITTAG_LEFFLER_MAX_ARG {
        return Err(Error::OutOfRange(format!(
            "Mittag-Leffler argument {z} outside the supported window |z| <= {MITTAG_LEFFLER_MAX_ARG}"
        )));
    }
    if alpha == 1.0 {
        // E_1 is the exponential; evaluating it directly avoids the
        // cancellation of the alternating series at large negative z.
        return Ok(z.exp());
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    match series(alpha, z) {
        SeriesOutcome::Reliable(v) => Ok(v),
        SeriesOutcome::Cancelled => {
            debug_assert!(z < 0.0);
            Ok(spectral_negative(alpha, -z))
        }
        SeriesOutcome::Overflow => {
            if z < 0.0 {
                Ok(spectral_negative(alpha, -z))
            } else {
                Err(Error::OutOfRange(format!(
                    "Mittag-Leffler value overflows double precision for alpha={alpha}, z={z}"
                )))
            }
        }
    }
}

enum SeriesOutcome {
    Reliable(f64),
    Cancelled,
    Overflow,
}

fn series(alpha: f64, z: f64) -> SeriesOutcome {
    const MAX_TERMS: usize = 20_000;
    // Relative error of the compensated sum is about eps * sum|t| / |sum|;
    // beyond this ratio the series result is untrustworthy.
    const CANCELLATION_LIMIT: f64 = 1e4;

    let mut sum = 1.0;
    let mut comp = 0.0;
    let mut abs_sum = 1.0;
    let mut term = 1.0f64;
    let mut lg_prev = 0.0; // ln Gamma(alpha*0 + 1)
    for k in 1..=MAX_TERMS {
        let lg = libm::lgamma(alpha * k as f64 + 1.0);
        term *= z * (lg_prev - lg).exp();
        lg_prev = lg;
        if !term.is_finite() {
            return SeriesOutcome::Overflow;
        }
        // Kahan step.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        abs_sum += term.abs();
        if term.abs() <= 1e-14 * sum.abs().max(f64::MIN_POSITIVE) && k > 4 {
            break;
        }
        if k == MAX_TERMS {
            return SeriesOutcome::Cancelled;
        }
    }
    if !sum.is_finite() {
        return SeriesOutcome::Overflow;
    }
    if abs_sum > CANCELLATION_LIMIT * sum.abs() {
        return SeriesOutcome::Cancelled;
    }
    SeriesOutcome::Reliable(sum)
}

/// `E_alpha(-x)` for `x > 0`, `0 < alpha < 1`, via the spectral integral.
fn spectral_negative(alpha: f64, x: f64) -> f64 {
    let theta = alpha * std::f64::consts::PI;
    let (sin_t, cos_t) = theta.sin_cos();
    let integrand = |u: f64| -> f64 {
        let denom = u * (u + 2.0 * cos_t) + 1.0;
        (-((u * x).powf(1.0 / alpha))).exp() / denom
    };
    // Exponential cutoff: (u x)^{1/alpha} >= 45 kills the integrand.
    let mut upper = 45f64.powf(alpha) / x;
    // The denominator dips to sin^2(theta) near u = -cos(theta); bracket
    // that region with explicit panels so the quadrature cannot miss it.
    let spike = (-cos_t).max(0.0);
    let width = sin_t.max(1e-3);
    upper = upper.max(spike + 10.0 * width).max(2.0);
    let mut cuts = vec![0.0];
    if spike > 0.0 {
        let lo = (spike - 5.0 * width).max(0.0);
        let hi = (spike + 5.0 * width).min(upper);
        if lo > 0.0 {
            cuts.push(lo);
        }
        if hi > *cuts.last().unwrap() && hi < upper {
            cuts.push(hi);
        }
    }
    cuts.push(upper);
    let mut integral = 0.0;
    for pair in cuts.windows(2) {
        integral += adaptive_simpson(&integrand, pair[0], pair[1], 1e-13);
    }
    sin_t / (alpha * std::f64::consts::PI) * integral
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    if a >= b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fb = f(b);
    let fm = f(m);
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 48)
}
