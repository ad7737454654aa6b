//! Flat key=value experiment configuration with defaults for every key.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::inverse::InverseConfig;

use super::{ProblemKind, ReferencePotential};

/// Full description of one experiment or study run.
///
/// Every field has a default; a config file only needs the keys it wants to
/// change. CLI flags override file values.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub potential: ReferencePotential,
    pub alpha: f64,
    pub t_end: f64,
    /// Coarse (inversion) grid steps.
    pub n_steps: usize,
    /// Coarse cells per side.
    pub n_cells: usize,
    /// Data generation refines time by this factor,
    pub fine_time_factor: usize,
    /// and space by this factor.
    pub fine_space_factor: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub inverse: InverseConfig,
    /// Noise realizations per study point in the noisy studies.
    pub study_seeds: usize,
    /// Cell counts swept by the mesh study.
    pub h_sweep: Vec<usize>,
    /// Step counts swept by the time step study.
    pub tau_sweep: Vec<usize>,
    /// Exponents i of tau_i = T / 2^i for the noise-coupled study.
    pub delta_exponents: Vec<u32>,
    /// Exponents i of tau_i = T / 2^i for the semi-convergence study.
    pub semiconv_exponents: Vec<u32>,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem: ProblemKind::OneD,
            potential: ReferencePotential::Q1,
            alpha: 0.5,
            t_end: 0.5,
            n_steps: 128,
            n_cells: 64,
            fine_time_factor: 5,
            fine_space_factor: 2,
            epsilon: 0.0,
            seed: 42,
            inverse: InverseConfig::default(),
            study_seeds: 5,
            h_sweep: vec![8, 16, 32, 64],
            tau_sweep: vec![16, 32, 64, 128, 256],
            delta_exponents: vec![3, 4, 5, 6, 7, 8, 9],
            semiconv_exponents: vec![3, 4, 5, 6, 7, 8, 9, 10, 11],
            out: PathBuf::from("out.csv"),
        }
    }
}

impl ExperimentConfig {
    /// Reads a config file: one `key = value` per line, `#` starts a
    /// comment, unknown keys are rejected.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{}:{}: expected 'key = value', got '{raw}'",
                    path.display(),
                    lineno + 1
                )));
            };
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "problem" => self.problem = value.parse()?,
            "potential" => self.potential = value.parse()?,
            "alpha" => self.alpha = parse_num(key, value)?,
            "t_end" => self.t_end = parse_num(key, value)?,
            "n_steps" => self.n_steps = parse_num(key, value)?,
            "n_cells" => self.n_cells = parse_num(key, value)?,
            "fine_time_factor" => self.fine_time_factor = parse_num(key, value)?,
            "fine_space_factor" => self.fine_space_factor = parse_num(key, value)?,
            "epsilon" => self.epsilon = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "c0" => self.inverse.c0 = parse_num(key, value)?,
            "max_iterations" => self.inverse.max_iterations = parse_num(key, value)?,
            "stop_tolerance" => self.inverse.stop_tolerance = parse_num(key, value)?,
            "p" => self.inverse.p = parse_num(key, value)?,
            "lambda" => self.inverse.lambda = parse_num(key, value)?,
            "study_seeds" => self.study_seeds = parse_num(key, value)?,
            "h_sweep" => self.h_sweep = parse_list(key, value)?,
            "tau_sweep" => self.tau_sweep = parse_list(key, value)?,
            "delta_exponents" => self.delta_exponents = parse_list(key, value)?,
            "semiconv_exponents" => self.semiconv_exponents = parse_list(key, value)?,
            "out" => self.out = PathBuf::from(value),
            other => {
                return Err(Error::Config(format!("unknown config key '{other}'")));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::Config(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.n_steps == 0 || self.n_cells == 0 {
            return Err(Error::Config(
                "n_steps and n_cells must be at least 1".into(),
            ));
        }
        if self.fine_time_factor == 0 || self.fine_space_factor == 0 {
            return Err(Error::Config("fine grid factors must be at least 1".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        if self.study_seeds == 0 {
            return Err(Error::Config("study_seeds must be at least 1".into()));
        }
        self.inverse
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse '{value}' for key '{key}'")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: std::result::Result<Vec<T>, _> = value
        .split(',')
        .map(|part| part.trim().parse::<T>())
        .collect();
    let items =
        items.map_err(|_| Error::Config(format!("cannot parse list '{value}' for key '{key}'")))?;
    if items.is_empty() {
        return Err(Error::Config(format!("empty list for key '{key}'")));
    }
    Ok(items)
}
