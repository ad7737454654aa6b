//! CSV persistence: observation series, reconstructions, run summaries and
//! study tables. All floats are written with 17 significant digits, `.`
//! decimal separator and LF line endings, so files round-trip exactly and
//! reruns are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::forward::{PotentialGrid, TimeGrid};
use crate::observation::{NoiseMeta, ObservationSeries};

use super::studies::StudyRow;

/// 17 significant digits, enough to reproduce any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

/// Writes `n,t,m` (exact data) or `n,t,m_delta` (noisy data), one row per
/// grid point including `t = 0`.
pub fn write_observation_csv(path: &Path, series: &ObservationSeries) -> Result<()> {
    let header = match series.noise() {
        NoiseMeta::Exact => "n,t,m",
        NoiseMeta::Noisy { .. } => "n,t,m_delta",
    };
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for (n, value) in series.values().iter().enumerate() {
        let t = series.grid().time(n);
        writeln!(out, "{n},{},{}", fmt_f64(t), fmt_f64(*value)).expect("string write");
    }
    write_atomic(path, &out)
}

/// Reads an observation CSV accepting either header form.
pub fn read_observation_csv(path: &Path, t_end: f64) -> Result<ObservationSeries> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: empty file", path.display())))?;
    if header != "n,t,m" && header != "n,t,m_delta" {
        return Err(Error::Config(format!(
            "{}: unexpected header '{header}'",
            path.display()
        )));
    }
    let mut values = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Config(format!(
                "{}:{}: expected 3 fields",
                path.display(),
                idx + 2
            )));
        }
        let n: usize = fields[0]
            .parse()
            .map_err(|_| Error::Config(format!("{}:{}: bad index", path.display(), idx + 2)))?;
        if n != values.len() {
            return Err(Error::Config(format!(
                "{}:{}: rows out of order",
                path.display(),
                idx + 2
            )));
        }
        let value: f64 = fields[2]
            .parse()
            .map_err(|_| Error::Config(format!("{}:{}: bad value", path.display(), idx + 2)))?;
        values.push(value);
    }
    if values.len() < 2 {
        return Err(Error::Config(format!(
            "{}: needs at least two rows",
            path.display()
        )));
    }
    let grid = TimeGrid::new(t_end, values.len() - 1)?;
    ObservationSeries::exact(values, grid)
}

/// Writes `n,t,q_true,q_star`, one row per time step `n = 1..=N`.
pub fn write_reconstruction_csv(
    path: &Path,
    grid: &TimeGrid,
    q_true: &dyn Fn(f64) -> f64,
    q_star: &PotentialGrid,
) -> Result<()> {
    let mut out = String::from("n,t,q_true,q_star\n");
    for n in 1..=grid.n_steps() {
        let t = grid.time(n);
        writeln!(
            out,
            "{n},{},{},{}",
            fmt_f64(t),
            fmt_f64(q_true(t)),
            fmt_f64(q_star.at_step(n))
        )
        .expect("string write");
    }
    write_atomic(path, &out)
}

/// Sidecar summary of one inversion run.
pub struct RunSummary {
    pub alpha: f64,
    pub n_steps: usize,
    pub h: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub iterations: usize,
    pub final_error: f64,
}

pub fn write_summary_csv(path: &Path, summary: &RunSummary) -> Result<()> {
    let mut out = String::from("alpha,n_steps,h,epsilon,delta,iterations,final_error\n");
    writeln!(
        out,
        "{},{},{},{},{},{},{}",
        fmt_f64(summary.alpha),
        summary.n_steps,
        fmt_f64(summary.h),
        fmt_f64(summary.epsilon),
        fmt_f64(summary.delta),
        summary.iterations,
        fmt_f64(summary.final_error)
    )
    .expect("string write");
    write_atomic(path, &out)
}

/// Writes study rows as `kind,param,h,tau,delta,error,iters,seconds`.
///
/// The seconds column is written from the row (always zero from the
/// runners: per-point wall time goes to stderr so that study CSVs stay
/// byte-reproducible from config + seed).
pub fn write_study_csv(path: &Path, rows: &[StudyRow]) -> Result<()> {
    let mut out = String::from("kind,param,h,tau,delta,error,iters,seconds\n");
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.kind,
            fmt_f64(row.param),
            fmt_f64(row.h),
            fmt_f64(row.tau),
            fmt_f64(row.delta),
            fmt_f64(row.error),
            row.iters,
            fmt_f64(row.seconds)
        )
        .expect("string write");
    }
    write_atomic(path, &out)
}

/// `<stem>_suffix.csv` next to `path`.
pub fn sibling_path(path: &Path, suffix: &str) -> std::path::PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let mut sibling = path.to_path_buf();
    sibling.set_file_name(format!("{stem}_{suffix}.csv"));
    sibling
}
