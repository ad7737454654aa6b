//! Reduced mesh-, time-step- and noise-refinement studies with fitted
//! log-log rates.
//!
//! Expected orders: 2 in the mesh size, at least 1/2 in the time step, and
//! about 1/2 in the noise level under the coupled a priori parameter
//! choice.
//!
//! ```bash
//! cargo run -p subdiff --example convergence_rates
//! ```

use std::collections::BTreeMap;

use subdiff::experiment::{run_study, ExperimentConfig, StudyKind};
use subdiff::metrics::fit_rate;

fn main() -> subdiff::Result<()> {
    let cfg = ExperimentConfig {
        h_sweep: vec![8, 16, 32],
        tau_sweep: vec![16, 32, 64, 128],
        delta_exponents: vec![3, 4, 5, 6, 7],
        study_seeds: 3,
        ..ExperimentConfig::default()
    };

    let rows = run_study(StudyKind::H, &cfg)?;
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    println!("mesh study (tau = T/1000):");
    for row in &rows {
        println!(
            "  h={:.4e}  error={:.4e}  sweeps={}",
            row.h, row.error, row.iters
        );
    }
    println!("  fitted rate: {:.2}\n", fit_rate(&hs, &errs)?);

    let rows = run_study(StudyKind::Tau, &cfg)?;
    let taus: Vec<f64> = rows.iter().map(|r| r.tau).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    println!("time step study (h = 1e-2):");
    for row in &rows {
        println!(
            "  tau={:.4e}  error={:.4e}  sweeps={}",
            row.tau, row.error, row.iters
        );
    }
    println!("  fitted rate: {:.2}\n", fit_rate(&taus, &errs)?);

    let rows = run_study(StudyKind::Delta, &cfg)?;
    let mut by_level: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    for row in &rows {
        by_level
            .entry(row.param.to_bits())
            .or_insert((row.param, Vec::new()))
            .1
            .push(row.error);
    }
    println!("noise study (tau, h, delta coupled):");
    let mut deltas = Vec::new();
    let mut means = Vec::new();
    for (_, (delta, errs)) in by_level {
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        println!("  delta={delta:.4e}  mean error={mean:.4e}");
        deltas.push(delta);
        means.push(mean);
    }
    println!("  fitted rate: {:.2}", fit_rate(&deltas, &means)?);
    Ok(())
}
