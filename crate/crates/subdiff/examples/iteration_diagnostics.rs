//! Per-iteration convergence of the fixed-point method in the plain and
//! exponentially weighted sequence norms.
//!
//! The contraction argument behind the iteration lives in the weighted
//! norm with a large rate (here `lambda = 25`): the weighted error decays
//! monotonically, while the plain-norm error may oscillate for small
//! fractional orders before settling at the discretization floor.
//!
//! ```bash
//! cargo run -p subdiff --example iteration_diagnostics
//! ```

use subdiff::experiment::{run_study, ExperimentConfig, StudyKind};

fn main() -> subdiff::Result<()> {
    for alpha in [0.3, 0.7] {
        let cfg = ExperimentConfig {
            alpha,
            n_steps: 64,
            n_cells: 64,
            epsilon: 0.0,
            ..ExperimentConfig::default()
        };
        let rows = run_study(StudyKind::Iter, &cfg)?;
        let plain: Vec<&subdiff::experiment::StudyRow> =
            rows.iter().filter(|r| r.kind == "iter").collect();
        let weighted: Vec<&subdiff::experiment::StudyRow> =
            rows.iter().filter(|r| r.kind == "iter-weighted").collect();
        println!("alpha = {alpha}: error against the reference potential");
        println!("  k    plain l2      weighted l2 (lambda=25)");
        for k in (0..plain.len()).step_by(2) {
            println!(
                "  {:2}   {:.4e}    {:.4e}",
                k, plain[k].error, weighted[k].error
            );
        }
        println!();
    }
    Ok(())
}
