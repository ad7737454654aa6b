//! Solve the 2D forward problem on the unit square.
//!
//! Uses the product-cosine initial datum, whose integral over the square is
//! exactly 1, and prints the observation at a few times. The linear systems
//! are solved by Jacobi-preconditioned conjugate gradients.
//!
//! ```bash
//! cargo run -p subdiff --example forward_2d
//! ```

use subdiff::experiment::{ProblemKind, ReferencePotential};
use subdiff::forward::{solve_forward, PotentialGrid, TimeGrid};
use subdiff::observation::observe;
use subdiff::FemSystem;

fn main() -> subdiff::Result<()> {
    let alpha = 0.5;
    let t_end = 0.5;
    let n_steps = 64;
    let n = 16;

    let spec = ProblemKind::TwoD.problem_spec(alpha, t_end)?;
    let mesh = ProblemKind::TwoD.build_mesh(n)?;
    println!(
        "unit square: {} nodes, {} triangles, h = {:.4}",
        mesh.n_nodes(),
        mesh.n_elements(),
        mesh.h()
    );
    let system = FemSystem::build(mesh, spec.diffusion())?;
    let grid = TimeGrid::new(t_end, n_steps)?;
    let q = PotentialGrid::sample(
        &|t| ReferencePotential::Q1.value(t, t_end).unwrap(),
        &grid,
        3.0,
    )?;

    let trajectory = solve_forward(&spec, &system, &grid, &q)?;
    let series = observe(&trajectory, &system)?;
    println!(
        "m(0) = {:.6} (integral of u0 is 1 exactly)",
        series.values()[0]
    );
    for n in [n_steps / 4, n_steps / 2, n_steps] {
        println!("  m(t={:.4}) = {:.6}", grid.time(n), series.values()[n]);
    }
    Ok(())
}
