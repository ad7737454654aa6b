//! Numerical solution of the semilinear subdiffusion equation and recovery
//! of a time-dependent potential from integral observations.
//!
//! The forward problem
//!
//! ```text
//! D_t^alpha u - div(a grad u) + q(t) u = f(u, x, t)   in Omega x (0,T]
//!                      a du/dnu = g                   on the boundary
//!                      u(0) = u0
//! ```
//!
//! (with `D_t^alpha` the Caputo derivative of order `alpha` in (0,1)) is
//! discretized by P1 finite elements in space and backward Euler
//! convolution quadrature in time. The inverse problem recovers `q(t)` from
//! the observation `m(t) = integral of u over Omega` by a projected
//! fixed-point iteration whose regularization comes from the discretization
//! itself.
//!
//! Module map:
//!
//! - [`cq`] — convolution quadrature weights, the discrete Caputo operator
//!   and a Mittag-Leffler oracle;
//! - [`fem`] — interval and structured triangle meshes, P1 assembly, L2
//!   projection and the integral functional;
//! - [`forward`] — the fully discrete time stepper;
//! - [`observation`] — observation series, seeded noise, admissibility and
//!   downsampling;
//! - [`inverse`] — the projected fixed-point reconstruction;
//! - [`metrics`] — plain and exponentially weighted sequence norms plus
//!   log-log rate fits;
//! - [`experiment`] — reference potentials, problem presets, data
//!   generation, study runners and CSV output.
//!
//! Runnable walkthroughs live in `examples/`; the `subdiff` binary exposes
//! the same pipelines as a small CLI.

pub mod cq;
pub mod error;
pub mod experiment;
pub mod fem;
pub mod forward;
pub mod inverse;
pub mod linalg;
pub mod metrics;
pub mod observation;

pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, ProblemKind, ReferencePotential};
pub use fem::{FemSystem, Mesh};
pub use forward::{solve_forward, PotentialGrid, ProblemSpec, TimeGrid, Trajectory};
pub use inverse::{reconstruct, InverseConfig, ReconstructionResult};
pub use observation::{observe, ObservationSeries};
