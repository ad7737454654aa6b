//! P1 finite element assembly on interval and unit-square meshes: mass and
//! stiffness matrices, boundary loads, L2 projection and the integral
//! functional `c -> integral of u_h`.

mod mesh;

pub use mesh::{build_interval_mesh, build_unit_square_mesh, BoundaryFacets, Cells, Mesh};

use crate::error::{Error, Result};
use crate::linalg::{pcg_jacobi, solve_tridiagonal, CsrMatrix, DokMatrix};

/// Exact P1 mass matrix: per segment of length `L` the local block is
/// `L/6 * [[2,1],[1,2]]`, per triangle of area `A` it is
/// `A/12 * [[2,1,1],[1,2,1],[1,1,2]]`.
pub fn assemble_mass(mesh: &Mesh) -> CsrMatrix {
    let mut dok = DokMatrix::new(mesh.n_nodes());
    match mesh.cells() {
        Cells::Segments(segs) => {
            for (e, &[i, j]) in segs.iter().enumerate() {
                let len = mesh.element_measure(e);
                dok.add(i, i, len / 3.0);
                dok.add(j, j, len / 3.0);
                dok.add(i, j, len / 6.0);
                dok.add(j, i, len / 6.0);
            }
        }
        Cells::Triangles(tris) => {
            for (e, tri) in tris.iter().enumerate() {
                let area = mesh.element_measure(e);
                for a in 0..3 {
                    for b in 0..3 {
                        let v = if a == b { area / 6.0 } else { area / 12.0 };
                        dok.add(tri[a], tri[b], v);
                    }
                }
            }
        }
    }
    dok.to_csr()
}

/// Stiffness matrix with variable coefficient `a(x)`, evaluated at element
/// centroids (midpoint rule — exact for constant coefficients).
pub fn assemble_stiffness(mesh: &Mesh, coeff: &dyn Fn(&[f64; 2]) -> f64) -> Result<CsrMatrix> {
    let mut dok = DokMatrix::new(mesh.n_nodes());
    match mesh.cells() {
        Cells::Segments(segs) => {
            for (e, &[i, j]) in segs.iter().enumerate() {
                let len = mesh.element_measure(e);
                let a = eval_coeff(coeff, &mesh.element_centroid(e))?;
                let w = a / len;
                dok.add(i, i, w);
                dok.add(j, j, w);
                dok.add(i, j, -w);
                dok.add(j, i, -w);
            }
        }
        Cells::Triangles(tris) => {
            for (e, tri) in tris.iter().enumerate() {
                let area = mesh.element_measure(e);
                let a = eval_coeff(coeff, &mesh.element_centroid(e))?;
                let p: Vec<[f64; 2]> = tri.iter().map(|&v| mesh.node(v)).collect();
                // Barycentric gradients: grad phi_l = (b_l, c_l) / (2A).
                let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
                let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
                let scale = a / (4.0 * area);
                for l in 0..3 {
                    for m in 0..3 {
                        dok.add(tri[l], tri[m], scale * (b[l] * b[m] + c[l] * c[m]));
                    }
                }
            }
        }
    }
    Ok(dok.to_csr())
}

fn eval_coeff(coeff: &dyn Fn(&[f64; 2]) -> f64, x: &[f64; 2]) -> Result<f64> {
    let a = coeff(x);
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidCoefficient(format!(
            "diffusion coefficient must be positive, got {a} at ({}, {})",
            x[0], x[1]
        )));
    }
    Ok(a)
}

/// Boundary load vector for Neumann data `g` at a fixed time: point
/// evaluation at interval endpoints in 1D, per-edge trapezoid rule in 2D.
pub fn assemble_boundary_load(mesh: &Mesh, g: &dyn Fn(&[f64; 2]) -> f64) -> Vec<f64> {
    let mut load = vec![0.0; mesh.n_nodes()];
    match mesh.boundary() {
        BoundaryFacets::Points(points) => {
            for &p in points {
                load[p] += g(&mesh.node(p));
            }
        }
        BoundaryFacets::Edges(edges) => {
            for &[p, q] in edges {
                let (a, b) = (mesh.node(p), mesh.node(q));
                let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                load[p] += 0.5 * len * g(&a);
                load[q] += 0.5 * len * g(&b);
            }
        }
    }
    load
}

/// Assembled finite element system on a fixed mesh.
///
/// The mass and stiffness matrices share one sparsity pattern (both are
/// assembled over the same element adjacency), which lets the time stepper
/// combine them value-wise. `int_vec = M * ones` represents the functional
/// `c -> integral of u_h` exactly.
#[derive(Debug, Clone)]
pub struct FemSystem {
    mesh: Mesh,
    mass: CsrMatrix,
    stiffness: CsrMatrix,
    int_vec: Vec<f64>,
}

impl FemSystem {
    pub fn build(mesh: Mesh, coeff: &dyn Fn(&[f64; 2]) -> f64) -> Result<Self> {
        let mass = assemble_mass(&mesh);
        let stiffness = assemble_stiffness(&mesh, coeff)?;
        debug_assert!(mass.same_pattern(&stiffness));
        let int_vec = mass.matvec(&vec![1.0; mesh.n_nodes()]);
        Ok(FemSystem {
            mesh,
            mass,
            stiffness,
            int_vec,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn int_vec(&self) -> &[f64] {
        &self.int_vec
    }

    pub fn n_dofs(&self) -> usize {
        self.mesh.n_nodes()
    }

    /// `integral of u_h` for the dof vector `c` (exact for P1 functions).
    pub fn integrate_dofs(&self, c: &[f64]) -> Result<f64> {
        if c.len() != self.n_dofs() {
            return Err(Error::DimensionMismatch(format!(
                "integrate_dofs: {} dofs vs vector length {}",
                self.n_dofs(),
                c.len()
            )));
        }
        Ok(crate::linalg::dot(&self.int_vec, c))
    }

    /// L2 projection of `v` onto the P1 space: solves `M c = b` with the
    /// load assembled by per-element quadrature exact for quadratics
    /// (Simpson in 1D, edge-midpoint rule in 2D).
    pub fn l2_project(&self, v: &dyn Fn(&[f64; 2]) -> f64) -> Result<Vec<f64>> {
        let b = self.projection_load(v);
        self.solve_spd(&self.mass, &b, None, 1e-12)
    }

    /// Quadrature load `b_i ~ integral of v * phi_i`.
    pub fn projection_load(&self, v: &dyn Fn(&[f64; 2]) -> f64) -> Vec<f64> {
        let mesh = &self.mesh;
        let mut b = vec![0.0; mesh.n_nodes()];
        match mesh.cells() {
            Cells::Segments(segs) => {
                for (e, &[i, j]) in segs.iter().enumerate() {
                    let len = mesh.element_measure(e);
                    let vi = v(&mesh.node(i));
                    let vj = v(&mesh.node(j));
                    let vm = v(&mesh.element_centroid(e));
                    b[i] += len / 6.0 * (vi + 2.0 * vm);
                    b[j] += len / 6.0 * (2.0 * vm + vj);
                }
            }
            Cells::Triangles(tris) => {
                for (e, tri) in tris.iter().enumerate() {
                    let area = mesh.element_measure(e);
                    let p: Vec<[f64; 2]> = tri.iter().map(|&n| mesh.node(n)).collect();
                    let mid = |a: [f64; 2], c: [f64; 2]| [(a[0] + c[0]) * 0.5, (a[1] + c[1]) * 0.5];
                    let v01 = v(&mid(p[0], p[1]));
                    let v12 = v(&mid(p[1], p[2]));
                    let v20 = v(&mid(p[2], p[0]));
                    b[tri[0]] += area / 6.0 * (v01 + v20);
                    b[tri[1]] += area / 6.0 * (v01 + v12);
                    b[tri[2]] += area / 6.0 * (v12 + v20);
                }
            }
        }
        b
    }

    /// Quadrature integral of `v` (same rule as the projection load).
    pub fn quadrature_integral(&self, v: &dyn Fn(&[f64; 2]) -> f64) -> f64 {
        self.projection_load(v).iter().sum()
    }

    /// Solves an SPD system sharing this system's sparsity pattern:
    /// direct tridiagonal factorization in 1D, Jacobi-preconditioned CG in
    /// 2D (capped at `10 * n_dofs` iterations).
    pub fn solve_spd(
        &self,
        matrix: &CsrMatrix,
        rhs: &[f64],
        warm_start: Option<&[f64]>,
        rel_tol: f64,
    ) -> Result<Vec<f64>> {
        match self.mesh.dim() {
            1 => solve_tridiagonal(matrix, rhs),
            _ => {
                let zero;
                let start = match warm_start {
                    Some(x) => x,
                    None => {
                        zero = vec![0.0; matrix.size()];
                        &zero
                    }
                };
                let out = pcg_jacobi(matrix, rhs, start, rel_tol, 10 * matrix.size())?;
                Ok(out.solution)
            }
        }
    }
}
