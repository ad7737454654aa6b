//! Sparse storage and linear solvers backing the finite element systems.
//!
//! Assembly accumulates into a dictionary-of-keys map and is converted to
//! compressed sparse row form for solves. Two solvers are provided for the
//! symmetric positive definite systems that arise: a direct tridiagonal
//! factorization (1D meshes) and Jacobi-preconditioned conjugate gradients
//! (2D meshes).

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Dictionary-of-keys accumulator used during assembly.
#[derive(Debug, Clone)]
pub struct DokMatrix {
    size: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl DokMatrix {
    pub fn new(size: usize) -> Self {
        DokMatrix {
            size,
            entries: BTreeMap::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Accumulates `value` at `(row, col)`.
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.size && col < self.size);
        *self.entries.entry((row, col)).or_insert(0.0) += value;
    }

    /// Converts to CSR. Entry order is deterministic (row-major, sorted
    /// columns), so repeated assemblies produce identical matrices.
    pub fn to_csr(&self) -> CsrMatrix {
        let nnz = self.entries.len();
        let mut row_ptr = vec![0usize; self.size + 1];
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for (&(row, col), &value) in &self.entries {
            row_ptr[row + 1] += 1;
            cols.push(col);
            vals.push(value);
        }
        for i in 0..self.size {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            size: self.size,
            row_ptr,
            cols,
            vals,
        }
    }
}

/// Compressed sparse row matrix (square).
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    size: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.vals
    }

    /// True when `other` has the identical sparsity pattern.
    pub fn same_pattern(&self, other: &CsrMatrix) -> bool {
        self.size == other.size && self.row_ptr == other.row_ptr && self.cols == other.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.cols[lo..hi].binary_search(&col) {
            Ok(k) => self.vals[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.size);
        debug_assert_eq!(y.len(), self.size);
        for (row, out) in y.iter_mut().enumerate() {
            let lo = self.row_ptr[row];
            let hi = self.row_ptr[row + 1];
            let mut acc = 0.0;
            for k in lo..hi {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.size];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.size).map(|i| self.get(i, i)).collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for row in 0..self.size {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                let col = self.cols[k];
                if (self.vals[k] - self.get(col, row)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Direct solve of a tridiagonal system given in CSR form (Thomas algorithm).
///
/// Any entry outside the three central bands must be absent or zero.
pub fn solve_tridiagonal(matrix: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = matrix.size();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "tridiagonal solve: matrix {n}x{n} vs rhs length {}",
            rhs.len()
        )));
    }
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    for row in 0..n {
        for k in matrix.row_ptr[row]..matrix.row_ptr[row + 1] {
            let col = matrix.cols[k];
            let v = matrix.vals[k];
            if col + 1 == row {
                sub[row] = v;
            } else if col == row {
                diag[row] = v;
            } else if col == row + 1 {
                sup[row] = v;
            } else if v != 0.0 {
                return Err(Error::Solver {
                    step: None,
                    detail: format!("matrix is not tridiagonal: nonzero at ({row}, {col})"),
                });
            }
        }
    }
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 {
        return Err(Error::Solver {
            step: None,
            detail: "zero pivot in tridiagonal factorization".into(),
        });
    }
    c[0] = sup[0] / piv;
    x[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - sub[i] * c[i - 1];
        if piv == 0.0 {
            return Err(Error::Solver {
                step: None,
                detail: format!("zero pivot at row {i} in tridiagonal factorization"),
            });
        }
        c[i] = sup[i] / piv;
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Result of a conjugate gradient solve.
#[derive(Debug, Clone)]
pub struct PcgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for SPD systems.
///
/// Stops when the 2-norm residual drops below `rel_tol * ||rhs||`, errors if
/// `max_iterations` is exhausted first.
pub fn pcg_jacobi(
    matrix: &CsrMatrix,
    rhs: &[f64],
    start: &[f64],
    rel_tol: f64,
    max_iterations: usize,
) -> Result<PcgOutcome> {
    let n = matrix.size();
    if rhs.len() != n || start.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "pcg: matrix {n}x{n} vs rhs {} / start {}",
            rhs.len(),
            start.len()
        )));
    }
    let b_norm = norm2(rhs);
    if b_norm == 0.0 {
        return Ok(PcgOutcome {
            solution: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let diag = matrix.diagonal();
    let mut inv_diag = vec![0.0; n];
    for i in 0..n {
        if diag[i] <= 0.0 {
            return Err(Error::Solver {
                step: None,
                detail: format!("non-positive diagonal entry {:.3e} at row {i}", diag[i]),
            });
        }
        inv_diag[i] = 1.0 / diag[i];
    }

    let mut x = start.to_vec();
    let mut r = rhs.to_vec();
    let mut ax = vec![0.0; n];
    matrix.matvec_into(&x, &mut ax);
    axpy(-1.0, &ax, &mut r);

    let tol = rel_tol * b_norm;
    let mut res = norm2(&r);
    if res <= tol {
        return Ok(PcgOutcome {
            solution: x,
            iterations: 0,
            relative_residual: res / b_norm,
        });
    }

    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for iter in 1..=max_iterations {
        matrix.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::Solver {
                step: None,
                detail: format!("conjugate gradients broke down (p·Ap = {pap:.3e})"),
            });
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        res = norm2(&r);
        if res <= tol {
            return Ok(PcgOutcome {
                solution: x,
                iterations: iter,
                relative_residual: res / b_norm,
            });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rz = rz_next;
    }
    Err(Error::Solver {
        step: None,
        detail: format!(
            "conjugate gradients did not reach tolerance {rel_tol:.1e} in {max_iterations} iterations (residual {:.3e})",
            res / b_norm
        ),
    })
}
