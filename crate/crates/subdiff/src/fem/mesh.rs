//! Interval and structured unit-square meshes.

use crate::error::{Error, Result};

/// Element connectivity, by spatial dimension.
#[derive(Debug, Clone)]
pub enum Cells {
    /// 1D segments, node index pairs.
    Segments(Vec<[usize; 2]>),
    /// 2D triangles, counterclockwise node index triples.
    Triangles(Vec<[usize; 3]>),
}

/// Boundary facets, by spatial dimension.
#[derive(Debug, Clone)]
pub enum BoundaryFacets {
    /// Endpoint node indices of an interval.
    Points(Vec<usize>),
    /// Boundary edges of a 2D mesh.
    Edges(Vec<[usize; 2]>),
}

/// Simplicial mesh of the unit interval or the unit square.
///
/// Node coordinates are stored as `[x, y]` with `y = 0` in 1D. Element
/// measures are positive by construction and sum to the domain measure.
#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    nodes: Vec<[f64; 2]>,
    cells: Cells,
    boundary: BoundaryFacets,
    h: f64,
}

impl Mesh {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> [f64; 2] {
        self.nodes[i]
    }

    pub fn cells(&self) -> &Cells {
        &self.cells
    }

    pub fn boundary(&self) -> &BoundaryFacets {
        &self.boundary
    }

    pub fn n_elements(&self) -> usize {
        match &self.cells {
            Cells::Segments(s) => s.len(),
            Cells::Triangles(t) => t.len(),
        }
    }

    /// Mesh size: the maximal element diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Length (1D) or area (2D) of element `e`.
    pub fn element_measure(&self, e: usize) -> f64 {
        match &self.cells {
            Cells::Segments(segs) => {
                let [i, j] = segs[e];
                self.nodes[j][0] - self.nodes[i][0]
            }
            Cells::Triangles(tris) => {
                let [i, j, k] = tris[e];
                triangle_area(self.nodes[i], self.nodes[j], self.nodes[k])
            }
        }
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.n_elements())
            .map(|e| self.element_measure(e))
            .sum()
    }

    /// Centroid of element `e`.
    pub fn element_centroid(&self, e: usize) -> [f64; 2] {
        match &self.cells {
            Cells::Segments(segs) => {
                let [i, j] = segs[e];
                [0.5 * (self.nodes[i][0] + self.nodes[j][0]), 0.0]
            }
            Cells::Triangles(tris) => {
                let [i, j, k] = tris[e];
                let (a, b, c) = (self.nodes[i], self.nodes[j], self.nodes[k]);
                [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
            }
        }
    }
}

pub(crate) fn triangle_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Uniform partition of the interval (0,1) into `n_cells` segments.
pub fn build_interval_mesh(n_cells: usize) -> Result<Mesh> {
    if n_cells == 0 {
        return Err(Error::InvalidParameter(
            "interval mesh needs at least one cell".into(),
        ));
    }
    let h = 1.0 / n_cells as f64;
    let nodes: Vec<[f64; 2]> = (0..=n_cells).map(|i| [i as f64 * h, 0.0]).collect();
    let cells: Vec<[usize; 2]> = (0..n_cells).map(|i| [i, i + 1]).collect();
    Ok(Mesh {
        dim: 1,
        nodes,
        cells: Cells::Segments(cells),
        boundary: BoundaryFacets::Points(vec![0, n_cells]),
        h,
    })
}

/// Structured triangulation of the unit square: `n x n` cells, each split
/// into two triangles along the same diagonal direction. `(n+1)^2` nodes,
/// `2 n^2` triangles, mesh size `sqrt(2)/n`.
pub fn build_unit_square_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "unit square mesh needs at least one cell per side".into(),
        ));
    }
    let step = 1.0 / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            nodes.push([i as f64 * step, j as f64 * step]);
        }
    }
    let mut tris = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = idx(i, j);
            let v10 = idx(i + 1, j);
            let v01 = idx(i, j + 1);
            let v11 = idx(i + 1, j + 1);
            tris.push([v00, v10, v11]);
            tris.push([v00, v11, v01]);
        }
    }
    let mut edges = Vec::with_capacity(4 * n);
    for i in 0..n {
        edges.push([idx(i, 0), idx(i + 1, 0)]);
        edges.push([idx(i, n), idx(i + 1, n)]);
        edges.push([idx(0, i), idx(0, i + 1)]);
        edges.push([idx(n, i), idx(n, i + 1)]);
    }
    Ok(Mesh {
        dim: 2,
        nodes,
        cells: Cells::Triangles(tris),
        boundary: BoundaryFacets::Edges(edges),
        h: std::f64::consts::SQRT_2 / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_single_cell() {
        let mesh = build_interval_mesh(1).unwrap();
        assert_eq!(mesh.n_nodes(), 2);
        assert_eq!(mesh.n_elements(), 1);
        assert_eq!(mesh.h(), 1.0);
        assert_eq!(mesh.node(0)[0], 0.0);
        assert_eq!(mesh.node(1)[0], 1.0);
    }

    #[test]
    fn interval_two_cells() {
        let mesh = build_interval_mesh(2).unwrap();
        assert_eq!(mesh.n_nodes(), 3);
        assert_eq!(mesh.n_elements(), 2);
        assert_eq!(mesh.h(), 0.5);
        assert_eq!(mesh.node(1)[0], 0.5);
    }

    #[test]
    fn interval_measures_sum_to_one() {
        let mesh = build_interval_mesh(100).unwrap();
        assert_eq!(mesh.n_nodes(), 101);
        assert!((mesh.total_measure() - 1.0).abs() < 1e-12);
        for e in 0..mesh.n_elements() {
            assert!(mesh.element_measure(e) > 0.0);
        }
    }

    #[test]
    fn interval_rejects_zero_cells() {
        assert!(build_interval_mesh(0).is_err());
    }

    #[test]
    fn square_single_cell() {
        let mesh = build_unit_square_mesh(1).unwrap();
        assert_eq!(mesh.n_nodes(), 4);
        assert_eq!(mesh.n_elements(), 2);
        for e in 0..2 {
            assert!((mesh.element_measure(e) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn square_counts_and_area() {
        let mesh = build_unit_square_mesh(4).unwrap();
        assert_eq!(mesh.n_nodes(), 25);
        assert_eq!(mesh.n_elements(), 32);
        assert!((mesh.total_measure() - 1.0).abs() < 1e-12);
        assert!((mesh.h() - std::f64::consts::SQRT_2 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn square_boundary_edges() {
        let mesh = build_unit_square_mesh(8).unwrap();
        let BoundaryFacets::Edges(edges) = mesh.boundary() else {
            panic!("2d mesh must carry edge facets");
        };
        assert_eq!(edges.len(), 32);
        let total: f64 = edges
            .iter()
            .map(|&[p, q]| {
                let (a, b) = (mesh.node(p), mesh.node(q));
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            })
            .sum();
        assert!((total - 4.0).abs() < 1e-12);
        // Each edge appears exactly once.
        let mut seen = std::collections::BTreeSet::new();
        for &[p, q] in edges {
            assert!(seen.insert((p.min(q), p.max(q))));
        }
    }

    #[test]
    fn square_rejects_zero_cells() {
        assert!(build_unit_square_mesh(0).is_err());
    }

    #[test]
    fn triangles_positively_oriented() {
        let mesh = build_unit_square_mesh(3).unwrap();
        for e in 0..mesh.n_elements() {
            assert!(mesh.element_measure(e) > 0.0);
        }
    }
}
