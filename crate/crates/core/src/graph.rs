//! Undirected communication topology and its matrices.
//!
//! Edges are canonicalized on construction: each pair is stored with the
//! smaller index first and the list is sorted. That order is the column order
//! of the incidence matrix and of every per-edge quantity elsewhere in the
//! crate (desired distances, edge weights, normalized errors).

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::matrix::AgentMatrix;

/// Relative singular-value cutoff used by [`Graph::is_rigid`] callers that
/// have no better choice.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// A neighbour of some node together with the canonical index of the edge
/// that connects them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub node: usize,
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<Neighbor>>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<GraphRepr> for Graph {
    type Error = GraphError;

    fn try_from(r: GraphRepr) -> Result<Self, Self::Error> {
        Graph::from_edges(r.n, r.edges)
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr {
            n: g.n,
            edges: g.edges,
        }
    }
}

impl Graph {
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut canon = Vec::new();
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(GraphError::OutOfRange { i, j, n });
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            canon.push((i.min(j), i.max(j)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }

        let mut adjacency = vec![Vec::new(); n];
        for (k, &(i, j)) in canon.iter().enumerate() {
            adjacency[i].push(Neighbor { node: j, edge: k });
            adjacency[j].push(Neighbor { node: i, edge: k });
        }
        for list in &mut adjacency {
            list.sort_unstable_by_key(|nb| nb.node);
        }
        Ok(Self {
            n,
            edges: canon,
            adjacency,
        })
    }

    pub fn complete(n: usize) -> Result<Self, GraphError> {
        Self::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    /// Ring `0 - 1 - ... - (n-1) - 0`. Requires `n >= 3`; smaller `n` yields a path.
    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Self::path(n);
        }
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn path(n: usize) -> Result<Self, GraphError> {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i)))
    }

    /// Nodes are connected when their positions are within `radius` (inclusive).
    pub fn disk(positions: &AgentMatrix, radius: f64) -> Result<Self, GraphError> {
        let n = positions.n();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if positions.distance(i, j) <= radius {
                    edges.push((i, j));
                }
            }
        }
        Self::from_edges(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].iter().any(|nb| nb.node == j)
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    pub fn degree_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.n,
            (0..self.n).map(|i| self.degree(i) as f64),
        ))
    }

    /// `L = E - A`, assembled from integer counts so row sums are exactly zero.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut counts = vec![0i64; self.n * self.n];
        for &(i, j) in &self.edges {
            counts[i * self.n + i] += 1;
            counts[j * self.n + j] += 1;
            counts[i * self.n + j] -= 1;
            counts[j * self.n + i] -= 1;
        }
        DMatrix::from_fn(self.n, self.n, |r, c| counts[r * self.n + c] as f64)
    }

    /// `n × M` incidence matrix; column `k` has `+1` at the smaller endpoint
    /// of edge `k` and `-1` at the larger one.
    pub fn incidence(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.n, self.edges.len());
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            b[(i, k)] = 1.0;
            b[(j, k)] = -1.0;
        }
        b
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for nb in &self.adjacency[v] {
                if !seen[nb.node] {
                    seen[nb.node] = true;
                    count += 1;
                    queue.push_back(nb.node);
                }
            }
        }
        count == self.n
    }

    /// `M × (D·n)` rigidity matrix of a placement.
    pub fn rigidity_matrix(&self, placement: &AgentMatrix) -> DMatrix<f64> {
        let dim = placement.dim();
        let mut r = DMatrix::zeros(self.edges.len(), dim * self.n);
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            for d in 0..dim {
                let diff = placement.get(i, d) - placement.get(j, d);
                r[(k, i * dim + d)] = diff;
                r[(k, j * dim + d)] = -diff;
            }
        }
        r
    }

    /// Infinitesimal rigidity: the rigidity matrix has rank `D·n − D(D+1)/2`.
    ///
    /// Singular values at or below `tol` times the largest one count as zero.
    /// Fully coincident placements are reported as not rigid.
    pub fn is_rigid(&self, placement: &AgentMatrix, tol: f64) -> bool {
        let dim = placement.dim();
        let n = self.n;
        if placement.n() != n || dim == 0 || n < dim {
            return false;
        }
        let required = dim * n - dim * (dim + 1) / 2;
        if required == 0 {
            return true;
        }
        if self.edges.len() < required {
            return false;
        }
        let sv = self.rigidity_matrix(placement).singular_values();
        let largest = sv.max();
        if largest == 0.0 {
            return false;
        }
        let rank = sv.iter().filter(|&&s| s > tol * largest).count();
        rank == required
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[[f64; 2]]) -> AgentMatrix {
        AgentMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn canonicalizes_edges() {
        let g = Graph::from_edges(3, [(2, 1), (1, 0), (0, 2)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(g.num_edges(), 3);
        let c = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(c.num_edges(), 4);
        assert_eq!(c.edges(), &[(0, 1), (0, 3), (1, 2), (2, 3)]);
    }

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(Graph::from_edges(2, [(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(
            Graph::from_edges(2, [(0, 2)]),
            Err(GraphError::OutOfRange { i: 0, j: 2, n: 2 })
        );
        assert_eq!(
            Graph::from_edges(3, [(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert_eq!(Graph::from_edges(0, []), Err(GraphError::Empty));
    }

    #[test]
    fn laplacian_examples() {
        let p = Graph::path(2).unwrap();
        assert_eq!(
            p.laplacian(),
            DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])
        );

        let t = Graph::complete(3).unwrap();
        let expected =
            DMatrix::from_row_slice(3, 3, &[2.0, -1.0, -1.0, -1.0, 2.0, -1.0, -1.0, -1.0, 2.0]);
        assert_eq!(t.laplacian(), expected);
        assert_eq!(t.laplacian(), t.degree_matrix() - t.adjacency_matrix());

        let empty = Graph::from_edges(3, []).unwrap();
        assert_eq!(empty.laplacian(), DMatrix::zeros(3, 3));
    }

    #[test]
    fn incidence_orientation() {
        let g = Graph::path(2).unwrap();
        assert_eq!(
            g.incidence(),
            DMatrix::from_column_slice(2, 1, &[1.0, -1.0])
        );
        for g in [Graph::complete(3).unwrap(), Graph::cycle(4).unwrap()] {
            let b = g.incidence();
            assert_eq!(&b * b.transpose(), g.laplacian());
        }
    }

    #[test]
    fn connectivity() {
        assert!(Graph::cycle(4).unwrap().is_connected());
        assert!(!Graph::from_edges(4, [(0, 1), (2, 3)])
            .unwrap()
            .is_connected());
        assert!(Graph::from_edges(1, []).unwrap().is_connected());
    }

    #[test]
    fn rigidity_examples() {
        let tri = Graph::complete(3).unwrap();
        assert!(tri.is_rigid(
            &pts(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
            DEFAULT_RANK_TOL
        ));

        let square = pts(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert!(!Graph::cycle(4).unwrap().is_rigid(&square, DEFAULT_RANK_TOL));

        let generic = pts(&[[0.1, 0.2], [1.3, -0.4], [0.7, 1.9], [-0.8, 0.6]]);
        assert!(Graph::complete(4)
            .unwrap()
            .is_rigid(&generic, DEFAULT_RANK_TOL));
    }

    #[test]
    fn coincident_placement_is_not_rigid() {
        let tri = Graph::complete(3).unwrap();
        assert!(!tri.is_rigid(&AgentMatrix::zeros(3, 2), DEFAULT_RANK_TOL));
    }

    #[test]
    fn disk_graph_uses_inclusive_radius() {
        let p = pts(&[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]]);
        let g = Graph::disk(&p, 2.0).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }
}
