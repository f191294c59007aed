//! Distance-based formation targets over the edges of a [`Graph`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{FormationError, ShapeError};
use crate::graph::Graph;
use crate::matrix::AgentMatrix;

/// Desired inter-agent distances, one per canonical edge.
///
/// `delta_max` (the normalization constant Δ) is always derived from the
/// distances, never supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct FormationSpec {
    graph: Graph,
    desired: Vec<f64>,
    /// Kept separately so that a spec read off a placement reproduces that
    /// placement's squared distances bit for bit.
    desired_sq: Vec<f64>,
    delta_max: f64,
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    graph: Graph,
    desired_distances: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    desired_sq: Option<Vec<f64>>,
}

impl TryFrom<SpecRepr> for FormationSpec {
    type Error = FormationError;

    fn try_from(r: SpecRepr) -> Result<Self, Self::Error> {
        let mut spec = FormationSpec::from_distances(r.graph, r.desired_distances)?;
        if let Some(sq) = r.desired_sq {
            spec.set_squared(sq)?;
        }
        Ok(spec)
    }
}

impl From<FormationSpec> for SpecRepr {
    fn from(s: FormationSpec) -> Self {
        let exact = s
            .desired
            .iter()
            .zip(&s.desired_sq)
            .all(|(d, sq)| d * d == *sq);
        SpecRepr {
            graph: s.graph,
            desired_distances: s.desired,
            desired_sq: (!exact).then_some(s.desired_sq),
        }
    }
}

impl FormationSpec {
    /// Desired distances are read off an actual placement, so the target is
    /// always realizable.
    pub fn from_target_placement(
        graph: Graph,
        target: &AgentMatrix,
    ) -> Result<Self, FormationError> {
        if target.n() != graph.n() {
            return Err(ShapeError::Mismatch {
                expected_n: graph.n(),
                expected_dim: target.dim(),
                n: target.n(),
                dim: target.dim(),
            }
            .into());
        }
        let sq: Vec<f64> = graph
            .edges()
            .iter()
            .map(|&(i, j)| crate::matrix::distance_sq(target.row(i), target.row(j)))
            .collect();
        let mut spec = Self::from_distances(graph, sq.iter().map(|v| v.sqrt()).collect())?;
        spec.set_squared(sq)?;
        Ok(spec)
    }

    /// Replaces the squared distances; each must agree with its distance to
    /// within a few ulps.
    fn set_squared(&mut self, sq: Vec<f64>) -> Result<(), FormationError> {
        if sq.len() != self.desired.len() {
            return Err(FormationError::LengthMismatch {
                expected: self.desired.len(),
                found: sq.len(),
            });
        }
        for (edge, (&d, &s)) in self.desired.iter().zip(&sq).enumerate() {
            if !(s > 0.0 && ((d * d - s) / s).abs() < 1e-12) {
                return Err(FormationError::NonPositiveDistance {
                    edge,
                    value: s.sqrt(),
                });
            }
        }
        self.desired_sq = sq;
        Ok(())
    }

    /// No realizability check is made: any positive distances are accepted.
    pub fn from_distances(graph: Graph, desired: Vec<f64>) -> Result<Self, FormationError> {
        if desired.len() != graph.num_edges() {
            return Err(FormationError::LengthMismatch {
                expected: graph.num_edges(),
                found: desired.len(),
            });
        }
        if desired.is_empty() {
            return Err(FormationError::NoEdges);
        }
        if let Some((edge, &value)) = desired
            .iter()
            .enumerate()
            .find(|(_, d)| !(d.is_finite() && **d > 0.0))
        {
            return Err(FormationError::NonPositiveDistance { edge, value });
        }
        let delta_max = desired.iter().cloned().fold(f64::MIN, f64::max);
        let desired_sq = desired.iter().map(|d| d * d).collect();
        Ok(Self {
            graph,
            desired,
            desired_sq,
            delta_max,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Desired distance per canonical edge (m).
    pub fn desired(&self) -> &[f64] {
        &self.desired
    }

    pub fn desired_sq(&self, edge: usize) -> f64 {
        self.desired_sq[edge]
    }

    /// Δ = largest desired distance (m).
    pub fn delta_max(&self) -> f64 {
        self.delta_max
    }

    /// `M × M` diagonal of squared desired distances, in canonical edge order.
    pub fn wtilde(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            self.desired_sq.len(),
            self.desired_sq.iter().copied(),
        ))
    }

    /// Edges whose triangle-closing partners violate the triangle inequality.
    ///
    /// A cheap necessary condition for realizability; an empty result does
    /// not prove the distances are realizable.
    pub fn triangle_violations(&self) -> Vec<(usize, usize, usize)> {
        let g = &self.graph;
        let edge_of = |a: usize, b: usize| {
            g.neighbors(a)
                .iter()
                .find(|nb| nb.node == b)
                .map(|nb| nb.edge)
        };
        let mut out = Vec::new();
        for &(i, j) in g.edges() {
            for nb in g.neighbors(j) {
                let k = nb.node;
                if k <= j {
                    continue;
                }
                if let (Some(eij), Some(ejk), Some(eik)) =
                    (edge_of(i, j), edge_of(j, k), edge_of(i, k))
                {
                    let (a, b, c) = (self.desired[eij], self.desired[ejk], self.desired[eik]);
                    let tol = 1e-12 * (a + b + c);
                    if a > b + c + tol || b > a + c + tol || c > a + b + tol {
                        out.push((i, j, k));
                    }
                }
            }
        }
        out
    }
}
