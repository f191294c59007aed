//! The distance-based formation control law and its diagnostics.
//!
//! With `w_ij = δ_ij² − δ̃_ij²` the weighted formation Laplacian is
//! `L(x) = B (W(x) − W̃) Bᵀ` and the control of agent `i`, evaluated on the
//! positions most recently broadcast, is
//!
//! ```text
//! u_i = −α Σ_{j ∈ N_i} w_ij (x_i − x_j).
//! ```
//!
//! The `D`-dimensional operator `L ⊗ I_D` is never formed; every routine
//! applies `L` to each coordinate separately.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{ParamError, ShapeError};
use crate::formation::FormationSpec;
use crate::graph::Graph;
use crate::matrix::{distance_sq, AgentMatrix};

/// Positions and times of each agent's latest broadcast.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastTable {
    positions: AgentMatrix,
    times: Vec<f64>,
}

impl BroadcastTable {
    pub fn new(positions: AgentMatrix, time: f64) -> Self {
        let times = vec![time; positions.n()];
        Self { positions, times }
    }

    pub fn positions(&self) -> &AgentMatrix {
        &self.positions
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Records a broadcast by `agent`. Broadcast times never go backwards.
    pub fn broadcast(&mut self, agent: usize, position: &[f64], time: f64) {
        debug_assert!(time >= self.times[agent]);
        self.positions.set_row(agent, position);
        self.times[agent] = time;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gain {
    /// Fixed velocity gain α (1/(m²·s)).
    Constant { alpha: f64 },
    /// `α_i = v_max (1 − exp(−k_vel ‖s_i‖)) / ‖s_i‖`, `s_i = Σ_j (x_j − x_i)`.
    StateDependent { v_max: f64, k_vel: f64 },
}

impl Gain {
    /// α used by the Lyapunov diagnostic; `v_max · k_vel` (the small-`‖s‖`
    /// limit) in state-dependent mode.
    pub fn nominal_alpha(&self) -> f64 {
        match *self {
            Gain::Constant { alpha } => alpha,
            Gain::StateDependent { v_max, k_vel } => v_max * k_vel,
        }
    }
}

/// How `a_i` is chosen from `S_i = Σ_j |D_ij|` at each evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ARule {
    /// `a_i = fraction / S_i`, `fraction ∈ (0, 1)`.
    Fraction(f64),
    /// A constant `a_i`; checked against `1 / S_i` on every evaluation.
    Fixed(f64),
}

impl Default for ARule {
    fn default() -> Self {
        ARule::Fraction(0.5)
    }
}

impl ARule {
    /// `None` when `S_i = 0`: any `a_i` is admissible and the `S_i / a_i`
    /// term vanishes.
    pub fn evaluate(&self, agent: usize, sum_abs_d: f64) -> Result<Option<f64>, ParamError> {
        if sum_abs_d == 0.0 {
            return Ok(None);
        }
        let upper = 1.0 / sum_abs_d;
        let a = match *self {
            ARule::Fraction(f) => f * upper,
            ARule::Fixed(a) => a,
        };
        if a > 0.0 && a < upper {
            Ok(Some(a))
        } else {
            Err(ParamError::AOutOfRange {
                agent,
                value: a,
                upper,
            })
        }
    }
}

/// Which inter-agent distance scales the condition-1 threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdDistance {
    /// Current true distance `‖x_j(t) − x_i(t)‖`.
    #[default]
    True,
    /// Distance between the latest broadcasts.
    Broadcast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerParams {
    pub gain: Gain,
    /// `A_{i,d}`, one row per agent.
    pub threshold_const: AgentMatrix,
    /// `σ_i`, each in `(0, Δ²)`.
    pub sigma: Vec<f64>,
    #[serde(default)]
    pub a_rule: ARule,
    pub b: f64,
    pub c: f64,
    #[serde(default)]
    pub threshold_distance: ThresholdDistance,
}

impl ControllerParams {
    /// Uniform `A_{i,d} = a_const` and `σ_i = sigma_fraction · Δ²`, default
    /// a-rule and `b = c = 1`.
    pub fn uniform(
        spec: &FormationSpec,
        dim: usize,
        alpha: f64,
        a_const: f64,
        sigma_fraction: f64,
    ) -> Self {
        let n = spec.n();
        let delta_sq = spec.delta_max().powi(2);
        Self {
            gain: Gain::Constant { alpha },
            threshold_const: AgentMatrix::filled(n, dim, a_const),
            sigma: vec![sigma_fraction * delta_sq; n],
            a_rule: ARule::default(),
            b: 1.0,
            c: 1.0,
            threshold_distance: ThresholdDistance::True,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.gain = Gain::Constant { alpha };
        self
    }

    pub fn with_threshold_const(mut self, a_const: f64) -> Self {
        self.threshold_const = self.threshold_const.map(|_| a_const);
        self
    }

    /// Checks every constant range condition. `a_i` is state-dependent and
    /// is checked at evaluation time instead.
    pub fn validate(&self, spec: &FormationSpec, dim: usize) -> Result<(), ParamError> {
        let n = spec.n();
        match self.gain {
            Gain::Constant { alpha } => positive("alpha", alpha)?,
            Gain::StateDependent { v_max, k_vel } => {
                positive("v_max", v_max)?;
                positive("k_vel", k_vel)?;
            }
        }
        positive("b", self.b)?;
        positive("c", self.c)?;
        if self.threshold_const.n() != n || self.threshold_const.dim() != dim {
            return Err(ShapeError::Mismatch {
                expected_n: n,
                expected_dim: dim,
                n: self.threshold_const.n(),
                dim: self.threshold_const.dim(),
            }
            .into());
        }
        for i in 0..n {
            for (d, &v) in self.threshold_const.row(i).iter().enumerate() {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(ParamError::ThresholdConstant {
                        agent: i,
                        dim: d,
                        value: v,
                    });
                }
            }
        }
        if self.sigma.len() != n {
            return Err(ParamError::SigmaLength {
                expected: n,
                found: self.sigma.len(),
            });
        }
        let upper = spec.delta_max().powi(2);
        for (agent, &value) in self.sigma.iter().enumerate() {
            if !(value > 0.0 && value < upper) {
                return Err(ParamError::SigmaOutOfRange {
                    agent,
                    value,
                    upper,
                });
            }
        }
        match self.a_rule {
            ARule::Fraction(f) if !(f > 0.0 && f < 1.0) => Err(ParamError::ARuleFraction(f)),
            ARule::Fixed(a) => positive("a_i", a),
            _ => Ok(()),
        }
    }

    /// Gain of agent `i` given the positions the law is evaluated on.
    pub fn alpha_for(&self, graph: &Graph, i: usize, positions: &AgentMatrix) -> f64 {
        match self.gain {
            Gain::Constant { alpha } => alpha,
            Gain::StateDependent { v_max, k_vel } => {
                let dim = positions.dim();
                let xi = positions.row(i);
                let mut s = vec![0.0; dim];
                for nb in graph.neighbors(i) {
                    for (sd, (xj, xi)) in s.iter_mut().zip(positions.row(nb.node).iter().zip(xi)) {
                        *sd += xj - xi;
                    }
                }
                let r = crate::matrix::norm(&s);
                if r * k_vel < 1e-12 {
                    v_max * k_vel
                } else {
                    v_max * (1.0 - (-k_vel * r).exp()) / r
                }
            }
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), ParamError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ParamError::NonPositive { name, value })
    }
}

/// `w_ij = δ_ij² − δ̃_ij²` for every canonical edge (m²).
pub fn edge_weights(spec: &FormationSpec, pos: &AgentMatrix) -> Vec<f64> {
    spec.graph()
        .edges()
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| distance_sq(pos.row(i), pos.row(j)) - spec.desired_sq(k))
        .collect()
}

/// `L(x) = B (W(x) − W̃) Bᵀ`, assembled as a dense `n × n` matrix (m²).
pub fn weighted_laplacian(spec: &FormationSpec, pos: &AgentMatrix) -> DMatrix<f64> {
    let b = spec.graph().incidence();
    let w = DMatrix::from_diagonal(&DVector::from_vec(edge_weights(spec, pos)));
    &b * w * b.transpose()
}

/// `(L(x) ⊗ I_D) v`, computed edge by edge.
pub fn apply_weighted_laplacian(
    spec: &FormationSpec,
    pos: &AgentMatrix,
    v: &AgentMatrix,
) -> AgentMatrix {
    let weights = edge_weights(spec, pos);
    let mut out = AgentMatrix::zeros(v.n(), v.dim());
    for (&(i, j), w) in spec.graph().edges().iter().zip(weights) {
        for d in 0..v.dim() {
            let diff = w * (v.get(i, d) - v.get(j, d));
            out.row_mut(i)[d] += diff;
            out.row_mut(j)[d] -= diff;
        }
    }
    out
}

/// Control of agent `i` from the broadcast table (m/s).
pub fn control_input(
    spec: &FormationSpec,
    params: &ControllerParams,
    i: usize,
    bt: &BroadcastTable,
) -> Vec<f64> {
    let pos = bt.positions();
    let graph = spec.graph();
    let alpha = params.alpha_for(graph, i, pos);
    let xi = pos.row(i);
    let mut u = vec![0.0; pos.dim()];
    for nb in graph.neighbors(i) {
        let xj = pos.row(nb.node);
        let w = distance_sq(xi, xj) - spec.desired_sq(nb.edge);
        for ((ud, a), b) in u.iter_mut().zip(xi).zip(xj) {
            *ud -= alpha * w * (a - b);
        }
    }
    u
}

/// All controls at once through the dense Laplacian: `u = −α (L(x) ⊗ I) x`
/// with `x` the broadcast positions.
pub fn stacked_control(
    spec: &FormationSpec,
    params: &ControllerParams,
    bt: &BroadcastTable,
) -> AgentMatrix {
    let pos = bt.positions();
    let l = weighted_laplacian(spec, pos);
    let (n, dim) = (pos.n(), pos.dim());
    let mut u = AgentMatrix::zeros(n, dim);
    for d in 0..dim {
        let col = DVector::from_iterator(n, (0..n).map(|i| pos.get(i, d)));
        let lx = &l * col;
        for i in 0..n {
            u.row_mut(i)[d] = -params.alpha_for(spec.graph(), i, pos) * lx[i];
        }
    }
    u
}

/// `V = (1 / (8 α Δ⁶)) Σ_i Σ_{j ∈ N_i} (δ_ij² − δ̃_ij²)²`; each edge appears twice.
pub fn lyapunov(spec: &FormationSpec, alpha: f64, pos: &AgentMatrix) -> f64 {
    let sum: f64 = edge_weights(spec, pos).iter().map(|w| 2.0 * w * w).sum();
    sum / (8.0 * alpha * spec.delta_max().powi(6))
}

pub fn centroid(pos: &AgentMatrix) -> Vec<f64> {
    let n = pos.n() as f64;
    let mut c = vec![0.0; pos.dim()];
    for row in pos.rows() {
        for (cd, x) in c.iter_mut().zip(row) {
            *cd += x;
        }
    }
    c.iter_mut().for_each(|v| *v /= n);
    c
}

/// Δ-normalized state shared by the threshold functions.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    /// `x̄ = x / Δ`.
    pub xbar: AgentMatrix,
    /// `z = (L(x) ⊗ I) x̄ / Δ²`.
    pub z: AgentMatrix,
    /// `D_ij = (δ_ij² − δ̃_ij²) / Δ²` per canonical edge.
    pub d: Vec<f64>,
    /// `δ̄_ij = δ_ij / Δ` per canonical edge.
    pub dbar: Vec<f64>,
}

impl Normalized {
    /// `Σ_{j ∈ N_i} |D_ij|`.
    pub fn sum_abs_d(&self, graph: &Graph, i: usize) -> f64 {
        graph
            .neighbors(i)
            .iter()
            .map(|nb| self.d[nb.edge].abs())
            .sum()
    }

    /// `Σ_{j ∈ N_i} δ̄_ij²`.
    pub fn sum_dbar_sq(&self, graph: &Graph, i: usize) -> f64 {
        graph
            .neighbors(i)
            .iter()
            .map(|nb| self.dbar[nb.edge].powi(2))
            .sum()
    }
}

pub fn normalized_quantities(spec: &FormationSpec, pos: &AgentMatrix) -> Normalized {
    let delta = spec.delta_max();
    let delta_sq = delta * delta;
    let xbar = pos.scaled(1.0 / delta);
    let z = apply_weighted_laplacian(spec, pos, &xbar).scaled(1.0 / delta_sq);
    let d = edge_weights(spec, pos)
        .into_iter()
        .map(|w| w / delta_sq)
        .collect();
    let dbar = spec
        .graph()
        .edges()
        .iter()
        .map(|&(i, j)| pos.distance(i, j) / delta)
        .collect();
    Normalized { xbar, z, d, dbar }
}
