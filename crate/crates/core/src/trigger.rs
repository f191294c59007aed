//! Event generation.
//!
//! Agent `i` refreshes its control when either
//!
//! 1. `‖e_j − e_i‖ ≥ β_i δ_ij` for some neighbour `j`, or
//! 2. `‖e_i‖² ≥ σ_i Σ_d A_{i,d} / B_i`,
//!
//! where `e_i = x_i(t_{k_i}) − x_i(t)` is the drift from the last broadcast.
//! Thresholds are evaluated on the true current positions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::controller::{
    normalized_quantities, BroadcastTable, ControllerParams, Normalized, ThresholdDistance,
};
use crate::error::ParamError;
use crate::exec::Execution;
use crate::formation::FormationSpec;
use crate::matrix::{distance, AgentMatrix};

/// Below this (normalized) denominator β_i is replaced by [`BETA_LARGE`].
pub const EPS_DEN: f64 = 1e-12;
/// Stand-in for an "arbitrarily large" β_i, which disables condition 1.
pub const BETA_LARGE: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Condition {
    /// The unconditional update at `t = 0`; not counted in τ¹/τ².
    Initial,
    /// Relative measurement-error condition (τ¹).
    Distance,
    /// Own measurement-error condition (τ²).
    Error,
    /// Periodic baseline update.
    Periodic,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Initial => "initial",
            Condition::Distance => "1",
            Condition::Error => "2",
            Condition::Periodic => "periodic",
        })
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "initial" => Ok(Condition::Initial),
            "1" => Ok(Condition::Distance),
            "2" => Ok(Condition::Error),
            "periodic" => Ok(Condition::Periodic),
            other => Err(format!("unknown trigger condition {other:?}")),
        }
    }
}

impl From<Condition> for String {
    fn from(c: Condition) -> Self {
        c.to_string()
    }
}

impl TryFrom<String> for Condition {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerRecord {
    pub agent: usize,
    pub step: usize,
    pub time: f64,
    pub condition: Condition,
    /// Left-hand side of the firing inequality (0 for initial/periodic).
    pub lhs: f64,
    pub threshold: f64,
}

/// A condition that fired on the current snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub agent: usize,
    pub condition: Condition,
    pub lhs: f64,
    pub threshold: f64,
}

/// Measurement errors, per-agent counters and the full trigger log.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerState {
    errors: AgentMatrix,
    tau1: Vec<u64>,
    tau2: Vec<u64>,
    periodic: Vec<u64>,
    log: Vec<TriggerRecord>,
}

impl TriggerState {
    pub fn new(n: usize, dim: usize) -> Self {
        Self {
            errors: AgentMatrix::zeros(n, dim),
            tau1: vec![0; n],
            tau2: vec![0; n],
            periodic: vec![0; n],
            log: Vec::new(),
        }
    }

    /// `e_i = x_i(t_{k_i}) − x_i(t)` for every agent.
    pub fn update_errors(&mut self, bt: &BroadcastTable, pos: &AgentMatrix) {
        let last = bt.positions();
        for i in 0..pos.n() {
            let (b, x) = (last.row(i), pos.row(i));
            for (e, (bv, xv)) in self.errors.row_mut(i).iter_mut().zip(b.iter().zip(x)) {
                *e = bv - xv;
            }
        }
    }

    /// Logs a trigger, bumps the matching counter and zeroes `e_i`.
    pub fn record(&mut self, rec: TriggerRecord) {
        match rec.condition {
            Condition::Distance => self.tau1[rec.agent] += 1,
            Condition::Error => self.tau2[rec.agent] += 1,
            Condition::Periodic => self.periodic[rec.agent] += 1,
            Condition::Initial => {}
        }
        self.errors
            .row_mut(rec.agent)
            .iter_mut()
            .for_each(|e| *e = 0.0);
        self.log.push(rec);
    }

    pub fn errors(&self) -> &AgentMatrix {
        &self.errors
    }

    pub fn tau1(&self) -> &[u64] {
        &self.tau1
    }

    pub fn tau2(&self) -> &[u64] {
        &self.tau2
    }

    /// Per-agent periodic update counts.
    pub fn periodic(&self) -> &[u64] {
        &self.periodic
    }

    pub fn log(&self) -> &[TriggerRecord] {
        &self.log
    }

    pub fn into_parts(self) -> (Vec<u64>, Vec<u64>, Vec<u64>, Vec<TriggerRecord>) {
        (self.tau1, self.tau2, self.periodic, self.log)
    }
}

/// `a_i · Σ_j |D_ij|` as used inside β_i; zero when the sum vanishes.
fn a_times_sum(params: &ControllerParams, sum_abs_d: f64) -> f64 {
    if sum_abs_d == 0.0 {
        return 0.0;
    }
    match params.a_rule {
        crate::controller::ARule::Fraction(f) => f,
        crate::controller::ARule::Fixed(a) => a * sum_abs_d,
    }
}

/// β_i from precomputed normalized quantities.
pub fn beta(spec: &FormationSpec, params: &ControllerParams, i: usize, nq: &Normalized) -> f64 {
    let graph = spec.graph();
    let sum_abs_d = nq.sum_abs_d(graph, i);
    let z_sq: f64 = nq.z.row(i).iter().map(|v| v * v).sum();
    let xbar_sq: f64 = nq.xbar.row(i).iter().map(|v| v * v).sum();
    let a_sum: f64 = params.threshold_const.row(i).iter().sum();

    let num = ((1.0 - a_times_sum(params, sum_abs_d)) * z_sq).max(0.0) + a_sum;
    let den = nq.sum_dbar_sq(graph, i) * ((params.b + params.c) * z_sq + xbar_sq / params.b);
    if den < EPS_DEN {
        return BETA_LARGE;
    }
    (num / den + 1.0).sqrt() - 1.0
}

pub fn beta_i(spec: &FormationSpec, params: &ControllerParams, i: usize, pos: &AgentMatrix) -> f64 {
    beta(spec, params, i, &normalized_quantities(spec, pos))
}

/// `B_i = Σ_j |D_ij| / a_i + (β² + 2β) Σ_j δ̄_ij² / c`.
pub fn big_b(
    spec: &FormationSpec,
    params: &ControllerParams,
    i: usize,
    nq: &Normalized,
    beta: f64,
) -> Result<f64, ParamError> {
    let graph = spec.graph();
    let sum_abs_d = nq.sum_abs_d(graph, i);
    let first = match params.a_rule.evaluate(i, sum_abs_d)? {
        Some(a) => sum_abs_d / a,
        None => 0.0,
    };
    Ok(first + (beta * beta + 2.0 * beta) * nq.sum_dbar_sq(graph, i) / params.c)
}

pub fn big_b_i(
    spec: &FormationSpec,
    params: &ControllerParams,
    i: usize,
    pos: &AgentMatrix,
    beta: f64,
) -> Result<f64, ParamError> {
    big_b(spec, params, i, &normalized_quantities(spec, pos), beta)
}

/// Condition-2 threshold `σ_i Σ_d A_{i,d} / B_i` (m²); infinite when `B_i = 0`.
pub fn error_threshold(params: &ControllerParams, i: usize, big_b: f64) -> f64 {
    let a_sum: f64 = params.threshold_const.row(i).iter().sum();
    if big_b > 0.0 {
        params.sigma[i] * a_sum / big_b
    } else {
        f64::INFINITY
    }
}

/// Evaluates both conditions for one agent. Condition 1 wins when both fire.
///
/// A condition only fires on a strictly positive left-hand side, so an agent
/// whose errors are all zero never triggers.
pub fn evaluate_agent(
    spec: &FormationSpec,
    params: &ControllerParams,
    i: usize,
    nq: &Normalized,
    pos_true: &AgentMatrix,
    bt: &BroadcastTable,
    errors: &AgentMatrix,
) -> Result<Option<Event>, ParamError> {
    let beta_val = beta(spec, params, i, nq);
    let b_val = big_b(spec, params, i, nq, beta_val)?;
    let ei = errors.row(i);

    for nb in spec.graph().neighbors(i) {
        let lhs = distance(errors.row(nb.node), ei);
        let dist = match params.threshold_distance {
            ThresholdDistance::True => pos_true.distance(i, nb.node),
            ThresholdDistance::Broadcast => bt.positions().distance(i, nb.node),
        };
        let threshold = beta_val * dist;
        if lhs > 0.0 && lhs >= threshold {
            return Ok(Some(Event {
                agent: i,
                condition: Condition::Distance,
                lhs,
                threshold,
            }));
        }
    }

    let lhs: f64 = ei.iter().map(|v| v * v).sum();
    let threshold = error_threshold(params, i, b_val);
    if lhs > 0.0 && lhs >= threshold {
        return Ok(Some(Event {
            agent: i,
            condition: Condition::Error,
            lhs,
            threshold,
        }));
    }
    Ok(None)
}

/// Agents whose event condition fires on the snapshot `pos_true`, in agent
/// order. `ts` must hold errors for this snapshot.
pub fn check_events(
    spec: &FormationSpec,
    params: &ControllerParams,
    pos_true: &AgentMatrix,
    bt: &BroadcastTable,
    ts: &TriggerState,
    exec: Execution,
) -> Result<Vec<Event>, ParamError> {
    let nq = normalized_quantities(spec, pos_true);
    let results = exec.map_indexed(spec.n(), |i| {
        evaluate_agent(spec, params, i, &nq, pos_true, bt, ts.errors())
    });
    let mut events = Vec::new();
    for r in results {
        if let Some(ev) = r? {
            events.push(ev);
        }
    }
    Ok(events)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerPolicy {
    Event,
    /// Every agent updates every `period` steps, starting at step 0.
    Periodic {
        period: usize,
    },
}

pub fn periodic_policy(period_steps: usize) -> TriggerPolicy {
    TriggerPolicy::Periodic {
        period: period_steps,
    }
}

impl TriggerPolicy {
    /// Whether a periodic policy updates at `step`. Always false for events.
    pub fn periodic_fires(&self, step: usize) -> bool {
        match *self {
            TriggerPolicy::Periodic { period } => period > 0 && step.is_multiple_of(period),
            TriggerPolicy::Event => false,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TriggerPolicy::Event => "event",
            TriggerPolicy::Periodic { .. } => "periodic",
        }
    }
}
