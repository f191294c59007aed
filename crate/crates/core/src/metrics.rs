//! Trigger counts, formation error and event-vs-periodic comparison.

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::formation::FormationSpec;
use crate::matrix::AgentMatrix;
use crate::trigger::{Condition, TriggerState};

/// Mean of per-agent counts.
pub fn mean_count(counts: &[u64]) -> f64 {
    if counts.is_empty() {
        return 0.0;
    }
    counts.iter().sum::<u64>() as f64 / counts.len() as f64
}

/// `τ^k = (1/N) Σ_i τ_i^k` for `Condition::Distance` (k = 1) or
/// `Condition::Error` (k = 2). Periodic counts are averaged the same way.
pub fn tau_average(ts: &TriggerState, condition: Condition) -> f64 {
    match condition {
        Condition::Distance => mean_count(ts.tau1()),
        Condition::Error => mean_count(ts.tau2()),
        Condition::Periodic => mean_count(ts.periodic()),
        Condition::Initial => 0.0,
    }
}

/// `F = (1/N) Σ_i (1/|N_i|) Σ_{j ∈ N_i} |D_ij|`.
pub fn formation_error(spec: &FormationSpec, pos: &AgentMatrix) -> Result<f64, MetricsError> {
    let g = spec.graph();
    let delta_sq = spec.delta_max().powi(2);
    let mut total = 0.0;
    for i in 0..g.n() {
        let nbrs = g.neighbors(i);
        if nbrs.is_empty() {
            return Err(MetricsError::IsolatedAgent(i));
        }
        let s: f64 = nbrs
            .iter()
            .map(|nb| {
                let d_sq = crate::matrix::distance_sq(pos.row(i), pos.row(nb.node));
                ((d_sq - spec.desired_sq(nb.edge)) / delta_sq).abs()
            })
            .sum();
        total += s / nbrs.len() as f64;
    }
    Ok(total / g.n() as f64)
}

/// Per-run summary, serialized as flat `key=value` lines by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    /// `event` or `periodic`.
    pub trigger: String,
    pub n: usize,
    pub dim: usize,
    pub steps: usize,
    pub dt: f64,
    pub horizon: f64,
    pub tau1_avg: f64,
    pub tau2_avg: f64,
    pub periodic_avg: f64,
    /// `τ¹ + τ²` for event runs, the periodic count otherwise.
    pub total_updates_avg: f64,
    pub f_initial: f64,
    pub f_final: f64,
    pub v_final: f64,
    pub saturated: bool,
    pub max_speed: f64,
    pub centroid_drift: f64,
    pub wall_time: f64,
    pub f_series: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub scenario: String,
    pub et_updates: f64,
    pub pt_updates: f64,
    /// `1 − ET / PT`.
    pub reduction: f64,
    pub f_et: f64,
    pub f_pt: f64,
}

pub fn compare(et: &RunSummary, pt: &RunSummary) -> Result<Comparison, MetricsError> {
    if et.scenario != pt.scenario || et.n != pt.n || et.dim != pt.dim {
        return Err(MetricsError::Mismatch(format!(
            "scenarios differ: {} (n={}) vs {} (n={})",
            et.scenario, et.n, pt.scenario, pt.n
        )));
    }
    if et.trigger != "event" || pt.trigger != "periodic" {
        return Err(MetricsError::Mismatch(format!(
            "expected event vs periodic, got {} vs {}",
            et.trigger, pt.trigger
        )));
    }
    if pt.total_updates_avg <= 0.0 {
        return Err(MetricsError::Mismatch("periodic run has no updates".into()));
    }
    Ok(Comparison {
        scenario: et.scenario.clone(),
        et_updates: et.total_updates_avg,
        pt_updates: pt.total_updates_avg,
        reduction: 1.0 - et.total_updates_avg / pt.total_updates_avg,
        f_et: et.f_final,
        f_pt: pt.f_final,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::trigger::TriggerRecord;
    use approx::assert_relative_eq;

    fn summary(trigger: &str, updates: f64) -> RunSummary {
        RunSummary {
            scenario: "v-complete".into(),
            trigger: trigger.into(),
            n: 6,
            dim: 2,
            steps: 3040,
            dt: 0.0329,
            horizon: 100.0,
            tau1_avg: 0.0,
            tau2_avg: 0.0,
            periodic_avg: 0.0,
            total_updates_avg: updates,
            f_initial: 0.5,
            f_final: 0.01,
            v_final: 0.0,
            saturated: false,
            max_speed: 0.0,
            centroid_drift: 0.0,
            wall_time: 0.0,
            f_series: vec![],
        }
    }

    #[test]
    fn formation_error_triangle() {
        let spec =
            FormationSpec::from_distances(Graph::complete(3).unwrap(), vec![1.0; 3]).unwrap();
        let pos = AgentMatrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_relative_eq!(
            formation_error(&spec, &pos).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn formation_error_zero_at_target() {
        let target = AgentMatrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.4, 0.9]]).unwrap();
        let spec =
            FormationSpec::from_target_placement(Graph::complete(3).unwrap(), &target).unwrap();
        assert!(formation_error(&spec, &target).unwrap() < 1e-15);
    }

    #[test]
    fn formation_error_isolated_agent() {
        let spec =
            FormationSpec::from_distances(Graph::from_edges(3, [(0, 1)]).unwrap(), vec![1.0])
                .unwrap();
        let pos = AgentMatrix::zeros(3, 2);
        assert_eq!(
            formation_error(&spec, &pos),
            Err(MetricsError::IsolatedAgent(2))
        );
    }

    #[test]
    fn tau_averages() {
        let mut ts = TriggerState::new(2, 2);
        assert_eq!(tau_average(&ts, Condition::Distance), 0.0);
        for agent in 0..2 {
            for step in 0..3 {
                ts.record(TriggerRecord {
                    agent,
                    step,
                    time: step as f64,
                    condition: Condition::Distance,
                    lhs: 1.0,
                    threshold: 0.5,
                });
            }
        }
        assert_eq!(tau_average(&ts, Condition::Distance), 3.0);
        assert_eq!(tau_average(&ts, Condition::Error), 0.0);
    }

    #[test]
    fn compare_reduction() {
        let c = compare(&summary("event", 1367.0), &summary("periodic", 3040.0)).unwrap();
        assert_relative_eq!(c.reduction, 1.0 - 1367.0 / 3040.0);
        assert!((c.reduction - 0.55).abs() < 0.01);
        let c = compare(&summary("event", 974.0), &summary("periodic", 3040.0)).unwrap();
        assert!((c.reduction - 0.68).abs() < 0.01);
    }

    #[test]
    fn compare_rejects_mismatch() {
        let mut other = summary("periodic", 3040.0);
        other.scenario = "v-cycle".into();
        assert!(compare(&summary("event", 1.0), &other).is_err());
        assert!(compare(&summary("periodic", 1.0), &summary("periodic", 2.0)).is_err());
    }
}
