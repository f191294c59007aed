//! Scripted drifts with frozen broadcasts, checked against thresholds
//! computed independently in this file.

use etfc::trigger::{beta_i, check_events, TriggerState, BETA_LARGE};
use etfc::{
    AgentMatrix, BroadcastTable, Condition, ControllerParams, Execution, FormationSpec, Graph,
};

fn events_at(
    spec: &FormationSpec,
    params: &ControllerParams,
    bt: &BroadcastTable,
    pos: &AgentMatrix,
) -> Vec<(usize, Condition)> {
    let mut ts = TriggerState::new(pos.n(), pos.dim());
    ts.update_errors(bt, pos);
    check_events(spec, params, pos, bt, &ts, Execution::Sequential)
        .unwrap()
        .into_iter()
        .map(|e| (e.agent, e.condition))
        .collect()
}

#[test]
fn single_agent_drift_fires_error_condition() {
    // Agent 0 sits at the origin of a formation already at its target, so
    // both x̄_0 and z_0 vanish and β_0 saturates; the tiny drift of agent 0
    // must then trip condition 2 and nothing else.
    let target = AgentMatrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.5, 0.9]]).unwrap();
    let spec = FormationSpec::from_target_placement(Graph::complete(3).unwrap(), &target).unwrap();
    let params = ControllerParams::uniform(&spec, 2, 0.1, 0.001, 0.5);
    let bt = BroadcastTable::new(target.clone(), 0.0);

    let mut pos = target.clone();
    let mut fired = Vec::new();
    for k in 1..=1000 {
        pos.set_row(0, &[k as f64 * 1e-12, 0.0]);
        fired = events_at(&spec, &params, &bt, &pos);
        if !fired.is_empty() {
            assert_eq!(beta_i(&spec, &params, 0, &pos), BETA_LARGE);
            break;
        }
    }
    assert_eq!(fired, vec![(0, Condition::Error)]);
}

/// β for agent `i` written out directly for a two-agent path graph.
fn beta_two_agents(pos: &AgentMatrix, i: usize, desired: f64, a_const: f64) -> f64 {
    let delta = desired;
    let j = 1 - i;
    let d2: f64 = (0..2)
        .map(|d| (pos.get(i, d) - pos.get(j, d)).powi(2))
        .sum();
    let dij = (d2 - desired * desired) / (delta * delta);
    let z: Vec<f64> = (0..2)
        .map(|d| dij * (pos.get(i, d) - pos.get(j, d)) / delta)
        .collect();
    let z2 = z[0] * z[0] + z[1] * z[1];
    let x2 = (pos.get(i, 0).powi(2) + pos.get(i, 1).powi(2)) / (delta * delta);
    let a_times_s = if dij == 0.0 { 0.0 } else { 0.5 };
    let num = (1.0 - a_times_s) * z2 + 2.0 * a_const;
    let den = (d2 / (delta * delta)) * (2.0 * z2 + x2);
    (num / den + 1.0).sqrt() - 1.0
}

#[test]
fn pair_drift_fires_distance_condition_on_farther_agent() {
    // Two neighbours at their desired distance, both off the origin; they
    // drift apart symmetrically. The agent farther from the origin has the
    // smaller β and must fire condition 1 first.
    let start = AgentMatrix::from_rows(&[[1.0, 0.5], [3.0, 0.5]]).unwrap();
    let spec = FormationSpec::from_target_placement(Graph::path(2).unwrap(), &start).unwrap();
    let a_const = 0.001;
    let params = ControllerParams::uniform(&spec, 2, 0.1, a_const, 0.5);
    let bt = BroadcastTable::new(start.clone(), 0.0);

    let step = 1e-4;
    let mut pos = start.clone();
    for k in 1..=20_000 {
        let s = k as f64 * step;
        pos.set_row(0, &[1.0 - s, 0.5]);
        pos.set_row(1, &[3.0 + s, 0.5]);
        let fired = events_at(&spec, &params, &bt, &pos);
        if fired.is_empty() {
            continue;
        }
        assert_eq!(fired, vec![(1, Condition::Distance)]);
        let lhs = 2.0 * s;
        let b0 = beta_two_agents(&pos, 0, 2.0, a_const);
        let b1 = beta_two_agents(&pos, 1, 2.0, a_const);
        let dist = pos.distance(0, 1);
        assert!(b1 < b0);
        assert!(lhs >= b1 * dist && lhs < b0 * dist);
        // one step earlier the farther agent was still below its threshold
        let prev = 2.0 * (s - step);
        let mut before = pos.clone();
        before.set_row(0, &[1.0 - (s - step), 0.5]);
        before.set_row(1, &[3.0 + (s - step), 0.5]);
        assert!(prev < beta_two_agents(&before, 1, 2.0, a_const) * before.distance(0, 1));
        assert!((beta_i(&spec, &params, 1, &pos) - b1).abs() < 1e-12);
        return;
    }
    panic!("no event within the scripted drift");
}

#[test]
fn no_error_no_event() {
    let start = AgentMatrix::from_rows(&[[0.3, 0.1], [1.1, -0.2], [0.4, 1.0]]).unwrap();
    let target = AgentMatrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.5, 0.9]]).unwrap();
    let spec = FormationSpec::from_target_placement(Graph::complete(3).unwrap(), &target).unwrap();
    let params = ControllerParams::uniform(&spec, 2, 0.1, 0.001, 0.5);
    let bt = BroadcastTable::new(start.clone(), 0.0);
    assert!(events_at(&spec, &params, &bt, &start).is_empty());
}
