mod common;

use common::*;
use etfc::engine::{scenario_sphere, scenario_v_formation, sweep};
use etfc::metrics::{compare, formation_error};
use etfc::trigger::periodic_policy;
use etfc::{
    run, run_timed, Condition, ControlRefresh, Execution, PlantModel, SimConfig, Topology,
    TriggerPolicy,
};

fn short(mut cfg: SimConfig, horizon: f64) -> SimConfig {
    cfg.horizon = horizon;
    cfg
}

fn v_configs() -> Vec<SimConfig> {
    let mut out = Vec::new();
    for topo in [Topology::Complete, Topology::Cycle] {
        for model in [PlantModel::Unicycle, PlantModel::SingleIntegrator] {
            out.push(short(
                scenario_v_formation(topo).with_plant_model(model),
                30.0,
            ));
        }
    }
    out
}

#[test]
fn runs_are_deterministic() {
    for cfg in v_configs() {
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            format!("{:?}", a.samples.last()),
            format!("{:?}", b.samples.last())
        );
    }
}

#[test]
fn execution_mode_does_not_change_results() {
    let mut cfg = short(scenario_sphere(120, 3), 5.0);
    let a = run(&cfg).unwrap();
    cfg.execution = Execution::Parallel;
    assert_eq!(a, run(&cfg).unwrap());

    let base = short(scenario_v_formation(Topology::Cycle), 10.0);
    let alphas = [0.01, 0.1];
    let consts = [0.001, 1.0];
    assert_eq!(
        sweep(&base, &alphas, &consts, Execution::Sequential).unwrap(),
        sweep(&base, &alphas, &consts, Execution::Parallel).unwrap()
    );
}

#[test]
fn hold_semantics_in_every_mode() {
    for cfg in v_configs() {
        let et = run(&cfg).unwrap();
        check_hold_semantics(&et).unwrap();
        let pt = run(&cfg.clone().with_trigger(periodic_policy(5))).unwrap();
        check_hold_semantics(&pt).unwrap();
    }
}

#[test]
fn event_updates_never_exceed_periodic() {
    for cfg in v_configs() {
        let (_, et) = run_timed(&cfg).unwrap();
        let (_, pt) = run_timed(&cfg.clone().with_trigger(periodic_policy(1))).unwrap();
        let c = compare(&et, &pt).unwrap();
        assert!(
            c.et_updates <= c.pt_updates,
            "{}: {} > {}",
            cfg.name,
            c.et_updates,
            c.pt_updates
        );
        assert!(c.reduction >= 0.0);
    }
}

#[test]
fn counters_match_event_log() {
    let t = run(&scenario_v_formation(Topology::Complete)).unwrap();
    for i in 0..6 {
        let count = |c: Condition| {
            t.events
                .iter()
                .filter(|e| e.agent == i && e.condition == c)
                .count() as u64
        };
        assert_eq!(t.tau1[i], count(Condition::Distance));
        assert_eq!(t.tau2[i], count(Condition::Error));
        assert_eq!(count(Condition::Initial), 1);
    }
    assert!(t.events.windows(2).all(|w| w[0].time <= w[1].time));
    for e in &t.events {
        if e.condition != Condition::Initial {
            assert!(e.lhs > 0.0 && e.lhs >= e.threshold, "{e:?}");
        }
    }
}

#[test]
fn final_sample_is_the_true_final_state() {
    let mut cfg = short(scenario_v_formation(Topology::Cycle), 20.0);
    cfg.record_stride = 7;
    let t = run(&cfg).unwrap();
    let last = t.samples.last().unwrap();
    assert_eq!(last.step, t.steps);
    assert_eq!(last.positions, t.final_positions);
    assert_eq!(
        last.formation_error,
        formation_error(&cfg.formation, &t.final_positions).unwrap()
    );
    assert_eq!(t.final_formation_error, last.formation_error);
    assert!(t.samples.iter().rev().skip(1).all(|s| s.step % 7 == 0));
}

#[test]
fn periodic_counts_every_update() {
    let cfg =
        short(scenario_v_formation(Topology::Complete), 10.0).with_trigger(periodic_policy(4));
    let t = run(&cfg).unwrap();
    let expected = t.steps.div_ceil(4) as u64;
    assert!(t.periodic.iter().all(|&p| p == expected));
    assert!(t.tau1.iter().chain(&t.tau2).all(|&c| c == 0));
}

#[test]
fn closed_loop_refresh_still_resets_errors() {
    let mut cfg = short(scenario_v_formation(Topology::Complete), 20.0)
        .with_plant_model(PlantModel::SingleIntegrator);
    cfg.control_refresh = ControlRefresh::AnyBroadcast;
    let t = run(&cfg).unwrap();
    for s in &t.samples {
        for (i, trig) in s.triggered.iter().enumerate() {
            if trig.is_some() {
                assert_eq!(s.error_norms[i], 0.0);
            }
        }
    }
    assert!(t.centroid_drift < 1e-12);
}

#[test]
fn event_trigger_label() {
    assert_eq!(TriggerPolicy::Event.label(), "event");
    assert_eq!(periodic_policy(1).label(), "periodic");
}
