//! Builders for the reference experiments: six robots moving from a circle
//! into a V, and a 200-agent sphere split along its equator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ControlRefresh, SimConfig};
use crate::controller::ControllerParams;
use crate::dynamics::PlantConfig;
use crate::exec::Execution;
use crate::formation::FormationSpec;
use crate::graph::Graph;
use crate::matrix::AgentMatrix;
use crate::trigger::TriggerPolicy;

/// Step inferred from 3040 periodic updates over 100 s.
pub const V_DT: f64 = 0.0329;
pub const V_HORIZON: f64 = 100.0;
pub const V_CIRCLE_RADIUS: f64 = 0.9;
/// Distances of the agents on each arm from the vertex (m).
pub const V_ARM_OFFSETS: [f64; 3] = [0.2, 0.6, 1.0];
pub const V_OPENING: f64 = 2.0 * PI / 3.0;
pub const ELL: f64 = 0.05;

pub const SPHERE_RADIUS: f64 = 10.0;
pub const SPHERE_COMM_RADIUS: f64 = 5.0;
pub const SPHERE_SPLIT_DISTANCE: f64 = 20.0;
/// Step inferred from 500 periodic updates over 25 s.
pub const SPHERE_DT: f64 = 0.05;
pub const SPHERE_HORIZON: f64 = 25.0;
pub const SPHERE_ALPHA: f64 = 0.00025;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Complete,
    Cycle,
}

/// The 120° V: agents 0..2 on one arm at 1.0, 0.6, 0.2 m from the vertex,
/// agents 3..5 on the other arm at 0.2, 0.6, 1.0 m. Vertex at the origin,
/// arms symmetric about the x-axis.
pub fn v_formation_target() -> AgentMatrix {
    let half = V_OPENING / 2.0;
    let arm = |r: f64, sign: f64| [r * half.cos(), sign * r * half.sin()];
    let rows: Vec<[f64; 2]> = V_ARM_OFFSETS
        .iter()
        .rev()
        .map(|&r| arm(r, 1.0))
        .chain(V_ARM_OFFSETS.iter().map(|&r| arm(r, -1.0)))
        .collect();
    AgentMatrix::from_rows(&rows).expect("fixed shape")
}

/// Agent `k` at angle `2πk/6` on the 0.9 m circle.
pub fn v_formation_initial() -> AgentMatrix {
    let rows: Vec<[f64; 2]> = (0..6)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / 6.0;
            [V_CIRCLE_RADIUS * a.cos(), V_CIRCLE_RADIUS * a.sin()]
        })
        .collect();
    AgentMatrix::from_rows(&rows).expect("fixed shape")
}

/// Six unicycles, circle to V, event-triggered.
pub fn scenario_v_formation(topology: Topology) -> SimConfig {
    let (graph, alpha, name) = match topology {
        Topology::Complete => (Graph::complete(6), 0.01, "v-complete"),
        Topology::Cycle => (Graph::cycle(6), 0.05, "v-cycle"),
    };
    let spec = FormationSpec::from_target_placement(graph.expect("valid"), &v_formation_target())
        .expect("targets are distinct");
    let params = ControllerParams::uniform(&spec, 2, alpha, 0.001, 0.5);
    SimConfig {
        name: name.into(),
        formation: spec,
        initial_positions: v_formation_initial(),
        initial_headings: None,
        params,
        plant: PlantConfig::unicycle(V_DT, ELL),
        trigger: TriggerPolicy::Event,
        horizon: V_HORIZON,
        record_stride: 1,
        control_refresh: ControlRefresh::OwnTrigger,
        seed: 0,
        execution: Execution::Sequential,
        check_rigidity: true,
    }
}

/// `n` quasi-uniform points on a sphere, polar axis `z`:
/// `z_k = r (1 − (2k + 1)/n)`, azimuth `k` times the golden angle.
pub fn fibonacci_sphere(n: usize, radius: f64) -> AgentMatrix {
    let golden = PI * (3.0 - 5f64.sqrt());
    let rows: Vec<[f64; 3]> = (0..n)
        .map(|k| {
            let z = 1.0 - (2 * k + 1) as f64 / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            [
                radius * rho * phi.cos(),
                radius * rho * phi.sin(),
                radius * z,
            ]
        })
        .collect();
    AgentMatrix::from_rows(&rows).expect("fixed shape")
}

/// Agents on a Fibonacci sphere, linked within 5 m. Edges joining the two
/// hemispheres (opposite signs of `z`) must stretch to 20 m; all others keep
/// their initial length. `seed` rotates the lattice about the polar axis.
pub fn scenario_sphere(n: usize, seed: u64) -> SimConfig {
    let mut pos = fibonacci_sphere(n, SPHERE_RADIUS);
    if seed != 0 {
        // Fixed pseudo-random azimuth; keeps hemispheres intact.
        let phi = (seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64 / (1u64 << 53) as f64
            * 2.0
            * PI;
        let (s, c) = phi.sin_cos();
        for i in 0..n {
            let r = pos.row_mut(i);
            let (x, y) = (r[0], r[1]);
            r[0] = c * x - s * y;
            r[1] = s * x + c * y;
        }
    }
    let graph = Graph::disk(&pos, SPHERE_COMM_RADIUS).expect("valid");
    let desired = graph
        .edges()
        .iter()
        .map(|&(i, j)| {
            if crosses_equator(&pos, i, j) {
                SPHERE_SPLIT_DISTANCE
            } else {
                pos.distance(i, j)
            }
        })
        .collect();
    let spec = FormationSpec::from_distances(graph, desired).expect("positive distances");
    let params = ControllerParams::uniform(&spec, 3, SPHERE_ALPHA, 0.001, 0.5);
    SimConfig {
        name: "sphere".into(),
        formation: spec,
        initial_positions: pos,
        initial_headings: None,
        params,
        plant: PlantConfig::single_integrator(SPHERE_DT),
        trigger: TriggerPolicy::Event,
        horizon: SPHERE_HORIZON,
        record_stride: 1,
        control_refresh: ControlRefresh::OwnTrigger,
        seed,
        execution: Execution::Sequential,
        check_rigidity: false,
    }
}

pub(crate) fn crosses_equator(pos: &AgentMatrix, i: usize, j: usize) -> bool {
    (pos.get(i, 2) > 0.0) != (pos.get(j, 2) > 0.0)
}
