#![allow(dead_code)]

use etfc::engine::SimTrace;
use etfc::{AgentMatrix, FormationSpec, Graph};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spanning tree plus random chords; always connected.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    let p = rng.random_range(0.0..0.6);
    for i in 0..n {
        for j in i + 1..n {
            if !edges.contains(&(i, j)) && rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn random_positions(rng: &mut ChaCha8Rng, n: usize, dim: usize, scale: f64) -> AgentMatrix {
    let data = (0..n * dim)
        .map(|_| rng.random_range(-scale..scale))
        .collect();
    AgentMatrix::from_flat(dim, data).unwrap()
}

/// Elementwise weighted Laplacian: off-diagonal `−w_ij` on edges, diagonal
/// the sum of incident weights.
pub fn laplacian_elementwise(spec: &FormationSpec, pos: &AgentMatrix) -> DMatrix<f64> {
    let g = spec.graph();
    let n = g.n();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if let Some(nb) = g.neighbors(i).iter().find(|nb| nb.node == j) {
                let d2: f64 = pos
                    .row(i)
                    .iter()
                    .zip(pos.row(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let w = d2 - spec.desired()[nb.edge].powi(2);
                l[(i, j)] = -w;
                l[(i, i)] += w;
            }
        }
    }
    l
}

/// Trigger semantics every trace must satisfy, checked at stride 1:
/// the error of a triggering agent is zero right after its trigger, and an
/// agent's control only changes at its own triggers.
pub fn check_hold_semantics(trace: &SimTrace) -> Result<(), String> {
    let mut prev: Option<&etfc::engine::TraceSample> = None;
    for s in &trace.samples {
        for (i, trig) in s.triggered.iter().enumerate() {
            if trig.is_some() && s.error_norms[i] != 0.0 {
                return Err(format!(
                    "agent {i} error {} after trigger at step {}",
                    s.error_norms[i], s.step
                ));
            }
            if let Some(p) = prev {
                if s.step != p.step + 1 {
                    return Err("trace must be recorded at stride 1".into());
                }
                if trig.is_none() && s.controls.row(i) != p.controls.row(i) {
                    return Err(format!(
                        "agent {i} control changed without a trigger at step {}",
                        s.step
                    ));
                }
            }
        }
        prev = Some(s);
    }
    for e in &trace.events {
        let s = trace
            .samples
            .iter()
            .find(|s| s.step == e.step)
            .ok_or("event outside trace")?;
        if s.triggered[e.agent] != Some(e.condition) {
            return Err(format!("event {e:?} missing from trace"));
        }
    }
    Ok(())
}

/// Fraction of consecutive samples with `V` non-increasing.
pub fn v_nonincreasing_fraction(trace: &SimTrace) -> f64 {
    let v = trace.v_series();
    let ok = v.windows(2).filter(|w| w[1] <= w[0]).count();
    ok as f64 / (v.len() - 1) as f64
}
