//! Velocity-gain × threshold-constant grid over a base scenario.

use serde::{Deserialize, Serialize};

use super::{run, SimConfig};
use crate::error::SimError;
use crate::exec::Execution;

pub const SWEEP_ALPHAS: [f64; 3] = [0.01, 0.05, 0.1];
pub const SWEEP_THRESHOLD_CONSTS: [f64; 6] = [0.0001, 0.001, 0.01, 0.1, 1.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub alpha: f64,
    /// Uniform `A_{i,d}`.
    pub a: f64,
    pub f_final: f64,
    /// Average `τ¹ + τ²` per agent.
    pub triggers_total: f64,
    pub saturated: bool,
}

/// Runs every `(alpha, A)` pair, `A` varying fastest. Cells are independent
/// and may run on the rayon pool; output order never depends on `exec`.
pub fn sweep(
    base: &SimConfig,
    alphas: &[f64],
    a_values: &[f64],
    exec: Execution,
) -> Result<Vec<SweepCell>, SimError> {
    let grid: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&al| a_values.iter().map(move |&a| (al, a)))
        .collect();
    let results = exec.map_slice(&grid, |&(alpha, a)| {
        let mut cfg = base.clone();
        cfg.params = cfg.params.with_alpha(alpha).with_threshold_const(a);
        cfg.record_stride = cfg.steps().max(1);
        cfg.check_rigidity = false;
        run(&cfg).map(|t| SweepCell {
            alpha,
            a,
            f_final: t.final_formation_error,
            triggers_total: t.total_updates_avg(),
            saturated: t.saturated,
        })
    });
    results.into_iter().collect()
}
