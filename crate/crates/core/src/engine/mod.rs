//! Deterministic closed-loop simulation.
//!
//! Each step runs in two phases on a snapshot of the controlled points:
//! every agent's trigger condition is evaluated first, then all triggered
//! agents broadcast and recompute their control from the freshest
//! broadcasts (including same-step broadcasts of neighbours). The plant is
//! then advanced with the held controls.

mod scenario;
mod sweep;

pub use scenario::{
    fibonacci_sphere, scenario_sphere, scenario_v_formation, v_formation_target, Topology,
};
pub use sweep::{sweep, SweepCell, SWEEP_ALPHAS, SWEEP_THRESHOLD_CONSTS};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::controller::{centroid, control_input, lyapunov, BroadcastTable, ControllerParams};
use crate::dynamics::{
    ell_point, si_step_in_place, si_to_uni, uni_step, PlantConfig, PlantModel, UnicyclePose,
};
use crate::error::SimError;
use crate::exec::Execution;
use crate::formation::FormationSpec;
use crate::graph::DEFAULT_RANK_TOL;
use crate::matrix::{distance, AgentMatrix};
use crate::metrics::{formation_error, mean_count, RunSummary};
use crate::trigger::{check_events, Condition, TriggerPolicy, TriggerRecord, TriggerState};

/// Which agents recompute their control after a broadcast.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlRefresh {
    /// Only the agent that triggered; every control is held between its
    /// owner's triggers.
    #[default]
    OwnTrigger,
    /// The triggering agent and all its neighbours, so every control always
    /// reflects the latest broadcasts. Neighbour refreshes are not counted
    /// as events.
    AnyBroadcast,
}

fn default_stride() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub name: String,
    pub formation: FormationSpec,
    /// Initial controlled points (ℓ-points for unicycles), `n × D`.
    pub initial_positions: AgentMatrix,
    /// Unicycle headings (rad). Defaults to every robot facing the centroid
    /// of the initial points.
    #[serde(default)]
    pub initial_headings: Option<Vec<f64>>,
    pub params: ControllerParams,
    pub plant: PlantConfig,
    pub trigger: TriggerPolicy,
    /// Horizon T (s); the step count is `round(T / dt)`.
    pub horizon: f64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default)]
    pub control_refresh: ControlRefresh,
    #[serde(default)]
    pub seed: u64,
    /// Per-agent evaluation strategy inside a step.
    #[serde(default)]
    pub execution: Execution,
    /// Warn when the initial placement is not infinitesimally rigid.
    #[serde(default = "default_true")]
    pub check_rigidity: bool,
}

impl SimConfig {
    pub fn n(&self) -> usize {
        self.formation.n()
    }

    pub fn dim(&self) -> usize {
        self.initial_positions.dim()
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.plant.dt).round() as usize
    }

    pub fn with_trigger(mut self, trigger: TriggerPolicy) -> Self {
        self.trigger = trigger;
        self
    }

    pub fn with_plant_model(mut self, model: PlantModel) -> Self {
        self.plant.model = model;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let n = self.n();
        let dim = self.dim();
        let cfg = |msg: String| Err(SimError::Config(msg));
        if self.initial_positions.n() != n {
            return cfg(format!(
                "{} initial positions for {} agents",
                self.initial_positions.n(),
                n
            ));
        }
        if !(2..=3).contains(&dim) {
            return cfg(format!("dimension must be 2 or 3, got {dim}"));
        }
        if !self.initial_positions.is_finite() {
            return cfg("initial positions must be finite".into());
        }
        if !(self.plant.dt > 0.0 && self.plant.dt.is_finite()) {
            return cfg(format!("dt must be > 0, got {}", self.plant.dt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return cfg(format!("horizon must be > 0, got {}", self.horizon));
        }
        if self.steps() == 0 {
            return cfg("horizon shorter than half a step".into());
        }
        if self.record_stride == 0 {
            return cfg("record_stride must be >= 1".into());
        }
        if let TriggerPolicy::Periodic { period: 0 } = self.trigger {
            return cfg("periodic trigger period must be >= 1".into());
        }
        if self.plant.model == PlantModel::Unicycle {
            if dim != 2 {
                return cfg("unicycle dynamics require D = 2".into());
            }
            if self.plant.ell.is_nan() || self.plant.ell <= 0.0 {
                return cfg(format!("ell must be > 0, got {}", self.plant.ell));
            }
            if let Some(h) = &self.initial_headings {
                if h.len() != n {
                    return cfg(format!("{} headings for {} agents", h.len(), n));
                }
            }
        }
        if !self.formation.graph().is_connected() {
            return cfg("communication graph is not connected".into());
        }
        self.params.validate(&self.formation, dim)?;
        Ok(())
    }
}

/// One recorded instant. Controls are those held over the following step;
/// error norms are taken after that instant's triggers were resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSample {
    pub step: usize,
    pub time: f64,
    pub positions: AgentMatrix,
    pub controls: AgentMatrix,
    pub error_norms: Vec<f64>,
    pub triggered: Vec<Option<Condition>>,
    pub formation_error: f64,
    pub lyapunov: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub name: String,
    pub trigger: TriggerPolicy,
    pub dt: f64,
    pub steps: usize,
    pub samples: Vec<TraceSample>,
    pub events: Vec<TriggerRecord>,
    pub tau1: Vec<u64>,
    pub tau2: Vec<u64>,
    pub periodic: Vec<u64>,
    pub saturated: bool,
    /// Largest control norm applied during the run (m/s).
    pub max_speed: f64,
    /// `‖centroid(T) − centroid(0)‖` of the controlled points (m).
    pub centroid_drift: f64,
    /// Path length travelled by each controlled point (m).
    pub path_length: Vec<f64>,
    pub initial_positions: AgentMatrix,
    pub final_positions: AgentMatrix,
    pub final_formation_error: f64,
    pub final_lyapunov: f64,
}

impl SimTrace {
    pub fn horizon(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn f_series(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.formation_error).collect()
    }

    pub fn v_series(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.lyapunov).collect()
    }

    /// Average updates per agent: `τ¹ + τ²` plus periodic updates.
    pub fn total_updates_avg(&self) -> f64 {
        mean_count(&self.tau1) + mean_count(&self.tau2) + mean_count(&self.periodic)
    }

    pub fn summary(&self, wall_time: f64) -> RunSummary {
        RunSummary {
            scenario: self.name.clone(),
            trigger: self.trigger.label().to_string(),
            n: self.final_positions.n(),
            dim: self.final_positions.dim(),
            steps: self.steps,
            dt: self.dt,
            horizon: self.horizon(),
            tau1_avg: mean_count(&self.tau1),
            tau2_avg: mean_count(&self.tau2),
            periodic_avg: mean_count(&self.periodic),
            total_updates_avg: self.total_updates_avg(),
            f_initial: self.samples.first().map_or(f64::NAN, |s| s.formation_error),
            f_final: self.final_formation_error,
            v_final: self.final_lyapunov,
            saturated: self.saturated,
            max_speed: self.max_speed,
            centroid_drift: self.centroid_drift,
            wall_time,
            f_series: self.f_series(),
        }
    }
}

enum Plant {
    Single(AgentMatrix),
    Unicycle { poses: Vec<UnicyclePose>, ell: f64 },
}

impl Plant {
    fn new(cfg: &SimConfig) -> Self {
        let pos = &cfg.initial_positions;
        match cfg.plant.model {
            PlantModel::SingleIntegrator => Plant::Single(pos.clone()),
            PlantModel::Unicycle => {
                let ell = cfg.plant.ell;
                let c = centroid(pos);
                let poses = (0..pos.n())
                    .map(|i| {
                        let p = pos.row(i);
                        let theta = match &cfg.initial_headings {
                            Some(h) => h[i],
                            None => (c[1] - p[1]).atan2(c[0] - p[0]),
                        };
                        UnicyclePose::from_ell_point([p[0], p[1]], theta, ell)
                    })
                    .collect();
                Plant::Unicycle { poses, ell }
            }
        }
    }

    /// The controlled points.
    fn points(&self, out: &mut AgentMatrix) {
        match self {
            Plant::Single(p) => out.clone_from(p),
            Plant::Unicycle { poses, ell } => {
                for (i, pose) in poses.iter().enumerate() {
                    out.set_row(i, &ell_point(pose, *ell));
                }
            }
        }
    }

    fn step(&mut self, u: &AgentMatrix, dt: f64) {
        match self {
            Plant::Single(p) => si_step_in_place(p, u, dt),
            Plant::Unicycle { poses, ell } => {
                for (i, pose) in poses.iter_mut().enumerate() {
                    let r = u.row(i);
                    let (v, w) = si_to_uni([r[0], r[1]], pose, *ell);
                    *pose = uni_step(pose, v, w, dt);
                }
            }
        }
    }
}

/// Runs a configuration to completion.
pub fn run(cfg: &SimConfig) -> Result<SimTrace, SimError> {
    cfg.validate()?;
    let spec = &cfg.formation;
    let params = &cfg.params;
    let graph = spec.graph();
    let (n, dim) = (cfg.n(), cfg.dim());
    let dt = cfg.plant.dt;
    let steps = cfg.steps();
    let exec = cfg.execution;
    let alpha_v = params.gain.nominal_alpha();

    if cfg.check_rigidity && !graph.is_rigid(&cfg.initial_positions, DEFAULT_RANK_TOL) {
        log::warn!(
            "{}: communication graph is not rigid in R^{dim} at the initial placement",
            cfg.name
        );
    }

    let mut plant = Plant::new(cfg);
    let mut pos = AgentMatrix::zeros(n, dim);
    plant.points(&mut pos);
    let initial = pos.clone();
    let c0 = centroid(&pos);

    let mut bt = BroadcastTable::new(pos.clone(), 0.0);
    let mut ts = TriggerState::new(n, dim);
    let mut u = AgentMatrix::zeros(n, dim);
    let mut saturated = false;
    let mut max_speed: f64 = 0.0;
    let mut path_length = vec![0.0; n];
    let mut samples = Vec::new();
    let mut prev = pos.clone();
    let mut refresh = vec![false; n];

    let sample = |step: usize,
                  pos: &AgentMatrix,
                  u: &AgentMatrix,
                  ts: &TriggerState,
                  triggered: Vec<Option<Condition>>|
     -> Result<TraceSample, SimError> {
        Ok(TraceSample {
            step,
            time: step as f64 * dt,
            positions: pos.clone(),
            controls: u.clone(),
            error_norms: (0..n).map(|i| ts.errors().row_norm(i)).collect(),
            triggered,
            formation_error: formation_error(spec, pos)
                .map_err(|e| SimError::Config(e.to_string()))?,
            lyapunov: lyapunov(spec, alpha_v, pos),
        })
    };

    for k in 0..steps {
        let t = k as f64 * dt;
        ts.update_errors(&bt, &pos);

        let fired: Vec<(usize, Condition, f64, f64)> = match cfg.trigger {
            TriggerPolicy::Periodic { .. } if cfg.trigger.periodic_fires(k) => {
                (0..n).map(|i| (i, Condition::Periodic, 0.0, 0.0)).collect()
            }
            TriggerPolicy::Periodic { .. } => Vec::new(),
            TriggerPolicy::Event if k == 0 => {
                (0..n).map(|i| (i, Condition::Initial, 0.0, 0.0)).collect()
            }
            TriggerPolicy::Event => check_events(spec, params, &pos, &bt, &ts, exec)?
                .into_iter()
                .map(|e| (e.agent, e.condition, e.lhs, e.threshold))
                .collect(),
        };

        let mut triggered = vec![None; n];
        refresh.iter_mut().for_each(|r| *r = false);
        for &(agent, condition, lhs, threshold) in &fired {
            bt.broadcast(agent, pos.row(agent), t);
            ts.record(TriggerRecord {
                agent,
                step: k,
                time: t,
                condition,
                lhs,
                threshold,
            });
            triggered[agent] = Some(condition);
            refresh[agent] = true;
            if cfg.control_refresh == ControlRefresh::AnyBroadcast {
                for nb in graph.neighbors(agent) {
                    refresh[nb.node] = true;
                }
            }
        }
        let to_update: Vec<usize> = (0..n).filter(|&i| refresh[i]).collect();
        let new_u = exec.map_slice(&to_update, |&i| control_input(spec, params, i, &bt));
        for (&i, ui) in to_update.iter().zip(new_u) {
            u.set_row(i, &ui);
        }

        for i in 0..n {
            let s = u.row_norm(i);
            max_speed = max_speed.max(s);
            saturated |= s > cfg.plant.v_max;
        }

        if k % cfg.record_stride == 0 {
            samples.push(sample(k, &pos, &u, &ts, triggered)?);
        }

        prev.clone_from(&pos);
        plant.step(&u, dt);
        plant.points(&mut pos);
        for (i, len) in path_length.iter_mut().enumerate() {
            if !pos.row(i).iter().all(|v| v.is_finite()) {
                return Err(SimError::Divergence {
                    step: k + 1,
                    time: (k + 1) as f64 * dt,
                    agent: i,
                });
            }
            *len += distance(pos.row(i), prev.row(i));
        }
    }

    ts.update_errors(&bt, &pos);
    samples.push(sample(steps, &pos, &u, &ts, vec![None; n])?);

    let c1 = centroid(&pos);
    let final_formation_error =
        formation_error(spec, &pos).map_err(|e| SimError::Config(e.to_string()))?;
    let final_lyapunov = lyapunov(spec, alpha_v, &pos);
    let (tau1, tau2, periodic, events) = ts.into_parts();
    Ok(SimTrace {
        name: cfg.name.clone(),
        trigger: cfg.trigger,
        dt,
        steps,
        samples,
        events,
        tau1,
        tau2,
        periodic,
        saturated,
        max_speed,
        centroid_drift: distance(&c0, &c1),
        path_length,
        initial_positions: initial,
        final_positions: pos,
        final_formation_error,
        final_lyapunov,
    })
}

/// [`run`] plus wall-clock timing, returning the summary alongside the trace.
pub fn run_timed(cfg: &SimConfig) -> Result<(SimTrace, RunSummary), SimError> {
    let start = Instant::now();
    let trace = run(cfg)?;
    let summary = trace.summary(start.elapsed().as_secs_f64());
    Ok((trace, summary))
}
