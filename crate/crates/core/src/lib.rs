//! Distributed event-triggered, distance-based formation control.
//!
//! Agents with single-integrator (or unicycle, via a look-ahead point)
//! dynamics drive their inter-agent distances to prescribed values. Each
//! agent holds its control between its own events and refreshes it only when
//! its measurement error crosses a state-dependent threshold.
//!
//! Modules:
//! - [`graph`]: communication topology, Laplacian, incidence, rigidity test.
//! - [`formation`]: desired distances and the normalization constant Δ.
//! - [`controller`]: control law, weighted Laplacian, Lyapunov value, centroid.
//! - [`trigger`]: event thresholds and the periodic baseline.
//! - [`dynamics`]: single-integrator and unicycle plants.
//! - [`engine`]: the simulation loop, reference scenarios and sweeps.
//! - [`metrics`]: trigger counts, formation error, run comparison.

pub mod controller;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod exec;
pub mod formation;
pub mod graph;
pub mod matrix;
pub mod metrics;
pub mod trigger;

pub use controller::{BroadcastTable, ControllerParams, Gain};
pub use dynamics::{PlantConfig, PlantModel};
pub use engine::{run, run_timed, ControlRefresh, SimConfig, SimTrace, Topology};
pub use error::{FormationError, GraphError, MetricsError, ParamError, SimError};
pub use exec::Execution;
pub use formation::FormationSpec;
pub use graph::Graph;
pub use matrix::AgentMatrix;
pub use metrics::RunSummary;
pub use trigger::{Condition, TriggerPolicy};
