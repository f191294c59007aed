//! Command-line front end: scenario selection, config I/O and artifact
//! writing for the `etfc` simulator.
//!
//! Exit codes: 0 on success, 1 for configuration or I/O errors, 2 when a
//! run diverges.

pub mod io;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use etfc::engine::{
    scenario_sphere, scenario_v_formation, sweep, SimTrace, SWEEP_ALPHAS, SWEEP_THRESHOLD_CONSTS,
};
use etfc::metrics::compare;
use etfc::trigger::periodic_policy;
use etfc::{
    run_timed, Execution, PlantModel, RunSummary, SimConfig, SimError, Topology, TriggerPolicy,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse: {0}")]
    Parse(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Sim(SimError::Divergence { .. }) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "etfc",
    version,
    about = "Event-triggered distance-based formation control simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write trace, events and summary.
    Run(RunArgs),
    /// Gain × threshold-constant grid on the V-formation.
    Sweep(SweepArgs),
    /// The 200-agent sphere split, event-triggered and periodic.
    Sphere(SphereArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    VComplete,
    VCycle,
    Sphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TriggerKind {
    Event,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dynamics {
    Si,
    Unicycle,
}

/// Overrides applied on top of a scenario or config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, value_enum)]
    pub trigger: Option<TriggerKind>,
    /// Steps between periodic updates.
    #[arg(long, default_value_t = 1)]
    pub period: usize,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub record_stride: Option<usize>,
    #[arg(long, value_enum)]
    pub dynamics: Option<Dynamics>,
    /// Evaluate agents on the rayon pool.
    #[arg(long)]
    pub parallel: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut SimConfig) {
        match self.trigger {
            Some(TriggerKind::Event) => cfg.trigger = TriggerPolicy::Event,
            Some(TriggerKind::Periodic) => cfg.trigger = periodic_policy(self.period),
            None => {}
        }
        if let Some(dt) = self.dt {
            cfg.plant.dt = dt;
        }
        if let Some(h) = self.horizon {
            cfg.horizon = h;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(s) = self.record_stride {
            cfg.record_stride = s;
        }
        match self.dynamics {
            Some(Dynamics::Si) => cfg.plant.model = PlantModel::SingleIntegrator,
            Some(Dynamics::Unicycle) => cfg.plant.model = PlantModel::Unicycle,
            None => {}
        }
        if self.parallel {
            cfg.execution = Execution::Parallel;
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, value_enum, conflicts_with = "config")]
    pub scenario: Option<Scenario>,
    /// JSON config file (the format written by `--dump-config`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Write the resolved config to this path and exit without running.
    #[arg(long)]
    pub dump_config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "v-cycle", conflicts_with = "config")]
    pub scenario: Scenario,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Comma-separated gains.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Comma-separated threshold constants `A`.
    #[arg(long = "a-values", value_delimiter = ',')]
    pub a_values: Option<Vec<f64>>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, value_enum)]
    pub dynamics: Option<Dynamics>,
    /// Saturation limit for the flag (m/s).
    #[arg(long)]
    pub v_max: Option<f64>,
    /// Run cells one after another.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SphereArgs {
    #[arg(long, default_value_t = 200)]
    pub agents: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub record_stride: Option<usize>,
    /// Steps between periodic updates in the baseline run.
    #[arg(long, default_value_t = 1)]
    pub period: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub parallel: bool,
}

pub fn scenario_config(s: Scenario, seed: u64) -> SimConfig {
    match s {
        Scenario::VComplete => scenario_v_formation(Topology::Complete),
        Scenario::VCycle => scenario_v_formation(Topology::Cycle),
        Scenario::Sphere => scenario_sphere(200, seed),
    }
}

pub fn load_config(path: &Path) -> Result<SimConfig, CliError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn save_config(path: &Path, cfg: &SimConfig) -> Result<(), CliError> {
    fs::write(path, serde_json::to_string_pretty(cfg)?)?;
    Ok(())
}

/// Resolves the config for `run`: file or scenario, then overrides.
pub fn resolve_run_config(args: &RunArgs) -> Result<SimConfig, CliError> {
    let mut cfg = match (&args.config, args.scenario) {
        (Some(path), _) => load_config(path)?,
        (None, s) => scenario_config(
            s.unwrap_or(Scenario::VComplete),
            args.overrides.seed.unwrap_or(0),
        ),
    };
    args.overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

/// File stem for a run's artifacts, e.g. `v-complete_event`.
pub fn artifact_stem(cfg: &SimConfig) -> String {
    format!("{}_{}", cfg.name, cfg.trigger.label())
}

/// Writes `<stem>_trace.csv`, `<stem>_events.csv` and `<stem>_summary.txt`.
pub fn write_run(
    out: &Path,
    stem: &str,
    trace: &SimTrace,
    summary: &RunSummary,
) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    io::write_trace(&out.join(format!("{stem}_trace.csv")), trace)?;
    io::write_events(&out.join(format!("{stem}_events.csv")), &trace.events)?;
    io::write_summary(&out.join(format!("{stem}_summary.txt")), summary)?;
    log::info!("wrote {stem} artifacts to {}", out.display());
    Ok(())
}

fn print_summary(s: &RunSummary) {
    if s.trigger == "event" {
        println!(
            "{} event: tau1={:.1} tau2={:.1} total={:.1} F(T)={:.5} saturated={} ({:.2} s)",
            s.scenario,
            s.tau1_avg,
            s.tau2_avg,
            s.total_updates_avg,
            s.f_final,
            s.saturated,
            s.wall_time
        );
    } else {
        println!(
            "{} periodic: updates={:.1} F(T)={:.5} saturated={} ({:.2} s)",
            s.scenario, s.total_updates_avg, s.f_final, s.saturated, s.wall_time
        );
    }
}

pub fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let cfg = resolve_run_config(args)?;
    if let Some(path) = &args.dump_config {
        save_config(path, &cfg)?;
        return Ok(());
    }
    let (trace, summary) = run_timed(&cfg)?;
    write_run(&args.out, &artifact_stem(&cfg), &trace, &summary)?;
    print_summary(&summary);
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let mut base = match &args.config {
        Some(path) => load_config(path)?,
        None => scenario_config(args.scenario, 0),
    };
    if let Some(dt) = args.dt {
        base.plant.dt = dt;
    }
    if let Some(h) = args.horizon {
        base.horizon = h;
    }
    if let Some(v) = args.v_max {
        base.plant.v_max = v;
    }
    match args.dynamics {
        Some(Dynamics::Si) => base.plant.model = PlantModel::SingleIntegrator,
        Some(Dynamics::Unicycle) => base.plant.model = PlantModel::Unicycle,
        None => {}
    }
    base.validate()?;
    let alphas = args.alphas.clone().unwrap_or_else(|| SWEEP_ALPHAS.to_vec());
    let a_values = args
        .a_values
        .clone()
        .unwrap_or_else(|| SWEEP_THRESHOLD_CONSTS.to_vec());
    if alphas.is_empty() || a_values.is_empty() {
        return Err(CliError::Config("empty sweep grid".into()));
    }
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let cells = sweep(&base, &alphas, &a_values, exec)?;
    fs::create_dir_all(&args.out)?;
    let path = args.out.join(format!("{}_sweep.csv", base.name));
    io::write_sweep(&path, &cells)?;
    for c in &cells {
        println!(
            "alpha={} A={} F(T)={:.5} triggers={:.1}{}",
            c.alpha,
            c.a,
            c.f_final,
            c.triggers_total,
            if c.saturated { " saturated" } else { "" }
        );
    }
    Ok(())
}

pub fn cmd_sphere(args: &SphereArgs) -> Result<(), CliError> {
    if args.agents < 2 {
        return Err(CliError::Config("sphere needs at least 2 agents".into()));
    }
    let mut et_cfg = scenario_sphere(args.agents, args.seed);
    if let Some(dt) = args.dt {
        et_cfg.plant.dt = dt;
    }
    if let Some(h) = args.horizon {
        et_cfg.horizon = h;
    }
    if let Some(s) = args.record_stride {
        et_cfg.record_stride = s;
    }
    if args.parallel {
        et_cfg.execution = Execution::Parallel;
    }
    let pt_cfg = et_cfg.clone().with_trigger(periodic_policy(args.period));
    et_cfg.validate()?;
    pt_cfg.validate()?;

    let (et, et_sum) = run_timed(&et_cfg)?;
    let (pt, pt_sum) = run_timed(&pt_cfg)?;
    write_run(&args.out, &artifact_stem(&et_cfg), &et, &et_sum)?;
    write_run(&args.out, &artifact_stem(&pt_cfg), &pt, &pt_sum)?;
    let disp = io::displacement_rows(&et);
    io::write_displacements(&args.out.join("sphere_event_displacement.csv"), &disp)?;

    print_summary(&et_sum);
    print_summary(&pt_sum);
    if let Ok(c) = compare(&et_sum, &pt_sum) {
        println!("update reduction {:.1}%", 100.0 * c.reduction);
    }
    let still = disp.iter().filter(|d| d.total_displacement < 0.1).count();
    println!("{still}/{} agents moved less than 0.1 m", disp.len());
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Sphere(a) => cmd_sphere(a),
    }
}
