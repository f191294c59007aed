//! CSV and `key=value` artifacts, with readers that parse them back.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! reader recovers the exact values that were written.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use etfc::engine::{SimTrace, SweepCell};
use etfc::trigger::TriggerRecord;
use etfc::{Condition, RunSummary};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// One row of the trace CSV: `t, agent, x_1..x_D, u_1..u_D, e_norm,
/// triggered, condition`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub agent: usize,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub e_norm: f64,
    pub triggered: bool,
    pub condition: Option<Condition>,
}

pub fn trace_rows(trace: &SimTrace) -> Vec<TraceRow> {
    let mut rows = Vec::new();
    for s in &trace.samples {
        for i in 0..s.positions.n() {
            rows.push(TraceRow {
                t: s.time,
                agent: i,
                x: s.positions.row(i).to_vec(),
                u: s.controls.row(i).to_vec(),
                e_norm: s.error_norms[i],
                triggered: s.triggered[i].is_some(),
                condition: s.triggered[i],
            });
        }
    }
    rows
}

pub fn write_trace(path: &Path, trace: &SimTrace) -> Result<(), CliError> {
    let dim = trace.final_positions.dim();
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string(), "agent".to_string()];
    header.extend((1..=dim).map(|d| format!("x_{d}")));
    header.extend((1..=dim).map(|d| format!("u_{d}")));
    header.extend(["e_norm", "triggered", "condition"].map(String::from));
    w.write_record(&header)?;
    for r in trace_rows(trace) {
        let mut rec = vec![r.t.to_string(), r.agent.to_string()];
        rec.extend(r.x.iter().chain(&r.u).map(f64::to_string));
        rec.push(r.e_norm.to_string());
        rec.push(u8::from(r.triggered).to_string());
        rec.push(r.condition.map(|c| c.to_string()).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    let ncols = r.headers()?.len();
    if ncols < 7 || (ncols - 5) % 2 != 0 {
        return Err(CliError::Parse(format!(
            "{}: unexpected trace header",
            path.display()
        )));
    }
    let dim = (ncols - 5) / 2;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64, CliError> {
            rec[k]
                .parse()
                .map_err(|_| CliError::Parse(format!("bad number {:?}", &rec[k])))
        };
        let condition = match &rec[ncols - 1] {
            "" => None,
            s => Some(s.parse::<Condition>().map_err(CliError::Parse)?),
        };
        rows.push(TraceRow {
            t: num(0)?,
            agent: rec[1]
                .parse()
                .map_err(|_| CliError::Parse(format!("bad agent {:?}", &rec[1])))?,
            x: (0..dim).map(|d| num(2 + d)).collect::<Result<_, _>>()?,
            u: (0..dim)
                .map(|d| num(2 + dim + d))
                .collect::<Result<_, _>>()?,
            e_norm: num(2 + 2 * dim)?,
            triggered: &rec[3 + 2 * dim] == "1",
            condition,
        });
    }
    Ok(rows)
}

pub fn write_events(path: &Path, events: &[TriggerRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    if events.is_empty() {
        w.write_record(["agent", "step", "time", "condition", "lhs", "threshold"])?;
    }
    for e in events {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_events(path: &Path) -> Result<Vec<TriggerRecord>, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Sweep CSV row: `alpha, A, F_T, triggers_total, saturated`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "F_T")]
    pub f_t: f64,
    pub triggers_total: f64,
    pub saturated: bool,
}

impl From<&SweepCell> for SweepRow {
    fn from(c: &SweepCell) -> Self {
        SweepRow {
            alpha: c.alpha,
            a: c.a,
            f_t: c.f_final,
            triggers_total: c.triggers_total,
            saturated: c.saturated,
        }
    }
}

pub fn write_sweep(path: &Path, cells: &[SweepCell]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for c in cells {
        w.serialize(SweepRow::from(c))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep(path: &Path) -> Result<Vec<SweepRow>, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Per-agent movement over a run (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementRow {
    pub agent: usize,
    /// Length of the travelled path.
    pub total_displacement: f64,
    /// `‖x(T) − x(0)‖`.
    pub net_displacement: f64,
}

pub fn displacement_rows(trace: &SimTrace) -> Vec<DisplacementRow> {
    (0..trace.final_positions.n())
        .map(|i| DisplacementRow {
            agent: i,
            total_displacement: trace.path_length[i],
            net_displacement: etfc::matrix::distance(
                trace.initial_positions.row(i),
                trace.final_positions.row(i),
            ),
        })
        .collect()
}

pub fn write_displacements(path: &Path, rows: &[DisplacementRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_displacements(path: &Path) -> Result<Vec<DisplacementRow>, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Flat `key=value` lines; `f_series` is a comma-separated list.
pub fn format_summary(s: &RunSummary) -> String {
    let series: Vec<String> = s.f_series.iter().map(f64::to_string).collect();
    let lines = [
        ("scenario", s.scenario.clone()),
        ("trigger", s.trigger.clone()),
        ("n", s.n.to_string()),
        ("dim", s.dim.to_string()),
        ("steps", s.steps.to_string()),
        ("dt", s.dt.to_string()),
        ("horizon", s.horizon.to_string()),
        ("tau1_avg", s.tau1_avg.to_string()),
        ("tau2_avg", s.tau2_avg.to_string()),
        ("periodic_avg", s.periodic_avg.to_string()),
        ("total_updates_avg", s.total_updates_avg.to_string()),
        ("f_initial", s.f_initial.to_string()),
        ("f_final", s.f_final.to_string()),
        ("v_final", s.v_final.to_string()),
        ("saturated", s.saturated.to_string()),
        ("max_speed", s.max_speed.to_string()),
        ("centroid_drift", s.centroid_drift.to_string()),
        ("wall_time", s.wall_time.to_string()),
        ("f_series", series.join(",")),
    ];
    lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn write_summary(path: &Path, s: &RunSummary) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(format_summary(s).as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<RunSummary, CliError> {
    let mut map = std::collections::HashMap::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("summary line without '=': {line:?}")))?;
        map.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| {
        map.get(k)
            .cloned()
            .ok_or_else(|| CliError::Parse(format!("summary missing {k}")))
    };
    fn parse<T: std::str::FromStr>(k: &str, v: String) -> Result<T, CliError> {
        v.parse()
            .map_err(|_| CliError::Parse(format!("summary {k}: bad value {v:?}")))
    }
    let num = |k: &str| -> Result<f64, CliError> { parse(k, get(k)?) };
    let series = get("f_series")?;
    let f_series = if series.is_empty() {
        Vec::new()
    } else {
        series
            .split(',')
            .map(|v| parse("f_series", v.to_string()))
            .collect::<Result<_, _>>()?
    };
    Ok(RunSummary {
        scenario: get("scenario")?,
        trigger: get("trigger")?,
        n: parse("n", get("n")?)?,
        dim: parse("dim", get("dim")?)?,
        steps: parse("steps", get("steps")?)?,
        dt: num("dt")?,
        horizon: num("horizon")?,
        tau1_avg: num("tau1_avg")?,
        tau2_avg: num("tau2_avg")?,
        periodic_avg: num("periodic_avg")?,
        total_updates_avg: num("total_updates_avg")?,
        f_initial: num("f_initial")?,
        f_final: num("f_final")?,
        v_final: num("v_final")?,
        saturated: parse("saturated", get("saturated")?)?,
        max_speed: num("max_speed")?,
        centroid_drift: num("centroid_drift")?,
        wall_time: num("wall_time")?,
        f_series,
    })
}
