//! Writes a result directory: `report.json`, `actions.jsonl`,
//! `power/<pm>.csv` and `metrics.csv`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::engine::{RunMeta, SimulationResult};
use super::metrics::{availability, worst_case_daily_rate};
use super::SimError;
use crate::economics::CostReport;
use crate::geotemporal::write_trace;

/// Headline QoS numbers stored next to the cost report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub migrations: usize,
    pub pause_intervals: usize,
    pub paused_hours: f64,
    pub mean_availability: f64,
    pub min_availability: f64,
    pub worst_daily_migrations: f64,
    pub net_cost: f64,
    /// Steps that ended with unallocated VMs or overloaded PMs.
    pub violation_steps: usize,
}

impl Summary {
    pub fn of(result: &SimulationResult) -> Result<Self, SimError> {
        let avail: Vec<f64> = result
            .lifetimes
            .iter()
            .filter(|(_, l)| l.duration_s() > 0.0)
            .map(|(vm, _)| availability(result, *vm))
            .collect::<Result<_, _>>()?;
        let worst = worst_case_daily_rate(result)?;
        Ok(Self {
            migrations: result.migrations.len(),
            pause_intervals: result.pauses.len(),
            paused_hours: result.pauses.iter().map(|p| p.duration_s()).sum::<f64>() / 3600.0,
            mean_availability: if avail.is_empty() { 1.0 } else { avail.iter().sum::<f64>() / avail.len() as f64 },
            min_availability: avail.iter().copied().fold(1.0, f64::min),
            worst_daily_migrations: worst.values().iter().copied().fold(0.0, f64::max),
            net_cost: result.cost_report.net_cost(),
            violation_steps: result.steps.iter().filter(|s| s.unallocated + s.overloaded > 0).count(),
        })
    }
}

#[derive(Serialize)]
struct Report<'a> {
    meta: &'a RunMeta,
    cost_report: &'a CostReport,
    summary: Summary,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SimError + '_ {
    move |source| SimError::Io { path: path.to_path_buf(), source }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, SimError> {
    Ok(BufWriter::new(fs::File::create(path).map_err(io_err(path))?))
}

/// Writes `result` under `dir`, creating it if needed.
pub fn write_result_dir(result: &SimulationResult, dir: &Path) -> Result<(), SimError> {
    let power_dir = dir.join("power");
    fs::create_dir_all(&power_dir).map_err(io_err(&power_dir))?;

    let path = dir.join("report.json");
    let report = Report { meta: &result.meta, cost_report: &result.cost_report, summary: Summary::of(result)? };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    fs::write(&path, text).map_err(io_err(&path))?;

    let path = dir.join("actions.jsonl");
    let mut w = create(&path)?;
    let mut decisions = result.decisions.iter().peekable();
    for a in &result.actions {
        while let Some(d) = decisions.next_if(|d| d.step < a.step) {
            writeln!(w, "{}", json!({"record": "decision", "step": d.step, "time": d.time, "info": d.info}))
                .map_err(io_err(&path))?;
        }
        let line = json!({"record": "action", "step": a.step, "source": a.source, "action": a.action});
        writeln!(w, "{line}").map_err(io_err(&path))?;
    }
    for d in decisions {
        writeln!(w, "{}", json!({"record": "decision", "step": d.step, "time": d.time, "info": d.info}))
            .map_err(io_err(&path))?;
    }
    w.flush().map_err(io_err(&path))?;

    for (pm, series) in &result.power {
        let path: PathBuf = power_dir.join(format!("{pm}.csv"));
        write_trace(series, create(&path)?).map_err(|e| SimError::Io {
            path: path.clone(),
            source: std::io::Error::other(e.to_string()),
        })?;
    }

    let path = dir.join("metrics.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    for s in &result.steps {
        w.serialize(s).map_err(|e| SimError::Io { path: path.clone(), source: std::io::Error::other(e.to_string()) })?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(())
}
