use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{DatumChoice, ExperimentConfig};
use crate::error::CliError;
use crate::setup::{create_dir, create_file, write_json};
use crate::simulate::{datum, run_simulation, RunStatus, SimulationSummary};

/// Outcome of one member run; `summary` is absent when the run could not start.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanMember {
    pub index: usize,
    pub value: f64,
    pub directory: String,
    pub summary: Option<SimulationSummary>,
    pub error: Option<String>,
}

impl ScanMember {
    fn completed(&self) -> Option<&SimulationSummary> {
        self.summary.as_ref().filter(|s| s.status == RunStatus::Completed)
    }
}

/// Speeds between which the outcome switches from reflected to not.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdBracket {
    /// Fastest reflected incoming speed.
    pub reflected_below: Option<f64>,
    /// Slowest non-reflected incoming speed.
    pub transmitted_above: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VelocityScan {
    pub members: Vec<ScanMember>,
    /// False when fast and slow reflected runs are separated by one that was
    /// not reflected; the bracket is then absent.
    pub monotone: bool,
    pub threshold: Option<ThresholdBracket>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionScan {
    pub members: Vec<ScanMember>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Numerics(format!("cannot start workers: {e}")))
}

/// Runs one simulation per datum, each in its own subdirectory of `out`.
fn run_members(
    config: &ExperimentConfig,
    data: Vec<(f64, DatumChoice)>,
    prefix: &str,
    out: &Path,
    workers: usize,
) -> Result<Vec<ScanMember>, CliError> {
    create_dir(out)?;
    let pool = pool(workers)?;
    let members = pool.install(|| {
        data.par_iter()
            .enumerate()
            .map(|(index, (value, datum))| {
                let directory = format!("{prefix}_{index:03}");
                log::info!("{directory}: {prefix} = {value}");
                match run_simulation(config, datum, &out.join(&directory)) {
                    Ok(summary) => ScanMember { index, value: *value, directory, summary: Some(summary), error: None },
                    Err(e) => ScanMember { index, value: *value, directory, summary: None, error: Some(e.to_string()) },
                }
            })
            .collect()
    });
    Ok(members)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn status(m: &ScanMember) -> String {
    match &m.summary {
        Some(s) => serde_json::to_value(s.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        None => "failed".into(),
    }
}

/// Incoming speed towards the vertex for a scanned velocity value.
fn incoming_speed(datum: &DatumChoice, value: f64) -> f64 {
    match datum {
        DatumChoice::LineSoliton { .. } => -2.0 * value,
        _ => value,
    }
}

/// Orders completed runs by incoming speed and brackets the switch from
/// reflected to not reflected.
fn threshold(members: &[ScanMember], datum: &DatumChoice) -> (bool, Option<ThresholdBracket>) {
    let mut runs: Vec<(f64, bool)> = members
        .iter()
        .filter_map(|m| m.completed().map(|s| (incoming_speed(datum, m.value), s.reflected)))
        .collect();
    runs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let switches = runs.windows(2).filter(|w| w[0].1 != w[1].1).count();
    let starts_reflected = runs.first().is_none_or(|r| r.1);
    if switches > 1 || (switches == 1 && !starts_reflected) {
        return (false, None);
    }
    let reflected_below = runs.iter().filter(|r| r.1).map(|r| r.0).last();
    let transmitted_above = runs.iter().find(|r| !r.1).map(|r| r.0);
    (true, Some(ThresholdBracket { reflected_below, transmitted_above }))
}

/// The `scan-velocity` command. The scanned value replaces `v0` of a
/// `line_soliton` datum or `v` of a `slow_soliton` datum. Writes
/// `scan_velocity.csv` and `summary.json`; member failures are recorded and
/// the scan goes on.
pub fn scan_velocity(config: &ExperimentConfig, out: &Path, workers: usize) -> Result<VelocityScan, CliError> {
    let values = config
        .velocities
        .as_ref()
        .ok_or_else(|| CliError::Invalid("scan-velocity needs `scan.velocities`".into()))?;
    let base = datum(config)?.clone();
    let data = values
        .iter()
        .map(|&v| {
            let datum = match base {
                DatumChoice::LineSoliton { launch, x0, size, .. } => DatumChoice::LineSoliton { launch, x0, v0: v, size },
                DatumChoice::SlowSoliton { launch, x0, mu, theta, renormalize, .. } => {
                    DatumChoice::SlowSoliton { launch, x0, v, mu, theta, renormalize }
                }
                _ => return Err(CliError::Invalid("scan-velocity needs a line_soliton or slow_soliton datum".into())),
            };
            Ok((v, datum))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let members = run_members(config, data, "v", out, workers)?;
    let (monotone, threshold) = threshold(&members, &base);
    if !monotone {
        log::warn!("reflection is not monotone in the incoming speed");
    }

    let path = out.join("scan_velocity.csv");
    let mut table = csv::Writer::from_writer(create_file(&path)?);
    let header = ["index", "v", "status", "reflected", "collision_time", "max_empty_edge_peak", "launch_fraction", "momentum_ratio"];
    table.write_record(header).map_err(|e| CliError::output(&path, e))?;
    for m in &members {
        let s = m.summary.as_ref();
        table
            .write_record([
                m.index.to_string(),
                m.value.to_string(),
                status(m),
                s.map(|s| s.reflected.to_string()).unwrap_or_default(),
                opt(s.and_then(|s| s.collision_time)),
                opt(s.map(|s| s.max_empty_edge_peak)),
                opt(s.map(|s| s.launch_fraction_final)),
                opt(s.and_then(|s| s.momentum_ratio)),
            ])
            .map_err(|e| CliError::output(&path, e))?;
    }
    table.flush().map_err(|e| CliError::output(&path, e))?;
    let scan = VelocityScan { members, monotone, threshold };
    write_json(&out.join("summary.json"), &scan)?;
    Ok(scan)
}

/// The `scan-position` command. The scanned value replaces `x0` of the datum;
/// its velocity is kept as configured (zero unless set). Writes
/// `scan_position.csv` and `summary.json`.
pub fn scan_position(config: &ExperimentConfig, out: &Path, workers: usize) -> Result<PositionScan, CliError> {
    let values = config
        .positions
        .as_ref()
        .ok_or_else(|| CliError::Invalid("scan-position needs `scan.positions`".into()))?;
    let base = datum(config)?.clone();
    let data = values
        .iter()
        .map(|&x0| {
            let datum = match base {
                DatumChoice::LineSoliton { launch, v0, size, .. } => DatumChoice::LineSoliton { launch, x0, v0, size },
                DatumChoice::SlowSoliton { launch, v, mu, theta, renormalize, .. } => {
                    DatumChoice::SlowSoliton { launch, x0, v, mu, theta, renormalize }
                }
                _ => return Err(CliError::Invalid("scan-position needs a line_soliton or slow_soliton datum".into())),
            };
            Ok((x0, datum))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let members = run_members(config, data, "x0", out, workers)?;

    let path = out.join("scan_position.csv");
    let mut table = csv::Writer::from_writer(create_file(&path)?);
    let header = ["index", "x0", "status", "centroid_initial", "centroid_final", "outward_displacement", "max_centroid_excursion", "static", "reflected"];
    table.write_record(header).map_err(|e| CliError::output(&path, e))?;
    for m in &members {
        let s = m.summary.as_ref();
        table
            .write_record([
                m.index.to_string(),
                m.value.to_string(),
                status(m),
                opt(s.and_then(|s| s.centroid_initial)),
                opt(s.and_then(|s| s.centroid_final)),
                opt(s.and_then(|s| s.outward_displacement)),
                opt(s.and_then(|s| s.max_centroid_excursion)),
                s.map(|s| s.is_static.to_string()).unwrap_or_default(),
                s.map(|s| s.reflected.to_string()).unwrap_or_default(),
            ])
            .map_err(|e| CliError::output(&path, e))?;
    }
    table.flush().map_err(|e| CliError::output(&path, e))?;
    let scan = PositionScan { members };
    write_json(&out.join("summary.json"), &scan)?;
    Ok(scan)
}
