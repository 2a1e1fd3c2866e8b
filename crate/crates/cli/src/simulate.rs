use std::path::Path;

use serde::Serialize;

use nlsgraph::discretization::{DiscreteOperator, SnapshotWriter};
use nlsgraph::dynamics::{
    detect_collision_time, evolve, write_edge_series_csv, write_observables_csv, CrankNicolson, DynamicsError,
    EvolveOptions, Integrator, Observers, OrbitalObserver, Trajectory,
};
use nlsgraph::groundstate::reference_profile;
use nlsgraph::observables::{mass, OrbitalSearch};

use crate::config::{DatumChoice, ExperimentConfig, Observable, RunSettings};
use crate::error::CliError;
use crate::setup::{self, create_dir, create_file, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    MassGuardAbort,
    StepFailure,
}

/// Everything `simulate` reports about one run. Every number is computed from
/// the exported observable series, so it can be re-derived from the tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub status: RunStatus,
    pub error: Option<String>,
    pub dt: f64,
    pub h: f64,
    pub steps: usize,
    /// Time of the last recorded state.
    pub t_final: f64,
    pub max_nonlinear_iterations: usize,
    /// Time of the largest kinetic energy.
    pub collision_time: Option<f64>,
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub momentum_initial: f64,
    pub momentum_final: f64,
    /// `p(t_final)/p(0)`, absent when the initial momentum vanishes.
    pub momentum_ratio: Option<f64>,
    pub launch_edge: usize,
    pub launch_fraction_final: f64,
    /// Terminal launch-edge mass fraction above the configured threshold.
    pub reflected: bool,
    /// Largest `|u|²` on each edge over every step.
    pub edge_peaks: Vec<f64>,
    /// Largest entry of `edge_peaks` off the launch edge.
    pub max_empty_edge_peak: f64,
    pub centroid_initial: Option<f64>,
    pub centroid_final: Option<f64>,
    /// `centroid_final - centroid_initial` on the launch edge.
    pub outward_displacement: Option<f64>,
    /// Largest `|centroid(t) - centroid(0)|` over the records.
    pub max_centroid_excursion: Option<f64>,
    /// The launch-edge centroid never moved by the configured threshold.
    #[serde(rename = "static")]
    pub is_static: bool,
}

pub(crate) fn run_settings(config: &ExperimentConfig) -> Result<&RunSettings, CliError> {
    config.run.as_ref().ok_or_else(|| CliError::Invalid("the [run] table is required for simulations".into()))
}

pub(crate) fn datum(config: &ExperimentConfig) -> Result<&DatumChoice, CliError> {
    config.datum.as_ref().ok_or_else(|| CliError::Invalid("the [datum] table is required for simulations".into()))
}

fn summarize(traj: &Trajectory, config: &ExperimentConfig, run: &RunSettings, launch: usize) -> SimulationSummary {
    let first = traj.records.first();
    let last = traj.records.last();
    let momentum_initial = first.map_or(0.0, |r| r.momentum);
    let momentum_final = last.map_or(0.0, |r| r.momentum);
    let launch_fraction_final = last.map_or(0.0, |r| if r.mass > 0.0 { r.edge_masses[launch] / r.mass } else { 0.0 });
    let centroid = |r: &nlsgraph::observables::ObservableRecord| r.edge_centroids[launch];
    let centroid_initial = first.and_then(centroid);
    let centroid_final = last.and_then(centroid);
    let max_centroid_excursion = centroid_initial.map(|c0| {
        traj.records.iter().filter_map(centroid).map(|c| (c - c0).abs()).fold(0.0, f64::max)
    });
    let max_empty_edge_peak = traj
        .edge_peaks
        .iter()
        .enumerate()
        .filter(|&(e, _)| e != launch)
        .map(|(_, &p)| p)
        .fold(0.0, f64::max);
    SimulationSummary {
        status: RunStatus::Completed,
        error: None,
        dt: traj.dt,
        h: config.h,
        steps: traj.steps,
        t_final: last.map_or(0.0, |r| r.time),
        max_nonlinear_iterations: traj.max_nonlinear_iterations,
        collision_time: detect_collision_time(&traj.records).ok(),
        mass_drift: traj.mass_drift(),
        energy_drift: traj.energy_drift(),
        momentum_initial,
        momentum_final,
        momentum_ratio: (momentum_initial != 0.0).then(|| momentum_final / momentum_initial),
        launch_edge: launch,
        launch_fraction_final,
        reflected: launch_fraction_final > run.reflected_fraction,
        edge_peaks: traj.edge_peaks.clone(),
        max_empty_edge_peak,
        centroid_initial,
        centroid_final,
        outward_displacement: centroid_initial.zip(centroid_final).map(|(a, b)| b - a),
        max_centroid_excursion,
        is_static: max_centroid_excursion.is_some_and(|d| d < run.static_threshold),
    }
}

fn write_outputs(traj: &Trajectory, summary: &SimulationSummary, graph_json: &str, out: &Path) -> Result<(), CliError> {
    create_dir(out)?;
    let path = out.join("graph.json");
    std::fs::write(&path, graph_json).map_err(|e| CliError::output(&path, e))?;
    let path = out.join("observables.csv");
    write_observables_csv(create_file(&path)?, &traj.records).map_err(|e| CliError::output(&path, e))?;
    let path = out.join("edges.csv");
    write_edge_series_csv(create_file(&path)?, &traj.records).map_err(|e| CliError::output(&path, e))?;
    let path = out.join("snapshots.csv");
    let mut writer = SnapshotWriter::new(create_file(&path)?).map_err(|e| CliError::output(&path, e))?;
    for snap in &traj.snapshots {
        writer.write(snap.time, &snap.state).map_err(|e| CliError::output(&path, e))?;
    }
    writer.finish().map_err(|e| CliError::output(&path, e))?;
    write_json(&out.join("summary.json"), summary)
}

/// Runs one simulation with the given datum and writes its run directory:
/// `graph.json`, `observables.csv`, `edges.csv`, `snapshots.csv` and
/// `summary.json`. An aborted run still writes everything recorded up to the
/// abort and returns its summary with the abort status.
pub fn run_simulation(config: &ExperimentConfig, datum: &DatumChoice, out: &Path) -> Result<SimulationSummary, CliError> {
    let run = run_settings(config)?;
    let (graph, grid) = setup::grid(config)?;
    let op = DiscreteOperator::new(&grid);
    let u0 = setup::initial_state(config, &grid, datum)?;
    let launch = datum.launch();

    let settings = &config.integrator;
    let mut integrator = Integrator::new(settings.dt);
    integrator.tolerance = settings.tolerance;
    integrator.max_iterations = settings.max_iterations;
    if !settings.nonlinear {
        integrator = integrator.linear();
    }
    let stepper = CrankNicolson::new(&op, config.p, integrator).map_err(|e| CliError::Invalid(e.to_string()))?;

    let mut observers = Observers::default();
    if run.observables.contains(&Observable::F) {
        let phi = reference_profile(&grid, mass(&u0), config.p).map_err(|e| CliError::Numerics(e.to_string()))?;
        observers.reference = Some(phi);
    }
    if run.observables.contains(&Observable::Orbital) {
        let soliton = setup::datum_soliton(config, datum)?.ok_or_else(|| {
            CliError::Invalid("the orbital observable needs a soliton datum, not a state file".into())
        })?;
        if !graph.edge(launch).is_halfline() {
            return Err(CliError::Invalid(format!("the orbital observable needs edge {launch} to be a half-line")));
        }
        observers.orbital = Some(OrbitalObserver {
            halfline: launch,
            soliton,
            exclusion: run.orbital_exclusion,
            search: OrbitalSearch::default(),
        });
    }
    let options = EvolveOptions {
        t_end: run.t_end,
        record_every: run.record_every,
        snapshot_times: run.snapshot_times.clone(),
        mass_guard: run.mass_guard,
        observers,
    };

    let graph_json = graph.to_json();
    match evolve(&stepper, &u0, &options) {
        Ok(traj) => {
            let summary = summarize(&traj, config, run, launch);
            write_outputs(&traj, &summary, &graph_json, out)?;
            Ok(summary)
        }
        Err(err) => {
            let Some(partial) = err.partial() else {
                return Err(CliError::Numerics(err.to_string()));
            };
            let mut summary = summarize(partial, config, run, launch);
            summary.status = match err {
                DynamicsError::MassGuard { .. } => RunStatus::MassGuardAbort,
                _ => RunStatus::StepFailure,
            };
            summary.error = Some(err.to_string());
            write_outputs(partial, &summary, &graph_json, out)?;
            Ok(summary)
        }
    }
}

/// The `simulate` command: one run with the configured datum. An aborted run
/// is reported as [`CliError::Aborted`] after its outputs are written.
pub fn simulate(config: &ExperimentConfig, out: &Path) -> Result<SimulationSummary, CliError> {
    let summary = run_simulation(config, datum(config)?, out)?;
    match summary.status {
        RunStatus::Completed => Ok(summary),
        _ => Err(CliError::Aborted(summary.error.clone().unwrap_or_default())),
    }
}
