use std::path::Path;

use serde::Serialize;

use nlsgraph::discretization::{DiscreteOperator, SnapshotWriter};
use nlsgraph::groundstate::{
    critical_mass_search, normalized_gradient_flow, write_flow_diagnostics, Classification, CriticalMass,
    FlowConfig, InitialGuess, StopReason,
};
use nlsgraph::states::LineSoliton;

use crate::config::{ExperimentConfig, GroundStateSettings, GuessChoice};
use crate::error::CliError;
use crate::setup::{self, create_dir, create_file, write_json};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundStateSummary {
    pub mu: f64,
    pub h: f64,
    pub classification: Classification,
    pub stop: StopReason,
    pub iterations: usize,
    pub rejected_steps: usize,
    pub energy: f64,
    /// `E(φ_μ, ℝ)` of the line soliton with the same mass.
    pub line_energy: f64,
    /// `(energy - line_energy) / |line_energy|`.
    pub relative_gap: f64,
    pub core_mass_fraction: f64,
    pub linf_core: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub critical: Option<CriticalMass>,
}

pub(crate) fn flow_config(config: &ExperimentConfig, settings: &GroundStateSettings, mu: f64, seed: u64) -> FlowConfig {
    let mut flow = FlowConfig::new(mu, config.p);
    flow.tau = settings.tau;
    flow.tau_growth = settings.tau_growth;
    flow.tau_max = settings.tau_max;
    flow.tolerance = settings.tolerance;
    flow.max_iterations = settings.max_iterations;
    flow.guess = match settings.guess {
        GuessChoice::Gaussian { width, jitter } => InitialGuess::Gaussian { width, jitter, seed },
        GuessChoice::Folded => InitialGuess::Folded,
    };
    flow
}

/// The `groundstate` command. Writes `diagnostics.csv`, the final state as
/// `state.csv` (a one-snapshot table usable as a `file` datum), an optional
/// `critical.json`, and `summary.json`. An undetermined classification is
/// reported as [`CliError::Undetermined`] after the outputs are written.
pub fn groundstate(config: &ExperimentConfig, out: &Path, seed: u64) -> Result<GroundStateSummary, CliError> {
    let settings = config
        .groundstate
        .as_ref()
        .ok_or_else(|| CliError::Invalid("the [groundstate] table is required".into()))?;
    let mu = setup::soliton(config.p, settings.size)?.mass();
    let (graph, grid) = setup::grid(config)?;
    let op = DiscreteOperator::new(&grid);
    let flow = flow_config(config, settings, mu, seed);
    let numerics = |e: nlsgraph::groundstate::GroundStateError| CliError::Numerics(e.to_string());

    log::info!("gradient flow at mu = {mu}");
    let outcome = normalized_gradient_flow(&op, &flow).map_err(numerics)?;
    let critical = match settings.critical {
        Some(c) => {
            log::info!("critical mass search in [{}, {}]", c.bracket.0, c.bracket.1);
            Some(critical_mass_search(&graph, config.h, c.bracket, c.mu_tolerance, &flow).map_err(numerics)?)
        }
        None => None,
    };

    create_dir(out)?;
    let path = out.join("diagnostics.csv");
    write_flow_diagnostics(create_file(&path)?, &outcome.diagnostics).map_err(|e| CliError::output(&path, e))?;
    let path = out.join("state.csv");
    let mut writer = SnapshotWriter::new(create_file(&path)?).map_err(|e| CliError::output(&path, e))?;
    writer.write(0.0, &outcome.state).map_err(|e| CliError::output(&path, e))?;
    writer.finish().map_err(|e| CliError::output(&path, e))?;
    if let Some(c) = &critical {
        write_json(&out.join("critical.json"), c)?;
    }

    let line_energy = LineSoliton::with_mass(config.p, mu).map_err(|e| CliError::Numerics(e.to_string()))?.energy();
    let last = outcome.diagnostics.last().expect("the flow records its initial iterate");
    let summary = GroundStateSummary {
        mu,
        h: config.h,
        classification: outcome.classification,
        stop: outcome.stop,
        iterations: last.iterate,
        rejected_steps: outcome.rejected,
        energy: outcome.energy,
        line_energy,
        relative_gap: (outcome.energy - line_energy) / line_energy.abs(),
        core_mass_fraction: last.core_mass_fraction,
        linf_core: last.linf_core,
        f: last.f,
        critical,
    };
    write_json(&out.join("summary.json"), &summary)?;
    if summary.classification == Classification::Undetermined {
        return Err(CliError::Undetermined);
    }
    Ok(summary)
}
