//! Config-driven runner for the soliton collision, ground-state and scan
//! experiments. The `nlsgraph` binary is a thin wrapper around these
//! functions.

pub mod config;
mod error;
mod groundstate;
mod scan;
mod setup;
mod simulate;

pub use config::{ConfigError, ExperimentConfig};
pub use error::CliError;
pub use groundstate::{groundstate, GroundStateSummary};
pub use scan::{scan_position, scan_velocity, PositionScan, ScanMember, ThresholdBracket, VelocityScan};
pub use simulate::{run_simulation, simulate, RunStatus, SimulationSummary};
