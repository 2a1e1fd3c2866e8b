//! Closed-form initial data and reference states.

mod cutoff;
mod datum;
mod soliton;
mod tower;

pub use cutoff::cutoff_chi;
pub use datum::{line_soliton_datum, slow_soliton_datum};
pub use soliton::{soliton_profile, LineSoliton, SolitonParams, SolitonWave};
pub use tower::{bubble_tower_ground_state, vertex_peaked_profile};

use thiserror::Error;

use crate::discretization::DiscretizationError;
use crate::graph::{EdgeId, GraphError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("invalid soliton parameters: {0}")]
    InvalidParams(String),
    #[error("edge {0} is not a half-line")]
    NotHalfline(EdgeId),
    #[error("center x0 = {x0} lies outside the half-line [0, {truncation}]")]
    CenterOutOfRange { x0: f64, truncation: f64 },
    #[error("graph is not a bubble tower")]
    NotTower,
    #[error("bubble perimeters must strictly increase from the top bubble down, got {0:?}")]
    PerimeterOrder(Vec<f64>),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
}
