//! Per-edge uniform grids, graph functions, quadrature and the assembled
//! Kirchhoff operator.
//!
//! The spatial scheme is linear finite elements with mass lumping. The
//! stiffness matrix `K` is symmetric and its quadratic form approximates
//! `‖ψ'‖² + ∫V|ψ|² + g|ψ(0)|²`; the lumped weights `W` are the trapezoidal
//! quadrature weights, so `W⁻¹K` approximates `-ψ'' + Vψ` with the Kirchhoff
//! flux condition built into the vertex rows.

mod function;
mod grid;
mod norms;
mod operator;
mod snapshot;

pub use function::GraphFunction;
pub use grid::{EdgeGrid, FreeEnd, GraphGrid};
pub use norms::{
    derivative_sq, edge_lq_power, edge_mass, gn_ratio, h1_distance, h1_inner, lq_power, norm_h1,
    norm_lq,
};
pub use operator::{DiscreteOperator, PotentialData, SparseMatrix};
pub use snapshot::SnapshotWriter;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscretizationError {
    #[error("invalid grid spacing: {0}")]
    InvalidSpacing(String),
    #[error("functions or operators live on different grids")]
    GridMismatch,
    #[error("invalid exponent q = {0}")]
    InvalidExponent(f64),
    #[error("operation undefined for the zero function")]
    ZeroFunction,
    #[error("potential data does not match the grid: {0}")]
    PotentialMismatch(String),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("export failed: {0}")]
    Export(String),
}
