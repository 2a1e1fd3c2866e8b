//! Physical functionals of a state: mass, energy, kinetic energy, momentum,
//! edge centroids and the orbital distance to the soliton family.

mod orbital;

pub use orbital::{orbital_distance, Orbital, OrbitalSearch};

use serde::Serialize;
use thiserror::Error;

use crate::discretization::{derivative_sq, edge_mass, lq_power, DiscreteOperator, DiscretizationError, GraphFunction};
use crate::graph::EdgeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error("edge {0} is not a half-line")]
    NotHalfline(EdgeId),
    #[error("empty search interval: exclusion {exclusion} is not below the truncation {truncation}")]
    EmptySearch { exclusion: f64, truncation: f64 },
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
}

/// Discrete `‖u‖²`; the same quadrature as [`lq_power`] with `q = 2`.
pub fn mass(u: &GraphFunction) -> f64 {
    lq_power(u, 2.0)
}

/// `½ u*Ku - (1/p)‖u‖_p^p`. The stiffness already carries the potential or
/// delta term, so this is the energy of the model the operator describes.
pub fn energy(u: &GraphFunction, op: &DiscreteOperator, p: f64) -> Result<f64, DiscretizationError> {
    Ok(0.5 * op.quadratic_form(u)? - lq_power(u, p) / p)
}

/// `½‖u'‖²`.
pub fn kinetic(u: &GraphFunction) -> f64 {
    0.5 * derivative_sq(u)
}

/// `Im ∫_e u' ū` on one edge in its stored orientation. A cell contributes
/// `Im(u_{j+1} ū_j)`, the midpoint rule for the integrand.
pub fn edge_momentum(u: &GraphFunction, e: EdgeId) -> f64 {
    let mut prev = None;
    let mut acc = 0.0;
    for (_, z) in u.edge_values(e) {
        if let Some(p) = prev {
            acc += (z * num_complex::Complex64::conj(&p)).im;
        }
        prev = Some(z);
    }
    acc
}

/// Linear momentum `Im ∫_G u' ū`, every edge measured in its stored
/// orientation (outward along half-lines). Only its modulus and sign changes
/// on a fixed graph carry meaning.
pub fn momentum(u: &GraphFunction) -> f64 {
    (0..u.grid().graph().edge_count()).map(|e| edge_momentum(u, e)).sum()
}

/// `∫_e x|u|² / ∫_e |u|²`, or `None` when the edge carries no mass.
pub fn edge_centroid(u: &GraphFunction, e: EdgeId) -> Option<f64> {
    let g = u.grid().edge_grid(e);
    let mut first = 0.0;
    for (j, (x, z)) in u.edge_values(e).into_iter().enumerate() {
        let w = if j == 0 || j == g.cells { 0.5 * g.spacing } else { g.spacing };
        first += w * x * z.norm_sqr();
    }
    let m = edge_mass(u, e);
    (m > 0.0).then(|| first / m)
}

/// Largest `|u|²` on each edge.
pub fn edge_peaks(u: &GraphFunction) -> Vec<f64> {
    (0..u.grid().graph().edge_count())
        .map(|e| u.edge_values(e).iter().map(|(_, z)| z.norm_sqr()).fold(0.0, f64::max))
        .collect()
}

/// One row of a trajectory's observable series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableRecord {
    pub time: f64,
    pub mass: f64,
    pub energy: f64,
    pub kinetic: f64,
    pub momentum: f64,
    /// Overlap `∫|u|Φ` with the configured reference state.
    pub f: Option<f64>,
    pub orbital: Option<Orbital>,
    pub edge_masses: Vec<f64>,
    pub edge_centroids: Vec<Option<f64>>,
}
