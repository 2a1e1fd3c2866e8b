use std::sync::Arc;

use num_complex::Complex64;

use super::{cutoff_chi, soliton_profile, LineSoliton, SolitonParams, StateError};
use crate::discretization::{GraphFunction, GraphGrid};
use crate::graph::EdgeId;

fn check_launch(grid: &GraphGrid, launch: EdgeId, x0: f64) -> Result<f64, StateError> {
    let graph = grid.graph();
    if launch >= graph.edge_count() || !graph.edge(launch).is_halfline() {
        return Err(StateError::NotHalfline(launch));
    }
    let truncation = graph.edge(launch).length;
    if !(0.0..=truncation).contains(&x0) {
        return Err(StateError::CenterOutOfRange { x0, truncation });
    }
    Ok(truncation)
}

/// Slow soliton `e^{iθ} e^{-i(v/2)x} χ(x) φ_μ(x - x0)` on the half-line
/// `launch`, zero on every other edge. With `v > 0` it travels towards the
/// vertex. The cutoff makes the vertex value exactly zero.
///
/// The datum is not renormalized; its mass falls short of `μ` by the part
/// removed by the cutoff and the truncation.
pub fn slow_soliton_datum(
    grid: &Arc<GraphGrid>,
    launch: EdgeId,
    params: &SolitonParams,
) -> Result<GraphFunction, StateError> {
    check_launch(grid, launch, params.x0)?;
    let wave = soliton_profile(params)?;
    Ok(GraphFunction::from_fn(grid, |e, x| {
        if e == launch {
            wave.eval(x) * cutoff_chi(x)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// A line soliton laid across the vertex: `e^{i v0 x} φ(x - x0)` on the launch
/// half-line and `e^{-i v0 x} φ(x + x0)` on every other edge, `x` being the
/// outward edge coordinate. A negative `v0` moves the soliton towards the
/// vertex with speed `2|v0|`.
pub fn line_soliton_datum(
    grid: &Arc<GraphGrid>,
    launch: EdgeId,
    soliton: &LineSoliton,
    x0: f64,
    v0: f64,
) -> Result<GraphFunction, StateError> {
    check_launch(grid, launch, x0)?;
    if !v0.is_finite() {
        return Err(StateError::InvalidParams(format!("velocity must be finite, got {v0}")));
    }
    Ok(GraphFunction::from_fn(grid, |e, x| {
        if e == launch {
            Complex64::from_polar(soliton.profile(x - x0), v0 * x)
        } else {
            Complex64::from_polar(soliton.profile(x + x0), -v0 * x)
        }
    }))
}
