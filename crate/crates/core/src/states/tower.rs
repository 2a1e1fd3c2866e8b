use std::sync::Arc;

use num_complex::Complex64;

use super::{LineSoliton, StateError};
use crate::discretization::{GraphFunction, GraphGrid};
use crate::graph::EdgeId;

/// Folds the line soliton `φ_μ` onto a bubble tower.
///
/// Each chain vertex `c` gets an arc coordinate `a(c)`: zero at the top and
/// growing by half a perimeter per bubble going down. Both edges of a bubble
/// carry `φ(a(lower) - s)` at distance `s` from its lower vertex, and both
/// half-lines carry `φ(a(bottom) + s)`. The maximum therefore sits on the top
/// bubble, half its perimeter away from the vertex where it is attached to
/// the rest of the tower. The state is continuous and even in every bubble,
/// and the outgoing derivatives cancel at every vertex.
///
/// Mass and energy differ from those of `φ_μ` only by the tails cut off at
/// the half-line truncation.
pub fn bubble_tower_ground_state(grid: &Arc<GraphGrid>, mu: f64, p: f64) -> Result<GraphFunction, StateError> {
    let graph = grid.graph();
    let layout = graph.tower_layout().ok_or(StateError::NotTower)?;
    let top_down: Vec<f64> = layout.bubbles.iter().rev().map(|b| b.perimeter).collect();
    if top_down.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(StateError::PerimeterOrder(top_down));
    }
    let soliton = LineSoliton::with_mass(p, mu)?;

    let mut arc = vec![0.0; graph.vertex_count()];
    for b in layout.bubbles.iter().rev() {
        arc[b.lower] = arc[b.upper] + 0.5 * b.perimeter;
    }
    // per edge: arc coordinate of the lower end and whether x runs upwards
    let mut fold: Vec<Option<(f64, bool)>> = vec![None; graph.edge_count()];
    for b in &layout.bubbles {
        for &e in &b.edges {
            fold[e] = Some((arc[b.lower], graph.edge(e).origin == b.lower));
        }
    }
    let bottom = arc[layout.bottom];
    Ok(GraphFunction::from_fn(grid, |e: EdgeId, x| {
        let value = match fold[e] {
            Some((a, upwards)) => {
                let length = graph.edge(e).length;
                let s = if upwards { x } else { length - x };
                soliton.profile(a - s)
            }
            None => soliton.profile(bottom + x),
        };
        Complex64::new(value, 0.0)
    }))
}

/// `φ_μ(d(x))` with `d` the distance to the nearest vertex along the edge.
///
/// On the line this is the ground state itself. On graphs without ground
/// states it serves as the reference profile for the overlap functional.
pub fn vertex_peaked_profile(grid: &Arc<GraphGrid>, soliton: &LineSoliton) -> GraphFunction {
    let graph = grid.graph();
    GraphFunction::from_fn(grid, |e, x| {
        let edge = graph.edge(e);
        let d = if edge.is_halfline() { x } else { x.min(edge.length - x) };
        Complex64::new(soliton.profile(d), 0.0)
    })
}
