//! Where the mass of a state sits: the concentration function, the overlap
//! functional and the split between the compact core and the half-lines.

use super::GroundStateError;
use crate::discretization::{lq_power, DiscretizationError, GraphFunction};
use crate::graph::{distance_to_point, distances_from, EdgeId, GraphPoint};

/// `|u|²` on one edge, integrated as the piecewise-linear interpolant of the
/// nodal values. Over whole cells this is exactly the trapezoidal rule used
/// for the mass.
struct EdgeDensity {
    spacing: f64,
    values: Vec<f64>,
    /// `prefix[j] = ∫_0^{x_j}`.
    prefix: Vec<f64>,
}

impl EdgeDensity {
    fn new(u: &GraphFunction, e: EdgeId) -> Self {
        let spacing = u.grid().edge_grid(e).spacing;
        let values: Vec<f64> = u.edge_values(e).iter().map(|(_, z)| z.norm_sqr()).collect();
        let mut prefix = Vec::with_capacity(values.len());
        prefix.push(0.0);
        for j in 1..values.len() {
            prefix.push(prefix[j - 1] + 0.5 * spacing * (values[j - 1] + values[j]));
        }
        EdgeDensity { spacing, values, prefix }
    }

    fn length(&self) -> f64 {
        self.spacing * (self.values.len() - 1) as f64
    }

    fn cumulative(&self, x: f64) -> f64 {
        let cells = self.values.len() - 1;
        let x = x.clamp(0.0, self.length());
        let j = ((x / self.spacing).floor() as usize).min(cells - 1);
        let s = x - j as f64 * self.spacing;
        let (f0, f1) = (self.values[j], self.values[j + 1]);
        self.prefix[j] + s * f0 + (f1 - f0) * s * s / (2.0 * self.spacing)
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            0.0
        } else {
            self.cumulative(b) - self.cumulative(a)
        }
    }

    /// Integral over the union of possibly overlapping intervals.
    fn union_integral(&self, mut intervals: Vec<(f64, f64)>) -> f64 {
        intervals.retain(|(a, b)| b > a);
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut acc = 0.0;
        let mut current: Option<(f64, f64)> = None;
        for (a, b) in intervals {
            match current {
                Some((ca, cb)) if a <= cb => current = Some((ca, cb.max(b))),
                Some((ca, cb)) => {
                    acc += self.integral(ca, cb);
                    current = Some((a, b));
                }
                None => current = Some((a, b)),
            }
        }
        if let Some((ca, cb)) = current {
            acc += self.integral(ca, cb);
        }
        acc
    }
}

/// `sup_y ∫_{B(y, t)} |u|²`, with the centers `y` running over every grid
/// unknown and balls measured in the graph distance.
pub fn concentration(u: &GraphFunction, t: f64) -> Result<f64, GroundStateError> {
    if !(t >= 0.0) {
        return Err(GroundStateError::InvalidConfig(format!("radius must be non-negative, got {t}")));
    }
    let grid = u.grid();
    let graph = grid.graph();
    let densities: Vec<EdgeDensity> = (0..graph.edge_count()).map(|e| EdgeDensity::new(u, e)).collect();
    let mut best: f64 = 0.0;
    for center in grid.unknown_points() {
        let dist = distances_from(graph, center)?;
        let mut ball = 0.0;
        for (e, density) in densities.iter().enumerate() {
            let edge = graph.edge(e);
            let length = density.length();
            let mut pieces = vec![(0.0, t - dist[edge.origin])];
            if let Some(end) = edge.terminal() {
                pieces.push((length - (t - dist[end]), length));
            }
            if center.edge == e {
                pieces.push((center.x - t, center.x + t));
            }
            ball += density.union_integral(pieces);
        }
        best = best.max(ball);
    }
    Ok(best)
}

/// `∫_G |u| Φ` by the trapezoidal rule.
pub fn functional_f(u: &GraphFunction, phi: &GraphFunction) -> Result<f64, DiscretizationError> {
    if !u.same_grid(phi) {
        return Err(DiscretizationError::GridMismatch);
    }
    Ok(u.values().iter().zip(phi.values()).zip(u.grid().weights()).map(|((a, b), w)| w * a.norm() * b.norm()).sum())
}

/// Mass split of a state between a neighbourhood of the compact core and the
/// far parts of the half-lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreSplit {
    /// Fraction of the mass *not* sitting beyond distance `t` on the single
    /// half-line that carries the most such mass; 0 for the zero state.
    pub core_fraction: f64,
    /// Largest modulus on the compact core (vertices and bounded edges).
    pub linf_core: f64,
    /// The half-line with the most far mass.
    pub escape_edge: Option<EdgeId>,
    /// `∫ d(x, core) |u|² / ∫ |u|²`, a center-of-mass coordinate measured
    /// outward from the core; 0 for the zero state.
    pub mean_core_distance: f64,
}

pub fn core_split(u: &GraphFunction, t: f64) -> CoreSplit {
    let grid = u.grid();
    let graph = grid.graph();
    let total = lq_power(u, 2.0);
    let mut linf_core: f64 = (0..graph.vertex_count()).map(|v| u.values()[v].norm()).fold(0.0, f64::max);
    for e in graph.bounded_edges() {
        for i in grid.edge_unknowns(e) {
            linf_core = linf_core.max(u.values()[i].norm());
        }
    }
    let mut far: Option<(EdgeId, f64)> = None;
    let mut first_moment = 0.0;
    for e in graph.halflines() {
        let density = EdgeDensity::new(u, e);
        let tail = density.integral(t, density.length());
        if far.is_none_or(|(_, m)| tail > m) {
            far = Some((e, tail));
        }
        let h = density.spacing;
        let cells = density.values.len() - 1;
        for (j, &f) in density.values.iter().enumerate() {
            let w = if j == 0 || j == cells { 0.5 * h } else { h };
            first_moment += w * j as f64 * h * f;
        }
    }
    if total == 0.0 {
        return CoreSplit { core_fraction: 0.0, linf_core, escape_edge: None, mean_core_distance: 0.0 };
    }
    let (escape_edge, tail) = far.map_or((None, 0.0), |(e, m)| (Some(e), m));
    CoreSplit {
        core_fraction: 1.0 - tail / total,
        linf_core,
        escape_edge,
        mean_core_distance: first_moment / total,
    }
}

/// Graph distance from vertex `v` to every grid unknown.
pub(crate) fn distances_to_unknowns(u_grid: &crate::discretization::GraphGrid, v: usize) -> Result<Vec<f64>, GroundStateError> {
    let graph = u_grid.graph();
    let e = graph.incident(v).next().ok_or_else(|| GroundStateError::InvalidConfig(format!("vertex {v} is isolated")))?;
    let edge = graph.edge(e);
    let from = if edge.origin == v { GraphPoint::new(e, 0.0) } else { GraphPoint::new(e, edge.length) };
    let dist = distances_from(graph, from)?;
    Ok(u_grid.unknown_points().into_iter().map(|p| distance_to_point(graph, &dist, from, p)).collect())
}
