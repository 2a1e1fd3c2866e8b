use num_complex::Complex64;

use super::{EdgeId, GraphError, MetricGraph, VertexId};
use crate::discretization::GraphFunction;

/// Traversal direction of an edge inside a trail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// From the origin (`x = 0`) towards the far end.
    Forward,
    /// From the far end back to the origin.
    Backward,
}

/// Consecutive edges, none repeated. Vertices may repeat.
#[derive(Debug, Clone, PartialEq)]
pub struct Trail {
    steps: Vec<(EdgeId, Direction)>,
}

/// Vertex where a step enters and leaves; `None` stands for the free end of a half-line.
fn ends(graph: &MetricGraph, (e, dir): (EdgeId, Direction)) -> (Option<VertexId>, Option<VertexId>) {
    let edge = graph.edge(e);
    match dir {
        Direction::Forward => (Some(edge.origin), edge.terminal()),
        Direction::Backward => (edge.terminal(), Some(edge.origin)),
    }
}

impl Trail {
    pub fn new(graph: &MetricGraph, steps: Vec<(EdgeId, Direction)>) -> Result<Self, GraphError> {
        let bad = |m: String| Err(GraphError::InvalidTrail(m));
        if steps.is_empty() {
            return bad("empty trail".into());
        }
        let mut used = vec![false; graph.edge_count()];
        for &(e, _) in &steps {
            if e >= graph.edge_count() {
                return bad(format!("edge {e} is not part of the graph"));
            }
            if std::mem::replace(&mut used[e], true) {
                return bad(format!("edge {e} repeated"));
            }
        }
        for w in steps.windows(2) {
            let (_, exit) = ends(graph, w[0]);
            let (entry, _) = ends(graph, w[1]);
            if exit.is_none() || exit != entry {
                return bad(format!("edges {} and {} are not consecutive", w[0].0, w[1].0));
            }
        }
        Ok(Trail { steps })
    }

    /// Builds a trail from an edge sequence, inferring each traversal direction.
    /// A leading half-line is entered from its free end.
    pub fn through(graph: &MetricGraph, edges: &[EdgeId]) -> Result<Self, GraphError> {
        if let Some(&e) = edges.iter().find(|&&e| e >= graph.edge_count()) {
            return Err(GraphError::InvalidTrail(format!("edge {e} is not part of the graph")));
        }
        let mut steps = Vec::with_capacity(edges.len());
        let mut at: Option<VertexId> = None;
        for (k, &e) in edges.iter().enumerate() {
            let edge = graph.edge(e);
            let dir = match at {
                None if edge.is_halfline() => Direction::Backward,
                None => match edges.get(k + 1) {
                    Some(&next) if graph.edge(next).touches(edge.origin)
                        && !edge.terminal().is_some_and(|t| graph.edge(next).touches(t)) =>
                    {
                        Direction::Backward
                    }
                    _ => Direction::Forward,
                },
                Some(v) if edge.origin == v => Direction::Forward,
                Some(v) if edge.terminal() == Some(v) => Direction::Backward,
                Some(v) => {
                    return Err(GraphError::InvalidTrail(format!("edge {e} does not touch vertex {v}")));
                }
            };
            steps.push((e, dir));
            at = ends(graph, (e, dir)).1;
        }
        Trail::new(graph, steps)
    }

    pub fn steps(&self) -> &[(EdgeId, Direction)] {
        &self.steps
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.steps.iter().map(|&(e, _)| e)
    }
}

/// Samples of a function on a (truncated) interval of the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFunction {
    pub xs: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl LineFunction {
    /// Trapezoidal `∫ |f|^q dx`.
    pub fn lq_power(&self, q: f64) -> f64 {
        self.xs
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0].norm().powf(q) + v[1].norm().powf(q)))
            .sum()
    }

    pub fn mass(&self) -> f64 {
        self.lq_power(2.0)
    }

    /// `∫ |f'|^2 dx` with one forward difference per cell.
    pub fn derivative_sq(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| (v[1] - v[0]).norm_sqr() / (x[1] - x[0]))
            .sum()
    }
}

/// Restricts `u` to a trail running from one half-line to another and lays it
/// out on the real line: the first half-line becomes `(-T, 0]`, bounded edges
/// follow in trail order (reversed when traversed backwards), and the last
/// half-line starts at the total length of the bounded edges.
pub fn unfold_trail(graph: &MetricGraph, trail: &Trail, u: &GraphFunction) -> Result<LineFunction, GraphError> {
    if u.grid().graph() != graph {
        return Err(GraphError::InvalidTrail("function lives on a different graph".into()));
    }
    let steps = trail.steps();
    let first_ok = steps.first().is_some_and(|&(e, d)| graph.edge(e).is_halfline() && d == Direction::Backward);
    let last_ok = steps.len() >= 2
        && steps.last().is_some_and(|&(e, d)| graph.edge(e).is_halfline() && d == Direction::Forward);
    if !(first_ok && last_ok) {
        return Err(GraphError::InvalidTrail("trail must start and end with half-lines".into()));
    }
    let grid = u.grid();
    let mut xs = Vec::new();
    let mut values = Vec::new();
    let mut cursor = 0.0;
    for (k, &(e, dir)) in steps.iter().enumerate() {
        let length = graph.edge(e).length;
        let mut nodes: Vec<(f64, Complex64)> = grid.edge_nodes(e).map(|(_, x, i)| (x, u.value_at(i))).collect();
        if k == 0 {
            nodes.reverse();
            for (x, v) in nodes {
                xs.push(-x);
                values.push(v);
            }
            continue;
        }
        if dir == Direction::Backward {
            nodes.reverse();
            for n in &mut nodes {
                n.0 = length - n.0;
            }
        }
        // the first node repeats the vertex value already emitted
        for &(x, v) in nodes.iter().skip(1) {
            xs.push(cursor + x);
            values.push(v);
        }
        cursor += length;
    }
    Ok(LineFunction { xs, values })
}
