//! Metric graphs: topology, edge geometry and the standard builders.
//!
//! Every edge is an interval `[0, L_e]` whose coordinate origin sits at the
//! edge's `origin` vertex. Half-lines carry a finite truncation length; their
//! far end is a free (Dirichlet) end rather than a vertex.

mod distance;
mod document;
mod potential;
mod trail;

pub use distance::{distances_from, graph_distance};
pub(crate) use distance::distance_to_point;
pub use document::GraphDocument;
pub use potential::{PotentialSpec, SampledPotential};
pub use trail::{unfold_trail, Direction, LineFunction, Trail};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("invalid builder argument: {0}")]
    InvalidArgument(String),
    #[error("edge {edge}: {reason}")]
    InvalidEdge { edge: EdgeId, reason: String },
    #[error("graph has no edges")]
    Empty,
    #[error("graph is not connected (vertex {0} unreachable from vertex 0)")]
    Disconnected(VertexId),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid trail: {0}")]
    InvalidTrail(String),
    #[error("point on edge {edge} at x = {x} lies outside [0, {length}]")]
    PointOutOfRange { edge: EdgeId, x: f64, length: f64 },
    #[error("malformed graph document: {0}")]
    Document(String),
}

/// Far end of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EdgeEnd {
    /// Bounded edge ending at a vertex.
    Vertex(VertexId),
    /// Truncated half-line; the end at `x = length` is held at zero.
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// Vertex at coordinate `x = 0`.
    pub origin: VertexId,
    pub end: EdgeEnd,
    /// Length of a bounded edge, or the truncation length of a half-line.
    pub length: f64,
}

impl Edge {
    pub fn bounded(origin: VertexId, terminal: VertexId, length: f64) -> Self {
        Edge { origin, end: EdgeEnd::Vertex(terminal), length }
    }

    pub fn halfline(origin: VertexId, truncation: f64) -> Self {
        Edge { origin, end: EdgeEnd::Free, length: truncation }
    }

    pub fn is_halfline(&self) -> bool {
        matches!(self.end, EdgeEnd::Free)
    }

    pub fn terminal(&self) -> Option<VertexId> {
        match self.end {
            EdgeEnd::Vertex(v) => Some(v),
            EdgeEnd::Free => None,
        }
    }

    /// Truncation length for half-lines, `None` for bounded edges.
    pub fn truncation(&self) -> Option<f64> {
        self.is_halfline().then_some(self.length)
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.origin == v || self.terminal() == Some(v)
    }
}

/// A point `(e, x)` on the graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphPoint {
    pub edge: EdgeId,
    pub x: f64,
}

impl GraphPoint {
    pub fn new(edge: EdgeId, x: f64) -> Self {
        GraphPoint { edge, x }
    }
}

/// Finite metric graph with truncated half-lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    potential: Option<PotentialSpec>,
}

impl MetricGraph {
    /// Builds and validates a graph from raw parts.
    pub fn new(
        vertex_count: usize,
        edges: Vec<Edge>,
        potential: Option<PotentialSpec>,
    ) -> Result<Self, GraphError> {
        let graph = MetricGraph { vertex_count, edges, potential };
        graph.validate()?;
        Ok(graph)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn potential(&self) -> Option<&PotentialSpec> {
        self.potential.as_ref()
    }

    pub fn halflines(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().enumerate().filter(|(_, e)| e.is_halfline()).map(|(i, _)| i)
    }

    pub fn bounded_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().enumerate().filter(|(_, e)| !e.is_halfline()).map(|(i, _)| i)
    }

    /// Edges incident to `v`, each listed once even if both ends touch `v`.
    pub fn incident(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().enumerate().filter(move |(_, e)| e.touches(v)).map(|(i, _)| i)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incident(v).count()
    }

    pub fn shortest_edge(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    pub fn check_point(&self, p: GraphPoint) -> Result<(), GraphError> {
        let length = self
            .edges
            .get(p.edge)
            .ok_or_else(|| GraphError::InvalidEdge { edge: p.edge, reason: "no such edge".into() })?
            .length;
        if !(0.0..=length).contains(&p.x) {
            return Err(GraphError::PointOutOfRange { edge: p.edge, x: p.x, length });
        }
        Ok(())
    }

    /// Checks edge geometry, vertex references, connectivity and potential data.
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.edges.is_empty() {
            return Err(GraphError::Empty);
        }
        for (id, e) in self.edges.iter().enumerate() {
            let bad = |reason: &str| GraphError::InvalidEdge { edge: id, reason: reason.into() };
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(bad("length must be finite and positive"));
            }
            if e.origin >= self.vertex_count {
                return Err(bad("origin vertex out of range"));
            }
            if let Some(t) = e.terminal() {
                if t >= self.vertex_count {
                    return Err(bad("terminal vertex out of range"));
                }
                if t == e.origin {
                    return Err(bad("self-loops are not supported; split the loop into two edges"));
                }
            }
        }
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in self.incident(v) {
                let edge = &self.edges[e];
                for w in std::iter::once(edge.origin).chain(edge.terminal()) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(GraphError::Disconnected(v));
        }
        if let Some(p) = &self.potential {
            p.validate_on(self)?;
        }
        Ok(())
    }

    /// Star graph: `n` half-lines of the given truncation, all with `x = 0`
    /// at the single central vertex.
    pub fn star(n_halflines: usize, truncation: f64) -> Result<Self, GraphError> {
        if n_halflines < 2 {
            return Err(GraphError::InvalidArgument(format!(
                "a star needs at least 2 half-lines, got {n_halflines}"
            )));
        }
        check_positive("truncation", truncation)?;
        let edges = (0..n_halflines).map(|_| Edge::halfline(0, truncation)).collect();
        MetricGraph::new(1, edges, None)
    }

    /// The real line as two half-lines glued at vertex 0.
    pub fn line(truncation: f64) -> Result<Self, GraphError> {
        MetricGraph::star(2, truncation)
    }

    /// Bubble tower with `perimeters` listed from the top bubble down to the
    /// bubble touching the two half-lines.
    ///
    /// Vertex 0 is the bottom vertex carrying the half-lines (edges 0 and 1);
    /// chain vertex `k + 1` sits above bubble `k` counted from the bottom.
    /// Each bubble is a pair of parallel edges of length `perimeter / 2`,
    /// oriented upwards.
    pub fn bubble_tower(perimeters: &[f64], truncation: f64) -> Result<Self, GraphError> {
        if perimeters.is_empty() {
            return Err(GraphError::InvalidArgument("a bubble tower needs at least one bubble".into()));
        }
        for &l in perimeters {
            check_positive("perimeter", l)?;
        }
        check_positive("truncation", truncation)?;
        let mut edges = vec![Edge::halfline(0, truncation), Edge::halfline(0, truncation)];
        for (k, &l) in perimeters.iter().rev().enumerate() {
            edges.push(Edge::bounded(k, k + 1, l / 2.0));
            edges.push(Edge::bounded(k, k + 1, l / 2.0));
        }
        MetricGraph::new(perimeters.len() + 1, edges, None)
    }

    /// `n` half-lines and one pendant edge attached at vertex 0. The pendant
    /// is the last edge and runs from vertex 0 to its free tip, vertex 1.
    pub fn pendant_star(
        n_halflines: usize,
        pendant_length: f64,
        truncation: f64,
    ) -> Result<Self, GraphError> {
        if n_halflines < 3 {
            return Err(GraphError::InvalidArgument(format!(
                "a pendant star needs at least 3 half-lines, got {n_halflines}"
            )));
        }
        check_positive("pendant length", pendant_length)?;
        check_positive("truncation", truncation)?;
        let mut edges: Vec<Edge> = (0..n_halflines).map(|_| Edge::halfline(0, truncation)).collect();
        edges.push(Edge::bounded(0, 1, pendant_length));
        MetricGraph::new(2, edges, None)
    }

    /// The line (two half-lines at vertex 0) carrying an external potential.
    /// Edge 0 realizes the negative axis, edge 1 the positive axis.
    pub fn line_with_potential(
        potential: PotentialSpec,
        truncation: f64,
    ) -> Result<Self, GraphError> {
        check_positive("truncation", truncation)?;
        potential.validate()?;
        let edges = vec![Edge::halfline(0, truncation), Edge::halfline(0, truncation)];
        MetricGraph::new(1, edges, Some(potential))
    }

    /// True when the graph is two half-lines at a single vertex.
    pub fn is_line(&self) -> bool {
        self.vertex_count == 1 && self.edges.len() == 2 && self.edges.iter().all(Edge::is_halfline)
    }

    /// True when every edge is a half-line and they share one vertex.
    pub fn is_star(&self) -> bool {
        self.vertex_count == 1 && self.edges.iter().all(Edge::is_halfline)
    }

    /// All vertices; with the bounded edges they make up the compact core.
    pub fn core_vertices(&self) -> Vec<VertexId> {
        self.vertices().collect()
    }

    /// Recognizes the bubble-tower layout produced by [`MetricGraph::bubble_tower`]
    /// (and any relabelling of it).
    pub fn tower_layout(&self) -> Option<TowerLayout> {
        let halflines: Vec<EdgeId> = self.halflines().collect();
        if halflines.len() != 2 {
            return None;
        }
        let bottom = self.edges[halflines[0]].origin;
        if self.edges[halflines[1]].origin != bottom {
            return None;
        }
        let mut chain = vec![bottom];
        let mut bubbles = Vec::new();
        let mut used = vec![false; self.edges.len()];
        used[halflines[0]] = true;
        used[halflines[1]] = true;
        let mut current = bottom;
        loop {
            let up: Vec<EdgeId> = self
                .incident(current)
                .filter(|&e| !used[e])
                .collect();
            if up.is_empty() {
                break;
            }
            if up.len() != 2 {
                return None;
            }
            let (a, b) = (&self.edges[up[0]], &self.edges[up[1]]);
            let other = |e: &Edge| if e.origin == current { e.terminal() } else { Some(e.origin) };
            let next = other(a)?;
            if other(b)? != next || (a.length - b.length).abs() > 1e-12 * a.length {
                return None;
            }
            used[up[0]] = true;
            used[up[1]] = true;
            bubbles.push(Bubble { lower: current, upper: next, edges: [up[0], up[1]], perimeter: a.length + b.length });
            chain.push(next);
            current = next;
        }
        if bubbles.is_empty() || used.iter().any(|u| !u) || chain.len() != self.vertex_count {
            return None;
        }
        Some(TowerLayout { bottom, halflines: [halflines[0], halflines[1]], bubbles })
    }
}

fn check_positive(name: &str, value: f64) -> Result<(), GraphError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(GraphError::InvalidArgument(format!("{name} must be finite and positive, got {value}")))
    }
}

/// One bubble of a tower: two parallel edges between consecutive chain vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Bubble {
    pub lower: VertexId,
    pub upper: VertexId,
    pub edges: [EdgeId; 2],
    pub perimeter: f64,
}

/// Structure of a bubble tower; `bubbles[0]` touches the half-lines.
#[derive(Debug, Clone, PartialEq)]
pub struct TowerLayout {
    pub bottom: VertexId,
    pub halflines: [EdgeId; 2],
    pub bubbles: Vec<Bubble>,
}

impl TowerLayout {
    /// Trail through every edge in the order used by the ground-state fold:
    /// up the first edge of each bubble, down the second, half-line to half-line.
    pub fn eulerian_trail(&self, graph: &MetricGraph) -> Result<Trail, GraphError> {
        let mut edges = vec![self.halflines[0]];
        edges.extend(self.bubbles.iter().map(|b| b.edges[0]));
        edges.extend(self.bubbles.iter().rev().map(|b| b.edges[1]));
        edges.push(self.halflines[1]);
        Trail::through(graph, &edges)
    }

    /// Trail through the bottom bubble only.
    pub fn bottom_trail(&self, graph: &MetricGraph) -> Result<Trail, GraphError> {
        let b = &self.bubbles[0];
        Trail::through(graph, &[self.halflines[0], b.edges[0], b.edges[1], self.halflines[1]])
    }
}
