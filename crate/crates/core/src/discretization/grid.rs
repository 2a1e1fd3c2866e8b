use crate::graph::{EdgeId, GraphPoint, MetricGraph, VertexId};

use super::DiscretizationError;

/// Uniform grid on one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGrid {
    pub cells: usize,
    pub spacing: f64,
    /// Global index of the node `j = 1`; chain unknowns are contiguous.
    pub first_interior: usize,
    /// Unknowns owned by the edge: `cells - 1` interior nodes, plus the free
    /// end of a half-line under a Neumann closure.
    pub chain: usize,
}

impl EdgeGrid {
    pub fn nodes(&self) -> usize {
        self.cells + 1
    }

    pub fn interior(&self) -> std::ops::Range<usize> {
        self.first_interior..self.first_interior + self.chain
    }
}

/// Closure applied at the free end of every truncated half-line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FreeEnd {
    #[default]
    Dirichlet,
    Neumann,
}

/// Per-edge uniform grids glued at shared vertex unknowns.
///
/// Unknowns are numbered vertices first (`0..vertex_count`), then the interior
/// nodes of edge 0, edge 1, and so on. Under the default Dirichlet closure
/// the free end of a truncated half-line is not an unknown; functions vanish
/// there.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphGrid {
    graph: MetricGraph,
    target_spacing: f64,
    free_end: FreeEnd,
    edges: Vec<EdgeGrid>,
    unknowns: usize,
    weights: Vec<f64>,
}

impl GraphGrid {
    /// Chooses `ceil(L_e / h)` cells per edge so that every spacing is at most `h`.
    pub fn new(graph: &MetricGraph, h: f64) -> Result<Self, DiscretizationError> {
        GraphGrid::with_free_end(graph, h, FreeEnd::Dirichlet)
    }

    pub fn with_free_end(graph: &MetricGraph, h: f64, free_end: FreeEnd) -> Result<Self, DiscretizationError> {
        if !(h.is_finite() && h > 0.0) {
            return Err(DiscretizationError::InvalidSpacing(format!("target spacing must be positive, got {h}")));
        }
        let shortest = graph.shortest_edge();
        if h > shortest / 2.0 {
            return Err(DiscretizationError::InvalidSpacing(format!(
                "target spacing {h} exceeds half the shortest edge ({shortest})"
            )));
        }
        let mut next = graph.vertex_count();
        let mut edges = Vec::with_capacity(graph.edge_count());
        for e in graph.edges() {
            let mut cells = (e.length / h).ceil().max(2.0) as usize;
            if e.length / cells as f64 > h {
                cells += 1;
            }
            let chain = if e.is_halfline() && free_end == FreeEnd::Neumann { cells } else { cells - 1 };
            edges.push(EdgeGrid { cells, spacing: e.length / cells as f64, first_interior: next, chain });
            next += chain;
        }
        let mut weights = vec![0.0; next];
        for (edge, g) in graph.edges().iter().zip(&edges) {
            weights[edge.origin] += 0.5 * g.spacing;
            if let Some(t) = edge.terminal() {
                weights[t] += 0.5 * g.spacing;
            }
            for i in g.interior() {
                weights[i] = g.spacing;
            }
            if g.chain == g.cells {
                weights[g.first_interior + g.chain - 1] = 0.5 * g.spacing;
            }
        }
        Ok(GraphGrid { graph: graph.clone(), target_spacing: h, free_end, edges, unknowns: next, weights })
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn target_spacing(&self) -> f64 {
        self.target_spacing
    }

    pub fn free_end(&self) -> FreeEnd {
        self.free_end
    }

    pub fn edge_grid(&self, e: EdgeId) -> &EdgeGrid {
        &self.edges[e]
    }

    pub fn edge_grids(&self) -> &[EdgeGrid] {
        &self.edges
    }

    pub fn unknowns(&self) -> usize {
        self.unknowns
    }

    /// Trapezoidal (lumped-mass) weight of each unknown.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vertex_unknown(&self, v: VertexId) -> usize {
        v
    }

    /// Global unknown of node `j` on edge `e`; `None` at a Dirichlet end.
    pub fn node_index(&self, e: EdgeId, j: usize) -> Option<usize> {
        let g = &self.edges[e];
        let edge = self.graph.edge(e);
        if j == 0 {
            Some(edge.origin)
        } else if j == g.cells && g.chain < g.cells {
            edge.terminal()
        } else {
            debug_assert!(j < g.cells || g.chain == g.cells);
            Some(g.first_interior + j - 1)
        }
    }

    /// `(j, x_j, unknown)` for every node of edge `e`, endpoints included.
    pub fn edge_nodes(&self, e: EdgeId) -> impl Iterator<Item = (usize, f64, Option<usize>)> + '_ {
        let g = &self.edges[e];
        (0..=g.cells).map(move |j| (j, j as f64 * g.spacing, self.node_index(e, j)))
    }

    /// A graph point for every unknown (vertices are reported on their first incident edge).
    pub fn unknown_points(&self) -> Vec<GraphPoint> {
        let mut points = vec![GraphPoint::new(0, 0.0); self.unknowns];
        let mut vertex_done = vec![false; self.graph.vertex_count()];
        for e in 0..self.graph.edge_count() {
            for (_, x, i) in self.edge_nodes(e) {
                let Some(i) = i else { continue };
                if i < self.graph.vertex_count() {
                    if std::mem::replace(&mut vertex_done[i], true) {
                        continue;
                    }
                }
                points[i] = GraphPoint::new(e, x);
            }
        }
        points
    }

    /// Unknown indices belonging to edge `e` (its endpoints' vertices included).
    pub fn edge_unknowns(&self, e: EdgeId) -> impl Iterator<Item = usize> + '_ {
        self.edge_nodes(e).filter_map(|(_, _, i)| i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_grid_node_counts() {
        let g = MetricGraph::star(3, 50.0).unwrap();
        let grid = GraphGrid::new(&g, 0.05).unwrap();
        for eg in grid.edge_grids() {
            assert!(eg.nodes() >= 1001);
            assert!(eg.spacing <= 0.05);
        }
        // one vertex plus (cells - 1) interiors per edge
        let expected = 1 + grid.edge_grids().iter().map(|e| e.cells - 1).sum::<usize>();
        assert_eq!(grid.unknowns(), expected);
    }

    #[test]
    fn bubble_grid_node_counts() {
        let g = MetricGraph::bubble_tower(&[4.0], 20.0).unwrap();
        let grid = GraphGrid::new(&g, 0.1).unwrap();
        for e in g.bounded_edges() {
            assert!(grid.edge_grid(e).nodes() >= 21);
        }
    }

    #[test]
    fn coarse_spacing_is_rejected() {
        let g = MetricGraph::bubble_tower(&[4.0], 20.0).unwrap();
        assert!(GraphGrid::new(&g, 100.0).is_err());
        assert!(GraphGrid::new(&g, 0.0).is_err());
        assert!(GraphGrid::new(&g, 1.0).is_ok());
    }

    #[test]
    fn index_map_is_a_bijection_and_weights_sum_to_length() {
        let g = MetricGraph::bubble_tower(&[1.0, 3.0], 5.0).unwrap();
        let grid = GraphGrid::new(&g, 0.13).unwrap();
        let mut hits = vec![0usize; grid.unknowns()];
        for e in 0..g.edge_count() {
            let eg = grid.edge_grid(e);
            for j in 1..eg.cells {
                hits[grid.node_index(e, j).unwrap()] += 1;
            }
            assert_eq!(grid.node_index(e, 0), Some(g.edge(e).origin));
            assert_eq!(grid.node_index(e, eg.cells), g.edge(e).terminal());
        }
        for v in g.vertices() {
            hits[v] += 1;
        }
        assert!(hits.iter().all(|&h| h == 1));
        // Dirichlet ends carry weight h/2 that is not stored
        let dirichlet: f64 = g.halflines().map(|e| 0.5 * grid.edge_grid(e).spacing).sum();
        let total: f64 = g.edges().iter().map(|e| e.length).sum();
        let w: f64 = grid.weights().iter().sum();
        assert!((w + dirichlet - total).abs() < 1e-12);
    }
}
