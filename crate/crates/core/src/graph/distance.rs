use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{GraphError, GraphPoint, MetricGraph, VertexId};

#[derive(PartialEq)]
struct Entry(f64, VertexId);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Reversed so that `BinaryHeap` pops the smallest distance first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Shortest-path distance from `from` to every vertex of the (truncated) graph.
///
/// Half-lines only lead back to their own vertex, so paths through the lost
/// tail beyond the truncation never matter.
pub fn distances_from(graph: &MetricGraph, from: GraphPoint) -> Result<Vec<f64>, GraphError> {
    graph.check_point(from)?;
    let mut dist = vec![f64::INFINITY; graph.vertex_count()];
    let mut heap = BinaryHeap::new();
    let edge = graph.edge(from.edge);
    let mut seed = |v: VertexId, d: f64, heap: &mut BinaryHeap<Entry>| {
        if d < dist[v] {
            dist[v] = d;
            heap.push(Entry(d, v));
        }
    };
    seed(edge.origin, from.x, &mut heap);
    if let Some(t) = edge.terminal() {
        seed(t, edge.length - from.x, &mut heap);
    }
    while let Some(Entry(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for e in graph.incident(v) {
            let edge = graph.edge(e);
            let Some(t) = edge.terminal() else { continue };
            let w = if edge.origin == v { t } else { edge.origin };
            let nd = d + edge.length;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Entry(nd, w));
            }
        }
    }
    Ok(dist)
}

/// Distance from a point whose vertex distances are known to `(edge, x)`.
pub(crate) fn distance_to_point(graph: &MetricGraph, vertex_dist: &[f64], from: GraphPoint, to: GraphPoint) -> f64 {
    let edge = graph.edge(to.edge);
    let mut d = vertex_dist[edge.origin] + to.x;
    if let Some(t) = edge.terminal() {
        d = d.min(vertex_dist[t] + edge.length - to.x);
    }
    if from.edge == to.edge {
        d = d.min((from.x - to.x).abs());
    }
    d
}

/// Geodesic distance between two points of the truncated graph.
pub fn graph_distance(graph: &MetricGraph, a: GraphPoint, b: GraphPoint) -> Result<f64, GraphError> {
    graph.check_point(b)?;
    let dist = distances_from(graph, a)?;
    Ok(distance_to_point(graph, &dist, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn metric_axioms_on_examples() {
        let star = MetricGraph::star(3, 10.0).unwrap();
        let p = GraphPoint::new(1, 3.5);
        assert_eq!(graph_distance(&star, p, p).unwrap(), 0.0);
        let d = graph_distance(&star, GraphPoint::new(0, 1.0), GraphPoint::new(0, 4.0)).unwrap();
        assert_eq!(d, 3.0);
        let d = graph_distance(&star, GraphPoint::new(0, 1.0), GraphPoint::new(2, 4.0)).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn antipodal_points_on_a_bubble() {
        // bubble of perimeter 4: edges 2 and 3 of length 2 between vertices 0 and 1
        let g = MetricGraph::bubble_tower(&[4.0], 20.0).unwrap();
        let a = GraphPoint::new(2, 1.0);
        let b = GraphPoint::new(3, 1.0);
        // enumerate both routes: through vertex 0 and through vertex 1
        let via_bottom = a.x + b.x;
        let via_top = (2.0 - a.x) + (2.0 - b.x);
        assert_eq!(via_bottom.min(via_top), 2.0);
        assert_eq!(graph_distance(&g, a, b).unwrap(), 2.0);
        assert_eq!(graph_distance(&g, GraphPoint::new(2, 0.0), GraphPoint::new(2, 2.0)).unwrap(), 2.0);
    }

    #[test]
    fn rejects_points_off_the_graph() {
        let star = MetricGraph::star(3, 10.0).unwrap();
        assert!(graph_distance(&star, GraphPoint::new(0, 11.0), GraphPoint::new(1, 0.0)).is_err());
        assert!(graph_distance(&star, GraphPoint::new(4, 1.0), GraphPoint::new(1, 0.0)).is_err());
    }

    proptest! {
        #[test]
        fn symmetry_and_triangle_inequality(
            raw in proptest::collection::vec((0..8usize, 0.0..1.0f64), 3)
        ) {
            let g = MetricGraph::bubble_tower(&[2.0, 3.0, 5.0], 8.0).unwrap();
            let pt = |(e, t): (usize, f64)| GraphPoint::new(e, t * g.edge(e).length);
            let (a, b, c) = (pt(raw[0]), pt(raw[1]), pt(raw[2]));
            let ab = graph_distance(&g, a, b).unwrap();
            let ba = graph_distance(&g, b, a).unwrap();
            let ac = graph_distance(&g, a, c).unwrap();
            let cb = graph_distance(&g, c, b).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!(ab <= ac + cb + 1e-12);
            prop_assert!(ab >= 0.0);
        }
    }
}
