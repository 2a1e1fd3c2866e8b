use serde::{Deserialize, Serialize};

use super::{Edge, EdgeId, GraphError, MetricGraph, PotentialSpec, VertexId};

/// Serialized form of a [`MetricGraph`]; see `docs/graph-format.md`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub id: EdgeId,
    pub origin: VertexId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<VertexId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default)]
    pub halfline: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
}

impl From<&MetricGraph> for GraphDocument {
    fn from(graph: &MetricGraph) -> Self {
        let edges = graph
            .edges()
            .iter()
            .enumerate()
            .map(|(id, e)| EdgeRecord {
                id,
                origin: e.origin,
                terminal: e.terminal(),
                length: (!e.is_halfline()).then_some(e.length),
                halfline: e.is_halfline(),
                truncation: e.truncation(),
            })
            .collect();
        GraphDocument { vertices: graph.vertices().collect(), edges, potential: graph.potential().cloned() }
    }
}

impl TryFrom<GraphDocument> for MetricGraph {
    type Error = GraphError;

    fn try_from(doc: GraphDocument) -> Result<Self, GraphError> {
        let bad = |m: String| GraphError::Document(m);
        if doc.vertices.iter().enumerate().any(|(i, &v)| i != v) {
            return Err(bad("vertex ids must be 0, 1, 2, ... in order".into()));
        }
        let mut edges = Vec::with_capacity(doc.edges.len());
        for (i, r) in doc.edges.into_iter().enumerate() {
            if r.id != i {
                return Err(bad(format!("edge ids must be 0, 1, 2, ... in order (found {} at position {i})", r.id)));
            }
            let edge = match (r.halfline, r.terminal, r.length, r.truncation) {
                (true, None, None, Some(t)) => Edge::halfline(r.origin, t),
                (false, Some(t), Some(l), None) => Edge::bounded(r.origin, t, l),
                (true, ..) => return Err(bad(format!("half-line {i} needs a truncation and no terminal/length"))),
                (false, ..) => return Err(bad(format!("bounded edge {i} needs a terminal and a length"))),
            };
            edges.push(edge);
        }
        MetricGraph::new(doc.vertices.len(), edges, doc.potential)
    }
}

impl MetricGraph {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GraphDocument::from(self)).expect("graph documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDocument = serde_json::from_str(text).map_err(|e| GraphError::Document(e.to_string()))?;
        MetricGraph::try_from(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SampledPotential;

    #[test]
    fn builders_roundtrip_losslessly() {
        let smooth = SampledPotential::from_fn(|x| 0.3 * (-x * x / 7.0).exp(), -12.5, 12.5, 77);
        let graphs = [
            MetricGraph::star(3, 50.0).unwrap(),
            MetricGraph::bubble_tower(&[0.1 + 0.2, 4.0, 7.123456789], 40.0).unwrap(),
            MetricGraph::pendant_star(5, 2.0, 50.0).unwrap(),
            MetricGraph::line_with_potential(PotentialSpec::Delta { strength: 0.7 }, 30.0).unwrap(),
            MetricGraph::line_with_potential(PotentialSpec::Smooth(smooth), 30.0).unwrap(),
        ];
        for g in graphs {
            let back = MetricGraph::from_json(&g.to_json()).unwrap();
            assert_eq!(back, g);
        }
    }

    #[test]
    fn malformed_documents_are_rejected() {
        let text = r#"{"vertices":[0],"edges":[{"id":0,"origin":0,"halfline":true}]}"#;
        assert!(matches!(MetricGraph::from_json(text), Err(GraphError::Document(_))));
        let text = r#"{"vertices":[0,1],"edges":[{"id":0,"origin":0,"halfline":true,"truncation":5.0}]}"#;
        assert!(matches!(MetricGraph::from_json(text), Err(GraphError::Disconnected(1))));
        let text = r#"{"vertices":[0],"edges":[],"extra":1}"#;
        assert!(MetricGraph::from_json(text).is_err());
    }
}
