use std::io::Write;

use super::{DiscretizationError, GraphFunction};

/// Streams snapshots as CSV rows `time,edge_id,x,re,im,abs2`, one row per
/// grid node with edge endpoints repeated on every incident edge.
pub struct SnapshotWriter<W: Write> {
    inner: csv::Writer<W>,
}

fn export(e: impl std::fmt::Display) -> DiscretizationError {
    DiscretizationError::Export(e.to_string())
}

impl<W: Write> SnapshotWriter<W> {
    pub fn new(sink: W) -> Result<Self, DiscretizationError> {
        let mut inner = csv::Writer::from_writer(sink);
        inner.write_record(["time", "edge_id", "x", "re", "im", "abs2"]).map_err(export)?;
        Ok(SnapshotWriter { inner })
    }

    pub fn write(&mut self, time: f64, u: &GraphFunction) -> Result<(), DiscretizationError> {
        for e in 0..u.grid().graph().edge_count() {
            for (x, z) in u.edge_values(e) {
                self.inner.serialize((time, e, x, z.re, z.im, z.norm_sqr())).map_err(export)?;
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, DiscretizationError> {
        self.inner.flush().map_err(export)?;
        self.inner.into_inner().map_err(export)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::GraphGrid;
    use crate::graph::MetricGraph;
    use num_complex::Complex64;
    use std::sync::Arc;

    #[test]
    fn one_row_per_node() {
        let g = MetricGraph::star(3, 2.0).unwrap();
        let grid = Arc::new(GraphGrid::new(&g, 0.5).unwrap());
        let u = GraphFunction::from_fn(&grid, |_, x| Complex64::new(1.0, x));
        let mut w = SnapshotWriter::new(Vec::new()).unwrap();
        w.write(0.5, &u).unwrap();
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "time,edge_id,x,re,im,abs2");
        assert_eq!(lines.len(), 1 + 3 * 5);
        assert_eq!(lines[2], "0.5,0,0.5,1.0,0.5,1.25");
    }
}
