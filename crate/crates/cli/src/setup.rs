//! Turns validated settings into graphs, grids and initial states.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Deserialize;

use nlsgraph::discretization::{GraphFunction, GraphGrid};
use nlsgraph::graph::MetricGraph;
use nlsgraph::states::{
    bubble_tower_ground_state, line_soliton_datum, slow_soliton_datum, LineSoliton, SolitonParams,
};

use crate::config::{DatumChoice, ExperimentConfig, SolitonSize};
use crate::error::CliError;

pub(crate) fn soliton(p: f64, size: SolitonSize) -> Result<LineSoliton, CliError> {
    match size {
        SolitonSize::Omega(omega) => LineSoliton::with_frequency(p, omega),
        SolitonSize::Mass(mu) => LineSoliton::with_mass(p, mu),
    }
    .map_err(|e| CliError::Invalid(e.to_string()))
}

pub(crate) fn grid(config: &ExperimentConfig) -> Result<(MetricGraph, Arc<GraphGrid>), CliError> {
    let graph = config.build_graph()?;
    let grid = GraphGrid::new(&graph, config.h).map_err(|e| CliError::Invalid(format!("grid: {e}")))?;
    Ok((graph, Arc::new(grid)))
}

/// The soliton a datum is built from, used as the orbital reference.
pub(crate) fn datum_soliton(config: &ExperimentConfig, datum: &DatumChoice) -> Result<Option<LineSoliton>, CliError> {
    Ok(match *datum {
        DatumChoice::LineSoliton { size, .. } | DatumChoice::Folded { size } => Some(soliton(config.p, size)?),
        DatumChoice::SlowSoliton { mu, .. } => Some(soliton(config.p, SolitonSize::Mass(mu))?),
        DatumChoice::File(_) => None,
    })
}

pub(crate) fn initial_state(
    config: &ExperimentConfig,
    grid: &Arc<GraphGrid>,
    datum: &DatumChoice,
) -> Result<GraphFunction, CliError> {
    let invalid = |e: nlsgraph::states::StateError| CliError::Invalid(format!("datum: {e}"));
    match datum {
        &DatumChoice::LineSoliton { launch, x0, v0, size } => {
            line_soliton_datum(grid, launch, &soliton(config.p, size)?, x0, v0).map_err(invalid)
        }
        &DatumChoice::SlowSoliton { launch, x0, v, mu, theta, renormalize } => {
            let params = SolitonParams::new(config.p, mu).at(x0).moving(v).phase(theta);
            let mut u = slow_soliton_datum(grid, launch, &params).map_err(invalid)?;
            if renormalize {
                u.rescale_to_mass(mu).map_err(|e| CliError::Invalid(format!("datum: {e}")))?;
            }
            Ok(u)
        }
        &DatumChoice::Folded { size } => {
            bubble_tower_ground_state(grid, soliton(config.p, size)?.mass(), config.p).map_err(invalid)
        }
        DatumChoice::File(path) => read_state(path, grid),
    }
}

#[derive(Deserialize)]
struct SnapshotRow {
    time: f64,
    edge_id: usize,
    x: f64,
    re: f64,
    im: f64,
}

/// Loads the last snapshot of a `time,edge_id,x,re,im,abs2` table. The table
/// must come from the same graph and spacing.
pub(crate) fn read_state(path: &Path, grid: &Arc<GraphGrid>) -> Result<GraphFunction, CliError> {
    let invalid = |m: String| CliError::Invalid(format!("datum file {}: {m}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| invalid(e.to_string()))?;
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        let row: SnapshotRow = row.map_err(|e| invalid(e.to_string()))?;
        if rows.last().is_some_and(|last: &SnapshotRow| last.time != row.time) {
            rows.clear();
        }
        rows.push(row);
    }
    let graph = grid.graph();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.unknowns()];
    let mut rows = rows.iter().peekable();
    for e in 0..graph.edge_count() {
        for (j, x, unknown) in grid.edge_nodes(e) {
            let row = rows.next().ok_or_else(|| invalid("fewer nodes than the grid".into()))?;
            if row.edge_id != e || (row.x - x).abs() > 1e-9 * graph.edge(e).length.max(1.0) {
                return Err(invalid(format!("node {j} of edge {e} does not match the grid (found edge {} at x = {})", row.edge_id, row.x)));
            }
            if let Some(i) = unknown {
                values[i] = Complex64::new(row.re, row.im);
            }
        }
    }
    if rows.peek().is_some() {
        return Err(invalid("more nodes than the grid".into()));
    }
    GraphFunction::from_values(grid, values).map_err(|e| invalid(e.to_string()))
}

pub(crate) fn create_file(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::output(path, e))
}

pub(crate) fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut out = create_file(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::output(path, e))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| CliError::output(path, e))
}

pub(crate) fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::output(path, e))
}
