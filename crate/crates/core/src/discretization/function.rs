use std::sync::Arc;

use num_complex::Complex64;

use super::{DiscretizationError, GraphGrid};
use crate::graph::EdgeId;

/// Complex samples on a [`GraphGrid`], one value per unknown.
///
/// Vertices own a single value shared by all incident edges, so continuity
/// holds by construction. Dirichlet free ends are not stored and read as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFunction {
    grid: Arc<GraphGrid>,
    values: Vec<Complex64>,
}

impl GraphFunction {
    pub fn zeros(grid: &Arc<GraphGrid>) -> Self {
        GraphFunction { grid: Arc::clone(grid), values: vec![Complex64::new(0.0, 0.0); grid.unknowns()] }
    }

    /// Samples `f(edge, x)` at every unknown. A vertex takes the average of
    /// the values reported by its incident edges, which is exact for any `f`
    /// that is already continuous.
    pub fn from_fn(grid: &Arc<GraphGrid>, f: impl Fn(EdgeId, f64) -> Complex64) -> Self {
        let graph = grid.graph();
        let nv = graph.vertex_count();
        let mut values = vec![Complex64::new(0.0, 0.0); grid.unknowns()];
        let mut hits = vec![0usize; nv];
        for e in 0..graph.edge_count() {
            for (_, x, i) in grid.edge_nodes(e) {
                let Some(i) = i else { continue };
                values[i] += f(e, x);
                if i < nv {
                    hits[i] += 1;
                }
            }
        }
        for (v, &n) in values.iter_mut().zip(&hits) {
            if n > 1 {
                *v /= n as f64;
            }
        }
        GraphFunction { grid: Arc::clone(grid), values }
    }

    pub fn from_values(grid: &Arc<GraphGrid>, values: Vec<Complex64>) -> Result<Self, DiscretizationError> {
        if values.len() != grid.unknowns() {
            return Err(DiscretizationError::LengthMismatch { expected: grid.unknowns(), got: values.len() });
        }
        Ok(GraphFunction { grid: Arc::clone(grid), values })
    }

    pub fn grid(&self) -> &Arc<GraphGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Value at an unknown, or 0 at a Dirichlet end (`None`).
    pub fn value_at(&self, unknown: Option<usize>) -> Complex64 {
        unknown.map_or(Complex64::new(0.0, 0.0), |i| self.values[i])
    }

    /// `(x, u(x))` at every node of edge `e`, endpoints included.
    pub fn edge_values(&self, e: EdgeId) -> Vec<(f64, Complex64)> {
        self.grid.edge_nodes(e).map(|(_, x, i)| (x, self.value_at(i))).collect()
    }

    /// True when both functions are defined on the same grid.
    pub fn same_grid(&self, other: &GraphFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub(crate) fn check_grid(&self, other: &GraphFunction) -> Result<(), DiscretizationError> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(DiscretizationError::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        GraphFunction { grid: Arc::clone(&self.grid), values: self.values.iter().map(|&z| f(z)).collect() }
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|z| c * z)
    }

    /// `self - other`, pointwise.
    pub fn sub(&self, other: &GraphFunction) -> Result<Self, DiscretizationError> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(GraphFunction { grid: Arc::clone(&self.grid), values })
    }

    /// Rescales the amplitude so that the discrete mass equals `mu`.
    pub fn rescale_to_mass(&mut self, mu: f64) -> Result<(), DiscretizationError> {
        let m = super::lq_power(self, 2.0);
        if m == 0.0 || !m.is_finite() {
            return Err(DiscretizationError::ZeroFunction);
        }
        let s = (mu / m).sqrt();
        for z in &mut self.values {
            *z *= s;
        }
        Ok(())
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}
