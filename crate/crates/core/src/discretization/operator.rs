use std::sync::Arc;

use num_complex::Complex64;

use super::{derivative_sq, DiscretizationError, GraphFunction, GraphGrid};
use crate::graph::{MetricGraph, PotentialSpec, VertexId};

/// Real sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Sums duplicate `(row, col, value)` triplets.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside a {n}x{n} matrix");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(col, value)` pairs stored in row `r`, columns ascending.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n).map(|r| self.row(r).map(|(c, v)| x[c] * v).sum()).collect()
    }

    /// Exact entry-wise symmetry check.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|r| self.row(r).all(|(c, v)| self.entry(c, r) == v))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for (r, row) in dense.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        dense
    }
}

/// Potential term resolved onto the unknowns of a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialData {
    /// `g δ` at a vertex.
    Delta { vertex: VertexId, strength: f64 },
    /// `V` sampled at every unknown.
    Nodal(Vec<f64>),
}

impl PotentialData {
    /// Resolves the graph's own potential. On the line, edge 0 is the
    /// negative axis and edge 1 the positive axis.
    pub fn from_grid(grid: &GraphGrid) -> Option<Self> {
        match grid.graph().potential()? {
            PotentialSpec::Delta { strength } => Some(PotentialData::Delta { vertex: 0, strength: *strength }),
            PotentialSpec::Smooth(v) => {
                let values = grid
                    .unknown_points()
                    .iter()
                    .map(|p| v.eval(if p.edge == 0 { -p.x } else { p.x }))
                    .collect();
                Some(PotentialData::Nodal(values))
            }
        }
    }
}

/// Kirchhoff Laplacian with optional potential, stored as the symmetric
/// stiffness matrix `K` over the grid unknowns.
///
/// `u*Ku` is the discrete `‖u'‖² + ∫V|u|² + g|u(0)|²`, and [`apply`](Self::apply)
/// returns `W⁻¹Ku ≈ -u'' + Vu` where `W` holds the lumped quadrature weights.
/// At a vertex the row of `K` is the sum over incident edges of the one-sided
/// differences `(u_v - u_{e,1}) / h_e`, i.e. minus the discrete outgoing flux.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: Arc<GraphGrid>,
    stiffness: SparseMatrix,
    potential: Option<PotentialData>,
}

impl DiscreteOperator {
    /// Operator for the grid's graph including its own potential, if any.
    pub fn new(grid: &Arc<GraphGrid>) -> Self {
        let potential = PotentialData::from_grid(grid);
        Self::assemble(grid.graph(), grid, potential.as_ref()).expect("potential resolved from its own grid")
    }

    pub fn assemble(
        graph: &MetricGraph,
        grid: &Arc<GraphGrid>,
        potential: Option<&PotentialData>,
    ) -> Result<Self, DiscretizationError> {
        if grid.graph() != graph {
            return Err(DiscretizationError::GridMismatch);
        }
        let n = grid.unknowns();
        let mut triplets = Vec::with_capacity(4 * n);
        for e in 0..graph.edge_count() {
            let k = 1.0 / grid.edge_grid(e).spacing;
            let nodes: Vec<Option<usize>> = grid.edge_nodes(e).map(|(_, _, i)| i).collect();
            for cell in nodes.windows(2) {
                if let Some(a) = cell[0] {
                    triplets.push((a, a, k));
                }
                if let Some(b) = cell[1] {
                    triplets.push((b, b, k));
                }
                if let (Some(a), Some(b)) = (cell[0], cell[1]) {
                    triplets.push((a, b, -k));
                    triplets.push((b, a, -k));
                }
            }
        }
        match potential {
            None => {}
            Some(PotentialData::Delta { vertex, strength }) => {
                if *vertex >= graph.vertex_count() {
                    return Err(DiscretizationError::PotentialMismatch(format!("no vertex {vertex}")));
                }
                if !(strength.is_finite() && *strength >= 0.0) {
                    return Err(DiscretizationError::PotentialMismatch(format!(
                        "delta strength must be non-negative, got {strength}"
                    )));
                }
                triplets.push((*vertex, *vertex, *strength));
            }
            Some(PotentialData::Nodal(values)) => {
                if values.len() != n {
                    return Err(DiscretizationError::PotentialMismatch(format!(
                        "{} samples for {n} unknowns",
                        values.len()
                    )));
                }
                for (i, (&v, &w)) in values.iter().zip(grid.weights()).enumerate() {
                    triplets.push((i, i, w * v));
                }
            }
        }
        Ok(DiscreteOperator {
            grid: Arc::clone(grid),
            stiffness: SparseMatrix::from_triplets(n, triplets),
            potential: potential.cloned(),
        })
    }

    pub fn grid(&self) -> &Arc<GraphGrid> {
        &self.grid
    }

    /// The symmetric matrix `K`.
    pub fn stiffness(&self) -> &SparseMatrix {
        &self.stiffness
    }

    pub fn potential(&self) -> Option<&PotentialData> {
        self.potential.as_ref()
    }

    pub fn delta_strength(&self) -> Option<f64> {
        match self.potential {
            Some(PotentialData::Delta { strength, .. }) => Some(strength),
            _ => None,
        }
    }

    fn check(&self, u: &GraphFunction) -> Result<(), DiscretizationError> {
        if Arc::ptr_eq(&self.grid, u.grid()) || *self.grid == **u.grid() {
            Ok(())
        } else {
            Err(DiscretizationError::GridMismatch)
        }
    }

    /// `W⁻¹Ku`, the discrete `-u'' + Vu`.
    pub fn apply(&self, u: &GraphFunction) -> Result<GraphFunction, DiscretizationError> {
        self.check(u)?;
        let mut ku = self.stiffness.mul_vec(u.values());
        for (z, w) in ku.iter_mut().zip(self.grid.weights()) {
            *z /= *w;
        }
        GraphFunction::from_values(&self.grid, ku)
    }

    /// `Re(u* K u)`, summed cell by cell as `Σ |Δu|²/h` plus the potential
    /// term. Expanding `u*(Ku)` directly loses about `1/h` of the relative
    /// precision to cancellation, which is enough to confuse the energy
    /// monotonicity check of the gradient flow.
    pub fn quadratic_form(&self, u: &GraphFunction) -> Result<f64, DiscretizationError> {
        self.check(u)?;
        let vals = u.values();
        let potential = match &self.potential {
            None => 0.0,
            Some(PotentialData::Delta { vertex, strength }) => strength * vals[*vertex].norm_sqr(),
            Some(PotentialData::Nodal(v)) => {
                vals.iter().zip(v).zip(self.grid.weights()).map(|((z, v), w)| w * v * z.norm_sqr()).sum()
            }
        };
        Ok(derivative_sq(u) + potential)
    }

    /// `|(Ku)_v|` at every vertex: the discrete flux imbalance.
    pub fn kirchhoff_residual(&self, u: &GraphFunction) -> Result<Vec<f64>, DiscretizationError> {
        self.check(u)?;
        let vals = u.values();
        Ok(self
            .grid
            .graph()
            .vertices()
            .map(|v| self.stiffness.row(v).map(|(c, k)| vals[c] * k).sum::<Complex64>().norm())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{derivative_sq, FreeEnd};
    use crate::graph::SampledPotential;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn stiffness_is_exactly_symmetric() {
        for g in [
            MetricGraph::star(3, 5.0).unwrap(),
            MetricGraph::bubble_tower(&[1.0, 2.0], 4.0).unwrap(),
            MetricGraph::pendant_star(4, 1.3, 5.0).unwrap(),
            MetricGraph::line_with_potential(
                PotentialSpec::Smooth(SampledPotential::from_fn(|x| (-x * x).exp(), -3.0, 3.0, 31)),
                5.0,
            )
            .unwrap(),
        ] {
            let grid = Arc::new(GraphGrid::new(&g, 0.11).unwrap());
            assert!(DiscreteOperator::new(&grid).stiffness().is_symmetric());
        }
    }

    #[test]
    fn constants_are_flux_free_under_neumann_closure() {
        let g = MetricGraph::star(3, 5.0).unwrap();
        let grid = Arc::new(GraphGrid::with_free_end(&g, 0.1, FreeEnd::Neumann).unwrap());
        let op = DiscreteOperator::new(&grid);
        let u = GraphFunction::from_fn(&grid, |_, _| c(2.0));
        assert!(op.apply(&u).unwrap().values().iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn interior_rows_are_second_differences() {
        let g = MetricGraph::bubble_tower(&[4.0], 6.0).unwrap();
        let grid = Arc::new(GraphGrid::new(&g, 0.1).unwrap());
        let op = DiscreteOperator::new(&grid);
        let u = GraphFunction::from_fn(&grid, |e, x| c(if e == 2 { x * x } else { 0.0 }));
        let au = op.apply(&u).unwrap();
        let cells = grid.edge_grid(2).cells;
        for j in 2..cells - 1 {
            let z = au.values()[grid.node_index(2, j).unwrap()];
            assert!((z.re + 2.0).abs() < 1e-8, "row {j}: {z}");
        }
    }

    #[test]
    fn quadratic_form_matches_difference_quotients_and_delta_term() {
        let g = MetricGraph::line_with_potential(PotentialSpec::Delta { strength: 0.7 }, 5.0).unwrap();
        let grid = Arc::new(GraphGrid::new(&g, 0.1).unwrap());
        let op = DiscreteOperator::new(&grid);
        assert_eq!(op.delta_strength(), Some(0.7));
        let u = GraphFunction::from_fn(&grid, |_, x| Complex64::new((-x * x).exp(), 0.5 * x.sin()));
        let q = op.quadratic_form(&u).unwrap();
        let u0 = u.values()[0].norm_sqr();
        assert!((q - derivative_sq(&u) - 0.7 * u0).abs() < 1e-10);
    }

    #[test]
    fn quadratic_form_agrees_with_the_matrix() {
        let v = SampledPotential::from_fn(|x| (-x * x).exp(), -8.0, 8.0, 321);
        for g in [
            MetricGraph::line_with_potential(PotentialSpec::Smooth(v), 8.0).unwrap(),
            MetricGraph::bubble_tower(&[2.0, 3.0], 8.0).unwrap(),
        ] {
            let grid = Arc::new(GraphGrid::new(&g, 0.05).unwrap());
            let op = DiscreteOperator::new(&grid);
            let u = GraphFunction::from_fn(&grid, |e, x| Complex64::new((x + e as f64).cos(), (0.3 * x).sin()));
            let ku = op.stiffness().mul_vec(u.values());
            let direct: f64 = u.values().iter().zip(&ku).map(|(a, b)| (a.conj() * b).re).sum();
            let q = op.quadratic_form(&u).unwrap();
            assert!((q - direct).abs() < 1e-10 * direct.abs());
        }
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let g = MetricGraph::line(5.0).unwrap();
        let other = MetricGraph::star(3, 5.0).unwrap();
        let grid = Arc::new(GraphGrid::new(&g, 0.5).unwrap());
        assert_eq!(
            DiscreteOperator::assemble(&other, &grid, None).err(),
            Some(DiscretizationError::GridMismatch)
        );
        let bad = PotentialData::Nodal(vec![1.0; 3]);
        assert!(matches!(
            DiscreteOperator::assemble(&g, &grid, Some(&bad)),
            Err(DiscretizationError::PotentialMismatch(_))
        ));
        let op = DiscreteOperator::new(&grid);
        let grid2 = Arc::new(GraphGrid::new(&other, 0.5).unwrap());
        assert!(op.apply(&GraphFunction::zeros(&grid2)).is_err());
    }
}
