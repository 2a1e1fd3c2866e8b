//! Direct solver for the shifted systems `(αW + βK) x = b` that appear in the
//! time stepper and the gradient flow.
//!
//! Every edge contributes a tridiagonal chain of unknowns that touches at most
//! two vertex unknowns, so the system is solved by eliminating the chains
//! (Thomas algorithm) and then solving the small dense Schur complement on
//! the vertices. Factorization cost and memory are linear in the number of
//! unknowns.

use num_complex::Complex64;
use thiserror::Error;

use crate::discretization::DiscreteOperator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("system is numerically singular (pivot {pivot} at row {row})")]
    Singular { row: usize, pivot: f64 },
    #[error("right-hand side has {got} entries, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Thomas factorization of a complex symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
struct Tridiagonal {
    /// `sub[k]` couples unknown `k` to `k - 1` (`sub[0]` unused).
    sub: Vec<Complex64>,
    /// Normalized super-diagonal `c'_k`.
    upper: Vec<Complex64>,
    inv_pivot: Vec<Complex64>,
}

impl Tridiagonal {
    fn factor(diag: &[Complex64], off: &[Complex64], offset: usize) -> Result<Self, LinalgError> {
        let m = diag.len();
        let mut sub = vec![ZERO; m];
        let mut upper = vec![ZERO; m];
        let mut inv_pivot = vec![ZERO; m];
        let mut prev_upper = ZERO;
        for k in 0..m {
            if k > 0 {
                sub[k] = off[k - 1];
            }
            let pivot = diag[k] - sub[k] * prev_upper;
            if !(pivot.norm() > 0.0) || !pivot.is_finite() {
                return Err(LinalgError::Singular { row: offset + k, pivot: pivot.norm() });
            }
            inv_pivot[k] = pivot.inv();
            upper[k] = if k + 1 < m { off[k] * inv_pivot[k] } else { ZERO };
            prev_upper = upper[k];
        }
        Ok(Tridiagonal { sub, upper, inv_pivot })
    }

    fn solve_in_place(&self, d: &mut [Complex64]) {
        let m = d.len();
        for k in 0..m {
            let carry = if k > 0 { self.sub[k] * d[k - 1] } else { ZERO };
            d[k] = (d[k] - carry) * self.inv_pivot[k];
        }
        for k in (0..m.saturating_sub(1)).rev() {
            d[k] = d[k] - self.upper[k] * d[k + 1];
        }
    }
}

/// Dense LU factorization with partial pivoting.
#[derive(Debug, Clone)]
struct DenseLu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl DenseLu {
    fn factor(n: usize, mut a: Vec<Complex64>) -> Result<Self, LinalgError> {
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm())).unwrap();
            let pivot = a[p * n + k];
            if !(pivot.norm() > 0.0) || !pivot.is_finite() {
                return Err(LinalgError::Singular { row: k, pivot: pivot.norm() });
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let inv = a[k * n + k].inv();
            for i in k + 1..n {
                let f = a[i * n + k] * inv;
                a[i * n + k] = f;
                for c in k + 1..n {
                    let t = a[k * n + c];
                    a[i * n + c] -= f * t;
                }
            }
        }
        Ok(DenseLu { n, lu: a, perm })
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for c in 0..i {
                let t = self.lu[i * n + c] * x[c];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for c in i + 1..n {
                let t = self.lu[i * n + c] * x[c];
                x[i] -= t;
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}

/// One edge's chain of unknowns `start..start + len`.
#[derive(Debug, Clone)]
struct Chain {
    start: usize,
    origin: usize,
    terminal: Option<usize>,
    /// Matrix entries coupling the first/last chain unknown to its vertex.
    b_origin: Complex64,
    b_terminal: Complex64,
    factor: Tridiagonal,
    /// `T⁻¹e_first` and `T⁻¹e_last`.
    z_first: Vec<Complex64>,
    z_last: Vec<Complex64>,
}

/// Factorized `αW + βK` for a fixed operator.
#[derive(Debug, Clone)]
pub struct ShiftedSolver {
    n: usize,
    nv: usize,
    chains: Vec<Chain>,
    schur: DenseLu,
}

impl ShiftedSolver {
    pub fn new(op: &DiscreteOperator, alpha: Complex64, beta: Complex64) -> Result<Self, LinalgError> {
        let grid = op.grid();
        let graph = grid.graph();
        let k = op.stiffness();
        let w = grid.weights();
        let nv = graph.vertex_count();
        let entry = |r: usize, c: usize| {
            let d = if r == c { alpha * w[r] } else { ZERO };
            d + beta * k.entry(r, c)
        };

        let mut schur = vec![ZERO; nv * nv];
        for v in 0..nv {
            for (c, _) in k.row(v).filter(|&(c, _)| c < nv) {
                schur[v * nv + c] = entry(v, c);
            }
            schur[v * nv + v] = entry(v, v);
        }

        let mut chains = Vec::with_capacity(graph.edge_count());
        for (e, edge) in graph.edges().iter().enumerate() {
            let range = grid.edge_grid(e).interior();
            let (start, m) = (range.start, range.len());
            if m == 0 {
                continue;
            }
            let diag: Vec<Complex64> = range.clone().map(|i| entry(i, i)).collect();
            let off: Vec<Complex64> = range.clone().take(m - 1).map(|i| entry(i, i + 1)).collect();
            let factor = Tridiagonal::factor(&diag, &off, start)?;
            let mut z_first = vec![ZERO; m];
            z_first[0] = Complex64::new(1.0, 0.0);
            factor.solve_in_place(&mut z_first);
            let mut z_last = vec![ZERO; m];
            z_last[m - 1] = Complex64::new(1.0, 0.0);
            factor.solve_in_place(&mut z_last);

            let terminal = edge.terminal();
            let b_origin = entry(start, edge.origin);
            let b_terminal = terminal.map_or(ZERO, |t| entry(start + m - 1, t));
            let o = edge.origin;
            schur[o * nv + o] -= b_origin * b_origin * z_first[0];
            if let Some(t) = terminal {
                schur[o * nv + t] -= b_origin * b_terminal * z_last[0];
                schur[t * nv + o] -= b_terminal * b_origin * z_first[m - 1];
                schur[t * nv + t] -= b_terminal * b_terminal * z_last[m - 1];
            }
            chains.push(Chain { start, origin: o, terminal, b_origin, b_terminal, factor, z_first, z_last });
        }
        let schur = DenseLu::factor(nv, schur)?;
        Ok(ShiftedSolver { n: grid.unknowns(), nv, chains, schur })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
        if rhs.len() != self.n {
            return Err(LinalgError::Dimension { expected: self.n, got: rhs.len() });
        }
        let mut x = rhs.to_vec();
        let mut fv: Vec<Complex64> = rhs[..self.nv].to_vec();
        for c in &self.chains {
            let m = c.z_first.len();
            let y = &mut x[c.start..c.start + m];
            c.factor.solve_in_place(y);
            fv[c.origin] -= c.b_origin * y[0];
            if let Some(t) = c.terminal {
                fv[t] -= c.b_terminal * y[m - 1];
            }
        }
        let xv = self.schur.solve(&fv);
        x[..self.nv].copy_from_slice(&xv);
        for c in &self.chains {
            let m = c.z_first.len();
            let so = c.b_origin * xv[c.origin];
            let st = c.terminal.map_or(ZERO, |t| c.b_terminal * xv[t]);
            for k in 0..m {
                x[c.start + k] -= so * c.z_first[k] + st * c.z_last[k];
            }
        }
        Ok(x)
    }
}
