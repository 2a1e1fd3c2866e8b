//! Trapezoidal quadrature of `L^q` norms and forward-difference `H¹` quantities.

use num_complex::Complex64;

use super::{DiscretizationError, GraphFunction};
use crate::graph::EdgeId;

fn modulus_pow(z: Complex64, q: f64) -> f64 {
    if q == 2.0 {
        z.norm_sqr()
    } else {
        z.norm().powf(q)
    }
}

/// `Σ_e ∫_{I_e} |u|^q` by the trapezoidal rule on every edge.
pub fn lq_power(u: &GraphFunction, q: f64) -> f64 {
    u.values().iter().zip(u.grid().weights()).map(|(&z, &w)| w * modulus_pow(z, q)).sum()
}

/// `‖u‖_{L^q}`; `q = ∞` gives the largest nodal modulus.
pub fn norm_lq(u: &GraphFunction, q: f64) -> Result<f64, DiscretizationError> {
    if q.is_nan() || q < 1.0 {
        return Err(DiscretizationError::InvalidExponent(q));
    }
    if q.is_infinite() {
        return Ok(u.max_modulus());
    }
    Ok(lq_power(u, q).powf(1.0 / q))
}

/// Trapezoidal `∫_{I_e} |u|^q` on a single edge.
pub fn edge_lq_power(u: &GraphFunction, e: EdgeId, q: f64) -> f64 {
    let grid = u.grid();
    let g = grid.edge_grid(e);
    grid.edge_nodes(e)
        .map(|(j, _, i)| {
            let w = if j == 0 || j == g.cells { 0.5 * g.spacing } else { g.spacing };
            w * modulus_pow(u.value_at(i), q)
        })
        .sum()
}

pub fn edge_mass(u: &GraphFunction, e: EdgeId) -> f64 {
    edge_lq_power(u, e, 2.0)
}

/// `Σ_e Σ_cells |u_{j+1} - u_j|² / h_e`, the midpoint rule for `‖u'‖²`.
pub fn derivative_sq(u: &GraphFunction) -> f64 {
    let grid = u.grid();
    (0..grid.graph().edge_count())
        .map(|e| {
            let h = grid.edge_grid(e).spacing;
            let mut prev: Option<Complex64> = None;
            let mut acc = 0.0;
            for (_, _, i) in grid.edge_nodes(e) {
                let z = u.value_at(i);
                if let Some(p) = prev {
                    acc += (z - p).norm_sqr();
                }
                prev = Some(z);
            }
            acc / h
        })
        .sum()
}

pub fn norm_h1(u: &GraphFunction) -> f64 {
    (lq_power(u, 2.0) + derivative_sq(u)).sqrt()
}

/// Discrete `H¹` inner product `∫ u v̄ + ∫ u' v̄'`, linear in `u`.
pub fn h1_inner(u: &GraphFunction, v: &GraphFunction) -> Result<Complex64, DiscretizationError> {
    u.check_grid(v)?;
    let grid = u.grid();
    let mut acc: Complex64 =
        u.values().iter().zip(v.values()).zip(grid.weights()).map(|((a, b), w)| a * b.conj() * *w).sum();
    for e in 0..grid.graph().edge_count() {
        let h = grid.edge_grid(e).spacing;
        let mut prev: Option<(Complex64, Complex64)> = None;
        let mut edge_acc = Complex64::new(0.0, 0.0);
        for (_, _, i) in grid.edge_nodes(e) {
            let (a, b) = (u.value_at(i), v.value_at(i));
            if let Some((pa, pb)) = prev {
                edge_acc += (a - pa) * (b - pb).conj();
            }
            prev = Some((a, b));
        }
        acc += edge_acc / h;
    }
    Ok(acc)
}

pub fn h1_distance(u: &GraphFunction, v: &GraphFunction) -> Result<f64, DiscretizationError> {
    Ok(norm_h1(&u.sub(v)?))
}

/// Gagliardo–Nirenberg quotient `‖u‖_q^q / (‖u'‖₂^{q/2-1} ‖u‖₂^{q/2+1})`.
pub fn gn_ratio(u: &GraphFunction, q: f64) -> Result<f64, DiscretizationError> {
    if !(q.is_finite() && q >= 2.0) {
        return Err(DiscretizationError::InvalidExponent(q));
    }
    let mass = lq_power(u, 2.0);
    let dsq = derivative_sq(u);
    if mass == 0.0 || dsq == 0.0 {
        return Err(DiscretizationError::ZeroFunction);
    }
    Ok(lq_power(u, q) / (dsq.powf(0.25 * q - 0.5) * mass.powf(0.25 * q + 0.5)))
}
