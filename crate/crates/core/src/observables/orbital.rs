use num_complex::Complex64;
use serde::Serialize;

use super::ObservableError;
use crate::discretization::GraphFunction;
use crate::graph::EdgeId;
use crate::states::LineSoliton;

/// Result of the orbital-distance search on one half-line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Orbital {
    pub distance: f64,
    /// Best phase, in `(-π, π]`.
    pub theta: f64,
    /// Best center.
    pub c: f64,
}

/// Controls for the search over the soliton center `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalSearch {
    /// Spacing of the coarse scan over `(M, truncation)`.
    pub coarse_step: f64,
    /// Width at which the golden-section refinement stops.
    pub tolerance: f64,
}

impl Default for OrbitalSearch {
    fn default() -> Self {
        OrbitalSearch { coarse_step: 0.25, tolerance: 1e-7 }
    }
}

/// Discrete `H¹(e)` pieces for samples on one uniform edge grid.
struct EdgeH1<'a> {
    spacing: f64,
    u: &'a [Complex64],
    u_norm_sq: f64,
}

impl EdgeH1<'_> {
    fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.u.len() {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }

    /// `‖φ_c‖²` and `⟨u, φ_c⟩` for the real reference samples `phi`.
    fn against(&self, phi: &[f64]) -> (f64, Complex64) {
        let mut norm = 0.0;
        let mut inner = Complex64::new(0.0, 0.0);
        for j in 0..phi.len() {
            let w = self.weight(j);
            norm += w * phi[j] * phi[j];
            inner += self.u[j] * (w * phi[j]);
            if j + 1 < phi.len() {
                let dphi = (phi[j + 1] - phi[j]) / self.spacing;
                let du = (self.u[j + 1] - self.u[j]) / self.spacing;
                norm += self.spacing * dphi * dphi;
                inner += du * (self.spacing * dphi);
            }
        }
        (norm, inner)
    }
}

/// `min_θ ‖u|_e − e^{iθ} φ_μ(· − c)‖_{H¹(e)}` minimized over `c ∈ [M, L]` on a
/// half-line `e` truncated at `L`.
///
/// The phase minimum is closed form: `θ* = arg⟨u, φ_c⟩_{H¹}`, which leaves
/// `D(c)² = ‖u‖² + ‖φ_c‖² − 2|⟨u, φ_c⟩|`. The reference is sampled on the same
/// nodes and vanishes at the Dirichlet end just like `u`. The center is found
/// by a coarse scan followed by golden-section refinement around the best
/// scan point; the refined result is kept only if it improves on the scan.
/// Flat stretches resolve to the leftmost center.
pub fn orbital_distance(
    u: &GraphFunction,
    halfline: EdgeId,
    soliton: &LineSoliton,
    exclusion: f64,
    search: &OrbitalSearch,
) -> Result<Orbital, ObservableError> {
    let grid = u.grid();
    let graph = grid.graph();
    if halfline >= graph.edge_count() || !graph.edge(halfline).is_halfline() {
        return Err(ObservableError::NotHalfline(halfline));
    }
    let length = graph.edge(halfline).length;
    if !(exclusion >= 0.0 && exclusion < length) {
        return Err(ObservableError::EmptySearch { exclusion, truncation: length });
    }
    let nodes: Vec<(f64, Option<usize>)> = grid.edge_nodes(halfline).map(|(_, x, i)| (x, i)).collect();
    let samples: Vec<Complex64> = nodes.iter().map(|&(_, i)| u.value_at(i)).collect();
    let spacing = grid.edge_grid(halfline).spacing;
    let mut h1 = EdgeH1 { spacing, u: &samples, u_norm_sq: 0.0 };
    let mut u_norm_sq = 0.0;
    for j in 0..samples.len() {
        u_norm_sq += h1.weight(j) * samples[j].norm_sqr();
        if j + 1 < samples.len() {
            u_norm_sq += (samples[j + 1] - samples[j]).norm_sqr() / spacing;
        }
    }
    h1.u_norm_sq = u_norm_sq;

    let eval = |c: f64| -> (f64, f64) {
        let phi: Vec<f64> = nodes
            .iter()
            .map(|&(x, i)| if i.is_some() { soliton.profile(x - c) } else { 0.0 })
            .collect();
        let (norm, inner) = h1.against(&phi);
        let d2 = (h1.u_norm_sq + norm - 2.0 * inner.norm()).max(0.0);
        let theta = if inner.norm() > 0.0 { inner.arg() } else { 0.0 };
        (d2.sqrt(), theta)
    };

    let steps = (((length - exclusion) / search.coarse_step).floor() as usize).max(1);
    let step = (length - exclusion) / steps as f64;
    let mut best_k = 0;
    let mut best = eval(exclusion);
    for k in 1..=steps {
        let cand = eval(exclusion + k as f64 * step);
        if cand.0 < best.0 {
            best_k = k;
            best = cand;
        }
    }
    let mut result = Orbital { distance: best.0, theta: best.1, c: exclusion + best_k as f64 * step };

    let lo = exclusion + best_k.saturating_sub(1) as f64 * step;
    let hi = (exclusion + (best_k + 1) as f64 * step).min(length);
    let phi_ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - phi_ratio * (b - a);
    let mut x2 = a + phi_ratio * (b - a);
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    while b - a > search.tolerance {
        if f1.0 <= f2.0 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi_ratio * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi_ratio * (b - a);
            f2 = eval(x2);
        }
    }
    let (c, (d, theta)) = if f1.0 <= f2.0 { (x1, f1) } else { (x2, f2) };
    if d < result.distance {
        result = Orbital { distance: d, theta, c };
    }
    Ok(result)
}
