//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

use nlsgraph::discretization::{GraphFunction, GraphGrid};

/// `M(φ₁) = (p/2)^{2/(p-2)} (2/(p-2)) ∫ sech^{4/(p-2)}`, with
/// `∫_ℝ sech^a = √π Γ(a/2) / Γ((a+1)/2)`.
pub fn unit_frequency_mass(p: f64) -> f64 {
    let a = 4.0 / (p - 2.0);
    let sech_integral = std::f64::consts::PI.sqrt() * gamma(0.5 * a) / gamma(0.5 * (a + 1.0));
    (0.5 * p).powf(2.0 / (p - 2.0)) * (2.0 / (p - 2.0)) * sech_integral
}

/// Mass of `φ_ω`, from `φ_ω(x) = ω^{1/(p-2)} φ₁(√ω x)`.
pub fn soliton_mass(p: f64, omega: f64) -> f64 {
    omega.powf((6.0 - p) / (2.0 * (p - 2.0))) * unit_frequency_mass(p)
}

/// `E(φ_ω) = -(6-p)/(2(p+2)) ω M(φ_ω)`, from the identities
/// `‖φ'‖² = P - ωM` and `‖φ'‖² = ωM - (2/p)P` with `P = ∫φ^p`.
pub fn soliton_energy(p: f64, omega: f64) -> f64 {
    -(6.0 - p) / (2.0 * (p + 2.0)) * omega * soliton_mass(p, omega)
}

/// Random smooth field: a Gaussian bump shared at vertex 0 plus four
/// Dirichlet sine modes per edge with complex coefficients.
pub fn random_smooth_field(grid: &Arc<GraphGrid>, rng: &mut ChaCha8Rng) -> GraphFunction {
    let graph = grid.graph();
    let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let s: f64 = rng.gen_range(1.0..4.0);
    let modes: Vec<[Complex64; 4]> = (0..graph.edge_count())
        .map(|_| std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    GraphFunction::from_fn(grid, |e, x| {
        let length = graph.edge(e).length;
        let mut z = c * (-x * x / s).exp();
        for (k, a) in modes[e].iter().enumerate() {
            z += a * (std::f64::consts::PI * (k + 1) as f64 * x / length).sin();
        }
        z
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `φ_ω(0) = (pω/2)^{1/(p-2)}`.
pub fn soliton_peak(p: f64, omega: f64) -> f64 {
    (0.5 * p * omega).powf(1.0 / (p - 2.0))
}
