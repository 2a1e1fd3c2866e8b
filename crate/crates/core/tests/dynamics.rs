use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use nlsgraph::discretization::{edge_mass, lq_power, DiscreteOperator, GraphFunction, GraphGrid};
use nlsgraph::dynamics::{evolve, CrankNicolson, EvolveOptions, Integrator};
use nlsgraph::graph::{MetricGraph, PotentialSpec, SampledPotential};
use nlsgraph::observables::{edge_centroid, mass};
use nlsgraph::states::{bubble_tower_ground_state, line_soliton_datum, LineSoliton};

fn grid(graph: &MetricGraph, h: f64) -> Arc<GraphGrid> {
    Arc::new(GraphGrid::new(graph, h).unwrap())
}

fn l2_distance(a: &GraphFunction, b: &GraphFunction) -> f64 {
    lq_power(&a.sub(b).unwrap(), 2.0).sqrt()
}

fn run(stepper: &CrankNicolson, u0: &GraphFunction, steps: usize) -> GraphFunction {
    (0..steps).fold(u0.clone(), |u, _| stepper.step(&u).unwrap())
}

/// Free Gaussian `exp(-s²/(2σ²))` evolved by `i u_t + u'' = 0`.
fn free_gaussian(g: &Arc<GraphGrid>, sigma: f64, t: f64) -> GraphFunction {
    let s2 = Complex64::new(sigma * sigma, 0.0);
    let a = Complex64::new(sigma * sigma, 2.0 * t);
    GraphFunction::from_fn(g, |_, x| (s2 / a).sqrt() * (-(x * x) / (2.0 * a)).exp())
}

#[test]
fn linear_scheme_follows_the_free_gaussian() {
    let graph = MetricGraph::line(20.0).unwrap();
    let g = grid(&graph, 0.05);
    let op = DiscreteOperator::new(&g);
    let u0 = free_gaussian(&g, 1.0, 0.0);
    let stepper = CrankNicolson::new(&op, 5.0, Integrator::new(0.01).linear()).unwrap();
    let u = run(&stepper, &u0, 100);
    let err = l2_distance(&u, &free_gaussian(&g, 1.0, 1.0));
    assert!(err < 2e-3, "error {err}");
}

#[test]
fn linear_scheme_is_second_order_in_time_against_the_semidiscrete_flow() {
    // The semi-discrete solution exp(-i W⁻¹K t) u0 through the symmetric
    // pencil S = W^{-1/2} K W^{-1/2}.
    let graph = MetricGraph::star(3, 10.0).unwrap();
    let g = grid(&graph, 0.1);
    let op = DiscreteOperator::new(&g);
    let w = g.weights();
    let n = g.unknowns();
    let rows = op.stiffness().to_dense();
    let s = DMatrix::from_fn(n, n, |r, c| rows[r][c] / (w[r] * w[c]).sqrt());
    let eigen = s.symmetric_eigen();
    let u0 = GraphFunction::from_fn(&g, |e, x| {
        Complex64::from_polar((-(x - 3.0).powi(2)).exp() * (1.0 + e as f64), 0.7 * x)
    });
    let t = 1.0;
    let y0 = DVector::from_iterator(n, u0.values().iter().zip(w).map(|(z, w)| z * w.sqrt()));
    let q = eigen.eigenvectors.map(|v| Complex64::new(v, 0.0));
    let mut coeffs = q.adjoint() * y0;
    for (c, lambda) in coeffs.iter_mut().zip(eigen.eigenvalues.iter()) {
        *c *= Complex64::from_polar(1.0, -lambda * t);
    }
    let y = q * coeffs;
    let exact = GraphFunction::from_values(&g, y.iter().zip(w).map(|(z, w)| z / w.sqrt()).collect()).unwrap();

    let errors: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&dt| {
            let stepper = CrankNicolson::new(&op, 5.0, Integrator::new(dt).linear()).unwrap();
            l2_distance(&run(&stepper, &u0, (t / dt).round() as usize), &exact)
        })
        .collect();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio} from {errors:?}");
    }
}

#[test]
fn resting_soliton_on_the_line_only_rotates_its_phase() {
    let graph = MetricGraph::line(30.0).unwrap();
    let g = grid(&graph, 0.05);
    let op = DiscreteOperator::new(&g);
    let soliton = LineSoliton::with_frequency(5.0, 1.0).unwrap();
    let u0 = line_soliton_datum(&g, 1, &soliton, 0.0, 0.0).unwrap();
    let stepper = CrankNicolson::new(&op, 5.0, Integrator::new(0.01)).unwrap();
    let mut options = EvolveOptions::new(50.0);
    options.snapshot_times = vec![10.0, 25.0, 50.0];
    let traj = evolve(&stepper, &u0, &options).unwrap();
    for snap in &traj.snapshots {
        let deviation = snap
            .state
            .values()
            .iter()
            .zip(u0.values())
            .map(|(a, b)| (a.norm() - b.norm()).abs())
            .fold(0.0, f64::max);
        assert!(deviation < 1e-2, "t = {}: modulus deviation {deviation}", snap.time);
    }
    assert!(traj.mass_drift() < 1e-9 && traj.energy_drift() < 1e-6);
}

#[test]
fn a_moving_soliton_crosses_the_line_vertex_unreflected() {
    // e^{i v0 s} φ(s - x0) travels with speed 2 v0 along the line coordinate.
    let graph = MetricGraph::line(60.0).unwrap();
    let g = grid(&graph, 0.05);
    let op = DiscreteOperator::new(&g);
    let soliton = LineSoliton::with_frequency(5.0, 1.0).unwrap();
    let u0 = line_soliton_datum(&g, 1, &soliton, 20.0, -0.5).unwrap();
    let stepper = CrankNicolson::new(&op, 5.0, Integrator::new(0.01)).unwrap();
    let mut options = EvolveOptions::new(30.0);
    options.snapshot_times = vec![10.0, 30.0];
    let traj = evolve(&stepper, &u0, &options).unwrap();
    let total = mass(&u0);

    let halfway = &traj.snapshots[0].state;
    let c = edge_centroid(halfway, 1).unwrap();
    assert!((c - 10.0).abs() < 0.1, "centroid {c} at t = 10");
    let late = &traj.snapshots[1].state;
    assert!(edge_mass(late, 0) > 0.999 * total, "transmitted fraction {}", edge_mass(late, 0) / total);
    let c = edge_centroid(late, 0).unwrap();
    assert!((c - 10.0).abs() < 0.1, "centroid {c} at t = 30");
}

#[test]
fn crank_nicolson_conserves_mass_every_step() {
    let graph = MetricGraph::bubble_tower(&[2.0, 4.0], 20.0).unwrap();
    let g = grid(&graph, 0.05);
    let op = DiscreteOperator::new(&g);
    let mu = LineSoliton::with_frequency(5.0, 1.0).unwrap().mass();
    let u0 = bubble_tower_ground_state(&g, mu, 5.0)
        .unwrap()
        .map(|z| z * 1.1)
        .conj();
    let mut integrator = Integrator::new(0.02);
    integrator.tolerance = 1e-12;
    let stepper = CrankNicolson::new(&op, 5.0, integrator).unwrap();
    let m0 = mass(&u0);
    let mut u = u0;
    for _ in 0..200 {
        u = stepper.step(&u).unwrap();
        assert!(((mass(&u) - m0) / m0).abs() < 1e-10);
    }
}

#[test]
fn potentials_keep_mass_and_energy() {
    let graphs = [
        MetricGraph::line_with_potential(PotentialSpec::Delta { strength: 0.5 }, 30.0).unwrap(),
        MetricGraph::line_with_potential(
            PotentialSpec::Smooth(SampledPotential::from_fn(|x| 0.3 * (-x * x).exp(), -5.0, 5.0, 201)),
            30.0,
        )
        .unwrap(),
    ];
    let soliton = LineSoliton::with_frequency(5.0, 1.0).unwrap();
    for graph in graphs {
        let g = grid(&graph, 0.05);
        let op = DiscreteOperator::new(&g);
        let u0 = line_soliton_datum(&g, 1, &soliton, 10.0, -0.2).unwrap();
        let stepper = CrankNicolson::new(&op, 5.0, Integrator::new(0.01)).unwrap();
        let traj = evolve(&stepper, &u0, &EvolveOptions::new(40.0)).unwrap();
        assert!(traj.mass_drift() < 1e-9, "mass drift {}", traj.mass_drift());
        assert!(traj.energy_drift() < 1e-4, "energy drift {}", traj.energy_drift());
    }
}

#[test]
fn a_weak_delta_perturbs_the_line_continuously() {
    let soliton = LineSoliton::with_frequency(5.0, 1.0).unwrap();
    let evolve_on = |graph: MetricGraph| {
        let g = grid(&graph, 0.05);
        let op = DiscreteOperator::new(&g);
        let u0 = line_soliton_datum(&g, 1, &soliton, 8.0, -0.3).unwrap();
        let stepper = CrankNicolson::new(&op, 5.0, Integrator::new(0.01)).unwrap();
        run(&stepper, &u0, 2000)
    };
    let plain = evolve_on(MetricGraph::line(30.0).unwrap());
    let mut gaps = Vec::new();
    for strength in [1e-2, 1e-3] {
        let perturbed = evolve_on(MetricGraph::line_with_potential(PotentialSpec::Delta { strength }, 30.0).unwrap());
        let gap = plain
            .values()
            .iter()
            .zip(perturbed.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        gaps.push(gap);
    }
    assert!(gaps[1] < 0.2 * gaps[0], "{gaps:?}");
}
