mod common;

use std::sync::Arc;

use proptest::prelude::*;

use nlsgraph::discretization::{gn_ratio, lq_power, norm_lq, DiscreteOperator, GraphGrid};
use nlsgraph::dynamics::{CrankNicolson, Integrator};
use nlsgraph::graph::{unfold_trail, MetricGraph};
use nlsgraph::groundstate::{concentration, normalized_gradient_flow, FlowConfig, InitialGuess};
use nlsgraph::observables::{mass, momentum};

fn graph(kind: u8) -> MetricGraph {
    match kind % 4 {
        0 => MetricGraph::star(3, 8.0).unwrap(),
        1 => MetricGraph::bubble_tower(&[1.0, 2.0], 8.0).unwrap(),
        2 => MetricGraph::pendant_star(3, 1.2, 8.0).unwrap(),
        _ => MetricGraph::line(8.0).unwrap(),
    }
}

fn grid(kind: u8, h: f64) -> Arc<GraphGrid> {
    Arc::new(GraphGrid::new(&graph(kind), h).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flow_lowers_the_energy_and_restores_the_mass(kind in 0u8..4, mu in 0.5f64..4.0, seed in any::<u64>(), p in 3.0f64..5.5) {
        let g = grid(kind, 0.1);
        let mut config = FlowConfig::new(mu, p);
        config.max_iterations = 150;
        config.guess = InitialGuess::Gaussian { width: 1.0, jitter: 0.3, seed };
        let outcome = normalized_gradient_flow(&DiscreteOperator::new(&g), &config).unwrap();
        for d in &outcome.diagnostics {
            prop_assert!((d.mass - mu).abs() <= 1e-12 * mu);
        }
        for w in outcome.diagnostics.windows(2) {
            prop_assert!(w[1].energy <= w[0].energy + config.energy_slack * w[0].energy.abs());
        }
    }

    #[test]
    fn crank_nicolson_runs_backwards_to_its_start(kind in 0u8..4, seed in any::<u64>(), amplitude in 0.1f64..2.0) {
        let g = grid(kind, 0.1);
        let op = DiscreteOperator::new(&g);
        let mut rng = common::rng(seed);
        let mut u0 = common::random_smooth_field(&g, &mut rng);
        u0.rescale_to_mass(amplitude).unwrap();
        let mut integrator = Integrator::new(0.01);
        integrator.tolerance = 1e-12;
        integrator.max_iterations = 200;
        let forward = CrankNicolson::new(&op, 5.0, integrator).unwrap();
        let backward = forward.reversed().unwrap();
        let mut u = u0.clone();
        for _ in 0..20 {
            u = forward.step(&u).unwrap();
        }
        for _ in 0..20 {
            u = backward.step(&u).unwrap();
        }
        let gap = lq_power(&u.sub(&u0).unwrap(), 2.0).sqrt();
        // forty steps, each reversible up to the fixed-point tolerance
        prop_assert!(gap < 1e-9, "gap {}", gap);
    }

    #[test]
    fn concentration_grows_with_the_radius(kind in 0u8..4, seed in any::<u64>()) {
        let g = grid(kind, 0.2);
        let mut rng = common::rng(seed);
        let u = common::random_smooth_field(&g, &mut rng);
        let total = mass(&u);
        let mut last = 0.0;
        for t in [0.0, 0.3, 1.0, 2.5, 5.0, 40.0] {
            let c = concentration(&u, t).unwrap();
            prop_assert!(c >= last - 1e-12 * total);
            prop_assert!(c <= total * (1.0 + 1e-12));
            last = c;
        }
        prop_assert!((last - total).abs() <= 1e-12 * total);
    }

    #[test]
    fn gn_quotient_is_finite_and_positive(kind in 0u8..4, seed in any::<u64>(), q in 2.5f64..6.0) {
        let g = grid(kind, 0.1);
        let mut rng = common::rng(seed);
        let r = gn_ratio(&common::random_smooth_field(&g, &mut rng), q).unwrap();
        prop_assert!(r.is_finite() && r > 0.0);
    }

    #[test]
    fn unfolding_a_tower_keeps_every_lq_norm(seed in any::<u64>(), q in 2.0f64..6.0) {
        let tower = MetricGraph::bubble_tower(&[1.0, 2.0, 3.0], 8.0).unwrap();
        let g = Arc::new(GraphGrid::new(&tower, 0.1).unwrap());
        let mut rng = common::rng(seed);
        let u = common::random_smooth_field(&g, &mut rng);
        let trail = tower.tower_layout().unwrap().eulerian_trail(&tower).unwrap();
        let line = unfold_trail(&tower, &trail, &u).unwrap();
        let on_graph = lq_power(&u, q);
        prop_assert!((line.lq_power(q) - on_graph).abs() <= 1e-12 * on_graph);
    }

    #[test]
    fn conjugation_flips_the_momentum(kind in 0u8..4, seed in any::<u64>()) {
        let g = grid(kind, 0.1);
        let mut rng = common::rng(seed);
        let u = common::random_smooth_field(&g, &mut rng);
        prop_assert!((momentum(&u.conj()) + momentum(&u)).abs() <= 1e-12 * mass(&u));
    }

    #[test]
    fn mass_is_the_squared_l2_norm_and_rescales_exactly(kind in 0u8..4, seed in any::<u64>(), target in 0.1f64..10.0) {
        let g = grid(kind, 0.1);
        let mut rng = common::rng(seed);
        let mut u = common::random_smooth_field(&g, &mut rng);
        let norm = norm_lq(&u, 2.0).unwrap();
        prop_assert!((mass(&u) - norm * norm).abs() <= 1e-12 * mass(&u));
        u.rescale_to_mass(target).unwrap();
        prop_assert!((mass(&u) - target).abs() <= 1e-12 * target);
    }
}
