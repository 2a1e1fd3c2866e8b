use std::sync::Arc;

use serde::Serialize;

use super::{normalized_gradient_flow, Classification, FlowConfig, GroundStateError, InitialGuess};
use crate::discretization::{DiscreteOperator, GraphGrid};
use crate::graph::MetricGraph;

/// Outcome of the flow at one mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassProbe {
    pub mu: f64,
    pub classification: Classification,
    pub energy: f64,
    /// Minimal discrete energy at the same mass on the line with the same
    /// spacing and truncation.
    pub line_energy: f64,
    /// Whether the flow went strictly below `line_energy`.
    pub admits_ground_state: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalMass {
    /// Midpoint of the final bracket.
    pub estimate: f64,
    pub lo: MassProbe,
    pub hi: MassProbe,
    /// Every probe in evaluation order, endpoints first.
    pub probes: Vec<MassProbe>,
}

/// Relative gap below the line energy that counts as strictly below it.
const LEVEL_MARGIN: f64 = 1e-9;

/// Bisection for the smallest mass at which `graph` has a ground state.
///
/// A ground state exists exactly when the infimum of the energy drops below
/// the line-soliton level, so a probe counts as admitting one when its flow
/// reaches an energy strictly below the discrete line energy computed with
/// the same spacing and truncation. Comparing at equal resolution cancels the
/// leading discretization error. The flow classification is kept for the
/// report. `template` supplies every flow setting except the mass.
pub fn critical_mass_search(
    graph: &MetricGraph,
    h: f64,
    bracket: (f64, f64),
    mu_tolerance: f64,
    template: &FlowConfig,
) -> Result<CriticalMass, GroundStateError> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi.is_finite() && lo < hi) {
        return Err(GroundStateError::Bracket(format!("need 0 < mu_lo < mu_hi, got [{lo}, {hi}]")));
    }
    if !(mu_tolerance > 0.0) {
        return Err(GroundStateError::Bracket("mass tolerance must be positive".into()));
    }
    let truncation = graph.halflines().map(|e| graph.edge(e).length).fold(0.0, f64::max);
    let line = MetricGraph::line(truncation)?;
    let grid = Arc::new(GraphGrid::new(graph, h)?);
    let line_grid = Arc::new(GraphGrid::new(&line, h)?);
    let op = DiscreteOperator::new(&grid);
    let line_op = DiscreteOperator::new(&line_grid);

    let probe = |mu: f64| -> Result<MassProbe, GroundStateError> {
        let outcome = normalized_gradient_flow(&op, &FlowConfig { mu, ..template.clone() })?;
        let line_config = FlowConfig {
            mu,
            guess: InitialGuess::Gaussian { width: 1.0, jitter: 0.0, seed: 0 },
            ..template.clone()
        };
        let line_energy = normalized_gradient_flow(&line_op, &line_config)?.energy;
        Ok(MassProbe {
            mu,
            classification: outcome.classification,
            energy: outcome.energy,
            line_energy,
            admits_ground_state: outcome.energy < line_energy - LEVEL_MARGIN * line_energy.abs(),
        })
    };

    let mut lo_probe = probe(lo)?;
    let mut hi_probe = probe(hi)?;
    let mut probes = vec![lo_probe, hi_probe];
    if lo_probe.admits_ground_state || !hi_probe.admits_ground_state {
        return Err(GroundStateError::Bracket(format!(
            "the bracket does not straddle the transition (mu_lo admits: {}, mu_hi admits: {})",
            lo_probe.admits_ground_state, hi_probe.admits_ground_state
        )));
    }
    while hi_probe.mu - lo_probe.mu > mu_tolerance {
        let mid = probe(0.5 * (lo_probe.mu + hi_probe.mu))?;
        probes.push(mid);
        if mid.admits_ground_state {
            hi_probe = mid;
        } else {
            lo_probe = mid;
        }
    }
    Ok(CriticalMass { estimate: 0.5 * (lo_probe.mu + hi_probe.mu), lo: lo_probe, hi: hi_probe, probes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_bracket_is_rejected() {
        let g = MetricGraph::pendant_star(3, 1.0, 10.0).unwrap();
        let config = FlowConfig::new(1.0, 5.0);
        assert!(matches!(
            critical_mass_search(&g, 0.1, (1.0, 1.0), 0.01, &config),
            Err(GroundStateError::Bracket(_))
        ));
        assert!(critical_mass_search(&g, 0.1, (2.0, 1.0), 0.01, &config).is_err());
    }
}
