//! Ground states at fixed mass by a normalized imaginary-time gradient flow,
//! and the diagnostics that tell a converging flow from a runaway one.

mod classify;
mod critical;
mod density;

pub use classify::{classify, Classification, Thresholds};
pub use critical::{critical_mass_search, CriticalMass, MassProbe};
pub use density::{concentration, core_split, functional_f, CoreSplit};

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::discretization::{h1_distance, DiscreteOperator, DiscretizationError, GraphFunction, GraphGrid};
use crate::graph::{GraphError, MetricGraph};
use crate::linalg::{LinalgError, ShiftedSolver};
use crate::observables::{energy, mass};
use crate::states::{bubble_tower_ground_state, vertex_peaked_profile, LineSoliton, StateError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroundStateError {
    #[error("invalid flow configuration: {0}")]
    InvalidConfig(String),
    #[error("energy increased at iterate {iterate} even with tau = {tau:e}")]
    EnergyIncrease { iterate: usize, tau: f64 },
    #[error("classification window of {window} iterates exceeds the {len} recorded")]
    Window { window: usize, len: usize },
    #[error("invalid mass bracket: {0}")]
    Bracket(String),
    #[error("could not write diagnostics: {0}")]
    Export(String),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// `exp(-d²/(2 width²))` in the graph distance `d` from the core vertex
    /// farthest from the half-lines, multiplied edge by edge by
    /// `1 + jitter·r_e·x/(1+x)` with `r_e` uniform in `[-1, 1]`. The factor
    /// is 1 at every vertex, so the guess stays continuous; the jitter only
    /// breaks the symmetries a perfectly centered guess would keep forever.
    Gaussian { width: f64, jitter: f64, seed: u64 },
    /// The folded line soliton (bubble towers only).
    Folded,
    Given(GraphFunction),
}

impl Default for InitialGuess {
    fn default() -> Self {
        InitialGuess::Gaussian { width: 1.0, jitter: 0.2, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub mu: f64,
    pub p: f64,
    /// Initial imaginary time step.
    pub tau: f64,
    /// Factor applied to `tau` after every accepted step (1 keeps it fixed).
    pub tau_growth: f64,
    pub tau_max: f64,
    /// Halving below this is reported as [`GroundStateError::EnergyIncrease`].
    pub min_tau: f64,
    /// Stop once the relative energy decrease of a step falls below this...
    pub tolerance: f64,
    /// ...and the step moved the state by at most `stationarity·τ` in `H¹`.
    /// The energy test alone also fires near saddle points, where the flow
    /// slows down before leaving along an unstable direction.
    pub stationarity: f64,
    pub max_iterations: usize,
    /// Relative energy increase tolerated as round-off.
    pub energy_slack: f64,
    /// Subtract `τλu` from the explicit part, with `λ` the current Lagrange
    /// multiplier of the mass constraint. Without it the rescaling leaves a
    /// fixed point that solves the stationary equation with the nonlinearity
    /// scaled by `1 + O(τ)`, so the limit energy carries an `O(τ)` bias.
    pub multiplier: bool,
    pub guess: InitialGuess,
    pub thresholds: Thresholds,
    /// End the flow as soon as the trailing window looks like a runaway.
    pub stop_on_runaway: bool,
}

impl FlowConfig {
    pub fn new(mu: f64, p: f64) -> Self {
        FlowConfig {
            mu,
            p,
            tau: 0.05,
            tau_growth: 1.001,
            tau_max: 1.0,
            min_tau: 1e-10,
            tolerance: 1e-12,
            stationarity: 1e-6,
            max_iterations: 100_000,
            energy_slack: 1e-12,
            multiplier: true,
            guess: InitialGuess::default(),
            thresholds: Thresholds::default(),
            stop_on_runaway: true,
        }
    }

    pub fn validate(&self) -> Result<(), GroundStateError> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(GroundStateError::InvalidConfig(format!("{name} must be positive, got {x}")))
            }
        };
        positive("mu", self.mu)?;
        positive("tau", self.tau)?;
        positive("tau_max", self.tau_max)?;
        positive("min_tau", self.min_tau)?;
        positive("tolerance", self.tolerance)?;
        positive("stationarity", self.stationarity)?;
        if !(self.p > 2.0 && self.p < 6.0) {
            return Err(GroundStateError::InvalidConfig(format!("p must lie in (2, 6), got {}", self.p)));
        }
        if self.tolerance >= 1.0 {
            return Err(GroundStateError::InvalidConfig("tolerance must be below 1".into()));
        }
        if !(self.tau_growth >= 1.0 && self.tau_growth.is_finite()) {
            return Err(GroundStateError::InvalidConfig("tau_growth must be at least 1".into()));
        }
        if self.tau_max < self.tau {
            return Err(GroundStateError::InvalidConfig("tau_max must not be below tau".into()));
        }
        if !(self.energy_slack >= 0.0) {
            return Err(GroundStateError::InvalidConfig("energy_slack must be non-negative".into()));
        }
        if self.max_iterations == 0 {
            return Err(GroundStateError::InvalidConfig("max_iterations must be positive".into()));
        }
        if let InitialGuess::Gaussian { width, jitter, .. } = self.guess {
            positive("guess width", width)?;
            if !(0.0..1.0).contains(&jitter) {
                return Err(GroundStateError::InvalidConfig("guess jitter must lie in [0, 1)".into()));
            }
        }
        self.thresholds.validate()
    }
}

/// Diagnostics of one accepted iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowDiagnostics {
    pub iterate: usize,
    pub energy: f64,
    pub mass: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub core_mass_fraction: f64,
    #[serde(rename = "Linf_core")]
    pub linf_core: f64,
    pub mean_core_distance: f64,
    /// `‖u_k - u_{k-1}‖_{H¹}`; 0 at the initial iterate.
    pub h1_increment: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Tolerance,
    Runaway,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct FlowOutcome {
    pub state: GraphFunction,
    pub energy: f64,
    pub classification: Classification,
    pub stop: StopReason,
    pub diagnostics: Vec<FlowDiagnostics>,
    /// Steps rejected because they raised the energy.
    pub rejected: usize,
}

/// Reference profile for the overlap functional: the folded soliton on a
/// tower, the vertex-peaked profile everywhere else.
pub fn reference_profile(grid: &Arc<GraphGrid>, mu: f64, p: f64) -> Result<GraphFunction, GroundStateError> {
    if grid.graph().tower_layout().is_some() {
        if let Ok(folded) = bubble_tower_ground_state(grid, mu, p) {
            return Ok(folded);
        }
    }
    Ok(vertex_peaked_profile(grid, &LineSoliton::with_mass(p, mu)?))
}

/// The core vertex farthest from every half-line (lowest id on ties).
pub fn guess_center(graph: &MetricGraph) -> Result<usize, GroundStateError> {
    let attachments: Vec<usize> = graph.halflines().map(|e| graph.edge(e).origin).collect();
    let mut nearest = vec![f64::INFINITY; graph.vertex_count()];
    for &v in &attachments {
        let e = graph.incident(v).next().expect("half-line vertex has an incident edge");
        let edge = graph.edge(e);
        let x = if edge.origin == v { 0.0 } else { edge.length };
        for (n, d) in nearest.iter_mut().zip(crate::graph::distances_from(graph, crate::graph::GraphPoint::new(e, x))?) {
            *n = n.min(d);
        }
    }
    let mut best = 0;
    for v in 1..graph.vertex_count() {
        if nearest[v] > nearest[best] {
            best = v;
        }
    }
    Ok(best)
}

fn initial_state(grid: &Arc<GraphGrid>, config: &FlowConfig) -> Result<GraphFunction, GroundStateError> {
    match &config.guess {
        InitialGuess::Given(u) => {
            if !Arc::ptr_eq(u.grid(), grid) && u.grid().as_ref() != grid.as_ref() {
                return Err(DiscretizationError::GridMismatch.into());
            }
            Ok(u.clone())
        }
        InitialGuess::Folded => Ok(bubble_tower_ground_state(grid, config.mu, config.p)?),
        &InitialGuess::Gaussian { width, jitter, seed } => {
            let graph = grid.graph();
            let center = guess_center(graph)?;
            let dist = density::distances_to_unknowns(grid, center)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let factors: Vec<f64> = (0..graph.edge_count()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let mut values: Vec<Complex64> =
                dist.iter().map(|d| Complex64::new((-0.5 * (d / width).powi(2)).exp(), 0.0)).collect();
            for (e, r) in factors.iter().enumerate() {
                for (_, x, i) in grid.edge_nodes(e) {
                    if let Some(i) = i.filter(|&i| i >= graph.vertex_count()) {
                        values[i] *= 1.0 + jitter * r * x / (1.0 + x);
                    }
                }
            }
            Ok(GraphFunction::from_values(grid, values)?)
        }
    }
}

fn nonlinearity(z: Complex64, p: f64) -> Complex64 {
    if p == 4.0 {
        z * z.norm_sqr()
    } else {
        z * z.norm().powf(p - 2.0)
    }
}

/// `λ = (∫|u|^p − ⟨Ku, u⟩) / μ`, the frequency at which the continuous flow
/// keeps the mass fixed. At a stationary state this is its frequency `ω`.
fn lagrange_multiplier(u: &GraphFunction, op: &DiscreteOperator, config: &FlowConfig) -> Result<f64, GroundStateError> {
    let potential: f64 = u.values().iter().zip(op.grid().weights()).map(|(z, w)| w * z.norm().powf(config.p)).sum();
    Ok((potential - op.quadratic_form(u)?) / config.mu)
}

struct Recorder<'a> {
    reference: &'a GraphFunction,
    radius: f64,
}

impl Recorder<'_> {
    fn record(&self, iterate: usize, u: &GraphFunction, energy: f64, increment: f64, tau: f64) -> FlowDiagnostics {
        let split = core_split(u, self.radius);
        FlowDiagnostics {
            iterate,
            energy,
            mass: mass(u),
            f: functional_f(u, self.reference).expect("reference shares the grid"),
            core_mass_fraction: split.core_fraction,
            linf_core: split.linf_core,
            mean_core_distance: split.mean_core_distance,
            h1_increment: increment,
            tau,
        }
    }
}

/// Semi-implicit normalized gradient flow
/// `(W + τK) u_{k+1} = W (u_k + τ |u_k|^{p-2} u_k)`, each iterate rescaled to
/// mass `μ`.
///
/// A step that raises the energy by more than the configured slack is
/// discarded and retried with half the step. The flow stops when the relative
/// energy decrease of a step drops below the tolerance, when the trailing
/// window classifies as a runaway (if enabled), or at the iteration cap.
/// After each accepted step `τ` grows by the configured factor up to its cap.
pub fn normalized_gradient_flow(op: &DiscreteOperator, config: &FlowConfig) -> Result<FlowOutcome, GroundStateError> {
    config.validate()?;
    let grid = op.grid();
    let weights = grid.weights();
    let reference = reference_profile(grid, config.mu, config.p)?;
    let recorder = Recorder { reference: &reference, radius: config.thresholds.core_radius };

    let mut u = initial_state(grid, config)?;
    u.rescale_to_mass(config.mu)?;
    let mut e_old = energy(&u, op, config.p)?;
    let mut tau = config.tau;
    let mut solver = ShiftedSolver::new(op, Complex64::new(1.0, 0.0), Complex64::new(tau, 0.0))?;
    let mut diagnostics = vec![recorder.record(0, &u, e_old, 0.0, tau)];
    let mut rejected = 0;
    let mut stop = StopReason::MaxIterations;

    let mut iterate = 0;
    while iterate < config.max_iterations {
        let lambda = if config.multiplier { lagrange_multiplier(&u, op, config)? } else { 0.0 };
        let rhs: Vec<Complex64> = u
            .values()
            .iter()
            .zip(weights)
            .map(|(&z, &w)| w * (z * (1.0 - tau * lambda) + tau * nonlinearity(z, config.p)))
            .collect();
        let mut next = GraphFunction::from_values(grid, solver.solve(&rhs)?)?;
        next.rescale_to_mass(config.mu)?;
        let e_new = energy(&next, op, config.p)?;
        if e_new > e_old + config.energy_slack * e_old.abs() {
            tau *= 0.5;
            rejected += 1;
            if tau < config.min_tau {
                return Err(GroundStateError::EnergyIncrease { iterate: iterate + 1, tau });
            }
            solver = ShiftedSolver::new(op, Complex64::new(1.0, 0.0), Complex64::new(tau, 0.0))?;
            continue;
        }
        iterate += 1;
        let increment = h1_distance(&next, &u)?;
        diagnostics.push(recorder.record(iterate, &next, e_new, increment, tau));
        let decrease = e_old - e_new;
        u = next;
        e_old = e_new;
        if decrease <= config.tolerance * e_new.abs() && increment <= config.stationarity * tau {
            stop = StopReason::Tolerance;
            break;
        }
        if config.stop_on_runaway && classify::looks_runaway(&diagnostics, &config.thresholds) {
            stop = StopReason::Runaway;
            break;
        }
        if config.tau_growth > 1.0 && tau < config.tau_max {
            tau = (tau * config.tau_growth).min(config.tau_max);
            solver = ShiftedSolver::new(op, Complex64::new(1.0, 0.0), Complex64::new(tau, 0.0))?;
        }
    }

    let stopped = stop == StopReason::Tolerance;
    let classification = classify(&diagnostics, stopped, &config.thresholds).unwrap_or_else(|_| {
        if classify::looks_convergent(&diagnostics, stopped, &config.thresholds) {
            Classification::Convergent
        } else {
            Classification::Undetermined
        }
    });
    Ok(FlowOutcome { state: u, energy: e_old, classification, stop, diagnostics, rejected })
}

/// Writes the diagnostics table, one row per accepted iterate.
pub fn write_flow_diagnostics<W: Write>(out: W, rows: &[FlowDiagnostics]) -> Result<(), GroundStateError> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row).map_err(|e| GroundStateError::Export(e.to_string()))?;
    }
    writer.flush().map_err(|e| GroundStateError::Export(e.to_string()))
}
