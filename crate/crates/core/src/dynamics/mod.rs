//! Crank–Nicolson integration of the focusing NLS equation on a graph, with
//! conservation monitoring and collision detection.

mod export;

pub use export::{write_edge_series_csv, write_observables_csv};

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::discretization::{edge_mass, DiscreteOperator, DiscretizationError, GraphFunction};
use crate::graph::EdgeId;
use crate::groundstate::functional_f;
use crate::linalg::{LinalgError, ShiftedSolver};
use crate::observables::{
    edge_centroid, energy, kinetic, mass, momentum, orbital_distance, ObservableError, ObservableRecord,
    OrbitalSearch,
};
use crate::states::LineSoliton;

#[derive(Debug, Error, Clone)]
pub enum DynamicsError {
    #[error("invalid integration parameters: {0}")]
    InvalidParams(String),
    #[error("nonlinear iteration did not converge in {iterations} iterations (last increment {increment:e}); try a smaller dt")]
    NonConvergence { iterations: usize, increment: f64 },
    #[error("relative mass drift {drift:e} exceeded the guard {guard:e} at t = {time}")]
    MassGuard { time: f64, drift: f64, guard: f64, partial: Box<Trajectory> },
    #[error("step failed at t = {time}: {source}")]
    StepFailed { time: f64, source: Box<DynamicsError>, partial: Box<Trajectory> },
    #[error("the observable series is empty")]
    EmptySeries,
    #[error("could not write table: {0}")]
    Export(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
}

impl DynamicsError {
    /// The trajectory recorded before an aborted run stopped.
    pub fn partial(&self) -> Option<&Trajectory> {
        match self {
            DynamicsError::MassGuard { partial, .. } | DynamicsError::StepFailed { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub dt: f64,
    /// Bound on the `L²` norm of the last fixed-point increment.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// With `false` the scheme integrates the linear Schrödinger equation.
    pub nonlinear: bool,
}

impl Integrator {
    pub fn new(dt: f64) -> Self {
        Integrator { dt, tolerance: 1e-10, max_iterations: 50, nonlinear: true }
    }

    pub fn linear(self) -> Self {
        Integrator { nonlinear: false, ..self }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.dt.is_finite() && self.dt != 0.0) {
            return Err(DynamicsError::InvalidParams(format!("dt must be finite and non-zero, got {}", self.dt)));
        }
        if !(self.tolerance > 0.0) {
            return Err(DynamicsError::InvalidParams("nonlinear tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(DynamicsError::InvalidParams("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// `(W + i dt/2 K) u⁺ = (W - i dt/2 K) u + i dt W N((u + u⁺)/2)` with
/// `N(w) = |w|^{p-2} w` nodewise.
///
/// The implicit midpoint nonlinearity is resolved by fixed-point iteration
/// on a matrix factorized once. A converged step conserves the discrete mass
/// exactly and is symmetric in time: stepping with `-dt` undoes it.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    op: DiscreteOperator,
    p: f64,
    integrator: Integrator,
    solver: ShiftedSolver,
}

/// A step result with the number of fixed-point iterations it took.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: GraphFunction,
    pub iterations: usize,
}

impl CrankNicolson {
    pub fn new(op: &DiscreteOperator, p: f64, integrator: Integrator) -> Result<Self, DynamicsError> {
        integrator.validate()?;
        if !(p > 2.0 && p.is_finite()) {
            return Err(DynamicsError::InvalidParams(format!("the power p must exceed 2, got {p}")));
        }
        let shift = Complex64::new(0.0, 0.5 * integrator.dt);
        let solver = ShiftedSolver::new(op, Complex64::new(1.0, 0.0), shift)?;
        Ok(CrankNicolson { op: op.clone(), p, integrator, solver })
    }

    /// The same scheme run backwards in time.
    pub fn reversed(&self) -> Result<Self, DynamicsError> {
        Self::new(&self.op, self.p, Integrator { dt: -self.integrator.dt, ..self.integrator })
    }

    pub fn integrator(&self) -> &Integrator {
        &self.integrator
    }

    pub fn operator(&self) -> &DiscreteOperator {
        &self.op
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn step(&self, u: &GraphFunction) -> Result<GraphFunction, DynamicsError> {
        Ok(self.step_from(u, u.values())?.state)
    }

    /// One step starting the fixed-point iteration from `guess`.
    pub fn step_from(&self, u: &GraphFunction, guess: &[Complex64]) -> Result<StepOutcome, DynamicsError> {
        let grid = self.op.grid();
        if !(Arc::ptr_eq(u.grid(), grid) || **u.grid() == **grid) {
            return Err(DiscretizationError::GridMismatch.into());
        }
        let dt = self.integrator.dt;
        let w = grid.weights();
        let ku = self.op.stiffness().mul_vec(u.values());
        let half = Complex64::new(0.0, 0.5 * dt);
        let rhs0: Vec<Complex64> = u.values().iter().zip(&ku).zip(w).map(|((&z, &k), &w)| w * z - half * k).collect();
        if !self.integrator.nonlinear {
            return Ok(StepOutcome { state: GraphFunction::from_values(grid, self.solver.solve(&rhs0)?)?, iterations: 1 });
        }

        let idt = Complex64::new(0.0, dt);
        let mut next = guess.to_vec();
        let mut increment = f64::INFINITY;
        for iteration in 1..=self.integrator.max_iterations {
            let rhs: Vec<Complex64> = rhs0
                .iter()
                .zip(u.values().iter().zip(&next))
                .zip(w)
                .map(|((&r, (&a, &b)), &w)| {
                    let m = 0.5 * (a + b);
                    r + idt * w * m * m.norm().powf(self.p - 2.0)
                })
                .collect();
            let candidate = self.solver.solve(&rhs)?;
            increment = candidate.iter().zip(&next).zip(w).map(|((a, b), w)| w * (a - b).norm_sqr()).sum::<f64>().sqrt();
            next = candidate;
            if increment <= self.integrator.tolerance {
                return Ok(StepOutcome { state: GraphFunction::from_values(grid, next)?, iterations: iteration });
            }
        }
        Err(DynamicsError::NonConvergence { iterations: self.integrator.max_iterations, increment })
    }
}

/// Orbital distance on a half-line, to be recorded along a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalObserver {
    pub halfline: EdgeId,
    pub soliton: LineSoliton,
    pub exclusion: f64,
    pub search: OrbitalSearch,
}

/// Optional observables recorded next to mass, energy, kinetic energy and
/// momentum.
#[derive(Debug, Clone, Default)]
pub struct Observers {
    /// Reference state `Φ` of the overlap `F(u) = ∫|u|Φ`.
    pub reference: Option<GraphFunction>,
    pub orbital: Option<OrbitalObserver>,
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub t_end: f64,
    /// Record observables every this many steps (and always at both ends).
    pub record_every: usize,
    /// States kept in full, each at the step nearest to the requested time.
    pub snapshot_times: Vec<f64>,
    /// Abort once `|M(t) - M(0)| / M(0)` exceeds this.
    pub mass_guard: f64,
    pub observers: Observers,
}

impl EvolveOptions {
    pub fn new(t_end: f64) -> Self {
        EvolveOptions { t_end, record_every: 10, snapshot_times: Vec::new(), mass_guard: 1e-2, observers: Observers::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub state: GraphFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub records: Vec<ObservableRecord>,
    pub snapshots: Vec<Snapshot>,
    /// Largest `|u|²` seen on each edge over every step of the run.
    pub edge_peaks: Vec<f64>,
    pub final_state: GraphFunction,
    pub steps: usize,
    pub max_nonlinear_iterations: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }

    /// Largest `|M(t) - M(0)| / M(0)` over the records.
    pub fn mass_drift(&self) -> f64 {
        relative_drift(self.records.iter().map(|r| r.mass))
    }

    pub fn energy_drift(&self) -> f64 {
        relative_drift(self.records.iter().map(|r| r.energy))
    }
}

fn relative_drift(mut series: impl Iterator<Item = f64>) -> f64 {
    let Some(first) = series.next() else { return 0.0 };
    if first == 0.0 {
        return 0.0;
    }
    series.map(|x| ((x - first) / first).abs()).fold(0.0, f64::max)
}

fn edge_peaks_into(u: &GraphFunction, peaks: &mut [f64]) {
    let grid = u.grid();
    for (e, peak) in peaks.iter_mut().enumerate() {
        for i in grid.edge_unknowns(e) {
            *peak = peak.max(u.values()[i].norm_sqr());
        }
    }
}

fn record(
    time: f64,
    u: &GraphFunction,
    stepper: &CrankNicolson,
    observers: &Observers,
) -> Result<ObservableRecord, DynamicsError> {
    let edges = u.grid().graph().edge_count();
    let f = observers.reference.as_ref().map(|phi| functional_f(u, phi)).transpose()?;
    let orbital = observers
        .orbital
        .as_ref()
        .map(|o| orbital_distance(u, o.halfline, &o.soliton, o.exclusion, &o.search))
        .transpose()?;
    Ok(ObservableRecord {
        time,
        mass: mass(u),
        energy: energy(u, stepper.operator(), stepper.p())?,
        kinetic: kinetic(u),
        momentum: momentum(u),
        f,
        orbital,
        edge_masses: (0..edges).map(|e| edge_mass(u, e)).collect(),
        edge_centroids: (0..edges).map(|e| edge_centroid(u, e)).collect(),
    })
}

/// Integrates from `u0` over `n = t_end/dt` steps (`t_end` must be a whole
/// number of steps), recording observables at the configured cadence.
///
/// The fixed-point iteration of each step starts from the linear
/// extrapolation `2u_n - u_{n-1}`. The mass guard is checked after every
/// step, and a violation or a failing step aborts the run with the partial
/// trajectory attached to the error.
pub fn evolve(stepper: &CrankNicolson, u0: &GraphFunction, options: &EvolveOptions) -> Result<Trajectory, DynamicsError> {
    let dt = stepper.integrator().dt;
    if !(dt > 0.0) {
        return Err(DynamicsError::InvalidParams("evolve needs a forward stepper (dt > 0)".into()));
    }
    if !(options.t_end > 0.0 && options.t_end.is_finite()) {
        return Err(DynamicsError::InvalidParams(format!("t_end must be positive, got {}", options.t_end)));
    }
    let steps = (options.t_end / dt).round() as usize;
    if steps == 0 || (steps as f64 * dt - options.t_end).abs() > 1e-9 * options.t_end {
        return Err(DynamicsError::InvalidParams(format!(
            "t_end = {} is not a whole number of steps of dt = {dt}",
            options.t_end
        )));
    }
    if options.record_every == 0 {
        return Err(DynamicsError::InvalidParams("record_every must be at least 1".into()));
    }
    if !(options.mass_guard > 0.0) {
        return Err(DynamicsError::InvalidParams("mass guard must be positive".into()));
    }
    let mut snapshot_steps = Vec::with_capacity(options.snapshot_times.len());
    for &t in &options.snapshot_times {
        if !(t >= 0.0 && t <= options.t_end * (1.0 + 1e-12)) {
            return Err(DynamicsError::InvalidParams(format!("snapshot time {t} lies outside [0, {}]", options.t_end)));
        }
        snapshot_steps.push((t / dt).round() as usize);
    }
    snapshot_steps.sort_unstable();
    snapshot_steps.dedup();

    let edges = u0.grid().graph().edge_count();
    let mut traj = Trajectory {
        dt,
        records: vec![record(0.0, u0, stepper, &options.observers)?],
        snapshots: Vec::new(),
        edge_peaks: vec![0.0; edges],
        final_state: u0.clone(),
        steps: 0,
        max_nonlinear_iterations: 0,
    };
    edge_peaks_into(u0, &mut traj.edge_peaks);
    let mut pending = snapshot_steps.into_iter().peekable();
    if pending.next_if_eq(&0).is_some() {
        traj.snapshots.push(Snapshot { time: 0.0, state: u0.clone() });
    }
    let m0 = mass(u0);
    let mut prev = u0.clone();
    let mut u = u0.clone();
    for n in 1..=steps {
        let time = n as f64 * dt;
        let guess: Vec<Complex64> = if n == 1 {
            u.values().to_vec()
        } else {
            u.values().iter().zip(prev.values()).map(|(a, b)| 2.0 * a - b).collect()
        };
        let outcome = match stepper.step_from(&u, &guess) {
            Ok(o) => o,
            Err(source) => {
                traj.final_state = u;
                return Err(DynamicsError::StepFailed { time, source: Box::new(source), partial: Box::new(traj) });
            }
        };
        prev = std::mem::replace(&mut u, outcome.state);
        traj.steps = n;
        traj.max_nonlinear_iterations = traj.max_nonlinear_iterations.max(outcome.iterations);
        edge_peaks_into(&u, &mut traj.edge_peaks);
        if n % options.record_every == 0 || n == steps {
            traj.records.push(record(time, &u, stepper, &options.observers)?);
        }
        if pending.next_if_eq(&n).is_some() {
            traj.snapshots.push(Snapshot { time, state: u.clone() });
        }
        if m0 > 0.0 {
            let drift = ((mass(&u) - m0) / m0).abs();
            if drift > options.mass_guard {
                traj.final_state = u;
                return Err(DynamicsError::MassGuard { time, drift, guard: options.mass_guard, partial: Box::new(traj) });
            }
        }
    }
    traj.final_state = u;
    Ok(traj)
}

/// Time of the largest recorded kinetic energy, the earliest on ties.
pub fn detect_collision_time(records: &[ObservableRecord]) -> Result<f64, DynamicsError> {
    let mut best: Option<&ObservableRecord> = None;
    for r in records {
        if best.is_none_or(|b| r.kinetic > b.kinetic) {
            best = Some(r);
        }
    }
    best.map(|r| r.time).ok_or(DynamicsError::EmptySeries)
}
