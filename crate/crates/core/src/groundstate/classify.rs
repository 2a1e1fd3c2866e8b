use serde::Serialize;

use super::{FlowDiagnostics, GroundStateError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Convergent,
    Runaway,
    Undetermined,
}

/// Decision thresholds of [`classify`]. The true notions are asymptotic, so
/// on a truncated graph these only encode what counts as enough evidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Trailing iterates examined for a runaway.
    pub window: usize,
    /// Radius `t` of the half-line prefixes counted as part of the core.
    pub core_radius: f64,
    pub runaway_core_fraction: f64,
    pub runaway_linf: f64,
    pub convergent_core_fraction: f64,
    /// Largest `H¹` increment of the last step for a convergent flow.
    pub h1_increment: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            window: 50,
            core_radius: 2.0,
            runaway_core_fraction: 0.05,
            runaway_linf: 1e-2,
            convergent_core_fraction: 0.5,
            h1_increment: 1e-4,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), GroundStateError> {
        let bad = |msg: &str| Err(GroundStateError::InvalidConfig(msg.into()));
        if self.window < 2 {
            return bad("classification window must hold at least 2 iterates");
        }
        if !(self.core_radius >= 0.0) {
            return bad("core radius must be non-negative");
        }
        for f in [self.runaway_core_fraction, self.convergent_core_fraction] {
            if !(0.0..=1.0).contains(&f) {
                return bad("core fractions must lie in [0, 1]");
            }
        }
        if !(self.runaway_linf > 0.0 && self.h1_increment > 0.0) {
            return bad("L∞ and H¹ thresholds must be positive");
        }
        Ok(())
    }
}

pub(super) fn looks_runaway(rows: &[FlowDiagnostics], th: &Thresholds) -> bool {
    if rows.len() < th.window {
        return false;
    }
    let tail = &rows[rows.len() - th.window..];
    let last = tail[tail.len() - 1];
    tail.windows(2).all(|w| w[1].f < w[0].f)
        && last.core_mass_fraction < th.runaway_core_fraction
        && last.linf_core < th.runaway_linf
}

/// Runaway when, over the trailing window, the overlap `F` strictly decreases
/// and the last iterate has both its core mass fraction and its core `L∞`
/// norm below the thresholds. Convergent when the flow stopped on the energy
/// tolerance with a small last `H¹` increment and most of the mass on the
/// core. Anything else is undetermined.
pub fn classify(
    rows: &[FlowDiagnostics],
    stopped_on_tolerance: bool,
    th: &Thresholds,
) -> Result<Classification, GroundStateError> {
    if rows.len() < th.window {
        return Err(GroundStateError::Window { window: th.window, len: rows.len() });
    }
    if looks_runaway(rows, th) {
        return Ok(Classification::Runaway);
    }
    Ok(if looks_convergent(rows, stopped_on_tolerance, th) {
        Classification::Convergent
    } else {
        Classification::Undetermined
    })
}

/// The convergent test needs no window, so a flow that settles within a few
/// iterates (for instance from an exact ground state) still qualifies.
pub(super) fn looks_convergent(rows: &[FlowDiagnostics], stopped_on_tolerance: bool, th: &Thresholds) -> bool {
    rows.last().is_some_and(|last| {
        stopped_on_tolerance
            && last.h1_increment < th.h1_increment
            && last.core_mass_fraction > th.convergent_core_fraction
    })
}
