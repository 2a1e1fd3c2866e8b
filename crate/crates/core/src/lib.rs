//! Focusing nonlinear Schrödinger dynamics and ground states on non-compact
//! metric graphs with Kirchhoff vertex conditions.

pub mod discretization;
pub mod dynamics;
pub mod graph;
pub mod groundstate;
pub mod linalg;
pub mod observables;
pub mod quad;
pub mod states;
