use num_complex::Complex64;

use super::StateError;
use crate::quad::integrate_decaying;

/// `sech(y)` without overflow for large `|y|`.
fn sech(y: f64) -> f64 {
    let t = (-y.abs()).exp();
    2.0 * t / (1.0 + t * t)
}

/// Frequency-one profile `(p/2)^{1/(p-2)} sech^{2/(p-2)}((p-2)x/2)`.
fn phi_one(p: f64, x: f64) -> f64 {
    (0.5 * p).powf(1.0 / (p - 2.0)) * sech(0.5 * (p - 2.0) * x).powf(2.0 / (p - 2.0))
}

fn check_power(p: f64) -> Result<(), StateError> {
    if p.is_finite() && p > 2.0 && p < 6.0 {
        Ok(())
    } else {
        Err(StateError::InvalidParams(format!("the power p must lie in (2, 6), got {p}")))
    }
}

const QUAD_TOL: f64 = 1e-13;

/// The positive even ground state `φ_μ` of the NLS energy on the line.
///
/// Only the frequency-one profile is written in closed form. Other masses
/// use the scaling `φ_ω(x) = ω^{1/(p-2)} φ₁(√ω x)`, whose mass is
/// `ω^{(6-p)/(2(p-2))} M(φ₁)`, with `M(φ₁)` obtained by quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSoliton {
    p: f64,
    omega: f64,
}

impl LineSoliton {
    /// `M(φ₁) = ∫_ℝ φ₁²`.
    pub fn frequency_one_mass(p: f64) -> Result<f64, StateError> {
        check_power(p)?;
        Ok(2.0 * integrate_decaying(&|x| phi_one(p, x).powi(2), QUAD_TOL))
    }

    pub fn with_frequency(p: f64, omega: f64) -> Result<Self, StateError> {
        check_power(p)?;
        if !(omega.is_finite() && omega > 0.0) {
            return Err(StateError::InvalidParams(format!("frequency must be positive, got {omega}")));
        }
        Ok(LineSoliton { p, omega })
    }

    pub fn with_mass(p: f64, mu: f64) -> Result<Self, StateError> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(StateError::InvalidParams(format!("mass must be positive, got {mu}")));
        }
        let m1 = Self::frequency_one_mass(p)?;
        let omega = (mu / m1).powf(2.0 * (p - 2.0) / (6.0 - p));
        Self::with_frequency(p, omega)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Mass from the scaling law (equals the requested `μ` up to round-off).
    pub fn mass(&self) -> f64 {
        let m1 = Self::frequency_one_mass(self.p).expect("power validated at construction");
        self.omega.powf((6.0 - self.p) / (2.0 * (self.p - 2.0))) * m1
    }

    pub fn amplitude(&self) -> f64 {
        self.profile(0.0)
    }

    pub fn profile(&self, x: f64) -> f64 {
        self.omega.powf(1.0 / (self.p - 2.0)) * phi_one(self.p, self.omega.sqrt() * x)
    }

    /// `φ_μ'(x)`, using `φ₁' = -φ₁ tanh((p-2)x/2)`.
    pub fn derivative(&self, x: f64) -> f64 {
        let y = self.omega.sqrt() * x;
        -self.omega.sqrt() * self.profile(x) * (0.5 * (self.p - 2.0) * y).tanh()
    }

    /// `E(φ_μ, ℝ) = ½‖φ'‖² - (1/p)‖φ‖_p^p` by quadrature.
    pub fn energy(&self) -> f64 {
        let p = self.p;
        2.0 * integrate_decaying(&|x| 0.5 * self.derivative(x).powi(2) - self.profile(x).powf(p) / p, QUAD_TOL)
    }

    /// Mass carried by `|x| > r`, i.e. `2∫_r^∞ φ²`.
    pub fn tail_mass(&self, r: f64) -> f64 {
        2.0 * integrate_decaying(&|s| self.profile(r + s).powi(2), QUAD_TOL)
    }
}

/// Parameters of a travelling soliton `e^{iθ} e^{-i(v/2)x} φ_μ(x - x0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonParams {
    pub p: f64,
    pub mu: f64,
    pub x0: f64,
    pub v: f64,
    pub theta: f64,
}

impl SolitonParams {
    /// Soliton at rest, centered at the origin with zero phase.
    pub fn new(p: f64, mu: f64) -> Self {
        SolitonParams { p, mu, x0: 0.0, v: 0.0, theta: 0.0 }
    }

    pub fn at(self, x0: f64) -> Self {
        SolitonParams { x0, ..self }
    }

    pub fn moving(self, v: f64) -> Self {
        SolitonParams { v, ..self }
    }

    pub fn phase(self, theta: f64) -> Self {
        SolitonParams { theta, ..self }
    }

    pub fn validate(&self) -> Result<(), StateError> {
        check_power(self.p)?;
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(StateError::InvalidParams(format!("mass must be positive, got {}", self.mu)));
        }
        if ![self.x0, self.v, self.theta].iter().all(|x| x.is_finite()) {
            return Err(StateError::InvalidParams("x0, v and theta must be finite".into()));
        }
        Ok(())
    }
}

/// A travelling soliton on the line, ready to be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonWave {
    pub soliton: LineSoliton,
    pub x0: f64,
    pub v: f64,
    pub theta: f64,
}

impl SolitonWave {
    pub fn eval(&self, x: f64) -> Complex64 {
        Complex64::from_polar(self.soliton.profile(x - self.x0), self.theta - 0.5 * self.v * x)
    }
}

pub fn soliton_profile(params: &SolitonParams) -> Result<SolitonWave, StateError> {
    params.validate()?;
    Ok(SolitonWave {
        soliton: LineSoliton::with_mass(params.p, params.mu)?,
        x0: params.x0,
        v: params.v,
        theta: params.theta,
    })
}
