use serde::{Deserialize, Serialize};

use super::{GraphError, MetricGraph};

/// External potential on the line graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// Point interaction `g δ(x)` at the vertex.
    Delta { strength: f64 },
    /// Smooth non-negative potential sampled on the line coordinate.
    Smooth(SampledPotential),
}

/// Samples `V(x_k)` on strictly increasing abscissae; linear interpolation
/// between samples and zero outside the sampled range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPotential {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledPotential {
    pub fn from_fn(f: impl Fn(f64) -> f64, from: f64, to: f64, samples: usize) -> Self {
        let n = samples.max(2);
        let xs: Vec<f64> = (0..n).map(|k| from + (to - from) * k as f64 / (n - 1) as f64).collect();
        let values = xs.iter().map(|&x| f(x)).collect();
        SampledPotential { xs, values }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 0 || x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let k = self.xs.partition_point(|&s| s <= x);
        if k == 0 {
            return self.values[0];
        }
        if k >= n {
            return self.values[n - 1];
        }
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let t = (x - x0) / (x1 - x0);
        self.values[k - 1] * (1.0 - t) + self.values[k] * t
    }

    fn validate(&self) -> Result<(), GraphError> {
        let bad = |m: &str| Err(GraphError::InvalidPotential(m.into()));
        if self.xs.len() != self.values.len() || self.xs.len() < 2 {
            return bad("need at least two (x, V) samples of equal count");
        }
        if self.xs.windows(2).any(|w| !(w[1] > w[0])) || self.xs.iter().any(|x| !x.is_finite()) {
            return bad("sample abscissae must be finite and strictly increasing");
        }
        if self.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return bad("potential values must be finite and non-negative");
        }
        Ok(())
    }
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<(), GraphError> {
        match self {
            PotentialSpec::Delta { strength } => {
                if strength.is_finite() && *strength > 0.0 {
                    Ok(())
                } else {
                    Err(GraphError::InvalidPotential(format!(
                        "delta strength must be positive, got {strength}"
                    )))
                }
            }
            PotentialSpec::Smooth(s) => s.validate(),
        }
    }

    pub(super) fn validate_on(&self, graph: &MetricGraph) -> Result<(), GraphError> {
        self.validate()?;
        if !graph.is_line() {
            return Err(GraphError::InvalidPotential("potentials are only supported on the line graph".into()));
        }
        Ok(())
    }
}
