use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Area function `A(x)` sampled on a uniform grid starting at the entrance
/// (`x = 0`), together with the flare profile `ε(x) = ½·d ln A/dx` and the
/// step reflection coefficients between neighbouring samples.
///
/// `epsilon[i]` and `k_profile[i]` describe the step from sample `i` to
/// `i + 1` and are located at the midpoint `(i + ½)·dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaFunction {
    pub dx: f64,
    pub areas: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub k_profile: Vec<f64>,
}

impl AreaFunction {
    pub fn from_areas(dx: f64, areas: Vec<f64>) -> Result<Self> {
        if areas.is_empty() {
            return Err(Error::EmptyAreaFunction);
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidConfig(format!("spatial step must be positive, got {dx}")));
        }
        if let Some(a) = areas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidHorn(format!("area must be positive and finite, got {a}")));
        }
        let epsilon = areas
            .windows(2)
            .map(|w| (w[1] / w[0]).ln() / (2.0 * dx))
            .collect();
        let k_profile = areas
            .windows(2)
            .map(|w| (w[0] - w[1]) / (w[0] + w[1]))
            .collect();
        Ok(Self {
            dx,
            areas,
            epsilon,
            k_profile,
        })
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    /// Position of the last sample, m.
    pub fn extent(&self) -> f64 {
        (self.areas.len() - 1) as f64 * self.dx
    }

    pub fn position(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    /// Position of `epsilon[i]` / `k_profile[i]`.
    pub fn midpoint(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    /// Linear interpolation of `A(x)`, held constant beyond either end.
    pub fn area_at(&self, x: f64) -> f64 {
        let u = x / self.dx;
        if u <= 0.0 {
            return self.areas[0];
        }
        let last = self.areas.len() - 1;
        if u >= last as f64 {
            return self.areas[last];
        }
        let i = u.floor() as usize;
        let t = u - i as f64;
        self.areas[i] + (self.areas[i + 1] - self.areas[i]) * t
    }

    /// Equivalent diameter `2·sqrt(A/π)` of every sample.
    pub fn diameters(&self) -> Vec<f64> {
        self.areas
            .iter()
            .map(|a| 2.0 * (a / std::f64::consts::PI).sqrt())
            .collect()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.areas.len()).map(|i| self.position(i)).collect()
    }
}
