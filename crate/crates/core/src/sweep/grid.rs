use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub f_min: f64,
    pub f_max: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl FrequencyGrid {
    pub fn new(f_min: f64, f_max: f64, points: usize, spacing: Spacing) -> Result<Self> {
        let grid = Self {
            f_min,
            f_max,
            points,
            spacing,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn linear(f_min: f64, f_max: f64, points: usize) -> Result<Self> {
        Self::new(f_min, f_max, points, Spacing::Linear)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_min.is_finite() && self.f_max.is_finite() && 0.0 < self.f_min && self.f_min < self.f_max) {
            return Err(Error::Domain(format!(
                "frequency grid needs 0 < f_min < f_max, got [{}, {}]",
                self.f_min, self.f_max
            )));
        }
        if self.points < 2 {
            return Err(Error::Domain(format!("frequency grid needs at least 2 points, got {}", self.points)));
        }
        Ok(())
    }

    /// Grid frequencies in increasing order; both endpoints are exact.
    pub fn frequencies(&self) -> Vec<f64> {
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.f_min;
                }
                if i == last {
                    return self.f_max;
                }
                let t = i as f64 / last as f64;
                match self.spacing {
                    Spacing::Linear => self.f_min + (self.f_max - self.f_min) * t,
                    Spacing::Logarithmic => (self.f_min.ln() + (self.f_max.ln() - self.f_min.ln()) * t).exp(),
                }
            })
            .collect()
    }
}
