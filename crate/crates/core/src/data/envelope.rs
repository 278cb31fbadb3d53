use serde::{Deserialize, Serialize};

use super::{Wrench, OUTPUT_NAMES};
use crate::error::{Error, Result};

/// Operating envelope: per-axis wrench bounds and a temperature range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    /// Lower bounds in `fx fy fz tx ty tz` order (N, Nm).
    pub lower: [f64; 6],
    pub upper: [f64; 6],
    /// (min, max) in °C.
    pub temperature: (f64, f64),
}

/// Slack for values computed exactly at a bound.
const BOUND_SLACK: f64 = 1e-9;

impl Default for Envelope {
    /// Loads and temperatures reached on the robot arm during in-situ
    /// calibration runs.
    fn default() -> Self {
        Self {
            lower: [-30.45, -120.48, -113.24, -4.35, -4.68, -12.59],
            upper: [123.91, 34.03, 113.65, 26.99, 25.55, 7.27],
            temperature: (25.0, 44.0),
        }
    }
}

impl Envelope {
    pub fn validate(&self) -> Result<()> {
        for (axis, name) in OUTPUT_NAMES.iter().enumerate() {
            if !(self.lower[axis] < self.upper[axis]) {
                return Err(Error::InvalidSpec(format!(
                    "envelope axis {} has lower bound {} ≥ upper bound {}",
                    name, self.lower[axis], self.upper[axis]
                )));
            }
        }
        if !(self.temperature.0 <= self.temperature.1) {
            return Err(Error::InvalidSpec("envelope temperature range is empty".into()));
        }
        Ok(())
    }

    /// Largest absolute value per axis, used to scale wrenches to `[-1, 1]`.
    pub fn reference(&self) -> [f64; 6] {
        std::array::from_fn(|i| self.lower[i].abs().max(self.upper[i].abs()))
    }

    pub fn check(&self, wrench: &Wrench, temperature: f64) -> Result<()> {
        for (axis, v) in wrench.to_array().into_iter().enumerate() {
            let slack = BOUND_SLACK * (1.0 + v.abs());
            if !(v >= self.lower[axis] - slack && v <= self.upper[axis] + slack) {
                return Err(Error::Envelope(format!(
                    "{} = {v} outside [{}, {}]",
                    OUTPUT_NAMES[axis], self.lower[axis], self.upper[axis]
                )));
            }
        }
        let (lo, hi) = self.temperature;
        let slack = BOUND_SLACK * (1.0 + temperature.abs());
        if !(temperature >= lo - slack && temperature <= hi + slack) {
            return Err(Error::Envelope(format!(
                "temperature {temperature} °C outside [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    /// Fails unless `inner` lies within `self`.
    pub fn check_contains(&self, inner: &Envelope) -> Result<()> {
        for (axis, name) in OUTPUT_NAMES.iter().enumerate() {
            if inner.lower[axis] < self.lower[axis] || inner.upper[axis] > self.upper[axis] {
                return Err(Error::Envelope(format!(
                    "requested {} range [{}, {}] exceeds [{}, {}]",
                    name,
                    inner.lower[axis],
                    inner.upper[axis],
                    self.lower[axis],
                    self.upper[axis]
                )));
            }
        }
        if inner.temperature.0 < self.temperature.0 || inner.temperature.1 > self.temperature.1 {
            return Err(Error::Envelope(format!(
                "requested temperature range {:?} exceeds {:?}",
                inner.temperature, self.temperature
            )));
        }
        Ok(())
    }
}
