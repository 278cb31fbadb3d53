use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model hyperparameters.
///
/// `lambda` is the L1 weight applied in normalized feature units against the
/// objective `½‖Ax − b‖²` (a sum over samples, not a mean). `lambda = 0`
/// selects ordinary least squares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Polynomial degree `np`.
    pub degree: usize,
    /// Input channels `nu`: 6 gauges, or 7 with temperature.
    pub inputs: usize,
    /// Output channels `ny`.
    pub outputs: usize,
    pub lambda: f64,
    /// Output-lag order `na`.
    pub output_lags: usize,
    /// Input-lag order `nb`.
    pub input_lags: usize,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            degree: 1,
            inputs: 7,
            outputs: 6,
            lambda: 0.0,
            output_lags: 0,
            input_lags: 0,
        }
    }
}

impl ModelSpec {
    pub fn new(degree: usize, inputs: usize, outputs: usize) -> Self {
        Self {
            degree,
            inputs,
            outputs,
            ..Self::default()
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_lags(mut self, output_lags: usize, input_lags: usize) -> Self {
        self.output_lags = output_lags;
        self.input_lags = input_lags;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree == 0 {
            return Err(Error::InvalidSpec("polynomial degree must be at least 1".into()));
        }
        if self.inputs == 0 {
            return Err(Error::InvalidSpec("input count must be at least 1".into()));
        }
        if self.outputs == 0 {
            return Err(Error::InvalidSpec("output count must be at least 1".into()));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "lambda must be a finite non-negative number, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    pub fn is_dynamic(&self) -> bool {
        self.output_lags > 0 || self.input_lags > 0
    }

    /// Regressor columns per output: `na·ny + (nb + 1)·(C(nu + np, np) − 1) + 1`.
    pub fn columns_per_output(&self) -> Result<usize> {
        self.validate()?;
        let monomials = crate::features::binomial(
            (self.inputs + self.degree) as u64,
            self.degree as u64,
        )? as usize;
        Ok(self.output_lags * self.outputs + (self.input_lags + 1) * (monomials - 1) + 1)
    }
}
