//! Degree and λ sweep, one CSV row per configuration.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use super::commands::{finish, output, training_data};
use super::FitArgs;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{force_norm_rmse, torque_norm_rmse};
use crate::model::{CalibrationModel, FitOptions, ModelSpec, EFFECTIVE_THRESHOLD};

pub(super) const DEFAULT_MAX_DEGREE: usize = 5;
const LADDER_DEGREE: usize = 4;

/// λ values run at degree 4.
pub const SWEEP_LAMBDAS: [f64; 6] = [0.5, 1.0, 10.0, 50.0, 100.0, 200.0];

pub const SWEEP_HEADER: &str = "degree,lambda,total_coefficients,effective_coefficients,\
train_force_rmse,train_torque_rmse,val_force_rmse,val_torque_rmse";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub degree: usize,
    pub lambda: f64,
    pub total_coefficients: usize,
    pub effective_coefficients: usize,
    pub train_force_rmse: f64,
    pub train_torque_rmse: f64,
    pub val_force_rmse: Option<f64>,
    pub val_torque_rmse: Option<f64>,
}

impl SweepRow {
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.degree,
            self.lambda,
            self.total_coefficients,
            self.effective_coefficients,
            self.train_force_rmse,
            self.train_torque_rmse,
            opt(self.val_force_rmse),
            opt(self.val_torque_rmse)
        )
    }
}

/// Degrees `1..=max_degree` by least squares, then the λ ladder at degree 4
/// (or `max_degree` if lower).
pub fn sweep_configurations(base: &ModelSpec, max_degree: usize) -> Vec<ModelSpec> {
    let mut specs: Vec<ModelSpec> = (1..=max_degree)
        .map(|d| ModelSpec { degree: d, lambda: 0.0, ..*base })
        .collect();
    let ladder = LADDER_DEGREE.min(max_degree);
    specs.extend(
        SWEEP_LAMBDAS
            .iter()
            .map(|&lambda| ModelSpec { degree: ladder, lambda, ..*base }),
    );
    specs
}

fn norm_errors(model: &CalibrationModel, data: &Dataset) -> Result<(f64, f64)> {
    let (first, predicted) = model.predict_dataset(data)?;
    let expected = &data.wrenches()[first..];
    Ok((
        force_norm_rmse(expected, &predicted)?,
        torque_norm_rmse(expected, &predicted)?,
    ))
}

fn run_one(spec: &ModelSpec, train: &Dataset, val: Option<&Dataset>) -> Result<SweepRow> {
    let options = FitOptions {
        record_time: false,
        ..FitOptions::default()
    };
    let model = CalibrationModel::fit_dataset(spec, train, &options)?;
    for w in &model.metadata.warnings {
        eprintln!("warning (degree {}, lambda {}): {w}", spec.degree, spec.lambda);
    }
    let (train_force, train_torque) = norm_errors(&model, train)?;
    let (val_force, val_torque) = match val {
        Some(v) => {
            let (f, t) = norm_errors(&model, v)?;
            (Some(f), Some(t))
        }
        None => (None, None),
    };
    Ok(SweepRow {
        degree: spec.degree,
        lambda: spec.lambda,
        total_coefficients: model.total_coefficients(),
        effective_coefficients: model.count_effective(EFFECTIVE_THRESHOLD),
        train_force_rmse: train_force,
        train_torque_rmse: train_torque,
        val_force_rmse: val_force,
        val_torque_rmse: val_torque,
    })
}

pub(super) fn cmd_sweep(args: &FitArgs) -> Result<()> {
    let max_degree = args.spec.degree.unwrap_or(DEFAULT_MAX_DEGREE);
    let base = super::SpecArgs {
        degree: Some(max_degree),
        ..args.spec.clone()
    }
    .spec()?;
    let (train, val) = training_data(args)?;
    let specs = sweep_configurations(&base, max_degree);
    // One fit per worker; rows keep configuration order.
    let rows: Vec<SweepRow> = specs
        .par_iter()
        .map(|spec| run_one(spec, &train, val.as_ref()))
        .collect::<Result<_>>()?;

    let out = args.out.as_deref();
    let mut w = output(out)?;
    let io = |e| Error::io(out.unwrap_or(Path::new("<stdout>")), e);
    writeln!(w, "{SWEEP_HEADER}").map_err(io)?;
    for row in &rows {
        writeln!(w, "{}", row.csv_row()).map_err(io)?;
    }
    finish(w, out)
}
