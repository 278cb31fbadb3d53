//! Error metrics for calibrated models.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Wrench, OUTPUT_NAMES};
use crate::error::{Error, Result};
use crate::model::{CalibrationModel, EFFECTIVE_THRESHOLD};

fn check_pair(expected: &[f64], predicted: &[f64]) -> Result<()> {
    if expected.len() != predicted.len() {
        return Err(Error::Shape(format!(
            "{} expected values but {} predictions",
            expected.len(),
            predicted.len()
        )));
    }
    if expected.is_empty() {
        return Err(Error::InsufficientData("metrics need at least one sample".into()));
    }
    Ok(())
}

fn mse(expected: &[f64], predicted: &[f64]) -> f64 {
    let n = expected.len() as f64;
    expected
        .iter()
        .zip(predicted)
        .map(|(y, p)| (y - p) * (y - p))
        .sum::<f64>()
        / n
}

/// `sqrt((1/N) Σ (y − ŷ)²)`.
pub fn rmse(expected: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(expected, predicted)?;
    Ok(mse(expected, predicted).sqrt())
}

/// `1 − sqrt(MSE / var(y))` with population variance: 1 is a perfect fit,
/// 0 is no better than predicting the mean, and it goes negative below that.
pub fn best_fit(expected: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(expected, predicted)?;
    let n = expected.len() as f64;
    let mean = expected.iter().sum::<f64>() / n;
    let variance = expected.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
    if !(variance > 0.0) {
        return Err(Error::UndefinedMetric(
            "BestFit is undefined for a constant expected series".into(),
        ));
    }
    Ok(1.0 - (mse(expected, predicted) / variance).sqrt())
}

fn norms(wrenches: &[Wrench], f: fn(&Wrench) -> f64) -> Vec<f64> {
    wrenches.iter().map(f).collect()
}

/// RMSE between per-sample force norms (N).
pub fn force_norm_rmse(expected: &[Wrench], predicted: &[Wrench]) -> Result<f64> {
    rmse(&norms(expected, Wrench::force_norm), &norms(predicted, Wrench::force_norm))
}

/// RMSE between per-sample torque norms (Nm).
pub fn torque_norm_rmse(expected: &[Wrench], predicted: &[Wrench]) -> Result<f64> {
    rmse(&norms(expected, Wrench::torque_norm), &norms(predicted, Wrench::torque_norm))
}

fn max_abs_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Evaluation of a model on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub samples: usize,
    /// Per output channel, `fx fy fz` in N and `tx ty tz` in Nm.
    pub channel_rmse: Vec<f64>,
    /// Per output channel; `None` where the expected series is constant.
    pub channel_best_fit: Vec<Option<f64>>,
    pub force_norm_rmse: f64,
    pub torque_norm_rmse: f64,
    pub max_force_norm_error: f64,
    pub max_torque_norm_error: f64,
    pub effective_coefficients: usize,
    pub total_coefficients: usize,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "samples,rmse_fx,rmse_fy,rmse_fz,rmse_tx,rmse_ty,rmse_tz,\
best_fit_fx,best_fit_fy,best_fit_fz,best_fit_tx,best_fit_ty,best_fit_tz,\
force_norm_rmse,torque_norm_rmse,max_force_norm_error,max_torque_norm_error,\
effective_coefficients,total_coefficients";

    /// Flat CSV row matching [`EvalReport::CSV_HEADER`]; undefined BestFit
    /// values are left empty.
    pub fn csv_row(&self) -> String {
        let mut fields = vec![self.samples.to_string()];
        fields.extend(self.channel_rmse.iter().map(|v| v.to_string()));
        fields.extend(
            self.channel_best_fit
                .iter()
                .map(|v| v.map(|v| v.to_string()).unwrap_or_default()),
        );
        fields.extend([
            self.force_norm_rmse.to_string(),
            self.torque_norm_rmse.to_string(),
            self.max_force_norm_error.to_string(),
            self.max_torque_norm_error.to_string(),
            self.effective_coefficients.to_string(),
            self.total_coefficients.to_string(),
        ]);
        fields.join(",")
    }

    pub fn write_csv(&self, mut writer: impl Write) -> std::io::Result<()> {
        writeln!(writer, "{}", Self::CSV_HEADER)?;
        writeln!(writer, "{}", self.csv_row())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Scores `predicted` against `expected` wrenches.
pub fn report(
    expected: &[Wrench],
    predicted: &[Wrench],
    effective_coefficients: usize,
    total_coefficients: usize,
) -> Result<EvalReport> {
    check_pair(
        &norms(expected, Wrench::force_norm),
        &norms(predicted, Wrench::force_norm),
    )?;
    let mut channel_rmse = Vec::with_capacity(6);
    let mut channel_best_fit = Vec::with_capacity(6);
    for c in 0..OUTPUT_NAMES.len() {
        let y: Vec<f64> = expected.iter().map(|w| w.to_array()[c]).collect();
        let p: Vec<f64> = predicted.iter().map(|w| w.to_array()[c]).collect();
        channel_rmse.push(rmse(&y, &p)?);
        channel_best_fit.push(match best_fit(&y, &p) {
            Ok(v) => Some(v),
            Err(Error::UndefinedMetric(_)) => None,
            Err(e) => return Err(e),
        });
    }
    let ef = norms(expected, Wrench::force_norm);
    let pf = norms(predicted, Wrench::force_norm);
    let et = norms(expected, Wrench::torque_norm);
    let pt = norms(predicted, Wrench::torque_norm);
    Ok(EvalReport {
        samples: expected.len(),
        channel_rmse,
        channel_best_fit,
        force_norm_rmse: rmse(&ef, &pf)?,
        torque_norm_rmse: rmse(&et, &pt)?,
        max_force_norm_error: max_abs_difference(&ef, &pf),
        max_torque_norm_error: max_abs_difference(&et, &pt),
        effective_coefficients,
        total_coefficients,
    })
}

/// Predicts every sample of `dataset` that has full history and scores the
/// predictions.
pub fn evaluate(model: &CalibrationModel, dataset: &Dataset) -> Result<EvalReport> {
    if model.spec().outputs != OUTPUT_NAMES.len() {
        return Err(Error::Shape(format!(
            "evaluation needs a six-output model, got {} outputs",
            model.spec().outputs
        )));
    }
    let (first, predicted) = model.predict_dataset(dataset)?;
    report(
        &dataset.wrenches()[first..],
        &predicted,
        model.count_effective(EFFECTIVE_THRESHOLD),
        model.total_coefficients(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_cases() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - (12.5f64).sqrt()).abs() < 1e-15);
        assert_eq!(rmse(&[1.0, 2.0, 3.0], &[3.5, 4.5, 5.5]).unwrap(), 2.5);
        assert!(matches!(rmse(&[1.0], &[1.0, 2.0]), Err(Error::Shape(_))));
        assert!(matches!(rmse(&[], &[]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn best_fit_cases() {
        let y = [1.0, 4.0, 2.0, 8.0];
        assert_eq!(best_fit(&y, &y).unwrap(), 1.0);
        let mean = y.iter().sum::<f64>() / 4.0;
        assert!(best_fit(&y, &[mean; 4]).unwrap().abs() < 1e-15);
        assert_eq!(best_fit(&[0.0, 2.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(best_fit(&[0.0, 2.0], &[2.0, 0.0]).unwrap() < 0.0);
        assert!(matches!(
            best_fit(&[3.0, 3.0], &[3.0, 3.0]),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn norm_rmse_ignores_direction() {
        let e = vec![Wrench::new([20.0, 0.0, 0.0], [1.0, 0.0, 0.0]); 3];
        let p = vec![Wrench::new([0.0, 12.0, 16.0], [0.0, 0.0, -1.0]); 3];
        assert_eq!(force_norm_rmse(&e, &p).unwrap(), 0.0);
        assert_eq!(torque_norm_rmse(&e, &p).unwrap(), 0.0);
        let q = vec![Wrench::new([0.0, 0.0, 26.0], [0.0; 3]); 3];
        assert_eq!(force_norm_rmse(&e, &q).unwrap(), 6.0);
    }

    #[test]
    fn report_flags_constant_channels() {
        let e: Vec<Wrench> = (0..4)
            .map(|k| Wrench::new([k as f64, 1.0, 0.0], [0.0; 3]))
            .collect();
        let r = report(&e, &e, 3, 12).unwrap();
        assert_eq!(r.channel_best_fit[0], Some(1.0));
        assert_eq!(r.channel_best_fit[1], None);
        assert_eq!(r.force_norm_rmse, 0.0);
        let row = r.csv_row();
        assert_eq!(row.split(',').count(), EvalReport::CSV_HEADER.split(',').count());
    }
}
