//! Calibrates an ideal linear sensor and checks that the fitted matrix is
//! the inverse of the sensor's gain.

use ftcal::data::{random_trajectory, simulate, Envelope, GroundTruthTransducer};
use ftcal::metrics::evaluate;
use ftcal::model::{CalibrationModel, FitOptions, ModelSpec};
use nalgebra::Matrix6;

fn main() -> ftcal::Result<()> {
    let envelope = Envelope::default();
    let reference = envelope.reference();
    // Counts per N (or Nm) with a little cross-talk between axes.
    let gain: [[f64; 6]; 6] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let k = if i == j { 1.0 } else { 0.03 * (i as f64 - j as f64) };
            8000.0 * k / reference[j]
        })
    });
    let sensor = GroundTruthTransducer::affine(gain, envelope)?;

    let train = simulate(&sensor, &random_trajectory(&sensor.envelope, 500, 1), 2)?;
    let val = simulate(&sensor, &random_trajectory(&sensor.envelope, 200, 3), 4)?;

    // Six gauges, no temperature, degree 1.
    let model = CalibrationModel::fit_dataset(&ModelSpec::new(1, 6, 6), &train, &FitOptions::default())?;
    let (c, offset) = model.calibration_matrix()?;
    let c = Matrix6::from_fn(|i, j| c[(i, j)]);
    let error = c * sensor.gain_matrix() - Matrix6::identity();

    println!("calibration matrix (N or Nm per count):\n{c:.6e}");
    println!("max |C·G − I| = {:.2e}", error.abs().max());
    println!("max |offset|  = {:.2e}", offset.abs().max());

    let report = evaluate(&model, &val)?;
    println!("validation force-norm RMSE {:.2e} N", report.force_norm_rmse);
    Ok(())
}
