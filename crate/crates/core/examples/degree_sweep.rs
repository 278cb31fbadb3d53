//! Validation curve over the polynomial degree on a synthetic sensor with
//! a cubic nonlinearity, drift and gauge noise.
//!
//! Training error keeps falling with degree; validation error bottoms out
//! once the model starts fitting noise.

use ftcal::data::{random_trajectory, simulate, GroundTruthTransducer, TransducerConfig};
use ftcal::features::count_coefficients;
use ftcal::metrics::evaluate;
use ftcal::model::{CalibrationModel, FitOptions, ModelSpec};

fn main() -> ftcal::Result<()> {
    let sensor = GroundTruthTransducer::from_config(&TransducerConfig::default())?;
    let train = simulate(&sensor, &random_trajectory(&sensor.envelope, 5000, 10), 11)?;
    let val = simulate(&sensor, &random_trajectory(&sensor.envelope, 2000, 20), 21)?;

    println!("degree  coeffs  train force (N)  val force (N)  val torque (Nm)");
    let mut affine = None;
    for degree in 1..=5 {
        let spec = ModelSpec::new(degree, 7, 6);
        let model = CalibrationModel::fit_dataset(&spec, &train, &FitOptions::default())?;
        let t = evaluate(&model, &train)?;
        let v = evaluate(&model, &val)?;
        let base = *affine.get_or_insert(v.force_norm_rmse);
        println!(
            "{degree:>6}  {:>6}  {:>15.4}  {:>13.4}  {:>15.4}   ({:+.1}% vs affine)",
            count_coefficients(degree, 6, 7)?,
            t.force_norm_rmse,
            v.force_norm_rmse,
            v.torque_norm_rmse,
            100.0 * (v.force_norm_rmse / base - 1.0)
        );
    }
    Ok(())
}
