//! Sparse degree-4 models: raising λ removes coefficients at a small cost
//! in accuracy. Prints the strongest terms of the sparsest model.

use ftcal::data::{random_trajectory, simulate, GroundTruthTransducer, TransducerConfig};
use ftcal::metrics::evaluate;
use ftcal::model::{CalibrationModel, FitOptions, ModelSpec, EFFECTIVE_THRESHOLD};

fn main() -> ftcal::Result<()> {
    let sensor = GroundTruthTransducer::from_config(&TransducerConfig::default())?;
    let train = simulate(&sensor, &random_trajectory(&sensor.envelope, 5000, 10), 11)?;
    let val = simulate(&sensor, &random_trajectory(&sensor.envelope, 2000, 20), 21)?;

    println!("lambda  effective/total  train force (N)  val force (N)");
    let mut last = None;
    for lambda in [0.0, 0.5, 1.0, 10.0, 50.0, 100.0, 200.0] {
        let spec = ModelSpec::new(4, 7, 6).with_lambda(lambda);
        let model = CalibrationModel::fit_dataset(&spec, &train, &FitOptions::default())?;
        for w in &model.metadata.warnings {
            eprintln!("warning: {w}");
        }
        // Coefficients at or below the threshold contribute nothing.
        let model = model.prune(EFFECTIVE_THRESHOLD);
        println!(
            "{lambda:>6}  {:>6}/{:<8}  {:>15.4}  {:>13.4}",
            model.count_effective(EFFECTIVE_THRESHOLD),
            model.total_coefficients(),
            evaluate(&model, &train)?.force_norm_rmse,
            evaluate(&model, &val)?.force_norm_rmse
        );
        last = Some(model);
    }

    let model = last.unwrap();
    println!("\nstrongest terms at λ = 200 (normalized units):");
    for e in model.inspect(EFFECTIVE_THRESHOLD).iter().filter(|e| e.column != 0).take(12) {
        println!("  {:<3} {:<20} {:>12.4}", model.output_names()[e.output], e.term, e.normalized);
    }
    Ok(())
}
