//! Fits a model, saves it, reloads it and lists its largest terms. The
//! reloaded model predicts bit-for-bit the same values.

use ftcal::data::{random_trajectory, simulate, GroundTruthTransducer, TransducerConfig};
use ftcal::model::{CalibrationModel, FitOptions, ModelSpec};

fn main() -> ftcal::Result<()> {
    let sensor = GroundTruthTransducer::from_config(&TransducerConfig::default())?;
    let data = simulate(&sensor, &random_trajectory(&sensor.envelope, 1000, 5), 6)?;

    let spec = ModelSpec::new(2, 7, 6).with_lambda(5.0);
    let model = CalibrationModel::fit_dataset(&spec, &data, &FitOptions::default())?;
    let path = std::env::temp_dir().join("ftcal-model.json");
    model.save(&path)?;
    let loaded = CalibrationModel::load(&path)?;

    let sample = &data.samples()[0];
    let a = model.predict_sample(sample, None)?;
    let b = loaded.predict_sample(sample, None)?;
    assert_eq!(a, b);
    println!("saved {} ({} coefficients), reload identical", path.display(), loaded.total_coefficients());
    println!("trained on {} samples, sha256 {}", loaded.metadata.training_samples, &loaded.metadata.dataset_sha256[..16]);

    for e in loaded.inspect(1e-9).iter().take(10) {
        println!(
            "{:<3} {:<12} normalized {:>10.4}  raw {:>12.4e}",
            loaded.output_names()[e.output],
            e.term,
            e.normalized,
            e.original
        );
    }
    Ok(())
}
