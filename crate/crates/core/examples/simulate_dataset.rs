//! Generates calibration datasets from a synthetic sensor and writes them
//! as CSV: random loads over the envelope, a grid of fixed-norm loads and
//! a vertical lift.

use std::fs::File;

use ftcal::data::{
    grid_trajectory, lifting_trajectory, random_trajectory, simulate, write_dataset,
    GridTrajectory, GroundTruthTransducer, LiftingTrajectory, TransducerConfig,
};

fn main() -> ftcal::Result<()> {
    let config = TransducerConfig {
        seed: 7,
        nonlinearity: 0.05,
        ..TransducerConfig::default()
    };
    println!("sensor settings:\n{}", config.to_toml());
    let sensor = GroundTruthTransducer::from_config(&config)?;
    let envelope = &sensor.envelope;

    let grid = GridTrajectory::from_masses(&[0.5, 1.0, 2.0], 0.2, 16);
    let runs = [
        ("random", random_trajectory(envelope, 1000, 1)),
        ("grid", grid_trajectory(&grid, envelope)?),
        ("lifting", lifting_trajectory(&LiftingTrajectory::default(), envelope)?),
    ];
    let dir = std::env::temp_dir();
    for (name, trajectory) in runs {
        let data = simulate(&sensor, &trajectory, 100)?;
        let path = dir.join(format!("ftcal-{name}.csv"));
        let file = File::create(&path).map_err(|e| ftcal::Error::Io { path: path.clone(), source: e })?;
        write_dataset(&data, file)?;
        let temp = data.temperature_summary().unwrap();
        println!(
            "{name:<8} {:>5} samples  temp {:.1}..{:.1} °C  -> {}",
            data.len(),
            temp.min,
            temp.max,
            path.display()
        );
    }
    Ok(())
}
