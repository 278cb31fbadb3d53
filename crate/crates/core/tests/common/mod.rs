#![allow(dead_code)]

use ftcal::data::{
    random_trajectory, simulate, Dataset, Envelope, GroundTruthTransducer, TransducerConfig,
};

/// A well-conditioned gain with mild, fixed cross-coupling.
pub fn coupled_gain(envelope: &Envelope) -> [[f64; 6]; 6] {
    let reference = envelope.reference();
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let coupling = if i == j { 1.0 } else { 0.05 * ((i * 6 + j) % 5) as f64 - 0.1 };
            8000.0 * coupling / reference[j]
        })
    })
}

pub fn affine_transducer() -> GroundTruthTransducer {
    let envelope = Envelope::default();
    GroundTruthTransducer::affine(coupled_gain(&envelope), envelope).unwrap()
}

pub fn default_transducer() -> GroundTruthTransducer {
    GroundTruthTransducer::from_config(&TransducerConfig::default()).unwrap()
}

/// Uniform random loads over the transducer's envelope.
pub fn random_dataset(t: &GroundTruthTransducer, samples: usize, seed: u64) -> Dataset {
    let trajectory = random_trajectory(&t.envelope, samples, seed);
    simulate(t, &trajectory, seed.wrapping_add(1000)).unwrap()
}

pub fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}
