//! Datasets of raw sensor readings paired with expected wrenches, plus the
//! synthetic transducer used to generate them when no logged data exists.

mod csv_io;
mod envelope;
mod simulate;
mod trajectory;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use csv_io::{load_dataset, read_dataset, write_dataset, write_wrenches};
pub use envelope::Envelope;
pub use simulate::{simulate, GroundTruthTransducer, PerturbationTerm, TransducerConfig};
pub use trajectory::{
    grid_trajectory, lifting_trajectory, random_trajectory, GridTrajectory, LiftingTrajectory,
    LoadPoint, STANDARD_GRAVITY,
};

/// Names of the six gauge channels followed by the temperature channel.
pub const INPUT_NAMES: [&str; 7] = ["u1", "u2", "u3", "u4", "u5", "u6", "temp"];
/// Names of the wrench components, forces first.
pub const OUTPUT_NAMES: [&str; 6] = ["fx", "fy", "fz", "tx", "ty", "tz"];

/// One sensor reading: six strain-gauge channels in bit counts and an
/// optional temperature in °C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawSample {
    pub gauges: [f64; 6],
    pub temperature: Option<f64>,
}

impl RawSample {
    pub fn new(gauges: [f64; 6], temperature: Option<f64>) -> Self {
        Self { gauges, temperature }
    }

    /// The model input vector: the gauges for `inputs = 6`, gauges then
    /// temperature for `inputs = 7`.
    pub fn to_input(&self, inputs: usize) -> Result<Vec<f64>> {
        match inputs {
            6 => Ok(self.gauges.to_vec()),
            7 => {
                let t = self.temperature.ok_or_else(|| Error::Schema("temp".into()))?;
                let mut v = self.gauges.to_vec();
                v.push(t);
                Ok(v)
            }
            n => Err(Error::Shape(format!(
                "raw samples provide 6 or 7 inputs, model expects {n}"
            ))),
        }
    }
}

/// Force (N) and torque (Nm) acting at the sensor frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Wrench {
    pub force: [f64; 3],
    pub torque: [f64; 3],
}

impl Wrench {
    pub fn new(force: [f64; 3], torque: [f64; 3]) -> Self {
        Self { force, torque }
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.len() != 6 {
            return Err(Error::Shape(format!(
                "a wrench has 6 components, got {}",
                values.len()
            )));
        }
        Ok(Self {
            force: [values[0], values[1], values[2]],
            torque: [values[3], values[4], values[5]],
        })
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.force[0],
            self.force[1],
            self.force[2],
            self.torque[0],
            self.torque[1],
            self.torque[2],
        ]
    }

    pub fn force_norm(&self) -> f64 {
        norm3(&self.force)
    }

    pub fn torque_norm(&self) -> f64 {
        norm3(&self.torque)
    }
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub source: String,
    /// Optional group label, e.g. the load attached during the recording.
    pub label: Option<String>,
}

/// Summary of the temperature channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// Ordered (raw sample, expected wrench) pairs.
///
/// Either every sample carries a temperature or none does; timestamps, when
/// present, are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<RawSample>,
    wrenches: Vec<Wrench>,
    timestamps: Option<Vec<f64>>,
    pub metadata: DatasetMetadata,
}

impl Dataset {
    pub fn new(
        samples: Vec<RawSample>,
        wrenches: Vec<Wrench>,
        timestamps: Option<Vec<f64>>,
    ) -> Result<Self> {
        if samples.len() != wrenches.len() {
            return Err(Error::Shape(format!(
                "{} samples but {} wrenches",
                samples.len(),
                wrenches.len()
            )));
        }
        if let Some(t) = &timestamps {
            if t.len() != samples.len() {
                return Err(Error::Shape(format!(
                    "{} timestamps for {} samples",
                    t.len(),
                    samples.len()
                )));
            }
        }
        let with_temperature = samples.first().is_some_and(|s| s.temperature.is_some());
        for (row, (s, w)) in samples.iter().zip(&wrenches).enumerate() {
            if s.temperature.is_some() != with_temperature {
                return Err(Error::data(row, "temperature present on some rows only"));
            }
            let finite = s.gauges.iter().all(|v| v.is_finite())
                && s.temperature.is_none_or(f64::is_finite)
                && w.to_array().iter().all(|v| v.is_finite());
            if !finite {
                return Err(Error::data(row, "non-finite value"));
            }
        }
        if let Some(t) = &timestamps {
            if let Some(row) = t.iter().position(|v| !v.is_finite()) {
                return Err(Error::data(row, "non-finite timestamp"));
            }
            if let Some(row) = t.windows(2).position(|w| w[1] <= w[0]) {
                return Err(Error::data(row + 1, "timestamps are not strictly increasing"));
            }
        }
        Ok(Self {
            samples,
            wrenches,
            timestamps,
            metadata: DatasetMetadata::default(),
        })
    }

    pub fn with_metadata(mut self, metadata: DatasetMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[RawSample] {
        &self.samples
    }

    pub fn wrenches(&self) -> &[Wrench] {
        &self.wrenches
    }

    pub fn timestamps(&self) -> Option<&[f64]> {
        self.timestamps.as_deref()
    }

    pub fn has_temperature(&self) -> bool {
        self.samples.first().is_some_and(|s| s.temperature.is_some())
    }

    pub fn temperature_summary(&self) -> Option<TemperatureSummary> {
        let temps: Vec<f64> = self.samples.iter().filter_map(|s| s.temperature).collect();
        if temps.is_empty() {
            return None;
        }
        Some(TemperatureSummary {
            min: temps.iter().cloned().fold(f64::INFINITY, f64::min),
            max: temps.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            mean: temps.iter().sum::<f64>() / temps.len() as f64,
        })
    }

    /// Model input rows for a model with `inputs` channels (6 or 7).
    pub fn inputs(&self, inputs: usize) -> Result<Vec<Vec<f64>>> {
        if inputs == 7 && !self.has_temperature() && !self.is_empty() {
            return Err(Error::Schema("temp".into()));
        }
        self.samples.iter().map(|s| s.to_input(inputs)).collect()
    }

    /// Output rows in `fx fy fz tx ty tz` order.
    pub fn outputs(&self) -> Vec<Vec<f64>> {
        self.wrenches.iter().map(|w| w.to_array().to_vec()).collect()
    }

    /// SHA-256 over the little-endian bytes of every value, row by row.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (s, w) in self.samples.iter().zip(&self.wrenches) {
            for v in s.gauges {
                hasher.update(v.to_le_bytes());
            }
            if let Some(t) = s.temperature {
                hasher.update(t.to_le_bytes());
            }
            for v in w.to_array() {
                hasher.update(v.to_le_bytes());
            }
        }
        if let Some(t) = &self.timestamps {
            for v in t {
                hasher.update(v.to_le_bytes());
            }
        }
        hex::encode(hasher.finalize())
    }

    fn select(&self, rows: &[usize]) -> Dataset {
        Dataset {
            samples: rows.iter().map(|&i| self.samples[i]).collect(),
            wrenches: rows.iter().map(|&i| self.wrenches[i]).collect(),
            timestamps: self
                .timestamps
                .as_ref()
                .map(|t| rows.iter().map(|&i| t[i]).collect()),
            metadata: self.metadata.clone(),
        }
    }

    /// Concatenates datasets of the same shape. Timestamps are kept only if
    /// every part has them and they stay strictly increasing.
    pub fn concat(parts: &[Dataset]) -> Result<Dataset> {
        let samples: Vec<RawSample> = parts.iter().flat_map(|d| d.samples.iter().copied()).collect();
        let wrenches: Vec<Wrench> = parts.iter().flat_map(|d| d.wrenches.iter().copied()).collect();
        let timestamps = if parts.iter().all(|d| d.timestamps.is_some()) && !parts.is_empty() {
            Some(
                parts
                    .iter()
                    .flat_map(|d| d.timestamps.as_ref().unwrap().iter().copied())
                    .collect(),
            )
        } else {
            None
        };
        let metadata = parts.first().map(|d| d.metadata.clone()).unwrap_or_default();
        Ok(Dataset::new(samples, wrenches, timestamps)?.with_metadata(metadata))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Keep the recording order; training is the leading part.
    Chronological,
    /// Shuffle with the given seed, then cut.
    Random(u64),
}

/// Splits `dataset` into training and validation parts, the training part
/// holding `round(fraction · N)` rows.
pub fn split_dataset(dataset: &Dataset, fraction: f64, mode: SplitMode) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidSpec(format!(
            "split fraction must lie strictly between 0 and 1, got {fraction}"
        )));
    }
    if dataset.is_empty() {
        return Err(Error::InsufficientData("cannot split an empty dataset".into()));
    }
    let n = dataset.len();
    let cut = (fraction * n as f64).round() as usize;
    if cut == 0 || cut == n {
        return Err(Error::InsufficientData(format!(
            "splitting {n} rows at {fraction} leaves one side empty"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    if let SplitMode::Random(seed) = mode {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let (train, validation) = order.split_at(cut);
    let mut train_set = dataset.select(train);
    let mut validation_set = dataset.select(validation);
    if matches!(mode, SplitMode::Random(_)) {
        // Shuffled rows have no time order left.
        train_set.timestamps = None;
        validation_set.timestamps = None;
    }
    Ok((train_set, validation_set))
}
