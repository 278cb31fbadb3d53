//! Synthetic strain-gauge transducer.
//!
//! The generator runs in the physical direction, wrench and temperature to
//! raw counts:
//!
//! ```text
//! counts = G·w + p(ŵ) + drift·(T − T_ref) + noise
//! ```
//!
//! where `ŵ` is the wrench scaled per axis to `[-1, 1]` by the envelope and
//! `p` is a quadratic-plus-cubic polynomial expressed in fractions of each
//! channel's affine full scale. Calibration fits the opposite direction, so a
//! fitted model never contains the generator as a special case.

use nalgebra::Matrix6;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use super::trajectory::LoadPoint;
use super::{Dataset, DatasetMetadata, Envelope, RawSample, Wrench};
use crate::error::{Error, Result};
use crate::features::monomials_of_degree;

/// Largest admissible condition number of the gain matrix.
const MAX_GAIN_CONDITION: f64 = 1e3;
/// Largest admissible nonlinear perturbation, as a fraction of full scale.
const MAX_PERTURBATION: f64 = 0.1;
/// Probe levels per axis used to bound the perturbation over the envelope.
const PROBE_LEVELS: usize = 5;

/// Generator settings, typically read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransducerConfig {
    /// Seed for the random gain coupling and perturbation coefficients.
    pub seed: u64,
    /// Nominal counts produced by a load at the envelope edge of an axis.
    pub full_scale: f64,
    /// Magnitude of off-diagonal gain coupling relative to the diagonal.
    pub coupling: f64,
    /// Peak nonlinear perturbation as a fraction of full scale.
    pub nonlinearity: f64,
    /// Largest temperature drift per channel (counts/°C).
    pub drift: f64,
    /// Noise standard deviation as a fraction of full scale.
    pub noise: f64,
    /// Temperature at which drift vanishes (°C).
    pub reference_temperature: f64,
    /// Seconds between samples.
    pub sample_period: f64,
    /// Explicit gain matrix (counts per N or Nm), replacing the random one.
    pub gain: Option<[[f64; 6]; 6]>,
    pub envelope: Envelope,
}

impl Default for TransducerConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            full_scale: 8000.0,
            coupling: 0.1,
            nonlinearity: 0.08,
            drift: 15.0,
            noise: 0.005,
            reference_temperature: 25.0,
            sample_period: 0.01,
            gain: None,
            envelope: Envelope::default(),
        }
    }
}

impl TransducerConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidSpec(format!("generator config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("generator config serializes")
    }
}

/// One nonlinear term: `coefficient · full_scale[channel] · Π ŵ_j^e_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationTerm {
    pub channel: usize,
    pub exponents: [u32; 6],
    pub coefficient: f64,
}

impl PerturbationTerm {
    fn evaluate(&self, scaled: &[f64; 6]) -> f64 {
        let mut v = self.coefficient;
        for (e, w) in self.exponents.iter().zip(scaled) {
            for _ in 0..*e {
                v *= w;
            }
        }
        v
    }
}

/// Hidden forward model of a six-axis sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthTransducer {
    /// Counts per N (force columns) or per Nm (torque columns).
    pub gain: [[f64; 6]; 6],
    pub perturbation: Vec<PerturbationTerm>,
    /// Counts per °C away from `reference_temperature`.
    pub drift: [f64; 6],
    pub reference_temperature: f64,
    /// Standard deviation of additive Gaussian noise (counts).
    pub noise_std: f64,
    pub sample_period: f64,
    pub envelope: Envelope,
}

impl GroundTruthTransducer {
    /// A purely affine, noiseless, drift-free transducer.
    pub fn affine(gain: [[f64; 6]; 6], envelope: Envelope) -> Result<Self> {
        let t = Self {
            gain,
            perturbation: Vec::new(),
            drift: [0.0; 6],
            reference_temperature: 25.0,
            noise_std: 0.0,
            sample_period: 0.01,
            envelope,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn from_config(config: &TransducerConfig) -> Result<Self> {
        config.envelope.validate()?;
        for (name, v) in [
            ("full_scale", config.full_scale),
            ("coupling", config.coupling),
            ("nonlinearity", config.nonlinearity),
            ("drift", config.drift),
            ("noise", config.noise),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidSpec(format!("{name} must be finite and ≥ 0")));
            }
        }
        if !(config.sample_period > 0.0) {
            return Err(Error::InvalidSpec("sample_period must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let unit = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
        let reference = config.envelope.reference();

        let gain = match config.gain {
            Some(g) => g,
            None => std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let relative = if i == j { 1.0 } else { config.coupling * unit.sample(&mut rng) };
                    config.full_scale * relative / reference[j]
                })
            }),
        };
        let drift: [f64; 6] = std::array::from_fn(|_| config.drift * unit.sample(&mut rng));

        let mut perturbation = Vec::new();
        if config.nonlinearity > 0.0 {
            let shapes: Vec<[u32; 6]> = [2, 3]
                .into_iter()
                .flat_map(|d| monomials_of_degree(6, d))
                .map(|m| std::array::from_fn(|i| m.exponents()[i]))
                .collect();
            for channel in 0..6 {
                let mut terms: Vec<PerturbationTerm> = shapes
                    .iter()
                    .map(|&exponents| PerturbationTerm {
                        channel,
                        exponents,
                        coefficient: unit.sample(&mut rng),
                    })
                    .collect();
                let peak = probe_peak(&terms, &config.envelope);
                if peak > 0.0 {
                    for t in &mut terms {
                        t.coefficient *= config.nonlinearity / peak;
                    }
                }
                perturbation.extend(terms);
            }
        }

        let t = Self {
            gain,
            perturbation,
            drift,
            reference_temperature: config.reference_temperature,
            noise_std: config.noise * config.full_scale,
            sample_period: config.sample_period,
            envelope: config.envelope,
        };
        t.validate()?;
        Ok(t)
    }

    /// Affine counts reached at the envelope corners, per channel.
    pub fn full_scale(&self) -> [f64; 6] {
        let reference = self.envelope.reference();
        std::array::from_fn(|i| (0..6).map(|j| self.gain[i][j].abs() * reference[j]).sum())
    }

    pub fn gain_matrix(&self) -> Matrix6<f64> {
        Matrix6::from_fn(|i, j| self.gain[i][j])
    }

    /// Checks the structural invariants: finite, well-conditioned gain and a
    /// perturbation within 10 % of full scale across the envelope.
    pub fn validate(&self) -> Result<()> {
        self.envelope.validate()?;
        let g = self.gain_matrix();
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("gain matrix is not finite".into()));
        }
        let sv = g.singular_values();
        let condition = sv.max() / sv.min();
        if !(condition < MAX_GAIN_CONDITION) {
            return Err(Error::InvalidSpec(format!(
                "gain matrix condition number {condition:.3e} exceeds {MAX_GAIN_CONDITION:e}"
            )));
        }
        if self.perturbation.iter().any(|t| t.channel >= 6 || !t.coefficient.is_finite()) {
            return Err(Error::InvalidSpec("malformed perturbation term".into()));
        }
        for channel in 0..6 {
            let terms: Vec<PerturbationTerm> = self
                .perturbation
                .iter()
                .filter(|t| t.channel == channel)
                .cloned()
                .collect();
            let peak = probe_peak(&terms, &self.envelope);
            if peak > MAX_PERTURBATION * (1.0 + 1e-9) {
                return Err(Error::InvalidSpec(format!(
                    "perturbation on channel {} reaches {:.1} % of full scale",
                    channel + 1,
                    100.0 * peak
                )));
            }
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::InvalidSpec("noise scale must be finite and ≥ 0".into()));
        }
        if self.drift.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("drift is not finite".into()));
        }
        Ok(())
    }

    /// Noise-free counts for one load.
    pub fn counts(&self, wrench: &Wrench, temperature: f64) -> [f64; 6] {
        let w = wrench.to_array();
        let reference = self.envelope.reference();
        let scaled: [f64; 6] = std::array::from_fn(|j| w[j] / reference[j]);
        let full_scale = self.full_scale();
        let mut counts: [f64; 6] =
            std::array::from_fn(|i| (0..6).map(|j| self.gain[i][j] * w[j]).sum());
        for term in &self.perturbation {
            counts[term.channel] += full_scale[term.channel] * term.evaluate(&scaled);
        }
        let dt = temperature - self.reference_temperature;
        for (c, d) in counts.iter_mut().zip(&self.drift) {
            *c += d * dt;
        }
        counts
    }
}

/// Largest `|Σ terms|` over a regular probe grid of the envelope, in scaled
/// wrench coordinates.
fn probe_peak(terms: &[PerturbationTerm], envelope: &Envelope) -> f64 {
    if terms.is_empty() {
        return 0.0;
    }
    let reference = envelope.reference();
    let levels: Vec<[f64; PROBE_LEVELS]> = (0..6)
        .map(|j| {
            let (lo, hi) = (envelope.lower[j] / reference[j], envelope.upper[j] / reference[j]);
            std::array::from_fn(|k| lo + (hi - lo) * k as f64 / (PROBE_LEVELS - 1) as f64)
        })
        .collect();
    let mut peak: f64 = 0.0;
    let mut index = [0usize; 6];
    loop {
        let point: [f64; 6] = std::array::from_fn(|j| levels[j][index[j]]);
        let value: f64 = terms.iter().map(|t| t.evaluate(&point)).sum();
        peak = peak.max(value.abs());
        let mut axis = 0;
        loop {
            index[axis] += 1;
            if index[axis] < PROBE_LEVELS {
                break;
            }
            index[axis] = 0;
            axis += 1;
            if axis == 6 {
                return peak;
            }
        }
    }
}

/// Runs `trajectory` through the transducer, pairing the resulting counts
/// with the commanded wrench. Deterministic in `(transducer, trajectory,
/// seed)`.
pub fn simulate(
    transducer: &GroundTruthTransducer,
    trajectory: &[LoadPoint],
    seed: u64,
) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = if transducer.noise_std > 0.0 {
        Some(Normal::new(0.0, transducer.noise_std).map_err(|e| Error::InvalidSpec(e.to_string()))?)
    } else {
        None
    };
    let mut samples = Vec::with_capacity(trajectory.len());
    let mut wrenches = Vec::with_capacity(trajectory.len());
    for (row, point) in trajectory.iter().enumerate() {
        transducer
            .envelope
            .check(&point.wrench, point.temperature)
            .map_err(|e| Error::Envelope(format!("trajectory row {row}: {e}")))?;
        let mut counts = transducer.counts(&point.wrench, point.temperature);
        if let Some(n) = &noise {
            for c in &mut counts {
                *c += n.sample(&mut rng);
            }
        }
        samples.push(RawSample::new(counts, Some(point.temperature)));
        wrenches.push(point.wrench);
    }
    let times = (0..trajectory.len())
        .map(|k| k as f64 * transducer.sample_period)
        .collect();
    Ok(Dataset::new(samples, wrenches, Some(times))?.with_metadata(DatasetMetadata {
        source: format!("synthetic transducer, seed {seed}"),
        label: None,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::random_trajectory;

    fn quiet() -> TransducerConfig {
        TransducerConfig {
            nonlinearity: 0.0,
            noise: 0.0,
            drift: 0.0,
            ..TransducerConfig::default()
        }
    }

    #[test]
    fn zero_load_gives_zero_counts() {
        let t = GroundTruthTransducer::from_config(&quiet()).unwrap();
        let point = LoadPoint {
            wrench: Wrench::default(),
            temperature: 25.0,
        };
        let d = simulate(&t, &[point], 3).unwrap();
        assert_eq!(d.samples()[0].gauges, [0.0; 6]);
    }

    #[test]
    fn same_seed_same_dataset() {
        let t = GroundTruthTransducer::from_config(&TransducerConfig::default()).unwrap();
        let traj = random_trajectory(&t.envelope, 50, 9);
        assert_eq!(simulate(&t, &traj, 4).unwrap(), simulate(&t, &traj, 4).unwrap());
        assert_ne!(simulate(&t, &traj, 4).unwrap(), simulate(&t, &traj, 5).unwrap());
    }

    #[test]
    fn affine_counts_invert_exactly() {
        let t = GroundTruthTransducer::from_config(&quiet()).unwrap();
        let g = t.gain_matrix();
        let g_inv = g.try_inverse().unwrap();
        for p in random_trajectory(&t.envelope, 20, 1) {
            let c = t.counts(&p.wrench, p.temperature);
            let direct: [f64; 6] =
                std::array::from_fn(|i| (0..6).map(|j| t.gain[i][j] * p.wrench.to_array()[j]).sum());
            assert_eq!(c, direct);
            let back = g_inv * nalgebra::Vector6::from_column_slice(&c);
            for (a, b) in back.iter().zip(p.wrench.to_array()) {
                assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn default_perturbation_within_bounds() {
        let t = GroundTruthTransducer::from_config(&TransducerConfig::default()).unwrap();
        assert_eq!(t.perturbation.len(), 6 * (21 + 56));
        let bad = TransducerConfig {
            nonlinearity: 0.2,
            ..TransducerConfig::default()
        };
        assert!(GroundTruthTransducer::from_config(&bad).is_err());
    }

    #[test]
    fn singular_gain_is_rejected() {
        let mut gain = [[0.0; 6]; 6];
        for (i, row) in gain.iter_mut().enumerate() {
            row[i] = 100.0;
        }
        gain[5] = gain[4];
        assert!(GroundTruthTransducer::affine(gain, Envelope::default()).is_err());
    }

    #[test]
    fn out_of_envelope_load() {
        let t = GroundTruthTransducer::from_config(&quiet()).unwrap();
        let point = LoadPoint {
            wrench: Wrench::new([500.0, 0.0, 0.0], [0.0; 3]),
            temperature: 25.0,
        };
        assert!(matches!(simulate(&t, &[point], 0), Err(Error::Envelope(_))));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = TransducerConfig {
            seed: 42,
            ..TransducerConfig::default()
        };
        assert_eq!(TransducerConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        let partial = TransducerConfig::from_toml("seed = 7\nnoise = 0.0\n").unwrap();
        assert_eq!(partial.seed, 7);
        assert_eq!(partial.full_scale, 8000.0);
        assert!(TransducerConfig::from_toml("sed = 7").is_err());
    }
}
