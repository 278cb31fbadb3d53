//! Load trajectories fed to the synthetic transducer.
//!
//! `grid_trajectory` mimics an arm sweeping a payload through a quarter of a
//! sphere of gravity directions, one pass per payload; `lifting_trajectory`
//! ramps a single-axis load up to a peak and back.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Envelope, Wrench};
use crate::error::{Error, Result};

/// Gravity used to turn payload masses into force norms (m/s²).
pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadPoint {
    pub wrench: Wrench,
    pub temperature: f64,
}

fn cross(r: &[f64; 3], f: &[f64; 3]) -> [f64; 3] {
    [
        r[1] * f[2] - r[2] * f[1],
        r[2] * f[0] - r[0] * f[2],
        r[0] * f[1] - r[1] * f[0],
    ]
}

fn ramp(range: (f64, f64), k: usize, n: usize) -> f64 {
    if n <= 1 {
        range.0
    } else {
        range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64
    }
}

fn grid_angles(count: usize, span: (f64, f64)) -> Vec<f64> {
    if count == 1 {
        return vec![0.5 * (span.0 + span.1)];
    }
    (0..count)
        .map(|i| span.0 + (span.1 - span.0) * i as f64 / (count - 1) as f64)
        .collect()
}

/// A payload swept through gravity directions with `x ≥ 0, y ≤ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridTrajectory {
    /// One constant force norm (N) per payload group.
    pub force_norms: Vec<f64>,
    /// Directions visited per group.
    pub directions: usize,
    /// Payload position relative to the sensor frame (m); torques are
    /// `lever_arm × force`.
    pub lever_arm: [f64; 3],
    /// Temperature ramps linearly from the first to the second value.
    pub temperature: (f64, f64),
}

impl GridTrajectory {
    /// Groups for payloads `masses_kg`, each carried together with a
    /// support of `support_kg`.
    pub fn from_masses(masses_kg: &[f64], support_kg: f64, directions: usize) -> Self {
        Self {
            force_norms: masses_kg
                .iter()
                .map(|m| (m + support_kg) * STANDARD_GRAVITY)
                .collect(),
            directions,
            ..Self::default()
        }
    }

    /// Unit gravity directions on the quarter sphere, laid out on a
    /// rows × columns grid of azimuth and elevation.
    pub fn unit_directions(&self) -> Vec<[f64; 3]> {
        let n = self.directions;
        if n == 0 {
            return Vec::new();
        }
        let rows = (n as f64).sqrt().ceil() as usize;
        let cols = n.div_ceil(rows);
        let azimuths = grid_angles(cols, (0.0, FRAC_PI_2));
        let elevations = grid_angles(rows, (-FRAC_PI_2 * 0.9, FRAC_PI_2 * 0.9));
        let mut out = Vec::with_capacity(n);
        'fill: for &theta in &elevations {
            for &phi in &azimuths {
                if out.len() == n {
                    break 'fill;
                }
                out.push([
                    theta.cos() * phi.cos(),
                    -theta.cos() * phi.sin(),
                    theta.sin(),
                ]);
            }
        }
        out
    }
}

impl Default for GridTrajectory {
    fn default() -> Self {
        Self {
            force_norms: vec![20.0],
            directions: 9,
            lever_arm: [0.01, -0.01, 0.2],
            temperature: (25.0, 44.0),
        }
    }
}

pub fn grid_trajectory(spec: &GridTrajectory, envelope: &Envelope) -> Result<Vec<LoadPoint>> {
    if spec.directions == 0 || spec.force_norms.is_empty() {
        return Err(Error::InvalidSpec("grid trajectory needs directions and force norms".into()));
    }
    if let Some(n) = spec.force_norms.iter().find(|n| !(n.is_finite() && **n >= 0.0)) {
        return Err(Error::InvalidSpec(format!("invalid force norm {n}")));
    }
    let directions = spec.unit_directions();
    let total = directions.len() * spec.force_norms.len();
    let mut points = Vec::with_capacity(total);
    for &norm in &spec.force_norms {
        for d in &directions {
            let force = [norm * d[0], norm * d[1], norm * d[2]];
            let torque = cross(&spec.lever_arm, &force);
            let temperature = ramp(spec.temperature, points.len(), total);
            let point = LoadPoint {
                wrench: Wrench::new(force, torque),
                temperature,
            };
            envelope.check(&point.wrench, temperature)?;
            points.push(point);
        }
    }
    Ok(points)
}

/// A load along +z ramping linearly from zero to `peak_force` and back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftingTrajectory {
    pub peak_force: f64,
    pub points: usize,
    pub lever_arm: [f64; 3],
    pub temperature: (f64, f64),
}

impl Default for LiftingTrajectory {
    fn default() -> Self {
        Self {
            peak_force: 10.0 * STANDARD_GRAVITY,
            points: 201,
            lever_arm: [0.01, -0.01, 0.2],
            temperature: (25.0, 25.0),
        }
    }
}

pub fn lifting_trajectory(spec: &LiftingTrajectory, envelope: &Envelope) -> Result<Vec<LoadPoint>> {
    let n = spec.points;
    if n == 0 || !spec.peak_force.is_finite() {
        return Err(Error::InvalidSpec("lifting trajectory needs points and a finite peak".into()));
    }
    // The peak sample sits at index `top`, so the peak is always reached.
    let top = (n - 1) / 2;
    let mut points = Vec::with_capacity(n);
    for k in 0..n {
        let fraction = if k == top {
            1.0
        } else if k < top {
            k as f64 / top as f64
        } else {
            (n - 1 - k) as f64 / (n - 1 - top) as f64
        };
        let force = [0.0, 0.0, spec.peak_force * fraction];
        let torque = cross(&spec.lever_arm, &force);
        let temperature = ramp(spec.temperature, k, n);
        let point = LoadPoint {
            wrench: Wrench::new(force, torque),
            temperature,
        };
        envelope.check(&point.wrench, temperature)?;
        points.push(point);
    }
    Ok(points)
}

/// Wrenches and temperatures drawn uniformly and independently per axis
/// from `envelope`.
pub fn random_trajectory(envelope: &Envelope, points: usize, seed: u64) -> Vec<LoadPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..points)
        .map(|_| {
            let w: [f64; 6] =
                std::array::from_fn(|i| rng.random_range(envelope.lower[i]..=envelope.upper[i]));
            let (t0, t1) = envelope.temperature;
            LoadPoint {
                wrench: Wrench::new([w[0], w[1], w[2]], [w[3], w[4], w[5]]),
                temperature: rng.random_range(t0..=t1),
            }
        })
        .collect()
}
