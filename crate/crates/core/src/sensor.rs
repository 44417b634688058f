//! Directional sensor placement on a disc.
//!
//! The boundary of a disc of radius `R` must be seen at the resolution an
//! omnidirectional sensor at the centre would get, `1/R` per boundary point.
//! A sensor at `s` with heading `theta` sees a boundary point `p` when the
//! direction `s -> p` lies in its half-open field-of-view wedge, with
//! resolution `cos(incidence) / |p - s|`, where the incidence is measured
//! against the boundary normal at `p`. Summed along the boundary this
//! resolution integrates to the angle the sensor subtends, so a sensor can
//! never provide more than its field of view worth of coverage and the best
//! layout with a 45 degree field of view uses eight sensors at the centre.
//!
//! The objective (minimized) is the boundary integral of the resolution
//! deficit left by the best sensor at each point.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use rand::Rng;

use crate::coevolution::Problem;
use crate::error::{invalid, Result};
use crate::genome::{Interval, RealGenome, Sense};
use crate::rng::RngStream;

/// Position and heading of one sensor.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SensorGenome {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl SensorGenome {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    /// Reads `(x, y, theta)` from the first three values of a real genome.
    pub fn from_real(g: &RealGenome) -> Self {
        let v = g.values();
        Self { x: v[0], y: v[1], theta: v[2] }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentModel {
    radius: f64,
    fov: f64,
    epsilon: f64,
    /// Unit vectors of the boundary samples.
    directions: Vec<(f64, f64)>,
}

impl EnvironmentModel {
    pub const DEFAULT_RADIUS: f64 = 10.0;
    pub const DEFAULT_SAMPLES: usize = 256;
    pub const DEFAULT_FOV: f64 = PI / 4.0;
    /// Half of the smallest error seven sensors can reach (`pi / 4`).
    pub const DEFAULT_EPSILON: f64 = PI / 8.0;

    pub fn new(radius: f64, samples: usize, fov: f64, epsilon: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid!("environment radius must be positive, got {radius}"));
        }
        if samples < 8 {
            return Err(invalid!("at least 8 boundary samples are required, got {samples}"));
        }
        if !(fov > 0.0 && fov <= TAU) {
            return Err(invalid!("field of view {fov} outside (0, 2pi]"));
        }
        if !(epsilon >= 0.0) {
            return Err(invalid!("error threshold must be non-negative, got {epsilon}"));
        }
        let directions = (0..samples)
            .map(|k| {
                let a = TAU * k as f64 / samples as f64;
                (libm::cos(a), libm::sin(a))
            })
            .collect();
        Ok(Self { radius, fov, epsilon, directions })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn samples(&self) -> usize {
        self.directions.len()
    }

    pub fn fov(&self) -> f64 {
        self.fov
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Required resolution at every boundary point.
    pub fn required(&self) -> f64 {
        1.0 / self.radius
    }

    /// Boundary length represented by one sample.
    pub fn arc_length(&self) -> f64 {
        TAU * self.radius / self.samples() as f64
    }

    /// Boundary sample `k` in world coordinates.
    pub fn boundary_point(&self, k: usize) -> (f64, f64) {
        let (c, s) = self.directions[k];
        (self.radius * c, self.radius * s)
    }

    /// Genome bounds: `x, y` in `[-R, R]`, heading periodic in `[0, 2pi)`.
    pub fn bounds(&self) -> Vec<Interval> {
        vec![
            Interval::new(-self.radius, self.radius),
            Interval::new(-self.radius, self.radius),
            Interval::periodic(0.0, TAU),
        ]
    }

    /// Pulls a position outside the disc back onto its boundary.
    pub fn clamp_position(&self, x: f64, y: f64) -> (f64, f64) {
        let r = libm::hypot(x, y);
        if r > self.radius {
            let k = self.radius / r;
            (x * k, y * k)
        } else {
            (x, y)
        }
    }
}

impl Default for EnvironmentModel {
    fn default() -> Self {
        Self::new(
            Self::DEFAULT_RADIUS,
            Self::DEFAULT_SAMPLES,
            Self::DEFAULT_FOV,
            Self::DEFAULT_EPSILON,
        )
        .expect("default environment is valid")
    }
}

/// Wraps an angle into `[-pi, pi)`.
fn wrap_angle(a: f64) -> f64 {
    let mut r = (a + PI) % TAU;
    if r < 0.0 {
        r += TAU;
    }
    r - PI
}

// Slack for boundary samples that sit exactly on a wedge edge.
const EDGE_TOLERANCE: f64 = 1e-9;

/// Resolution the sensor provides at every boundary sample.
pub fn sensor_visibility(s: &SensorGenome, env: &EnvironmentModel) -> Vec<f64> {
    let mut out = vec![0.0; env.samples()];
    accumulate_visibility(s, env, &mut out);
    out
}

/// Raises `best[k]` to this sensor's resolution where it is higher.
fn accumulate_visibility(s: &SensorGenome, env: &EnvironmentModel, best: &mut [f64]) {
    let r = env.radius;
    let floor = r / 1000.0;
    let half = env.fov / 2.0;
    let full_circle = env.fov >= TAU;
    for (k, &(c, sn)) in env.directions.iter().enumerate() {
        let (px, py) = (r * c, r * sn);
        let (vx, vy) = (px - s.x, py - s.y);
        let d = libm::hypot(vx, vy);
        if d == 0.0 {
            continue;
        }
        // Cosine between the inward boundary normal and the direction p -> s.
        let cos_incidence = (r * r - (s.x * px + s.y * py)) / (d * r);
        if cos_incidence <= 0.0 {
            continue;
        }
        if !full_circle {
            let offset = wrap_angle(libm::atan2(vy, vx) - s.theta);
            if offset < -half - EDGE_TOLERANCE || offset >= half - EDGE_TOLERANCE {
                continue;
            }
        }
        let res = cos_incidence / d.max(floor);
        if res > best[k] {
            best[k] = res;
        }
    }
}

fn best_resolution(sensors: &[SensorGenome], env: &EnvironmentModel) -> Vec<f64> {
    let mut best = vec![0.0; env.samples()];
    for s in sensors {
        accumulate_visibility(s, env, &mut best);
    }
    best
}

fn deficit(best: &[f64], env: &EnvironmentModel) -> f64 {
    let req = env.required();
    best.iter().map(|&b| (req - b).max(0.0)).sum::<f64>() * env.arc_length()
}

/// Boundary integral of the resolution still missing with these sensors.
pub fn collaboration_error(sensors: &[SensorGenome], env: &EnvironmentModel) -> f64 {
    deficit(&best_resolution(sensors, env), env)
}

/// Error increase if sensor `i` were removed; infinite for a lone sensor.
pub fn sensor_contribution(i: usize, sensors: &[SensorGenome], env: &EnvironmentModel) -> Result<f64> {
    if i >= sensors.len() {
        return Err(invalid!("sensor index {i} out of range"));
    }
    if sensors.len() == 1 {
        return Ok(f64::INFINITY);
    }
    let without: Vec<SensorGenome> = sensors
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, s)| *s)
        .collect();
    Ok(collaboration_error(&without, env) - collaboration_error(sensors, env))
}

pub fn perfect(sensors: &[SensorGenome], env: &EnvironmentModel) -> bool {
    collaboration_error(sensors, env) < env.epsilon
}

/// Sensor placement as a cooperative problem; one species per sensor.
#[derive(Clone, Debug)]
pub struct SensorPlacement {
    env: EnvironmentModel,
    bounds: Vec<Interval>,
}

impl SensorPlacement {
    pub fn new(env: EnvironmentModel) -> Self {
        let bounds = env.bounds();
        Self { env, bounds }
    }

    pub fn environment(&self) -> &EnvironmentModel {
        &self.env
    }

    fn decode(reps: &[RealGenome]) -> Vec<SensorGenome> {
        reps.iter().map(SensorGenome::from_real).collect()
    }
}

impl Problem for SensorPlacement {
    type Genome = RealGenome;

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    /// Uniform position in the disc and uniform heading.
    fn random_genome(&self, rng: &mut RngStream) -> RealGenome {
        let r = self.env.radius * libm::sqrt(rng.random::<f64>());
        let a = TAU * rng.random::<f64>();
        let theta = TAU * rng.random::<f64>();
        RealGenome::repaired(
            vec![r * libm::cos(a), r * libm::sin(a), theta],
            self.bounds.clone(),
        )
        .expect("three values for three bounds")
    }

    fn repair(&self, g: &mut RealGenome) {
        let (x, y) = self.env.clamp_position(g.values()[0], g.values()[1]);
        g.set(0, x);
        g.set(1, y);
    }

    fn individual_fitness(&self, genome: &RealGenome, partners: &[RealGenome]) -> f64 {
        let mut sensors = Self::decode(partners);
        sensors.push(SensorGenome::from_real(genome));
        collaboration_error(&sensors, &self.env)
    }

    fn evaluate_batch(&self, genomes: &[RealGenome], partners: &[RealGenome]) -> Vec<f64> {
        let base = best_resolution(&Self::decode(partners), &self.env);
        genomes
            .iter()
            .map(|g| {
                let mut best = base.clone();
                accumulate_visibility(&SensorGenome::from_real(g), &self.env, &mut best);
                deficit(&best, &self.env)
            })
            .collect()
    }

    fn collaboration_fitness(&self, reps: &[RealGenome]) -> f64 {
        collaboration_error(&Self::decode(reps), &self.env)
    }

    fn contribution(&self, index: usize, reps: &[RealGenome]) -> f64 {
        sensor_contribution(index, &Self::decode(reps), &self.env).unwrap_or(f64::NAN)
    }

    fn perfect(&self, reps: &[RealGenome]) -> bool {
        perfect(&Self::decode(reps), &self.env)
    }
}

/// Eight sensors at the centre whose wedges tile the full circle.
pub fn centre_octet() -> Vec<SensorGenome> {
    (0..8).map(|k| SensorGenome::new(0.0, 0.0, k as f64 * PI / 4.0)).collect()
}
