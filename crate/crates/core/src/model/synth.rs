//! Seeded synthetic drive cycles.
//!
//! Speed is a chain of acceleration ramps, cruise segments and stops,
//! smoothed by a short moving average. Road gradient is a slow sinusoid of
//! at most ±5 % grade. Output is bit-identical for a given
//! `(kind, duration, seed)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DriveCycle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleKind {
    Urban,
    Highway,
    Mixed,
}

impl fmt::Display for CycleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleKind::Urban => "urban",
            CycleKind::Highway => "highway",
            CycleKind::Mixed => "mixed",
        })
    }
}

impl FromStr for CycleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "urban" => Ok(CycleKind::Urban),
            "highway" => Ok(CycleKind::Highway),
            "mixed" => Ok(CycleKind::Mixed),
            other => Err(format!("unknown cycle kind `{other}` (urban, highway, mixed)")),
        }
    }
}

struct Profile {
    speed: (f64, f64),
    stop_probability: f64,
    dwell: (usize, usize),
    cruise: (usize, usize),
    accel: (f64, f64),
    decel: (f64, f64),
}

const URBAN: Profile = Profile {
    speed: (6.0, 15.0),
    stop_probability: 0.45,
    dwell: (5, 30),
    cruise: (8, 50),
    accel: (0.6, 1.5),
    decel: (0.6, 1.5),
};

const HIGHWAY: Profile = Profile {
    speed: (18.0, 25.0),
    stop_probability: 0.04,
    dwell: (5, 15),
    cruise: (40, 160),
    accel: (0.3, 0.8),
    decel: (0.3, 1.0),
};

const SMOOTHING: usize = 5;

/// Generates a cycle of `duration` one-second samples.
pub fn generate_cycle(kind: CycleKind, duration: usize, seed: u64) -> DriveCycle {
    let duration = duration.max(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = Vec::with_capacity(duration + 64);

    // start from rest
    let first_dwell = rng.random_range(3..=8);
    raw.extend(std::iter::repeat_n(0.0, first_dwell));
    let mut speed = 0.0_f64;
    let mut highway_phase = kind == CycleKind::Highway;

    while raw.len() < duration + SMOOTHING {
        if kind == CycleKind::Mixed && rng.random_bool(0.2) {
            highway_phase = !highway_phase;
        }
        let prof = if highway_phase { &HIGHWAY } else { &URBAN };

        let target = if speed > 0.0 && rng.random_bool(prof.stop_probability) {
            0.0
        } else {
            rng.random_range(prof.speed.0..prof.speed.1)
        };
        let rate = if target > speed {
            rng.random_range(prof.accel.0..prof.accel.1)
        } else {
            -rng.random_range(prof.decel.0..prof.decel.1)
        };
        while (target - speed).abs() > 1e-9 {
            let next = speed + rate;
            speed = if (rate > 0.0 && next >= target) || (rate < 0.0 && next <= target) {
                target
            } else {
                next
            };
            raw.push(speed);
        }
        if speed == 0.0 {
            let dwell = rng.random_range(prof.dwell.0..=prof.dwell.1);
            raw.extend(std::iter::repeat_n(0.0, dwell));
        } else {
            let hold = rng.random_range(prof.cruise.0..=prof.cruise.1);
            // cruise wander stays inside the profile's speed band
            let drift = rng.random_range(-0.05..0.05);
            for _ in 0..hold {
                speed = (speed + drift).clamp(1.0, prof.speed.1);
                raw.push(speed);
            }
        }
    }

    let velocity = smooth(&raw, SMOOTHING)
        .into_iter()
        .take(duration)
        .map(|v| if v < 1e-9 { 0.0 } else { v })
        .collect::<Vec<_>>();

    let amplitude = rng.random_range(0.01..0.05);
    let period = rng.random_range(300.0..900.0);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let gradient = (0..duration)
        .map(|t| {
            let grade = amplitude * (std::f64::consts::TAU * t as f64 / period + phase).sin();
            grade.atan()
        })
        .collect();

    DriveCycle::new(1.0, velocity, gradient).expect("generator output is a valid cycle")
}

/// Trailing moving average; keeps zeros at rest exact.
fn smooth(raw: &[f64], window: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut acc = 0.0;
    for i in 0..raw.len() {
        acc += raw[i];
        if i >= window {
            acc -= raw[i - window];
        }
        let n = (i + 1).min(window);
        let lo = (i + 1).saturating_sub(window);
        if raw[lo..=i].iter().all(|&v| v == 0.0) {
            out.push(0.0);
        } else {
            out.push((acc / n as f64).max(0.0));
        }
    }
    out
}
