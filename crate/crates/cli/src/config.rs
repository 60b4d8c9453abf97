//! TOML run configuration. Every key is required; `configs/default.toml`
//! holds the stock vehicle.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use powersplit::admm::{AdmmSettings, RhoParams};
use powersplit::baselines::FilterParams;
use powersplit::model::{BatteryParams, MotorMap, MotorParams, SupercapParams, VehicleParams};

pub const DEFAULT_TOML: &str = include_str!("../../../configs/default.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    vehicle: VehicleParams,
    battery: BatteryParams,
    supercap: RawSupercap,
    motor: RawMotor,
    solver: RawSolver,
    filter: RawFilter,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSupercap {
    energy_min: f64,
    energy_max: f64,
    energy_initial: f64,
    power_min: f64,
    power_max: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMotor {
    torque_min: f64,
    torque_max: f64,
    map: String,
    synthetic: Option<RawSynthetic>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSynthetic {
    a2: f64,
    omega0: f64,
    a1: f64,
    a0: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    rho1: f64,
    rho2: f64,
    rho3: f64,
    rho4: f64,
    eps: f64,
    max_iters: usize,
    parallel: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFilter {
    bandwidth: f64,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub vehicle: VehicleParams,
    pub battery: BatteryParams,
    pub supercap: SupercapParams,
    pub motor: MotorParams,
    pub solver: AdmmSettings,
    /// Filter bandwidth (Hz); the sample period comes from the cycle.
    pub bandwidth: f64,
}

impl Config {
    /// Parses a config. Relative motor-map paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw: Raw = toml::from_str(text).map_err(|e| anyhow::anyhow!("{}", e.to_string().trim_end()))?;
        // infinite supercap power limits mean "unbounded"
        let finite = |p: f64| p.is_finite().then_some(p);
        let supercap = SupercapParams {
            energy_min: raw.supercap.energy_min,
            energy_max: raw.supercap.energy_max,
            energy_initial: raw.supercap.energy_initial,
            power_min: finite(raw.supercap.power_min),
            power_max: finite(raw.supercap.power_max),
        };
        let map = if raw.motor.map == "synthetic" {
            let Some(s) = raw.motor.synthetic else {
                bail!("missing config key `motor.synthetic` (required when motor.map = \"synthetic\")");
            };
            MotorMap::Synthetic { a2: s.a2, omega0: s.omega0, a1: s.a1, a0: s.a0 }
        } else {
            let path = base.join(&raw.motor.map);
            MotorMap::from_csv_path(&path)?
        };
        let solver = AdmmSettings {
            rho: RhoParams { rho1: raw.solver.rho1, rho2: raw.solver.rho2, rho3: raw.solver.rho3, rho4: raw.solver.rho4 },
            eps: raw.solver.eps,
            max_iters: raw.solver.max_iters,
            parallel: raw.solver.parallel,
            ..AdmmSettings::default()
        };
        solver.validate()?;
        FilterParams { bandwidth: raw.filter.bandwidth, dt: 1.0 }.validate()?;
        raw.vehicle.validate()?;
        raw.battery.validate()?;
        supercap.validate()?;
        Ok(Config {
            vehicle: raw.vehicle,
            battery: raw.battery,
            supercap,
            motor: MotorParams { torque_min: raw.motor.torque_min, torque_max: raw.motor.torque_max, map },
            solver,
            bandwidth: raw.filter.bandwidth,
        })
    }

    /// Reads `path`, or the shipped defaults when `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Self::parse(DEFAULT_TOML, Path::new(".")),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
                Self::parse(&text, &base).with_context(|| format!("config {}", p.display()))
            }
        }
    }

    pub fn filter(&self, dt: f64) -> FilterParams {
        FilterParams { bandwidth: self.bandwidth, dt }
    }
}
