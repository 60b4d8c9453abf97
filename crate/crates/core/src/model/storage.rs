//! Battery and supercapacitor loss models.
//!
//! Both storage devices use the concave quadratic `p(x) = x - c·x²`, which is
//! exactly the equivalent-circuit battery with `c = R/V²` and reduces to the
//! lossless identity when `c = 0`.

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Concave quadratic loss `p(x) = x - c·x²` on the domain `x ≤ 1/(2c)`.
///
/// `curvature == 0` is the lossless map `p(x) = x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadLoss {
    pub curvature: f64,
}

impl QuadLoss {
    pub const IDENTITY: QuadLoss = QuadLoss { curvature: 0.0 };

    pub fn new(curvature: f64) -> Result<Self, ModelError> {
        if !(curvature >= 0.0) || !curvature.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "loss curvature",
                value: curvature,
            });
        }
        Ok(QuadLoss { curvature })
    }

    /// Equivalent circuit with open-circuit voltage `V` and series resistance `R`.
    pub fn equivalent_circuit(voltage: f64, resistance: f64) -> Self {
        QuadLoss {
            curvature: resistance / (voltage * voltage),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.curvature == 0.0
    }

    /// Largest input on which the map is increasing (`+∞` when lossless).
    pub fn domain_max(&self) -> f64 {
        if self.is_identity() {
            f64::INFINITY
        } else {
            0.5 / self.curvature
        }
    }

    /// Largest deliverable output, attained at `domain_max`.
    pub fn range_max(&self) -> f64 {
        if self.is_identity() {
            f64::INFINITY
        } else {
            0.25 / self.curvature
        }
    }

    /// Delivered power for internal power `x`. Not checked against the domain.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        x - self.curvature * x * x
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        1.0 - 2.0 * self.curvature * x
    }

    /// Internal power needed to deliver `p`, or `None` above `range_max`.
    ///
    /// Uses the cancellation-free form `2p / (1 + √(1 - 4cp))`.
    #[inline]
    pub fn inverse(&self, p: f64) -> Option<f64> {
        if self.is_identity() {
            return Some(p);
        }
        let disc = 1.0 - 4.0 * self.curvature * p;
        if disc < 0.0 {
            return None;
        }
        Some(2.0 * p / (1.0 + disc.sqrt()))
    }
}

/// Equivalent-circuit battery parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryParams {
    /// Open-circuit voltage (V).
    pub voltage: f64,
    /// Internal resistance (Ω).
    pub resistance: f64,
    /// Charging power limit (W, negative).
    pub power_min: f64,
    /// Discharging power limit (W, positive).
    pub power_max: f64,
    pub energy_min: f64,
    pub energy_max: f64,
    pub energy_initial: f64,
}

impl Default for BatteryParams {
    fn default() -> Self {
        BatteryParams {
            voltage: 300.0,
            resistance: 0.1,
            power_min: -70e3,
            power_max: 70e3,
            energy_min: 0.0,
            energy_max: 80e6,
            energy_initial: 40e6,
        }
    }
}

impl BatteryParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        positive("battery voltage", self.voltage)?;
        positive("battery resistance", self.resistance)?;
        if !(self.power_min < 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "battery power_min",
                value: self.power_min,
            });
        }
        positive("battery power_max", self.power_max)?;
        if !(self.energy_min <= self.energy_initial && self.energy_initial <= self.energy_max) {
            return Err(ModelError::InvalidParameter {
                name: "battery energy_initial",
                value: self.energy_initial,
            });
        }
        Ok(())
    }

    pub fn loss(&self) -> QuadLoss {
        QuadLoss::equivalent_circuit(self.voltage, self.resistance)
    }

    /// `V²/(2R)`: the largest internal power on which the circuit model is valid.
    pub fn domain_cap(&self) -> f64 {
        self.voltage * self.voltage / (2.0 * self.resistance)
    }

    /// `V²/(4R)`: the largest deliverable electrical power.
    pub fn range_cap(&self) -> f64 {
        self.voltage * self.voltage / (4.0 * self.resistance)
    }
}

/// Supercapacitor parameters. Power bounds of `None` are unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupercapParams {
    pub energy_min: f64,
    pub energy_max: f64,
    pub energy_initial: f64,
    pub power_min: Option<f64>,
    pub power_max: Option<f64>,
}

impl Default for SupercapParams {
    fn default() -> Self {
        SupercapParams {
            energy_min: 0.0,
            energy_max: 1.08e6,
            energy_initial: 0.54e6,
            power_min: None,
            power_max: None,
        }
    }
}

impl SupercapParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.energy_min <= self.energy_initial && self.energy_initial <= self.energy_max) {
            return Err(ModelError::InvalidParameter {
                name: "supercap energy_initial",
                value: self.energy_initial,
            });
        }
        if let (Some(lo), Some(hi)) = (self.power_min, self.power_max) {
            if lo > hi {
                return Err(ModelError::InvalidParameter {
                    name: "supercap power_min",
                    value: lo,
                });
            }
        }
        Ok(())
    }
}

/// Battery delivered power `g(u) = (V² - (V - 2Ru/V)²) / 4R`.
pub fn battery_loss(u: f64, bp: &BatteryParams) -> Result<f64, ModelError> {
    if u > bp.domain_cap() {
        return Err(ModelError::Domain {
            what: "battery_loss",
            value: u,
            limit: bp.domain_cap(),
        });
    }
    let v = bp.voltage;
    let w = v - 2.0 * bp.resistance * u / v;
    Ok((v * v - w * w) / (4.0 * bp.resistance))
}

/// `g'(u) = 1 - 2Ru/V²`.
pub fn battery_loss_deriv(u: f64, bp: &BatteryParams) -> Result<f64, ModelError> {
    if u > bp.domain_cap() {
        return Err(ModelError::Domain {
            what: "battery_loss_deriv",
            value: u,
            limit: bp.domain_cap(),
        });
    }
    Ok(1.0 - 2.0 * bp.resistance * u / (bp.voltage * bp.voltage))
}

/// Internal battery power `u` with `g(u) = p`.
pub fn battery_loss_inverse(p: f64, bp: &BatteryParams) -> Result<f64, ModelError> {
    if p > bp.range_cap() {
        return Err(ModelError::Range {
            what: "battery_loss_inverse",
            value: p,
            limit: bp.range_cap(),
        });
    }
    let v = bp.voltage;
    let disc = (v * v - 4.0 * bp.resistance * p).max(0.0);
    Ok(v * (v - disc.sqrt()) / (2.0 * bp.resistance))
}

/// The supercapacitor and its converter are lossless.
pub fn supercap_loss(v: f64) -> f64 {
    v
}

pub fn supercap_loss_deriv(_v: f64) -> f64 {
    1.0
}

fn positive(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter { name, value })
    }
}
