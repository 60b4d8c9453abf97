//! Physical models: drive cycle to wheel demand, and the storage and
//! powertrain loss functions with their operating limits.

mod cycle;
mod powertrain;
mod storage;
mod synth;
mod vehicle;

pub use cycle::DriveCycle;
pub use powertrain::{
    inverse_powertrain_loss, powertrain_bounds, powertrain_loss, LossCoefficients, MotorMap,
    MotorMapRow, MotorParams,
};
pub use storage::{
    battery_loss, battery_loss_deriv, battery_loss_inverse, supercap_loss, supercap_loss_deriv,
    BatteryParams, QuadLoss, SupercapParams,
};
pub use synth::{generate_cycle, CycleKind};
pub use vehicle::{central_difference, demand_power, motor_speed, VehicleParams};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("series has {len} samples, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },
    #[error("series length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("{what}: argument {value} outside domain (limit {limit})")]
    Domain { what: &'static str, value: f64, limit: f64 },
    #[error("{what}: value {value} outside range (limit {limit})")]
    Range { what: &'static str, value: f64, limit: f64 },
    #[error("motor map: {0}")]
    MotorMap(String),
    #[error("drive cycle csv: {0}")]
    Csv(String),
}
