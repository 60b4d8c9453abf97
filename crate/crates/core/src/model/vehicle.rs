//! Longitudinal vehicle model.

use serde::{Deserialize, Serialize};

use super::{DriveCycle, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams {
    /// kg
    pub mass: f64,
    pub drag_coefficient: f64,
    /// kg/m³
    pub air_density: f64,
    pub rolling_resistance: f64,
    /// m/s²
    pub gravity: f64,
    /// m²
    pub frontal_area: f64,
    /// m
    pub wheel_radius: f64,
    pub final_drive_ratio: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        VehicleParams {
            mass: 1900.0,
            drag_coefficient: 0.27,
            air_density: 1.225,
            rolling_resistance: 0.015,
            gravity: 9.81,
            frontal_area: 2.4,
            wheel_radius: 0.3,
            final_drive_ratio: 0.1,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("vehicle mass", self.mass),
            ("drag coefficient", self.drag_coefficient),
            ("air density", self.air_density),
            ("rolling resistance", self.rolling_resistance),
            ("gravity", self.gravity),
            ("frontal area", self.frontal_area),
            ("wheel radius", self.wheel_radius),
            ("final drive ratio", self.final_drive_ratio),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ModelError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }
}

/// Numerical derivative of a uniformly sampled series.
///
/// Interior samples use the central stencil, the two endpoints one-sided
/// first-order differences.
pub fn central_difference(series: &[f64], dt: f64) -> Result<Vec<f64>, ModelError> {
    let n = series.len();
    if n < 3 {
        return Err(ModelError::SeriesTooShort { len: n, min: 3 });
    }
    let mut out = Vec::with_capacity(n);
    out.push((series[1] - series[0]) / dt);
    out.extend(series.windows(3).map(|w| (w[2] - w[0]) / (2.0 * dt)));
    out.push((series[n - 1] - series[n - 2]) / dt);
    Ok(out)
}

/// Wheel power demand `d_t` (W) along a drive cycle.
pub fn demand_power(cycle: &DriveCycle, params: &VehicleParams) -> Result<Vec<f64>, ModelError> {
    let accel = central_difference(&cycle.velocity, cycle.dt)?;
    let p = params;
    Ok(cycle
        .velocity
        .iter()
        .zip(&cycle.gradient)
        .zip(&accel)
        .map(|((&v, &theta), &a)| {
            let force = p.mass * a
                + 0.5 * p.air_density * v * v * p.drag_coefficient * p.frontal_area
                + p.rolling_resistance * p.mass * p.gravity * theta.cos()
                + p.mass * p.gravity * theta.sin();
            force * v
        })
        .collect())
}

/// Motor speed (rad/s) through a single-speed transmission.
pub fn motor_speed(v: f64, params: &VehicleParams) -> f64 {
    v / (params.wheel_radius * params.final_drive_ratio)
}
