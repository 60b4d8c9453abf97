//! Rule-based controllers used as comparison points.
//!
//! Both act on the electrical demand `ê_t`, the least electrical power that
//! meets the wheel demand within the motor limits. Brakes absorb whatever
//! regenerated power the storage cannot take, so `b_t ≤ 0` always.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{powertrain_loss, ModelError};
use crate::problem::{ProblemInstance, StepData};
use crate::Trajectory;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("step {t}: battery would have to deliver {power:.1} W, above its {cap:.1} W capability")]
    BatteryRange { t: usize, power: f64, cap: f64 },
    #[error("step {t}: battery energy {energy:.1} J would fall below {limit:.1} J")]
    BatteryDepleted { t: usize, energy: f64, limit: f64 },
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// First-order low-pass filter settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    /// Cut-off frequency (Hz).
    pub bandwidth: f64,
    /// Sample period (s).
    pub dt: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams { bandwidth: 0.01, dt: 1.0 }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(BaselineError::InvalidFilter(format!("bandwidth {}", self.bandwidth)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(BaselineError::InvalidFilter(format!("sample period {}", self.dt)));
        }
        Ok(())
    }

    /// Time constant `1/(2πf)`.
    pub fn time_constant(&self) -> f64 {
        1.0 / (std::f64::consts::TAU * self.bandwidth)
    }

    /// Zero-order-hold gain `1 − e^{−Δt/τ}`.
    pub fn alpha(&self) -> f64 {
        1.0 - (-self.dt / self.time_constant()).exp()
    }
}

/// Discrete first-order filter seeded with the first sample.
pub fn low_pass(signal: &[f64], fp: &FilterParams) -> Vec<f64> {
    let alpha = fp.alpha();
    let mut out = Vec::with_capacity(signal.len());
    let Some(&first) = signal.first() else {
        return out;
    };
    let mut state = first;
    for &p in signal {
        out.push(state);
        state = alpha * p + (1.0 - alpha) * state;
    }
    out
}

struct Ledger<'a> {
    instance: &'a ProblemInstance,
    x: f64,
    y: f64,
    traj: Trajectory,
}

impl<'a> Ledger<'a> {
    fn new(instance: &'a ProblemInstance) -> Self {
        let n = instance.horizon();
        Ledger {
            instance,
            x: instance.x0,
            y: instance.y0,
            traj: Trajectory {
                d: Vec::with_capacity(n),
                u: Vec::with_capacity(n),
                v: Vec::with_capacity(n),
                b: Vec::with_capacity(n),
                x: Vec::with_capacity(n),
                y: Vec::with_capacity(n),
            },
        }
    }

    /// Battery power delivering `share` W, with charge clipped at `x̄`.
    fn battery_power(&self, t: usize, step: &StepData, share: f64) -> Result<f64, BaselineError> {
        let cap = step.battery.range_max();
        let u = step
            .battery
            .inverse(share)
            .ok_or(BaselineError::BatteryRange { t, power: share, cap })?;
        // charging past x̄ is refused; brakes take the rest
        Ok(u.max(self.x - self.instance.x_max))
    }

    fn commit(&mut self, t: usize, step: &StepData, u: f64, v: f64) -> Result<(), BaselineError> {
        let x = self.x - u;
        if x < self.instance.x_min {
            return Err(BaselineError::BatteryDepleted { t, energy: x, limit: self.instance.x_min });
        }
        let delivered = step.delivered(u, v);
        let m = powertrain_loss(delivered.max(step.powertrain.range_min()), &step.powertrain)?;
        self.x = x;
        self.y -= v;
        self.traj.d.push(step.demand);
        self.traj.u.push(u);
        self.traj.v.push(v);
        self.traj.b.push((step.demand - m).min(0.0));
        self.traj.x.push(self.x);
        self.traj.y.push(self.y);
        Ok(())
    }
}

/// Sends all demand to the battery.
pub fn all_battery(instance: &ProblemInstance) -> Result<Trajectory, BaselineError> {
    let mut ledger = Ledger::new(instance);
    for (t, step) in instance.steps.iter().enumerate() {
        let u = ledger.battery_power(t, step, step.e_hat)?;
        ledger.commit(t, step, u, 0.0)?;
    }
    Ok(ledger.traj)
}

/// Sends the filtered demand to the battery and the remainder to the
/// supercap. Supercap power that would leave `[y̲, ȳ]` or its power bounds
/// goes back to the battery.
pub fn low_pass_split(instance: &ProblemInstance, fp: &FilterParams) -> Result<Trajectory, BaselineError> {
    fp.validate()?;
    let demand: Vec<f64> = instance.steps.iter().map(|s| s.e_hat).collect();
    let filtered = low_pass(&demand, fp);
    let mut ledger = Ledger::new(instance);
    for (t, step) in instance.steps.iter().enumerate() {
        let share = demand[t] - filtered[t];
        let wanted = step.supercap.inverse(share).unwrap_or(step.supercap.domain_max());
        let lo = step.v_lower().max(ledger.y - instance.y_max);
        let hi = step.v_upper().min(ledger.y - instance.y_min);
        let v = wanted.clamp(lo, hi.max(lo));
        let u = ledger.battery_power(t, step, demand[t] - step.supercap.value(v))?;
        ledger.commit(t, step, u, v)?;
    }
    Ok(ledger.traj)
}
