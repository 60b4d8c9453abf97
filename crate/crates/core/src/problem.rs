//! The convex allocation program over a horizon of `T` one-second steps.
//!
//! ```text
//! minimize    Σ (u_t + v_t)
//! subject to  x = 1·x₀ − Ψu ∈ [x̲, x̄],   y = 1·y₀ − Ψv ∈ [y̲, ȳ]
//!             u̲ ≤ u_t ≤ ū,   v̲ ≤ v_t ≤ v̄
//!             ê_t ≤ g(u_t) + f(v_t)          (demand met, brakes only dissipate)
//!             ĝ(u_t) + f̂(v_t) ≤ ē_t          (tangent inner bound of the motor limit)
//! ```
//!
//! `Ψ` is the lower-triangular matrix of ones; it is only ever applied as a
//! cumulative sum.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    self, demand_power, inverse_powertrain_loss, motor_speed, powertrain_bounds, BatteryParams,
    DriveCycle, LossCoefficients, ModelError, MotorParams, QuadLoss, SupercapParams, VehicleParams,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("step {t}: demand cannot be met (ê = {e_hat:.3} W exceeds limit {limit:.3} W)")]
    InfeasibleStep { t: usize, e_hat: f64, limit: f64 },
    #[error("horizon mismatch: expected {expected} samples, found {found}")]
    HorizonMismatch { expected: usize, found: usize },
    #[error("empty horizon")]
    EmptyHorizon,
    #[error("only a 1 s sample period is supported, got {0} s")]
    UnsupportedSamplePeriod(f64),
    #[error("invalid {name}: {detail}")]
    Invalid { name: &'static str, detail: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// First-order expansion `p(a) + p'(a)(x − a)` of a loss about anchor `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tangent {
    pub anchor: f64,
    pub value: f64,
    pub slope: f64,
}

impl Tangent {
    pub fn of(loss: &QuadLoss, anchor: f64) -> Self {
        Tangent {
            anchor,
            value: loss.value(anchor),
            slope: loss.deriv(anchor),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.value + self.slope * (x - self.anchor)
    }

    #[inline]
    pub fn inverse(&self, p: f64) -> f64 {
        self.anchor + (p - self.value) / self.slope
    }
}

/// Everything one time step contributes to the program.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepData {
    /// Wheel demand `d_t` (W).
    pub demand: f64,
    /// Tightened lower bound on delivered electrical power.
    pub e_hat: f64,
    /// Upper powertrain bound `ē_t`.
    pub e_max: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: Option<f64>,
    pub v_max: Option<f64>,
    pub battery: QuadLoss,
    pub supercap: QuadLoss,
    pub battery_tangent: Tangent,
    pub supercap_tangent: Tangent,
    /// Powertrain loss coefficients, used to recover braking power.
    pub powertrain: LossCoefficients,
}

impl StepData {
    /// Step with both linearization anchors at zero and an identity powertrain.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        demand: f64,
        e_hat: f64,
        e_max: f64,
        (u_min, u_max): (f64, f64),
        (v_min, v_max): (Option<f64>, Option<f64>),
        battery: QuadLoss,
        supercap: QuadLoss,
    ) -> Result<Self, ProblemError> {
        let step = StepData {
            demand,
            e_hat,
            e_max,
            u_min,
            u_max,
            v_min,
            v_max,
            battery,
            supercap,
            battery_tangent: Tangent::of(&battery, 0.0),
            supercap_tangent: Tangent::of(&supercap, 0.0),
            powertrain: LossCoefficients::IDENTITY,
        };
        step.validate(0)?;
        Ok(step)
    }

    pub fn with_anchors(mut self, u_anchor: f64, v_anchor: f64) -> Result<Self, ProblemError> {
        self.battery_tangent = Tangent::of(&self.battery, u_anchor);
        self.supercap_tangent = Tangent::of(&self.supercap, v_anchor);
        self.validate(0)?;
        Ok(self)
    }

    pub fn with_powertrain(mut self, beta: LossCoefficients) -> Self {
        self.powertrain = beta;
        self
    }

    pub fn validate(&self, t: usize) -> Result<(), ProblemError> {
        if self.e_hat > self.e_max {
            return Err(ProblemError::InfeasibleStep {
                t,
                e_hat: self.e_hat,
                limit: self.e_max,
            });
        }
        if !(self.u_min <= self.u_max) || !self.u_min.is_finite() || !self.u_max.is_finite() {
            return Err(ProblemError::Invalid {
                name: "battery power bounds",
                detail: format!("step {t}: [{}, {}]", self.u_min, self.u_max),
            });
        }
        if let (Some(lo), Some(hi)) = (self.v_min, self.v_max) {
            if lo > hi {
                return Err(ProblemError::Invalid {
                    name: "supercap power bounds",
                    detail: format!("step {t}: [{lo}, {hi}]"),
                });
            }
        }
        if self.u_max > self.battery.domain_max() {
            return Err(ProblemError::Invalid {
                name: "battery power bounds",
                detail: format!("step {t}: upper bound beyond the loss-model domain"),
            });
        }
        if !(self.battery_tangent.slope > 0.0) || !(self.supercap_tangent.slope > 0.0) {
            return Err(ProblemError::Invalid {
                name: "linearization anchor",
                detail: format!("step {t}: tangent slopes must be positive"),
            });
        }
        Ok(())
    }

    /// Electrical power `g(u) + f(v)` delivered to the powertrain.
    #[inline]
    pub fn delivered(&self, u: f64, v: f64) -> f64 {
        self.battery.value(u) + self.supercap.value(v)
    }

    #[inline]
    pub fn v_lower(&self) -> f64 {
        self.v_min.unwrap_or(f64::NEG_INFINITY)
    }

    #[inline]
    pub fn v_upper(&self) -> f64 {
        self.v_max.unwrap_or(f64::INFINITY)
    }
}

/// `ĝ(u) + f̂(v)`, the linearized delivered power.
pub fn linearized_upper(u: f64, v: f64, step: &StepData) -> f64 {
    step.battery_tangent.eval(u) + step.supercap_tangent.eval(v)
}

/// A fully assembled program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub steps: Vec<StepData>,
    pub x0: f64,
    pub y0: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl ProblemInstance {
    pub fn new(
        steps: Vec<StepData>,
        (x0, x_min, x_max): (f64, f64, f64),
        (y0, y_min, y_max): (f64, f64, f64),
    ) -> Result<Self, ProblemError> {
        if steps.is_empty() {
            return Err(ProblemError::EmptyHorizon);
        }
        for (t, s) in steps.iter().enumerate() {
            s.validate(t)?;
        }
        if !(x_min <= x0 && x0 <= x_max) {
            return Err(ProblemError::Invalid {
                name: "battery energy",
                detail: format!("x0 = {x0} outside [{x_min}, {x_max}]"),
            });
        }
        if !(y_min <= y0 && y0 <= y_max) {
            return Err(ProblemError::Invalid {
                name: "supercap energy",
                detail: format!("y0 = {y0} outside [{y_min}, {y_max}]"),
            });
        }
        Ok(ProblemInstance {
            steps,
            x0,
            y0,
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn demand(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.demand).collect()
    }

    /// Largest absolute demand, at least 1 W.
    pub fn power_scale(&self) -> f64 {
        self.steps.iter().map(|s| s.demand.abs()).fold(1.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Assembles the program for a drive cycle.
pub fn build_problem(
    cycle: &DriveCycle,
    vehicle: &VehicleParams,
    battery: &BatteryParams,
    supercap: &SupercapParams,
    motor: &MotorParams,
) -> Result<ProblemInstance, ProblemError> {
    if cycle.dt != 1.0 {
        return Err(ProblemError::UnsupportedSamplePeriod(cycle.dt));
    }
    if cycle.velocity.len() != cycle.gradient.len() {
        return Err(ProblemError::HorizonMismatch {
            expected: cycle.velocity.len(),
            found: cycle.gradient.len(),
        });
    }
    vehicle.validate()?;
    battery.validate()?;
    supercap.validate()?;

    let demand = demand_power(cycle, vehicle)?;
    let g = battery.loss();
    let u_max = battery.power_max.min(battery.domain_cap());
    let g_u_max = g.value(u_max);

    let steps = demand
        .iter()
        .zip(&cycle.velocity)
        .enumerate()
        .map(|(t, (&d, &vel))| {
            let omega = motor_speed(vel, vehicle);
            let beta = motor.map.coefficients(omega);
            beta.validate()?;
            let (e_min, e_max) = powertrain_bounds(omega, &beta, motor.torque_min, motor.torque_max);
            // demand below the domain of h⁻¹ is always met once e ≥ e̲
            let required = inverse_powertrain_loss(d, &beta).unwrap_or(f64::NEG_INFINITY);
            let e_hat = e_min.max(required);

            let attainable = supercap
                .power_max
                .map_or(f64::INFINITY, |v_max| g_u_max + model::supercap_loss(v_max));
            if e_hat > e_max || e_hat > attainable {
                return Err(ProblemError::InfeasibleStep {
                    t,
                    e_hat,
                    limit: e_max.min(attainable),
                });
            }

            let step = StepData {
                demand: d,
                e_hat,
                e_max,
                u_min: battery.power_min,
                u_max,
                v_min: supercap.power_min,
                v_max: supercap.power_max,
                battery: g,
                supercap: QuadLoss::IDENTITY,
                battery_tangent: Tangent::of(&g, 0.0),
                supercap_tangent: Tangent::of(&QuadLoss::IDENTITY, 0.0),
                powertrain: beta,
            };
            step.validate(t)?;
            Ok(step)
        })
        .collect::<Result<Vec<_>, _>>()?;

    ProblemInstance::new(
        steps,
        (battery.energy_initial, battery.energy_min, battery.energy_max),
        (supercap.energy_initial, supercap.energy_min, supercap.energy_max),
    )
}

/// `Σ (u_t + v_t)` with a 1 s step, in joules.
pub fn objective(u: &[f64], v: &[f64]) -> Result<f64, ProblemError> {
    if u.len() != v.len() {
        return Err(ProblemError::HorizonMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(u.iter().zip(v).map(|(a, b)| a + b).sum())
}

/// Stored-energy trajectory `s₀ − Ψp`: entry `t` is the energy after step `t`.
pub fn integrate_states(initial: f64, power: &[f64]) -> Vec<f64> {
    let mut acc = initial;
    power
        .iter()
        .map(|p| {
            acc -= p;
            acc
        })
        .collect()
}

/// Worst violation of one constraint family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FamilyViolation {
    pub max: f64,
    /// Number of steps violating by more than the tolerance.
    pub count: usize,
    pub worst_step: Option<usize>,
}

impl FamilyViolation {
    fn record(&mut self, t: usize, amount: f64, tol: f64) {
        if amount > self.max {
            self.max = amount;
            self.worst_step = Some(t);
        }
        if amount > tol {
            self.count += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub tol: f64,
    pub box_u: FamilyViolation,
    pub box_v: FamilyViolation,
    pub lower_curve: FamilyViolation,
    pub upper_line: FamilyViolation,
    pub state_x: FamilyViolation,
    pub state_y: FamilyViolation,
}

impl ViolationReport {
    pub fn families(&self) -> [(&'static str, &FamilyViolation); 6] {
        [
            ("box_u", &self.box_u),
            ("box_v", &self.box_v),
            ("lower_curve", &self.lower_curve),
            ("upper_line", &self.upper_line),
            ("state_x", &self.state_x),
            ("state_y", &self.state_y),
        ]
    }

    pub fn max_violation(&self) -> f64 {
        self.families().iter().map(|(_, f)| f.max).fold(0.0, f64::max)
    }

    pub fn is_feasible(&self) -> bool {
        self.max_violation() <= self.tol
    }
}

/// Measures how far `(u, v)` is from satisfying every constraint family.
pub fn check_feasible_point(
    u: &[f64],
    v: &[f64],
    instance: &ProblemInstance,
    tol: f64,
) -> Result<ViolationReport, ProblemError> {
    let n = instance.horizon();
    for len in [u.len(), v.len()] {
        if len != n {
            return Err(ProblemError::HorizonMismatch { expected: n, found: len });
        }
    }
    let mut rep = ViolationReport {
        tol,
        ..Default::default()
    };
    let x = integrate_states(instance.x0, u);
    let y = integrate_states(instance.y0, v);
    for (t, s) in instance.steps.iter().enumerate() {
        let (ut, vt) = (u[t], v[t]);
        rep.box_u.record(t, (s.u_min - ut).max(ut - s.u_max).max(0.0), tol);
        rep.box_v.record(t, (s.v_lower() - vt).max(vt - s.v_upper()).max(0.0), tol);
        // outside the battery model's domain the lower constraint cannot hold
        let delivered = if ut > s.battery.domain_max() || vt > s.supercap.domain_max() {
            f64::NEG_INFINITY
        } else {
            s.delivered(ut, vt)
        };
        rep.lower_curve.record(t, (s.e_hat - delivered).max(0.0), tol);
        rep.upper_line.record(t, (linearized_upper(ut, vt, s) - s.e_max).max(0.0), tol);
        rep.state_x.record(t, (instance.x_min - x[t]).max(x[t] - instance.x_max).max(0.0), tol);
        rep.state_y.record(t, (instance.y_min - y[t]).max(y[t] - instance.y_max).max(0.0), tol);
    }
    Ok(rep)
}
