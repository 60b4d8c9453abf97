//! Optimality-structure checks on a solved instance.
//!
//! Two consequences of the KKT conditions are checked:
//!
//! * The linearized upper powertrain bound can only be active at step `t`
//!   when, on the battery side, the charging limit `u̲` binds at `t` or `x̄`
//!   binds at some step `≥ t`, and on the supercap side `v̲` binds at `t` or
//!   `ȳ` binds at some step `≥ t`.
//! * Between steps where a state bound binds, every step on which only the
//!   lower curve is active shares one battery power.

use serde::{Deserialize, Serialize};

use crate::problem::{linearized_upper, ProblemInstance};

use super::Solution;

/// Thresholds for calling a constraint active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktTolerance {
    /// Power slack (W) under which a power constraint counts as active.
    pub power: f64,
    /// Fraction of a store's energy range under which a state bound counts
    /// as active.
    pub energy_rel: f64,
}

impl Default for KktTolerance {
    fn default() -> Self {
        KktTolerance { power: 1.0, energy_rel: 1e-4 }
    }
}

/// A maximal run `[start, end)` with no active state bound strictly inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    /// Steps where only the lower curve is active; the others are skipped.
    pub free_steps: usize,
    pub mean_u: f64,
    pub max_deviation: f64,
}

impl Segment {
    /// `max|u − mean| ≤ max(abs, rel·|mean|)`.
    pub fn is_flat(&self, abs: f64, rel: f64) -> bool {
        self.max_deviation <= abs.max(rel * self.mean_u.abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// Steps whose set `𝒞_t` is thinner than the power tolerance.
    pub degenerate: Vec<usize>,
    /// Non-degenerate steps with the upper line active and the curve slack.
    pub upper_active: Vec<usize>,
    /// Entries of `upper_active` that no binding storage bound accounts for.
    pub unexplained_upper_active: Vec<usize>,
    /// True when `u̲` and `x̄` never bind.
    pub battery_charge_limits_slack: bool,
    pub segments: Vec<Segment>,
}

impl KktReport {
    pub fn upper_inactive(&self) -> bool {
        self.upper_active.is_empty()
    }

    pub fn upper_activity_explained(&self) -> bool {
        self.unexplained_upper_active.is_empty()
    }

    pub fn piecewise_constant(&self, abs: f64, rel: f64) -> bool {
        self.segments.iter().all(|s| s.is_flat(abs, rel))
    }
}

pub fn kkt_diagnostics(solution: &Solution, instance: &ProblemInstance, tol: &KktTolerance) -> KktReport {
    let n = instance.horizon();
    let (u, v, x, y) = (&solution.u, &solution.v, &solution.x, &solution.y);
    let x_tol = tol.energy_rel * (instance.x_max - instance.x_min);
    let y_tol = tol.energy_rel * (instance.y_max - instance.y_min);
    let p = tol.power;

    let at_x_max: Vec<bool> = x.iter().map(|&xi| xi >= instance.x_max - x_tol).collect();
    let at_y_max: Vec<bool> = y.iter().map(|&yi| yi >= instance.y_max - y_tol).collect();
    let state_active: Vec<bool> = (0..n)
        .map(|t| {
            at_x_max[t] || at_y_max[t] || x[t] <= instance.x_min + x_tol || y[t] <= instance.y_min + y_tol
        })
        .collect();
    // suffix flags: does the bound bind at some step ≥ t
    let suffix = |flags: &[bool]| {
        let mut out = vec![false; n + 1];
        for t in (0..n).rev() {
            out[t] = out[t + 1] || flags[t];
        }
        out
    };
    let x_max_later = suffix(&at_x_max);
    let y_max_later = suffix(&at_y_max);

    let mut report = KktReport {
        degenerate: Vec::new(),
        upper_active: Vec::new(),
        unexplained_upper_active: Vec::new(),
        battery_charge_limits_slack: !at_x_max.iter().any(|&b| b),
        segments: Vec::new(),
    };
    let mut free = vec![false; n];
    for (t, s) in instance.steps.iter().enumerate() {
        let u_at_min = u[t] <= s.u_min + p;
        let u_at_max = u[t] >= s.u_max - p;
        let v_at_min = v[t] <= s.v_lower() + p;
        let v_at_max = v[t] >= s.v_upper() - p;
        if u_at_min {
            report.battery_charge_limits_slack = false;
        }
        if s.e_max - s.e_hat <= p {
            report.degenerate.push(t);
            continue;
        }
        let lower_slack = s.delivered(u[t], v[t]) - s.e_hat;
        let upper_slack = s.e_max - linearized_upper(u[t], v[t], s);
        if upper_slack <= p && lower_slack > p {
            report.upper_active.push(t);
            let battery_side = u_at_min || x_max_later[t];
            let supercap_side = v_at_min || y_max_later[t];
            if !(battery_side && supercap_side) {
                report.unexplained_upper_active.push(t);
            }
            continue;
        }
        free[t] = upper_slack > p && !(u_at_min || u_at_max || v_at_min || v_at_max);
    }

    let mut start = 0;
    for t in 0..n {
        if state_active[t] || t + 1 == n {
            report.segments.push(segment(u, &free, start, t + 1));
            start = t + 1;
        }
    }
    report
}

fn segment(u: &[f64], free: &[bool], start: usize, end: usize) -> Segment {
    let vals: Vec<f64> = (start..end).filter(|&t| free[t]).map(|t| u[t]).collect();
    if vals.is_empty() {
        return Segment { start, end, free_steps: 0, mean_u: 0.0, max_deviation: 0.0 };
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let dev = vals.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    Segment { start, end, free_steps: vals.len(), mean_u: mean, max_deviation: dev }
}
