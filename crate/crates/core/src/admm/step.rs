//! The per-step `(u, v)` update: minimize
//! `ρ₁/2 (u − a)² + ρ₂/2 (v − b)²` over `𝒞_t ∩ 𝒰_t ∩ 𝒱_t`.
//!
//! If the box-clipped target is not in `𝒞_t`, the minimizer lies on the
//! upper line `ĝ + f̂ = ē` or on the lower curve `g + f = ê`. Both reduce to
//! one-dimensional problems in `u` over an interval.

use crate::model::QuadLoss;
use crate::problem::{linearized_upper, StepData, Tangent};
use crate::roots::cubic_roots;

use super::{RhoParams, SolverState};

/// The unconstrained minimizer `(a, b)` of one step's augmented objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepTarget {
    pub u: f64,
    pub v: f64,
}

impl StepTarget {
    /// `a = ζ − λ₁ − 1/ρ₁`, `b = η − λ₂ − 1/ρ₂`; the `1/ρ` shift carries the
    /// linear cost `u + v` into the proximal term.
    pub fn from_state(state: &SolverState, t: usize, rho: &RhoParams) -> Self {
        StepTarget {
            u: state.zeta[t] - state.lambda1[t] - 1.0 / rho.rho1,
            v: state.eta[t] - state.lambda2[t] - 1.0 / rho.rho2,
        }
    }

    #[inline]
    pub fn cost(&self, rho: &RhoParams, u: f64, v: f64) -> f64 {
        let (du, dv) = (u - self.u, v - self.v);
        0.5 * (rho.rho1 * du * du + rho.rho2 * dv * dv)
    }
}

/// Which candidate produced an update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Candidate {
    Box,
    Line,
    Curve,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepUpdate {
    pub u: f64,
    pub v: f64,
    pub candidate: Candidate,
}

/// Minimizes one step's objective; `None` when the step set is empty.
pub fn update_uv_step(step: &StepData, target: StepTarget, rho: &RhoParams) -> Option<StepUpdate> {
    let (v_lo, v_hi) = v_box(step);
    let u1 = target.u.clamp(step.u_min, step.u_max);
    let v1 = target.v.clamp(v_lo, v_hi);
    if in_step_set(step, u1, v1) {
        return Some(StepUpdate { u: u1, v: v1, candidate: Candidate::Box });
    }
    let cap = intersection_bounds(step);
    let line = candidate_b(step, target, rho, cap);
    let curve = candidate_c(step, target, rho, cap);
    match (line, curve) {
        (Some((ub, vb)), Some((uc, vc))) => {
            if target.cost(rho, uc, vc) <= target.cost(rho, ub, vb) {
                Some(StepUpdate { u: uc, v: vc, candidate: Candidate::Curve })
            } else {
                Some(StepUpdate { u: ub, v: vb, candidate: Candidate::Line })
            }
        }
        (None, Some((u, v))) => Some(StepUpdate { u, v, candidate: Candidate::Curve }),
        (Some((u, v)), None) => Some(StepUpdate { u, v, candidate: Candidate::Line }),
        (None, None) => None,
    }
}

/// Box on `v`, capped at the supercap loss model's domain.
pub(crate) fn v_box(step: &StepData) -> (f64, f64) {
    (step.v_lower(), step.v_upper().min(step.supercap.domain_max()))
}

fn in_step_set(step: &StepData, u: f64, v: f64) -> bool {
    step.delivered(u, v) >= step.e_hat && linearized_upper(u, v, step) <= step.e_max
}

/// `p(x)` extended to `±∞` for increasing `p` on its domain.
fn value_ext(loss: &QuadLoss, x: f64) -> f64 {
    if x.is_infinite() {
        if x < 0.0 || loss.is_identity() {
            x
        } else {
            f64::NEG_INFINITY
        }
    } else {
        loss.value(x)
    }
}

/// `p⁻¹(y)` on the increasing branch; `+∞` above the range.
fn inverse_ext(loss: &QuadLoss, y: f64) -> f64 {
    if y.is_infinite() {
        return y;
    }
    loss.inverse(y).unwrap_or(f64::INFINITY)
}

fn tangent_inverse_ext(tan: &Tangent, y: f64) -> f64 {
    if y.is_infinite() {
        y
    } else {
        tan.inverse(y)
    }
}

/// `v` on the upper line at `u`.
#[inline]
fn line_v(step: &StepData, u: f64) -> f64 {
    step.supercap_tangent.inverse(step.e_max - step.battery_tangent.eval(u))
}

/// `v` on the lower curve at `u`; `+∞` where no `v` meets the demand.
#[inline]
fn curve_v(step: &StepData, u: f64) -> f64 {
    let need = step.e_hat - step.battery.value(u);
    if step.supercap.is_identity() {
        need
    } else {
        inverse_ext(&step.supercap, need)
    }
}

/// `[u∩¹, u∩²]`: the `u` where the upper line lies on or above the lower
/// curve. Reversed when empty.
///
/// Closed form for an identity supercap loss. Otherwise the concave gap is
/// searched numerically inside `[u̲, ū]`, so the result is clipped to it.
pub fn intersection_bounds(step: &StepData) -> (f64, f64) {
    let empty = (f64::INFINITY, f64::NEG_INFINITY);
    if step.supercap.is_identity() {
        // gap = ē − ê − (ĝ(u) − g(u)) = ē − ê − c(u − û)²
        let slack = step.e_max - step.e_hat;
        let c = step.battery.curvature;
        let anchor = step.battery_tangent.anchor;
        if slack < 0.0 {
            return empty;
        }
        if c == 0.0 {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        let r = (slack / c).sqrt();
        return (anchor - r, anchor + r);
    }

    let gap = |u: f64| line_v(step, u) - curve_v(step, u);
    let (lo, hi) = (step.u_min, step.u_max);
    // golden-section maximum of the concave gap
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (gap(c), gap(d));
    for _ in 0..200 {
        if (b - a) <= 1e-12 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = gap(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = gap(d);
        }
    }
    let peak = 0.5 * (a + b);
    if !(gap(peak) >= 0.0) {
        return empty;
    }
    let left = if gap(lo) >= 0.0 { lo } else { bisect(&gap, lo, peak) };
    let right = if gap(hi) >= 0.0 { hi } else { bisect(&gap, peak, hi) };
    (left, right)
}

/// Zero of `f` between a negative and a nonnegative endpoint; returns the
/// nonnegative side.
fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let neg_at_a = !(f(a) >= 0.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if !(f(m) >= 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    if neg_at_a {
        b
    } else {
        a
    }
}

/// Feasible `u` range on the upper line.
pub fn line_interval(step: &StepData, cap: (f64, f64)) -> (f64, f64) {
    let (v_lo, v_hi) = v_box(step);
    let tan_g = &step.battery_tangent;
    let tan_f = &step.supercap_tangent;
    let from_v_hi = tangent_inverse_ext(tan_g, step.e_max - tan_f.eval(v_hi));
    let from_v_lo = tangent_inverse_ext(tan_g, step.e_max - tan_f.eval(v_lo));
    (
        step.u_min.max(cap.0).max(from_v_hi),
        step.u_max.min(cap.1).min(from_v_lo),
    )
}

/// Feasible `u` range on the lower curve. The curve `v(u) = f⁻¹(ê − g(u))`
/// is decreasing on the battery domain, so `v ≤ v̄` bounds `u` below.
pub fn curve_interval(step: &StepData, cap: (f64, f64)) -> (f64, f64) {
    let (v_lo, v_hi) = v_box(step);
    let from_v_hi = inverse_ext(&step.battery, step.e_hat - value_ext(&step.supercap, v_hi));
    let from_v_lo = inverse_ext(&step.battery, step.e_hat - value_ext(&step.supercap, v_lo));
    (
        step.u_min.max(cap.0).max(from_v_hi),
        step.u_max.min(cap.1).min(from_v_lo),
    )
}

/// Best point on the upper line: the closed-form minimizer clipped to the
/// feasible interval.
pub fn candidate_b(
    step: &StepData,
    target: StepTarget,
    rho: &RhoParams,
    cap: (f64, f64),
) -> Option<(f64, f64)> {
    let (lo, hi) = line_interval(step, cap);
    if !(lo <= hi) {
        return None;
    }
    // line: v = α − βu
    let beta = step.battery_tangent.slope / step.supercap_tangent.slope;
    let alpha = line_v(step, 0.0);
    let u = (rho.rho1 * target.u + rho.rho2 * beta * (alpha - target.v))
        / (rho.rho1 + rho.rho2 * beta * beta);
    let u = u.clamp(lo, hi);
    // the interval ends map onto the v bounds up to rounding
    let (v_lo, v_hi) = v_box(step);
    Some((u, line_v(step, u).clamp(v_lo, v_hi)))
}

/// Best point on the lower curve over the feasible interval.
///
/// With an identity supercap loss the restricted objective is a quartic in
/// `u`; every real root of its cubic derivative is evaluated along with the
/// interval ends. Otherwise a safeguarded Newton iteration from the
/// midpoint supplies the interior candidate.
pub fn candidate_c(
    step: &StepData,
    target: StepTarget,
    rho: &RhoParams,
    cap: (f64, f64),
) -> Option<(f64, f64)> {
    let (lo, hi) = curve_interval(step, cap);
    if !(lo <= hi) {
        return None;
    }
    let cost = |u: f64| target.cost(rho, u, curve_v(step, u));
    let mut best = lo;
    let mut best_cost = cost(lo);
    let mut consider = |u: f64| {
        let u = u.clamp(lo, hi);
        let c = cost(u);
        if c < best_cost {
            best = u;
            best_cost = c;
        }
    };
    consider(hi);

    if step.supercap.is_identity() {
        let c = step.battery.curvature;
        let r = rho.rho1 / rho.rho2;
        let k = step.e_hat - target.v;
        if c == 0.0 {
            // v = k' − u: projection onto a line
            consider((r * target.u + k) / (r + 1.0));
        } else {
            // s = c·u: 2s³ − 3s² + (r + 1 + 2ck)s − c(k + r·a) = 0
            for s in cubic_roots(2.0, -3.0, r + 1.0 + 2.0 * c * k, -c * (k + r * target.u)) {
                consider(s / c);
            }
        }
    } else {
        consider(newton_on_curve(step, target, rho, lo, hi));
    }
    let (v_lo, v_hi) = v_box(step);
    Some((best, curve_v(step, best).clamp(v_lo, v_hi)))
}

fn newton_on_curve(step: &StepData, target: StepTarget, rho: &RhoParams, lo: f64, hi: f64) -> f64 {
    let cg = step.battery.curvature;
    let cf = step.supercap.curvature;
    let mut u = 0.5 * (lo + hi);
    let (mut a, mut b) = (lo, hi);
    for _ in 0..50 {
        let v = curve_v(step, u);
        let fp = step.supercap.deriv(v);
        let gp = step.battery.deriv(u);
        if !v.is_finite() || fp <= 0.0 {
            break;
        }
        // v' = −g'/f', v'' = −(g''f' − g'f''v')/f'²
        let dv = -gp / fp;
        let ddv = -((-2.0 * cg) * fp - gp * (-2.0 * cf) * dv) / (fp * fp);
        let grad = rho.rho1 * (u - target.u) + rho.rho2 * (v - target.v) * dv;
        let hess = rho.rho1 + rho.rho2 * (dv * dv + (v - target.v) * ddv);
        if grad > 0.0 {
            b = u;
        } else {
            a = u;
        }
        let mut next = if hess > 0.0 { u - grad / hess } else { f64::NAN };
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        let step_len = (next - u).abs();
        u = next;
        if step_len <= 1e-10 * (1.0 + u.abs()) {
            break;
        }
    }
    u
}
