//! Brute-force reference solvers for tests and acceptance checks.
//!
//! Nothing here calls into the solver paths: losses, tangents and set
//! membership are re-evaluated from the raw step fields, inverses use
//! bisection, and linear systems are assembled densely.

use std::collections::HashMap;

use thiserror::Error;

use crate::problem::{ProblemInstance, StepData};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("grid oracle supports T ≤ 5, got {0}")]
    HorizonTooLong(usize),
    #[error("dense oracle supports T ≤ 256, got {0}")]
    DenseTooLarge(usize),
    #[error("step {t}: box bounds must be finite")]
    UnboundedBox { t: usize },
    #[error("no feasible grid point")]
    NoFeasiblePoint,
    #[error("empty boundary segment")]
    EmptySegment,
    #[error("invalid oracle argument: {0}")]
    BadArgument(&'static str),
}

/// `ρ₁/2 (u − a)² + ρ₂/2 (v − b)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepObjective {
    pub a: f64,
    pub b: f64,
    pub rho1: f64,
    pub rho2: f64,
}

impl StepObjective {
    pub fn cost(&self, u: f64, v: f64) -> f64 {
        0.5 * self.rho1 * (u - self.a).powi(2) + 0.5 * self.rho2 * (v - self.b).powi(2)
    }
}

fn loss(c: f64, x: f64) -> f64 {
    x - c * x * x
}

/// Solves `x − c·x² = p` on the increasing branch by bisection.
fn loss_inverse(c: f64, p: f64) -> Option<f64> {
    if c == 0.0 {
        return Some(p);
    }
    let top = 0.5 / c;
    if p > loss(c, top) {
        return None;
    }
    // loss(x) ≤ x, so the root is ≥ p
    let (mut lo, mut hi) = if p >= 0.0 { (p, top.min(2.0 * p)) } else { (p, 0.0) };
    if lo > hi {
        lo = hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if loss(c, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn upper_lhs(step: &StepData, u: f64, v: f64) -> f64 {
    let (bt, st) = (&step.battery_tangent, &step.supercap_tangent);
    bt.value + bt.slope * (u - bt.anchor) + st.value + st.slope * (v - st.anchor)
}

fn v_range(step: &StepData) -> (f64, f64) {
    let c = step.supercap.curvature;
    let cap = if c > 0.0 { 0.5 / c } else { f64::INFINITY };
    (step.v_min.unwrap_or(f64::NEG_INFINITY), step.v_max.unwrap_or(f64::INFINITY).min(cap))
}

/// Absolute slack used for set membership.
pub fn membership_tol(step: &StepData) -> f64 {
    1e-12 * 1f64.max(step.e_hat.abs()).max(step.e_max.abs())
}

/// Whether `(u, v)` lies in the step's constraint set, to within `tol`.
pub fn step_contains(step: &StepData, u: f64, v: f64, tol: f64) -> bool {
    let (v_lo, v_hi) = v_range(step);
    let u_top = if step.battery.curvature > 0.0 { 0.5 / step.battery.curvature } else { f64::INFINITY };
    u >= step.u_min - tol
        && u <= step.u_max.min(u_top) + tol
        && v >= v_lo - tol
        && v <= v_hi + tol
        && loss(step.battery.curvature, u) + loss(step.supercap.curvature, v) >= step.e_hat - tol
        && upper_lhs(step, u, v) <= step.e_max + tol
}

/// `v` with `g(u) + f(v) = ê`.
pub fn curve_point(step: &StepData, u: f64) -> Option<f64> {
    loss_inverse(step.supercap.curvature, step.e_hat - loss(step.battery.curvature, u))
}

/// `v` with `ĝ(u) + f̂(v) = ē`.
pub fn line_point(step: &StepData, u: f64) -> f64 {
    let (bt, st) = (&step.battery_tangent, &step.supercap_tangent);
    let g_hat = bt.value + bt.slope * (u - bt.anchor);
    st.anchor + (step.e_max - g_hat - st.value) / st.slope
}

/// Minimizes a unimodal `f` on `[lo, hi]`.
pub fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..400 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// `ĝ(u) + f̂(v) = ē`
    Line,
    /// `g(u) + f(v) = ê`
    Curve,
}

/// A point found by a per-step oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPoint {
    pub u: f64,
    pub v: f64,
    pub cost: f64,
}

/// Scans `n` evenly spaced points of the feasible part of a boundary,
/// then polishes the best one by golden section over its neighbouring cells.
pub fn line_scan(step: &StepData, boundary: Boundary, obj: &StepObjective, n: usize) -> Result<StepPoint, OracleError> {
    if n < 2 {
        return Err(OracleError::BadArgument("line scan needs n ≥ 2"));
    }
    let tol = membership_tol(step);
    let point = |u: f64| match boundary {
        Boundary::Line => Some(line_point(step, u)),
        Boundary::Curve => curve_point(step, u),
    };
    let feasible = |u: f64| point(u).is_some_and(|v| step_contains(step, u, v, tol));
    let (u_lo, u_hi) = (step.u_min, step.u_max);

    let m = n.max(2000);
    let sample = |i: usize| u_lo + (u_hi - u_lo) * i as f64 / (m - 1) as f64;
    let hits: Vec<usize> = (0..m).filter(|&i| feasible(sample(i))).collect();
    let (lo, hi) = match (hits.first(), hits.last()) {
        (Some(&first), Some(&last)) => {
            let edge = |inside: f64, outside: f64| {
                let (mut a, mut b) = (inside, outside);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if feasible(mid) {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                a
            };
            let lo = if first > 0 { edge(sample(first), sample(first - 1)) } else { sample(first) };
            let hi = if last + 1 < m { edge(sample(last), sample(last + 1)) } else { sample(last) };
            (lo, hi)
        }
        _ => {
            // thin segment: the cross-constraint slack is concave in u
            let slack = |u: f64| match (boundary, point(u)) {
                (Boundary::Line, Some(v)) => {
                    loss(step.battery.curvature, u) + loss(step.supercap.curvature, v) - step.e_hat
                }
                (Boundary::Curve, Some(v)) => step.e_max - upper_lhs(step, u, v),
                (_, None) => f64::NEG_INFINITY,
            };
            let (u, _) = golden_section(|u| -slack(u), u_lo, u_hi, 1e-12 * (u_hi - u_lo).max(1.0));
            if !feasible(u) {
                return Err(OracleError::EmptySegment);
            }
            (u, u)
        }
    };

    let cost_at = |u: f64| point(u).map_or(f64::INFINITY, |v| obj.cost(u, v));
    let mut best_u = lo;
    for i in 0..n {
        let u = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        if cost_at(u) < cost_at(best_u) {
            best_u = u;
        }
    }
    let h = (hi - lo) / (n - 1) as f64;
    if h > 0.0 {
        let (u, c) = golden_section(cost_at, (best_u - h).max(lo), (best_u + h).min(hi), 1e-12 * h.max(1.0));
        if c < cost_at(best_u) {
            best_u = u;
        }
    }
    let v = point(best_u).ok_or(OracleError::EmptySegment)?;
    Ok(StepPoint { u: best_u, v, cost: obj.cost(best_u, v) })
}

/// Result of the 2-D per-step grid search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridStepPoint {
    pub point: StepPoint,
    /// Final cell size in `u` and `v`.
    pub du: f64,
    pub dv: f64,
}

impl GridStepPoint {
    /// Largest cost change across one final grid cell from the returned point.
    pub fn cost_resolution(&self, obj: &StepObjective) -> f64 {
        let p = &self.point;
        let eu = (p.u - obj.a).abs() + self.du;
        let ev = (p.v - obj.b).abs() + self.dv;
        0.5 * obj.rho1 * (eu * eu - (p.u - obj.a).powi(2)) + 0.5 * obj.rho2 * (ev * ev - (p.v - obj.b).powi(2))
    }
}

/// Dense `n × n` grid over the step's bounding box, with the boundary points
/// on the curve and line added for every grid `u`, then `refine` rounds of
/// a grid shrunk around the incumbent.
pub fn grid_step(step: &StepData, obj: &StepObjective, n: usize, refine: usize) -> Result<GridStepPoint, OracleError> {
    if n < 2 {
        return Err(OracleError::BadArgument("grid needs n ≥ 2"));
    }
    let tol = membership_tol(step);
    let (vb_lo, vb_hi) = v_range(step);
    let v_floor = curve_point(step, step.u_max).ok_or(OracleError::NoFeasiblePoint)?;
    let v_ceil = line_point(step, step.u_min);
    let (v_lo, v_hi) = (vb_lo.max(v_floor.min(v_ceil)), vb_hi.min(v_ceil.max(v_floor)));
    if !(v_lo <= v_hi) {
        return Err(OracleError::NoFeasiblePoint);
    }
    let mut window = (step.u_min, step.u_max, v_lo, v_hi);
    let mut best: Option<StepPoint> = None;
    let (mut du, mut dv) = (0.0, 0.0);
    for _ in 0..=refine {
        let (ua, ub, va, vb) = window;
        du = (ub - ua) / (n - 1) as f64;
        dv = (vb - va) / (n - 1) as f64;
        let mut consider = |u: f64, v: f64| {
            if step_contains(step, u, v, tol) {
                let c = obj.cost(u, v);
                if best.is_none_or(|b| c < b.cost) {
                    best = Some(StepPoint { u, v, cost: c });
                }
            }
        };
        for i in 0..n {
            let u = ua + du * i as f64;
            for j in 0..n {
                consider(u, va + dv * j as f64);
            }
            if let Some(v) = curve_point(step, u) {
                consider(u, v);
            }
            consider(u, line_point(step, u));
        }
        let b = best.ok_or(OracleError::NoFeasiblePoint)?;
        window = (
            (b.u - 2.0 * du).max(step.u_min),
            (b.u + 2.0 * du).min(step.u_max),
            (b.v - 2.0 * dv).max(v_lo),
            (b.v + 2.0 * dv).min(v_hi),
        );
    }
    Ok(GridStepPoint { point: best.ok_or(OracleError::NoFeasiblePoint)?, du, dv })
}

/// Trajectory found by [`grid_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
}

#[derive(Clone, Copy)]
struct Node {
    x: f64,
    y: f64,
    cost: f64,
    parent: usize,
    u: f64,
    v: f64,
}

/// Exhaustive search over gridded `(u, v)` trajectories for `T ≤ 5`.
///
/// Each step offers grid multiples of `grid` inside the box plus, for every
/// grid `u`, the exact points on the lower curve and upper line. Reachable
/// states are merged on a lattice of a quarter cell and keep the cheapest
/// prefix; prefixes leaving the state bounds are pruned. Each refinement
/// level halves the cell and searches ±4 cells around the incumbent.
pub fn grid_solve(instance: &ProblemInstance, grid: f64, refine_levels: usize) -> Result<OracleSolution, OracleError> {
    let n = instance.steps.len();
    if n > 5 {
        return Err(OracleError::HorizonTooLong(n));
    }
    if !(grid > 0.0) {
        return Err(OracleError::BadArgument("grid spacing must be positive"));
    }
    for (t, s) in instance.steps.iter().enumerate() {
        if s.v_min.is_none() || s.v_max.is_none() || !s.u_min.is_finite() || !s.u_max.is_finite() {
            return Err(OracleError::UnboundedBox { t });
        }
    }

    let coarse: Vec<Vec<(f64, f64)>> = instance
        .steps
        .iter()
        .map(|s| {
            let (v_lo, v_hi) = v_range(s);
            let us = lattice(s.u_min, s.u_max, grid);
            step_pairs(s, &us, |_| lattice(v_lo, v_hi, grid))
        })
        .collect();
    let mut best = search(instance, &coarse, grid / 4.0)?;

    let mut h = grid;
    for _ in 0..refine_levels {
        h /= 2.0;
        let options: Vec<Vec<(f64, f64)>> = instance
            .steps
            .iter()
            .enumerate()
            .map(|(t, s)| {
                let (v_lo, v_hi) = v_range(s);
                let us: Vec<f64> = (-4..=4)
                    .map(|j| best.u[t] + j as f64 * h)
                    .filter(|&u| u >= s.u_min && u <= s.u_max)
                    .collect();
                let vc = best.v[t];
                step_pairs(s, &us, |_| {
                    (-4..=4).map(|j| vc + j as f64 * h).filter(|&v| v >= v_lo && v <= v_hi).collect()
                })
            })
            .collect();
        if let Ok(found) = search(instance, &options, h / 4.0) {
            if found.objective <= best.objective {
                best = found;
            }
        }
    }
    Ok(best)
}

fn lattice(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let mut out = vec![lo];
    let mut k = (lo / h).ceil();
    while k * h < hi {
        if k * h > lo {
            out.push(k * h);
        }
        k += 1.0;
    }
    out.push(hi);
    out
}

fn step_pairs(step: &StepData, us: &[f64], vs: impl Fn(f64) -> Vec<f64>) -> Vec<(f64, f64)> {
    let tol = membership_tol(step);
    let (v_lo, v_hi) = v_range(step);
    let mut out = Vec::new();
    for &u in us {
        let mut cands = vs(u);
        if let Some(v) = curve_point(step, u) {
            cands.push(v);
        }
        cands.push(line_point(step, u));
        cands.push(v_lo);
        cands.push(v_hi);
        for v in cands {
            if step_contains(step, u, v, tol) {
                out.push((u, v.clamp(v_lo, v_hi)));
            }
        }
    }
    out
}

fn search(instance: &ProblemInstance, options: &[Vec<(f64, f64)>], q: f64) -> Result<OracleSolution, OracleError> {
    let x_tol = 1e-9 * 1f64.max(instance.x_max.abs());
    let y_tol = 1e-9 * 1f64.max(instance.y_max.abs());
    let root = Node { x: instance.x0, y: instance.y0, cost: 0.0, parent: 0, u: 0.0, v: 0.0 };
    let mut layers: Vec<Vec<Node>> = vec![vec![root]];
    for opts in options {
        let prev = layers.last().expect("root layer");
        let mut index: HashMap<(i64, i64), usize> = HashMap::new();
        let mut next: Vec<Node> = Vec::new();
        for (p, node) in prev.iter().enumerate() {
            for &(u, v) in opts {
                let (x, y) = (node.x - u, node.y - v);
                if x < instance.x_min - x_tol
                    || x > instance.x_max + x_tol
                    || y < instance.y_min - y_tol
                    || y > instance.y_max + y_tol
                {
                    continue;
                }
                let cand = Node { x, y, cost: node.cost + u + v, parent: p, u, v };
                let key = ((x / q).round() as i64, (y / q).round() as i64);
                match index.get(&key) {
                    Some(&i) if next[i].cost <= cand.cost => {}
                    Some(&i) => next[i] = cand,
                    None => {
                        index.insert(key, next.len());
                        next.push(cand);
                    }
                }
            }
        }
        if next.is_empty() {
            return Err(OracleError::NoFeasiblePoint);
        }
        layers.push(next);
    }
    let last = layers.last().expect("root layer");
    let mut i = (0..last.len())
        .min_by(|&a, &b| last[a].cost.total_cmp(&last[b].cost))
        .ok_or(OracleError::NoFeasiblePoint)?;
    let objective = last[i].cost;
    let n = options.len();
    let mut sol = OracleSolution { u: vec![0.0; n], v: vec![0.0; n], x: vec![0.0; n], y: vec![0.0; n], objective };
    for t in (0..n).rev() {
        let node = layers[t + 1][i];
        sol.u[t] = node.u;
        sol.v[t] = node.v;
        sol.x[t] = node.x;
        sol.y[t] = node.y;
        i = node.parent;
    }
    Ok(sol)
}

/// Solves `(kI + ΨᵀΨ)x = b` by forming the matrix and running Gaussian
/// elimination with partial pivoting.
pub fn dense_solve(k: f64, b: &[f64]) -> Result<Vec<f64>, OracleError> {
    let n = b.len();
    if n > 256 {
        return Err(OracleError::DenseTooLarge(n));
    }
    if !(k > 0.0) {
        return Err(OracleError::BadArgument("k must be positive"));
    }
    // (ΨᵀΨ)ᵢⱼ counts rows r ≥ max(i, j)
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| (n - i.max(j)) as f64).collect();
            row[i] += k;
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .expect("nonempty pivot range");
        assert!(a[pivot][col] != 0.0, "kI + ΨᵀΨ is positive definite");
        a.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][n] - s) / a[r][r];
    }
    Ok(x)
}
