//! ADMM for the allocation program.
//!
//! The program is split as `u = ζ`, `v = η`, `x = 1x₀ − Ψζ`, `y = 1y₀ − Ψη`.
//! Each iteration
//!
//! 1. updates every `(u_t, v_t)` independently and projects the state
//!    arguments onto their boxes,
//! 2. solves two `(kI + ΨᵀΨ)` systems for `ζ` and `η`,
//! 3. adds the primal residual to the scaled duals.
//!
//! Every step is linear in the horizon.

mod diagnostics;
mod step;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::banded::{self, cumsum, rev_cumsum, BandedError, BandedFactor};
use crate::model::{powertrain_loss, ModelError};
use crate::problem::{integrate_states, objective, ProblemError, ProblemInstance};
use crate::Trajectory;

pub use diagnostics::{kkt_diagnostics, KktReport, KktTolerance, Segment};
pub use step::{
    candidate_b, candidate_c, curve_interval, intersection_bounds, line_interval, update_uv_step,
    Candidate, StepTarget, StepUpdate,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdmmError {
    #[error("invalid solver settings: {0}")]
    InvalidSettings(String),
    #[error("step {t}: feasible set of the (u, v) update is empty")]
    EmptyStepSet { t: usize },
    #[error("warm start has horizon {found}, instance has {expected}")]
    WarmStartMismatch { expected: usize, found: usize },
    #[error("step {t}: delivered power {value:.3} W is below the powertrain range ({limit:.3} W)")]
    BrakeRange { t: usize, value: f64, limit: f64 },
    #[error(transparent)]
    Banded(#[from] BandedError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Penalty weights for the four consensus blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoParams {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub rho4: f64,
}

impl Default for RhoParams {
    fn default() -> Self {
        RhoParams { rho1: 5e-5, rho2: 5e-5, rho3: 1e-8, rho4: 1e-8 }
    }
}

impl RhoParams {
    pub fn validate(&self) -> Result<(), AdmmError> {
        for (name, v) in [("rho1", self.rho1), ("rho2", self.rho2), ("rho3", self.rho3), ("rho4", self.rho4)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(AdmmError::InvalidSettings(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmSettings {
    pub rho: RhoParams,
    /// Absolute threshold on `max(‖r‖₂, ‖s‖₂)`.
    pub eps: f64,
    pub max_iters: usize,
    /// Run the per-step updates on the rayon pool.
    pub parallel: bool,
    /// Record one [`TraceRow`] per iteration.
    pub trace: bool,
    pub warm_start: Option<SolverState>,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        AdmmSettings {
            rho: RhoParams::default(),
            eps: 100.0,
            max_iters: 100_000,
            parallel: false,
            trace: false,
            warm_start: None,
        }
    }
}

impl AdmmSettings {
    pub fn validate(&self) -> Result<(), AdmmError> {
        self.rho.validate()?;
        if !(self.eps > 0.0) {
            return Err(AdmmError::InvalidSettings(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_iters == 0 {
            return Err(AdmmError::InvalidSettings("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// All primal, consensus and scaled dual vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub zeta: Vec<f64>,
    pub eta: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub lambda3: Vec<f64>,
    pub lambda4: Vec<f64>,
    pub iteration: usize,
}

impl SolverState {
    pub fn zeros(n: usize) -> Self {
        let z = vec![0.0; n];
        SolverState {
            u: z.clone(),
            v: z.clone(),
            x: z.clone(),
            y: z.clone(),
            zeta: z.clone(),
            eta: z.clone(),
            lambda1: z.clone(),
            lambda2: z.clone(),
            lambda3: z.clone(),
            lambda4: z,
            iteration: 0,
        }
    }

    pub fn horizon(&self) -> usize {
        self.u.len()
    }

    fn vectors(&self) -> [&Vec<f64>; 10] {
        [
            &self.u, &self.v, &self.x, &self.y, &self.zeta, &self.eta, &self.lambda1, &self.lambda2,
            &self.lambda3, &self.lambda4,
        ]
    }
}

/// Euclidean norms of the stacked primal and dual residuals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    /// Iteration limit hit with the dual residual below tolerance but the
    /// primal residual above it: the usual ADMM signature of an empty
    /// feasible set.
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub r_norm: f64,
    pub s_norm: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub b: Vec<f64>,
    /// Energies after each step, integrated from `u` and `v`.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub residuals: Residuals,
    pub trace: Vec<TraceRow>,
    /// Final iterate, usable as a warm start.
    pub state: SolverState,
}

impl Solution {
    pub fn trajectory(&self, instance: &ProblemInstance) -> Trajectory {
        Trajectory {
            d: instance.demand(),
            u: self.u.clone(),
            v: self.v.clone(),
            b: self.b.clone(),
            x: self.x.clone(),
            y: self.y.clone(),
        }
    }
}

/// Writes `iter,r_norm,s_norm,objective` rows.
pub fn write_trace_csv<W: Write>(trace: &[TraceRow], writer: W) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(writer);
    for row in trace {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Factors for the `ζ` and `η` systems, reusable across solves with the
/// same horizon and ρ.
#[derive(Debug, Clone)]
pub struct Factors {
    zeta: BandedFactor,
    eta: BandedFactor,
}

impl Factors {
    pub fn new(rho: &RhoParams, horizon: usize) -> Result<Self, AdmmError> {
        Ok(Factors {
            zeta: banded::factor(rho.rho1 / rho.rho3, horizon)?,
            eta: banded::factor(rho.rho2 / rho.rho4, horizon)?,
        })
    }

    fn matches(&self, rho: &RhoParams, horizon: usize) -> bool {
        self.zeta.horizon() == horizon
            && self.zeta.k() == rho.rho1 / rho.rho3
            && self.eta.k() == rho.rho2 / rho.rho4
    }
}

/// Runs ADMM to tolerance or the iteration limit.
pub fn solve(instance: &ProblemInstance, settings: &AdmmSettings) -> Result<Solution, AdmmError> {
    settings.validate()?;
    let factors = Factors::new(&settings.rho, instance.horizon())?;
    solve_with_factors(instance, settings, &factors)
}

/// [`solve`] with prebuilt factors.
pub fn solve_with_factors(
    instance: &ProblemInstance,
    settings: &AdmmSettings,
    factors: &Factors,
) -> Result<Solution, AdmmError> {
    settings.validate()?;
    let n = instance.horizon();
    let rho = settings.rho;
    if !factors.matches(&rho, n) {
        return Err(AdmmError::InvalidSettings("factors were built for another horizon or ρ".into()));
    }
    let mut state = match &settings.warm_start {
        Some(ws) => {
            if let Some(bad) = ws.vectors().iter().find(|v| v.len() != n) {
                return Err(AdmmError::WarmStartMismatch { expected: n, found: bad.len() });
            }
            ws.clone()
        }
        None => SolverState::zeros(n),
    };
    let start_iter = state.iteration;

    let mut work = Workspace::new(n);
    let mut trace = Vec::new();
    let mut best: Option<(f64, Vec<f64>, Vec<f64>, Residuals)> = None;
    let mut last = Residuals { primal: f64::INFINITY, dual: f64::INFINITY };
    let mut status = SolveStatus::MaxIters;

    for _ in 0..settings.max_iters {
        update_uv(instance, &mut state, &rho, settings.parallel)?;
        update_states_into(&mut state, instance, &mut work.psi);
        work.zeta_prev.copy_from_slice(&state.zeta);
        work.eta_prev.copy_from_slice(&state.eta);
        update_zeta_eta_into(&mut state, instance, &rho, factors, &mut work)?;
        last = residual_blocks(&state, instance, &rho, &mut work);
        for (lam, r) in [
            (&mut state.lambda1, &work.r[0]),
            (&mut state.lambda2, &work.r[1]),
            (&mut state.lambda3, &work.r[2]),
            (&mut state.lambda4, &work.r[3]),
        ] {
            lam.iter_mut().zip(r).for_each(|(l, ri)| *l += ri);
        }
        state.iteration += 1;

        if settings.trace {
            trace.push(TraceRow {
                iter: state.iteration,
                r_norm: last.primal,
                s_norm: last.dual,
                objective: objective(&state.u, &state.v)?,
            });
        }
        if !last.primal.is_finite() || !last.dual.is_finite() {
            return Err(AdmmError::InvalidSettings("iteration diverged to non-finite residuals".into()));
        }
        if last.max() <= settings.eps {
            status = SolveStatus::Converged;
            break;
        }
        if best.as_ref().is_none_or(|b| last.max() < b.0) {
            match &mut best {
                Some(b) => {
                    b.0 = last.max();
                    b.1.copy_from_slice(&state.u);
                    b.2.copy_from_slice(&state.v);
                    b.3 = last;
                }
                None => best = Some((last.max(), state.u.clone(), state.v.clone(), last)),
            }
        }
    }

    let (u, v, residuals) = match (status, best) {
        (SolveStatus::Converged, _) | (_, None) => (state.u.clone(), state.v.clone(), last),
        (_, Some((_, u, v, r))) => {
            if r.dual <= settings.eps && r.primal > settings.eps {
                status = SolveStatus::Infeasible;
            }
            (u, v, r)
        }
    };
    let b = recover_brake(&u, &v, instance)?;
    Ok(Solution {
        x: integrate_states(instance.x0, &u),
        y: integrate_states(instance.y0, &v),
        objective: objective(&u, &v)?,
        iterations: state.iteration - start_iter,
        u,
        v,
        b,
        status,
        residuals,
        trace,
        state,
    })
}

struct Workspace {
    psi: Vec<f64>,
    tmp: Vec<f64>,
    rhs: Vec<f64>,
    zeta_prev: Vec<f64>,
    eta_prev: Vec<f64>,
    r: [Vec<f64>; 4],
}

impl Workspace {
    fn new(n: usize) -> Self {
        let z = vec![0.0; n];
        Workspace {
            psi: z.clone(),
            tmp: z.clone(),
            rhs: z.clone(),
            zeta_prev: z.clone(),
            eta_prev: z.clone(),
            r: [z.clone(), z.clone(), z.clone(), z],
        }
    }
}

fn update_uv(
    instance: &ProblemInstance,
    state: &mut SolverState,
    rho: &RhoParams,
    parallel: bool,
) -> Result<(), AdmmError> {
    let SolverState { u, v, zeta, eta, lambda1, lambda2, .. } = state;
    let one = |t: usize, ut: &mut f64, vt: &mut f64| -> Result<(), AdmmError> {
        let target = StepTarget {
            u: zeta[t] - lambda1[t] - 1.0 / rho.rho1,
            v: eta[t] - lambda2[t] - 1.0 / rho.rho2,
        };
        let out = update_uv_step(&instance.steps[t], target, rho).ok_or(AdmmError::EmptyStepSet { t })?;
        *ut = out.u;
        *vt = out.v;
        Ok(())
    };
    if parallel {
        u.par_iter_mut()
            .zip(v.par_iter_mut())
            .enumerate()
            .try_for_each(|(t, (ut, vt))| one(t, ut, vt))
    } else {
        u.iter_mut()
            .zip(v.iter_mut())
            .enumerate()
            .try_for_each(|(t, (ut, vt))| one(t, ut, vt))
    }
}

fn project_states(
    initial: f64,
    lo: f64,
    hi: f64,
    consensus: &[f64],
    dual: &[f64],
    psi: &mut [f64],
    out: &mut [f64],
) {
    cumsum(consensus, psi);
    for ((o, p), l) in out.iter_mut().zip(psi.iter()).zip(dual) {
        *o = (initial - p - l).clamp(lo, hi);
    }
}

fn update_states_into(state: &mut SolverState, instance: &ProblemInstance, psi: &mut [f64]) {
    let SolverState { x, y, zeta, eta, lambda3, lambda4, .. } = state;
    project_states(instance.x0, instance.x_min, instance.x_max, zeta, lambda3, psi, x);
    project_states(instance.y0, instance.y_min, instance.y_max, eta, lambda4, psi, y);
}

/// `x = Π[1x₀ − Ψζ − λ₃]`, `y = Π[1y₀ − Ψη − λ₄]`, from the current `ζ`, `η`.
pub fn update_states(state: &SolverState, instance: &ProblemInstance) -> (Vec<f64>, Vec<f64>) {
    let mut s = state.clone();
    let mut psi = vec![0.0; state.horizon()];
    update_states_into(&mut s, instance, &mut psi);
    (s.x, s.y)
}

#[allow(clippy::too_many_arguments)]
fn consensus_solve(
    factor: &BandedFactor,
    ratio: f64,
    initial: f64,
    power: &[f64],
    power_dual: &[f64],
    state: &[f64],
    state_dual: &[f64],
    work: &mut Workspace,
    out: &mut [f64],
) -> Result<(), AdmmError> {
    // rhs = k(p + λ_p) − Ψᵀ(s − 1s₀ + λ_s), with k = ρ_p/ρ_s
    for ((t, s), l) in work.tmp.iter_mut().zip(state).zip(state_dual) {
        *t = s - initial + l;
    }
    rev_cumsum(&work.tmp, &mut work.psi);
    for (((r, p), lp), q) in work.rhs.iter_mut().zip(power).zip(power_dual).zip(&work.psi) {
        *r = ratio * (p + lp) - q;
    }
    factor.solve_into(&work.rhs, out)?;
    Ok(())
}

fn update_zeta_eta_into(
    state: &mut SolverState,
    instance: &ProblemInstance,
    rho: &RhoParams,
    factors: &Factors,
    work: &mut Workspace,
) -> Result<(), AdmmError> {
    let SolverState { u, v, x, y, zeta, eta, lambda1, lambda2, lambda3, lambda4, .. } = state;
    let k1 = rho.rho1 / rho.rho3;
    let k2 = rho.rho2 / rho.rho4;
    consensus_solve(&factors.zeta, k1, instance.x0, u, lambda1, x, lambda3, work, zeta)?;
    consensus_solve(&factors.eta, k2, instance.y0, v, lambda2, y, lambda4, work, eta)?;
    Ok(())
}

/// `ζ = (ρ₁I + ρ₃ΨᵀΨ)⁻¹[ρ₁(u + λ₁) − ρ₃Ψᵀ(x − 1x₀ + λ₃)]` and likewise `η`.
pub fn update_zeta_eta(
    state: &SolverState,
    instance: &ProblemInstance,
    rho: &RhoParams,
) -> Result<(Vec<f64>, Vec<f64>), AdmmError> {
    let factors = Factors::new(rho, instance.horizon())?;
    let mut s = state.clone();
    let mut work = Workspace::new(state.horizon());
    update_zeta_eta_into(&mut s, instance, rho, &factors, &mut work)?;
    Ok((s.zeta, s.eta))
}

/// Fills `work.r` with the primal residual blocks; `work.zeta_prev` and
/// `work.eta_prev` hold the previous consensus iterates.
fn residual_blocks(
    next: &SolverState,
    instance: &ProblemInstance,
    rho: &RhoParams,
    work: &mut Workspace,
) -> Residuals {
    let n = next.horizon();
    let Workspace { psi, r, zeta_prev, eta_prev, .. } = work;
    let mut primal = 0.0;
    for t in 0..n {
        let ru = next.u[t] - next.zeta[t];
        r[0][t] = ru;
        let rv = next.v[t] - next.eta[t];
        r[1][t] = rv;
        primal += ru * ru + rv * rv;
    }
    let mut dual = 0.0;
    for (blk, (initial, state, cons, prev, rp, rs)) in [
        (instance.x0, &next.x, &next.zeta, &*zeta_prev, rho.rho1, rho.rho3),
        (instance.y0, &next.y, &next.eta, &*eta_prev, rho.rho2, rho.rho4),
    ]
    .into_iter()
    .enumerate()
    {
        cumsum(cons, psi);
        for t in 0..n {
            let rt = state[t] + psi[t] - initial;
            r[2 + blk][t] = rt;
            primal += rt * rt;
        }
        // Ψ(ζ⁺ − ζ⁻) as a running sum of the differences
        let mut acc = 0.0;
        for t in 0..n {
            let delta = cons[t] - prev[t];
            acc += delta;
            dual += (rp * delta).powi(2) + (rs * acc).powi(2);
        }
    }
    Residuals { primal: primal.sqrt(), dual: dual.sqrt() }
}

/// Residual norms between two consecutive iterates.
pub fn residuals(
    prev: &SolverState,
    next: &SolverState,
    instance: &ProblemInstance,
    rho: &RhoParams,
) -> Residuals {
    let mut work = Workspace::new(next.horizon());
    work.zeta_prev.copy_from_slice(&prev.zeta);
    work.eta_prev.copy_from_slice(&prev.eta);
    residual_blocks(next, instance, rho, &mut work)
}

/// Primal residual blocks `(u − ζ, v − η, x + Ψζ − 1x₀, y + Ψη − 1y₀)`.
pub fn primal_residual(state: &SolverState, instance: &ProblemInstance) -> [Vec<f64>; 4] {
    let mut work = Workspace::new(state.horizon());
    work.zeta_prev.copy_from_slice(&state.zeta);
    work.eta_prev.copy_from_slice(&state.eta);
    residual_blocks(state, instance, &RhoParams::default(), &mut work);
    work.r
}

/// Relative slack allowed below the powertrain's input range before a
/// delivered power is rejected.
const BRAKE_RANGE_SLACK: f64 = 1e-9;

/// `b_t = d_t − h(g(u_t) + f(v_t))`.
pub fn recover_brake(u: &[f64], v: &[f64], instance: &ProblemInstance) -> Result<Vec<f64>, AdmmError> {
    let n = instance.horizon();
    for len in [u.len(), v.len()] {
        if len != n {
            return Err(ProblemError::HorizonMismatch { expected: n, found: len }.into());
        }
    }
    instance
        .steps
        .iter()
        .enumerate()
        .map(|(t, s)| {
            let mut p = s.delivered(u[t], v[t]);
            let floor = s.powertrain.range_min();
            if p < floor {
                if p < floor - BRAKE_RANGE_SLACK * floor.abs().max(1.0) {
                    return Err(AdmmError::BrakeRange { t, value: p, limit: floor });
                }
                p = floor;
            }
            let m = powertrain_loss(p, &s.powertrain).map_err(|e| match e {
                ModelError::Range { value, limit, .. } | ModelError::Domain { value, limit, .. } => {
                    AdmmError::BrakeRange { t, value, limit }
                }
                other => AdmmError::InvalidSettings(other.to_string()),
            })?;
            Ok(s.demand - m)
        })
        .collect()
}
