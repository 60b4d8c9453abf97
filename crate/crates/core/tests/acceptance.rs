//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use powersplit::admm::{self, kkt_diagnostics, AdmmSettings, KktTolerance, RhoParams, SolveStatus, SolverState, StepTarget};
use powersplit::banded::{self, cumsum, rev_cumsum};
use powersplit::baselines::{all_battery, low_pass_split, FilterParams};
use powersplit::metrics::{compute_metrics, MetricsReport};
use powersplit::model::{
    self, battery_loss, battery_loss_deriv, battery_loss_inverse, central_difference, demand_power,
    generate_cycle, inverse_powertrain_loss, motor_speed, powertrain_bounds, powertrain_loss, BatteryParams,
    CycleKind, DriveCycle, LossCoefficients, MotorParams, QuadLoss, SupercapParams, VehicleParams,
};
use powersplit::oracle::{self, StepObjective};
use powersplit::problem::{build_problem, check_feasible_point, ProblemInstance, StepData};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn default_instance(kind: CycleKind, duration: usize, seed: u64) -> ProblemInstance {
    let cycle = generate_cycle(kind, duration, seed);
    build_problem(
        &cycle,
        &VehicleParams::default(),
        &BatteryParams::default(),
        &SupercapParams::default(),
        &MotorParams::default(),
    )
    .expect("synthetic cycles are feasible")
}

fn kind_for(i: u64) -> CycleKind {
    [CycleKind::Urban, CycleKind::Mixed, CycleKind::Highway][(i % 3) as usize]
}

fn c1_banded() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for t in 1..=64 {
        for k in [1e-6, 1e-3, 1.0, 1e3] {
            let b: Vec<f64> = (0..t).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = banded::solve(&banded::factor(k, t).map_err(|e| e.to_string())?, &b).map_err(|e| e.to_string())?;
            let d = oracle::dense_solve(k, &b).map_err(|e| e.to_string())?;
            let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let err = x.iter().zip(&d).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
            worst = worst.max(err);
            ensure(err <= 1e-9, || format!("T={t} k={k}: relative error {err:.2e}"))?;
        }
    }
    let mut worst_res = 0.0f64;
    for t in [100, 500, 1000, 2000] {
        for k in [1e-8, 1e-5, 1e-2, 1.0, 1e2] {
            let b: Vec<f64> = (0..t).map(|_| rng.random_range(-1e3..1e3)).collect();
            let x = banded::solve(&banded::factor(k, t).unwrap(), &b).unwrap();
            let (mut p, mut q) = (vec![0.0; t], vec![0.0; t]);
            cumsum(&x, &mut p);
            rev_cumsum(&p, &mut q);
            let b_inf = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let res = (0..t).map(|i| (k * x[i] + q[i] - b[i]).abs()).fold(0.0, f64::max) / b_inf;
            worst_res = worst_res.max(res);
            ensure(res <= 1e-9, || format!("T={t} k={k}: residual {res:.2e}"))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("max rel err {worst:.1e}, max residual {worst_res:.1e}, {:.0} ms", elapsed.as_secs_f64() * 1e3))
}

/// Random small instance with net traction demand so `|J|` is well away from zero.
fn small_instance(rng: &mut ChaCha8Rng, battery: bool) -> ProblemInstance {
    loop {
        let t = rng.random_range(1..=5);
        let loss = if battery { BatteryParams::default().loss() } else { QuadLoss::IDENTITY };
        let steps: Vec<StepData> = (0..t)
            .map(|_| {
                let e_hat = rng.random_range(-10e3..25e3);
                let width = rng.random_range(1e3..30e3);
                StepData::new(e_hat, e_hat, e_hat + width, (-2e4, 2e4), (Some(-2e4), Some(2e4)), loss, QuadLoss::IDENTITY)
                    .unwrap()
            })
            .collect();
        let x0 = rng.random_range(2e4..6e4);
        let x_max = x0 + rng.random_range(0.0..3e4);
        let y_max = rng.random_range(5e3..4e4);
        let y0 = rng.random_range(0.0..y_max);
        let net: f64 = steps.iter().map(|s| s.e_hat).sum();
        if net < 5e3 {
            continue;
        }
        if let Ok(inst) = ProblemInstance::new(steps, (x0, 0.0, x_max), (y0, 0.0, y_max)) {
            return inst;
        }
    }
}

fn c2_small_optimality() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut count = 0;
    for i in 0..30 {
        let inst = small_instance(&mut rng, i % 2 == 1);
        let Ok(reference) = oracle::grid_solve(&inst, 1e3, 6) else {
            continue;
        };
        let settings = AdmmSettings { eps: 1e-4 * inst.power_scale(), max_iters: 2_000_000, ..AdmmSettings::default() };
        let sol = admm::solve(&inst, &settings).map_err(|e| format!("instance {i}: {e}"))?;
        ensure(sol.status == SolveStatus::Converged, || format!("instance {i}: {:?}", sol.status))?;
        let gap = (sol.objective - reference.objective).abs() / reference.objective.abs().max(1.0);
        worst = worst.max(gap);
        ensure(gap <= 1e-3, || {
            format!("instance {i} (T={}): J = {:.3}, oracle {:.3}", inst.horizon(), sol.objective, reference.objective)
        })?;
        count += 1;
    }
    ensure(count >= 20, || format!("only {count} instances had a feasible grid"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!("{count} instances, worst relative gap {worst:.1e}, {:.1} s", elapsed.as_secs_f64()))
}

fn c3_step_update() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    let mut empty = 0;
    for i in 0..1200 {
        let c = if i % 3 == 0 { 0.0 } else { rng.random_range(0.0..5e-6) };
        let e_hat = rng.random_range(-4e4..4e4);
        let width = rng.random_range(5e2..4e4);
        let u_box = (-rng.random_range(2e4..8e4), rng.random_range(2e4..8e4));
        let v_box = if rng.random_bool(0.5) {
            (None, None)
        } else {
            (Some(-rng.random_range(0.0..8e4)), Some(rng.random_range(0.0..8e4)))
        };
        let Ok(step) = StepData::new(e_hat, e_hat, e_hat + width, u_box, v_box, QuadLoss::new(c).unwrap(), QuadLoss::IDENTITY)
        else {
            continue;
        };
        let rho = RhoParams { rho1: 5e-5 * rng.random_range(0.2..5.0), ..RhoParams::default() };
        let mut state = SolverState::zeros(1);
        state.zeta[0] = rng.random_range(-8e4..8e4);
        state.eta[0] = rng.random_range(-8e4..8e4);
        state.lambda1[0] = rng.random_range(-3e4..3e4);
        state.lambda2[0] = rng.random_range(-3e4..3e4);
        let target = StepTarget::from_state(&state, 0, &rho);
        let obj = StepObjective { a: target.u, b: target.v, rho1: rho.rho1, rho2: rho.rho2 };
        let reference = oracle::grid_step(&step, &obj, 300, 4);
        let Some(out) = admm::update_uv_step(&step, target, &rho) else {
            ensure(reference.is_err(), || format!("tuple {i}: update reported an empty set the oracle did not"))?;
            empty += 1;
            continue;
        };
        let tol = 1e-6 * 1f64.max(step.e_hat.abs()).max(step.e_max.abs());
        ensure(oracle::step_contains(&step, out.u, out.v, tol), || format!("tuple {i}: ({}, {}) outside the set", out.u, out.v))?;
        let reference = reference.map_err(|e| format!("tuple {i}: oracle {e}"))?;
        let cost = target.cost(&rho, out.u, out.v);
        let allowed = reference.point.cost + reference.cost_resolution(&obj);
        ensure(cost <= allowed, || format!("tuple {i}: cost {cost} above oracle {}", reference.point.cost))?;
        checked += 1;
    }
    ensure(checked >= 1000, || format!("only {checked} tuples checked"))?;
    Ok(format!("{checked} tuples matched the grid oracle, {empty} empty sets agreed"))
}

struct CycleRun {
    instance: ProblemInstance,
    solution: admm::Solution,
    /// The same run continued to `ε = 10`.
    refined: admm::Solution,
}

fn constraint_runs() -> Vec<CycleRun> {
    (0..10)
        .map(|i| {
            let instance = default_instance(kind_for(i), 900, 100 + i);
            let solution = admm::solve(&instance, &AdmmSettings::default()).expect("solve");
            let more = AdmmSettings { eps: 10.0, warm_start: Some(solution.state.clone()), ..AdmmSettings::default() };
            let refined = admm::solve(&instance, &more).expect("solve");
            CycleRun { instance, solution, refined }
        })
        .collect()
}

fn c4_constraints(runs: &[CycleRun]) -> Outcome {
    let mut worst_ratio = 0.0f64;
    let mut worst_b = f64::NEG_INFINITY;
    for (i, run) in runs.iter().enumerate() {
        let sol = &run.solution;
        ensure(sol.status == SolveStatus::Converged, || format!("cycle {i}: {:?}", sol.status))?;
        let limit = 1e-2 * run.instance.power_scale();
        let report = check_feasible_point(&sol.u, &sol.v, &run.instance, limit).map_err(|e| e.to_string())?;
        worst_ratio = worst_ratio.max(report.max_violation() / limit);
        ensure(report.is_feasible(), || format!("cycle {i}: {report:?}"))?;
        let b_max = sol.b.iter().fold(f64::NEG_INFINITY, |m, &b| m.max(b));
        worst_b = worst_b.max(b_max);
        ensure(b_max <= 10.0, || format!("cycle {i}: brake power {b_max} W"))?;
    }
    Ok(format!(
        "10 cycles, worst violation {:.1}% of the 1e-2·max|d| limit, max b = {worst_b:.2} W",
        100.0 * worst_ratio
    ))
}

fn c5_structure(runs: &[CycleRun]) -> Outcome {
    let tol = KktTolerance::default();
    let mut segments = 0;
    let mut worst = 0.0f64;
    let mut slack_runs = 0;
    let mut coarse = 0.0f64;
    for (i, run) in runs.iter().enumerate() {
        let at_100 = kkt_diagnostics(&run.solution, &run.instance, &tol);
        coarse = at_100.segments.iter().fold(coarse, |m, s| m.max(s.max_deviation));
        ensure(run.refined.status == SolveStatus::Converged, || format!("cycle {i}: {:?}", run.refined.status))?;
        let report = kkt_diagnostics(&run.refined, &run.instance, &tol);
        for s in &report.segments {
            segments += 1;
            let allowed = 50f64.max(1e-3 * s.mean_u.abs());
            worst = worst.max(s.max_deviation / allowed);
            ensure(s.is_flat(50.0, 1e-3), || {
                format!("cycle {i}: segment [{}, {}) deviates {:.1} W from {:.1} W", s.start, s.end, s.max_deviation, s.mean_u)
            })?;
        }
        if report.battery_charge_limits_slack {
            slack_runs += 1;
            ensure(report.upper_inactive(), || format!("cycle {i}: upper line active at {:?}", report.upper_active))?;
        }
        ensure(report.upper_activity_explained(), || {
            format!("cycle {i}: unexplained upper activity at {:?}", report.unexplained_upper_active)
        })?;
    }
    Ok(format!(
        "at ε=10, {segments} segments flat (worst {:.0}% of allowance; worst deviation {coarse:.1} W at ε=100); \
         upper line inactive on {slack_runs}/10 runs with slack charge limits",
        100.0 * worst
    ))
}

fn c6_dominance() -> Outcome {
    let fp = FilterParams::default();
    let reports: Vec<MetricsReport> = (0..20)
        .map(|seed| {
            let inst = default_instance(kind_for(seed), 900, 200 + seed);
            let sol = admm::solve(&inst, &AdmmSettings::default()).expect("solve");
            let ab = all_battery(&inst).expect("all-battery");
            let lp = low_pass_split(&inst, &fp).expect("low-pass");
            let mut r = MetricsReport::new();
            r.push("all-battery", compute_metrics(&ab.u, &ab.v, 1.0).unwrap());
            r.push("low-pass", compute_metrics(&lp.u, &lp.v, 1.0).unwrap());
            r.push("optimal", compute_metrics(&sol.u, &sol.v, 1.0).unwrap());
            r
        })
        .collect();
    let mean = MetricsReport::mean(&reports).map_err(|e| e.to_string())?;
    println!("      mean over 20 synthetic cycles, percentages relative to all-battery:");
    for line in mean.to_table().lines() {
        println!("      {line}");
    }
    let opt = mean.get("optimal").unwrap().values();
    for base in ["all-battery", "low-pass"] {
        let b = mean.get(base).unwrap().values();
        for (k, name) in ["rms_u", "peak_u", "throughput_u", "energy"].iter().enumerate() {
            ensure(opt[k] < b[k], || format!("optimal {name} {:.1} not below {base} {:.1}", opt[k], b[k]))?;
        }
    }
    let (ab, lp) = (mean.get("all-battery").unwrap(), mean.get("low-pass").unwrap());
    ensure(lp.rms_u < ab.rms_u, || "low-pass does not beat all-battery on RMS(u)".into())?;
    let imp = mean.improvements("all-battery", "optimal").map_err(|e| e.to_string())?;
    Ok(format!(
        "optimal vs all-battery: rms {:+.1}%, peak {:+.1}%, throughput {:+.1}%, energy {:+.1}%",
        imp[0], imp[1], imp[2], imp[3]
    ))
}

fn c7_performance() -> Outcome {
    let inst = default_instance(CycleKind::Mixed, 1000, 7);
    let start = Instant::now();
    let sol = admm::solve(&inst, &AdmmSettings::default()).map_err(|e| e.to_string())?;
    let wall = start.elapsed();
    ensure(sol.status == SolveStatus::Converged, || format!("T=1000: {:?}", sol.status))?;
    ensure(wall < Duration::from_secs(5), || format!("T=1000 took {wall:?}"))?;

    let iters = 200;
    let per_iter = |t: usize| {
        let inst = default_instance(CycleKind::Mixed, t, 8);
        let settings = AdmmSettings { eps: 1e-12, max_iters: iters, ..AdmmSettings::default() };
        let factors = admm::Factors::new(&settings.rho, t).unwrap();
        (0..3)
            .map(|_| {
                let start = Instant::now();
                admm::solve_with_factors(&inst, &settings, &factors).unwrap();
                start.elapsed().as_secs_f64() / iters as f64
            })
            .fold(f64::INFINITY, f64::min)
    };
    let (t1, t2) = (per_iter(10_000), per_iter(20_000));
    let ratio = t2 / t1;
    ensure(ratio <= 3.0, || format!("per-iteration time ratio {ratio:.2}"))?;
    Ok(format!(
        "T=1000 in {:.2} s ({} iterations); per-iteration {:.0} µs at 1e4, {:.0} µs at 2e4, ratio {ratio:.2}",
        wall.as_secs_f64(),
        sol.iterations,
        t1 * 1e6,
        t2 * 1e6
    ))
}

fn c8_horizon() -> Outcome {
    let cycle = generate_cycle(CycleKind::Mixed, 1000, 42);
    let mut counts = Vec::new();
    for t in [250, 500, 1000] {
        let inst = build_problem(
            &cycle.truncated(t).map_err(|e| e.to_string())?,
            &VehicleParams::default(),
            &BatteryParams::default(),
            &SupercapParams::default(),
            &MotorParams::default(),
        )
        .map_err(|e| e.to_string())?;
        let sol = admm::solve(&inst, &AdmmSettings::default()).map_err(|e| e.to_string())?;
        ensure(sol.status == SolveStatus::Converged, || format!("T={t}: {:?}", sol.status))?;
        counts.push(sol.iterations);
    }
    let (lo, hi) = (*counts.iter().min().unwrap(), *counts.iter().max().unwrap());
    let ratio = hi as f64 / lo as f64;
    ensure(ratio <= 2.0, || format!("iterations {counts:?}, ratio {ratio:.2}"))?;
    Ok(format!("iterations at T=250/500/1000: {counts:?}, ratio {ratio:.2}"))
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn c9_models() -> Outcome {
    let mut checks = 0;
    let mut check = |ok: bool, what: &str| -> Result<(), String> {
        checks += 1;
        ensure(ok, || what.to_string())
    };
    let vp = VehicleParams::default();
    let bp = BatteryParams::default();

    check(central_difference(&[0.0, 1.0, 2.0], 1.0).unwrap() == vec![1.0; 3], "ramp derivative")?;
    check(central_difference(&[3.0; 3], 1.0).unwrap() == vec![0.0; 3], "constant derivative")?;
    let d = central_difference(&[0.0, 1.0, 4.0, 9.0], 1.0).unwrap();
    check(d[1] == 2.0 && d[2] == 4.0, "interior stencil")?;
    check(central_difference(&[0.0, 1.0], 1.0).is_err(), "short series")?;

    let still = DriveCycle::new(1.0, vec![0.0; 5], vec![0.02; 5]).unwrap();
    check(demand_power(&still, &vp).unwrap().iter().all(|&p| p == 0.0), "zero speed demand")?;
    let flat = DriveCycle::new(1.0, vec![20.0; 5], vec![0.0; 5]).unwrap();
    let expected = (0.5 * 1.225 * 400.0 * 0.27 * 2.4 + 0.015 * 1900.0 * 9.81) * 20.0;
    check(demand_power(&flat, &vp).unwrap().iter().all(|&p| close(p, expected, 1e-12)), "flat-road demand")?;
    let downhill = DriveCycle::new(1.0, vec![10.0; 5], vec![-0.1; 5]).unwrap();
    check(demand_power(&downhill, &vp).unwrap().iter().all(|&p| p < 0.0), "downhill demand")?;

    check(motor_speed(0.0, &vp) == 0.0, "motor speed at rest")?;
    let tenth = VehicleParams { wheel_radius: 1.0, final_drive_ratio: 0.1, ..vp };
    check(close(motor_speed(10.0, &tenth), 100.0, 1e-15), "motor speed ratio")?;
    check(motor_speed(5.0, &vp) < motor_speed(6.0, &vp), "motor speed monotone")?;

    let id = LossCoefficients::IDENTITY;
    let b = LossCoefficients { beta0: 0.0, beta1: 1.0, beta2: 1e-6 };
    check(inverse_powertrain_loss(7.0, &id).unwrap() == 7.0, "identity h⁻¹")?;
    check(close(inverse_powertrain_loss(1000.0, &b).unwrap(), 1001.0, 1e-14), "h⁻¹(1000)")?;
    check(close(inverse_powertrain_loss(b.domain_min(), &b).unwrap(), -0.25e6, 1e-12), "h⁻¹ vertex")?;
    check(close(powertrain_loss(1001.0, &b).unwrap(), 1000.0, 1e-12), "h(1001)")?;
    let tiny = LossCoefficients { beta0: 5.0, beta1: 1.2, beta2: 1e-12 };
    let affine = LossCoefficients { beta2: 0.0, ..tiny };
    check(close(powertrain_loss(3e3, &tiny).unwrap(), powertrain_loss(3e3, &affine).unwrap(), 1e-8), "β₂ → 0 limit")?;
    check(close(powertrain_loss(3e3, &affine).unwrap(), (3e3 - 5.0) / 1.2, 1e-15), "affine h")?;

    check(powertrain_bounds(0.0, &b, -250.0, 250.0).1 == 0.0, "ē at rest")?;
    check(powertrain_bounds(100.0, &b, -250.0, 250.0).1 == 25000.0, "ē = T̄ω")?;
    let steep = LossCoefficients { beta0: 0.0, beta1: 1.0, beta2: 1e-3 };
    check(powertrain_bounds(100.0, &steep, -250.0, 250.0).0 == steep.range_min(), "e̲ at vertex")?;

    check(battery_loss(0.0, &bp).unwrap() == 0.0 && battery_loss_deriv(0.0, &bp).unwrap() == 1.0, "g(0), g'(0)")?;
    check((battery_loss(1e5, &bp).unwrap() - 88888.9).abs() < 0.1, "g(100 kW)")?;
    check(close(bp.domain_cap(), 450_000.0, 1e-15), "domain cap")?;
    check(battery_loss(4.6e5, &bp).is_err(), "domain violation")?;
    check(battery_loss_inverse(0.0, &bp).unwrap() == 0.0, "g⁻¹(0)")?;
    check(close(battery_loss_inverse(battery_loss(1e5, &bp).unwrap(), &bp).unwrap(), 1e5, 1e-12), "g⁻¹∘g")?;
    check(close(battery_loss_inverse(bp.range_cap(), &bp).unwrap(), bp.domain_cap(), 1e-12), "range to domain")?;
    check(battery_loss_inverse(bp.range_cap() + 1.0, &bp).is_err(), "range violation")?;
    check(model::supercap_loss(0.0) == 0.0 && model::supercap_loss(5.0) == 5.0, "identity f")?;
    check(model::supercap_loss_deriv(-3.0) == 1.0, "f' = 1")?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cap = bp.domain_cap();
    for _ in 0..2000 {
        let (u1, u2) = (rng.random_range(-2e5..cap), rng.random_range(-2e5..cap));
        let a: f64 = rng.random_range(0.0..1.0);
        let mix = battery_loss(a * u1 + (1.0 - a) * u2, &bp).unwrap();
        let chord = a * battery_loss(u1, &bp).unwrap() + (1.0 - a) * battery_loss(u2, &bp).unwrap();
        check(mix >= chord - 1e-9, "concavity")?;

        let u = rng.random_range(-2e5..0.99 * cap);
        let h = 1e-3 * u.abs().max(1.0);
        let fd = (battery_loss(u + h, &bp).unwrap() - battery_loss(u - h, &bp).unwrap()) / (2.0 * h);
        let an = battery_loss_deriv(u, &bp).unwrap();
        check((fd - an).abs() <= 1e-6 * an.abs().max(1e-3), "finite-difference derivative")?;
        check(battery_loss(u + 1.0, &bp).unwrap() > battery_loss(u, &bp).unwrap(), "g increasing")?;
        let g = battery_loss(u, &bp).unwrap();
        check(if u >= 0.0 { g <= u } else { g.abs() >= u.abs() }, "dissipation")?;

        let map = MotorParams::default().map.coefficients(rng.random_range(0.0..800.0));
        let m = rng.random_range(map.domain_min().max(-1e5)..1e5);
        let back = powertrain_loss(inverse_powertrain_loss(m, &map).unwrap(), &map).unwrap();
        check((back - m).abs() <= 1e-9 * m.abs().max(1.0), "h∘h⁻¹")?;
        let x = rng.random_range(map.range_min().max(-1e5)..1e5);
        check(powertrain_loss(x + 1.0, &map).unwrap() > powertrain_loss(x, &map).unwrap(), "h increasing")?;
    }
    Ok(format!("{checks} model checks"))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut run = |id: &str, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {id} {name}: {detail} ({secs:.1} s)"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {id} {name}: {detail} ({secs:.1} s)");
            }
        }
    };
    run("C1", "banded solver equivalence", &mut c1_banded);
    run("C2", "small-instance global optimality", &mut c2_small_optimality);
    run("C3", "per-step update correctness", &mut c3_step_update);
    let runs = constraint_runs();
    run("C4", "constraint satisfaction at convergence", &mut || c4_constraints(&runs));
    run("C5", "piecewise-constant input and inactive upper line", &mut || c5_structure(&runs));
    run("C6", "baseline dominance", &mut c6_dominance);
    run("C7", "performance", &mut c7_performance);
    run("C8", "horizon-insensitive iteration count", &mut c8_horizon);
    run("C9", "model unit suite", &mut c9_models);
    if failed == 0 {
        println!("acceptance: all 9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
