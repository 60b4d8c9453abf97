use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context};
use rayon::prelude::*;

use powersplit::admm::{self, SolveStatus};
use powersplit::baselines::{all_battery, low_pass_split};
use powersplit::metrics::{compute_metrics, MetricsReport};
use powersplit::model::{generate_cycle, CycleKind, DriveCycle};
use powersplit::problem::{build_problem, ProblemError, ProblemInstance};
use powersplit::Trajectory;

use crate::config::Config;
use crate::Controller;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// A controller or the solver failed on valid input.
    Solver = 1,
    /// Bad arguments, config or input files.
    Usage = 2,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: FailureKind,
    pub error: anyhow::Error,
}

pub type CmdResult<T = ()> = Result<T, Failure>;

trait Classify<T> {
    fn usage(self) -> CmdResult<T>;
    fn solver(self) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> CmdResult<T> {
        self.map_err(|e| Failure { kind: FailureKind::Usage, error: e.into() })
    }

    fn solver(self) -> CmdResult<T> {
        self.map_err(|e| Failure { kind: FailureKind::Solver, error: e.into() })
    }
}

fn load_cycle(path: &Path) -> CmdResult<DriveCycle> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display())).usage()?;
    DriveCycle::read_csv(file).with_context(|| format!("reading {}", path.display())).usage()
}

fn build(cycle: &DriveCycle, config: &Config, label: &Path) -> CmdResult<ProblemInstance> {
    build_problem(cycle, &config.vehicle, &config.battery, &config.supercap, &config.motor).map_err(|e| {
        let kind = match e {
            ProblemError::InfeasibleStep { .. } => FailureKind::Solver,
            _ => FailureKind::Usage,
        };
        Failure { kind, error: anyhow::Error::new(e).context(format!("building problem for {}", label.display())) }
    })
}

fn create(path: &Path) -> CmdResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).with_context(|| format!("creating {}", path.display())).usage()
}

fn ensure_dir(dir: &Path) -> CmdResult {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).usage()
}

fn write_trajectory(traj: &Trajectory, path: &Path) -> CmdResult {
    let mut w = create(path)?;
    traj.write_csv(&mut w).with_context(|| format!("writing {}", path.display())).usage()?;
    w.flush().with_context(|| format!("writing {}", path.display())).usage()
}

fn write_json(value: &serde_json::Value, path: &Path) -> CmdResult {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).with_context(|| format!("writing {}", path.display())).usage()?;
    writeln!(w).and_then(|_| w.flush()).with_context(|| format!("writing {}", path.display())).usage()
}

fn metrics_of(traj: &Trajectory, dt: f64) -> CmdResult<powersplit::metrics::Metrics> {
    compute_metrics(&traj.u, &traj.v, dt).solver()
}

pub fn solve(cycle_path: &Path, config: Option<&Path>, out: Option<&Path>) -> CmdResult {
    let config = Config::load(config).usage()?;
    let cycle = load_cycle(cycle_path)?;
    let instance = build(&cycle, &config, cycle_path)?;
    let settings = admm::AdmmSettings { trace: out.is_some(), ..config.solver.clone() };
    let start = Instant::now();
    let solution = admm::solve(&instance, &settings).solver()?;
    let elapsed = start.elapsed();
    let traj = solution.trajectory(&instance);
    let mut report = MetricsReport::new();
    report.push("optimal", metrics_of(&traj, cycle.dt)?);

    println!(
        "{:?} after {} iterations in {:.3} s: J = {:.1} J, r = {:.2}, s = {:.2}",
        solution.status,
        solution.iterations,
        elapsed.as_secs_f64(),
        solution.objective,
        solution.residuals.primal,
        solution.residuals.dual,
    );
    print!("{}", report.to_table());

    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_trajectory(&traj, &dir.join("optimal.csv"))?;
        write_json(&report.to_json(), &dir.join("metrics.json"))?;
        let trace_path = dir.join("trace.csv");
        let mut w = create(&trace_path)?;
        admm::write_trace_csv(&solution.trace, &mut w)
            .with_context(|| format!("writing {}", trace_path.display()))
            .usage()?;
    }
    match solution.status {
        SolveStatus::Converged => Ok(()),
        status => Err(anyhow!("solver stopped with status {status:?} after {} iterations", solution.iterations)).solver(),
    }
}

fn run_baseline(controller: Controller, instance: &ProblemInstance, config: &Config, dt: f64) -> CmdResult<Trajectory> {
    match controller {
        Controller::AllBattery => all_battery(instance),
        Controller::LowPass => low_pass_split(instance, &config.filter(dt)),
    }
    .with_context(|| format!("{} controller", controller.name()))
    .solver()
}

pub fn baseline(cycle_path: &Path, controller: Controller, config: Option<&Path>, out: Option<&Path>) -> CmdResult {
    let config = Config::load(config).usage()?;
    let cycle = load_cycle(cycle_path)?;
    let instance = build(&cycle, &config, cycle_path)?;
    let traj = run_baseline(controller, &instance, &config, cycle.dt)?;
    let mut report = MetricsReport::new();
    report.push(controller.name(), metrics_of(&traj, cycle.dt)?);
    print!("{}", report.to_table());
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_trajectory(&traj, &dir.join(format!("{}.csv", controller.name())))?;
        write_json(&report.to_json(), &dir.join("metrics.json"))?;
    }
    Ok(())
}

/// All-battery first, so percentages in the table are relative to it.
fn compare_one(path: &Path, config: &Config) -> CmdResult<(MetricsReport, SolveStatus)> {
    let cycle = load_cycle(path)?;
    let instance = build(&cycle, config, path)?;
    let mut report = MetricsReport::new();
    for controller in [Controller::AllBattery, Controller::LowPass] {
        let traj = run_baseline(controller, &instance, config, cycle.dt)?;
        report.push(controller.name(), metrics_of(&traj, cycle.dt)?);
    }
    let solution = admm::solve(&instance, &config.solver).solver()?;
    report.push("optimal", metrics_of(&solution.trajectory(&instance), cycle.dt)?);
    Ok((report, solution.status))
}

pub fn compare(cycles: &[std::path::PathBuf], config: Option<&Path>, out: Option<&Path>) -> CmdResult {
    let config = Config::load(config).usage()?;
    let results: Vec<CmdResult<(MetricsReport, SolveStatus)>> =
        cycles.par_iter().map(|p| compare_one(p, &config)).collect();
    let mut reports = Vec::with_capacity(cycles.len());
    let mut per_cycle = serde_json::Map::new();
    let mut unconverged = Vec::new();
    for (path, result) in cycles.iter().zip(results) {
        let (report, status) = result?;
        println!("== {} ({status:?})", path.display());
        print!("{}", report.to_table());
        if status != SolveStatus::Converged {
            unconverged.push(path.display().to_string());
        }
        per_cycle.insert(path.display().to_string(), report.to_json());
        reports.push(report);
    }
    let mean = MetricsReport::mean(&reports).solver()?;
    println!("== mean over {} cycles", reports.len());
    print!("{}", mean.to_table());
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let doc = serde_json::json!({ "cycles": per_cycle, "mean": mean.to_json() });
        write_json(&doc, &dir.join("compare.json"))?;
    }
    if unconverged.is_empty() {
        Ok(())
    } else {
        Err(anyhow!("solver did not converge on {}", unconverged.join(", "))).solver()
    }
}

pub fn bench(horizons: &[usize], kind: CycleKind, seed: u64, config: Option<&Path>) -> CmdResult {
    let config = Config::load(config).usage()?;
    let longest = horizons.iter().copied().max().ok_or_else(|| anyhow!("no horizons given")).usage()?;
    if horizons.iter().any(|&h| h < 3) {
        return Err(anyhow!("horizons must be at least 3 steps")).usage();
    }
    let full = generate_cycle(kind, longest, seed);
    println!("{:>8}{:>12}{:>14}{:>12}{:>14}", "T", "iterations", "status", "total ms", "µs/iter");
    for &h in horizons {
        let cycle = full.truncated(h).usage()?;
        let instance = build(&cycle, &config, Path::new(&format!("{kind} T={h}")))?;
        let start = Instant::now();
        let solution = admm::solve(&instance, &config.solver).solver()?;
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{:>8}{:>12}{:>14}{:>12.1}{:>14.1}",
            h,
            solution.iterations,
            format!("{:?}", solution.status),
            secs * 1e3,
            secs * 1e6 / solution.iterations.max(1) as f64
        );
    }
    Ok(())
}

pub fn gen_cycle(kind: CycleKind, duration: usize, seed: u64, out: Option<&Path>) -> CmdResult {
    if duration < 3 {
        return Err(anyhow!("duration must be at least 3 s")).usage();
    }
    let cycle = generate_cycle(kind, duration, seed);
    match out {
        Some(path) => {
            let mut w = create(path)?;
            cycle.write_csv(&mut w).usage()?;
            w.flush().usage()
        }
        None => cycle.write_csv(io::stdout().lock()).usage(),
    }
}

pub fn metrics(path: &Path, name: &str) -> CmdResult {
    let file = File::open(path).with_context(|| format!("opening {}", path.display())).usage()?;
    let traj = Trajectory::read_csv(file).with_context(|| format!("reading {}", path.display())).usage()?;
    let mut report = MetricsReport::new();
    report.push(name, compute_metrics(&traj.u, &traj.v, 1.0).usage()?);
    let text = serde_json::to_string_pretty(&report.to_json()).usage()?;
    println!("{text}");
    Ok(())
}
