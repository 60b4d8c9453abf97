use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const DEFAULT_TOML: &str = include_str!("../../../configs/default.toml");

fn powersplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_powersplit")).args(args).output().expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, name: &str, kind: &str, duration: usize, seed: u64) -> PathBuf {
    let path = dir.path().join(name);
    let out = powersplit(&[
        "gen-cycle",
        "--kind",
        kind,
        "--duration",
        &duration.to_string(),
        "--seed",
        &seed.to_string(),
        "-o",
        arg(&path),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn solve_writes_converged_trajectory_and_reproducible_metrics() {
    let dir = TempDir::new().unwrap();
    let cycle = gen(&dir, "mixed.csv", "mixed", 900, 7);
    let out_dir = dir.path().join("run");
    let out = powersplit(&["solve", arg(&cycle), "-o", arg(&out_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("Converged"));

    let traj = fs::read_to_string(out_dir.join("optimal.csv")).unwrap();
    let mut lines = traj.lines();
    assert_eq!(lines.next(), Some("t,d_W,u_W,v_W,b_W,x_J,y_J"));
    let times: Vec<usize> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(times, (0..900).collect::<Vec<_>>());

    let trace = fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert!(trace.starts_with("iter,r_norm,s_norm,objective\n"));
    assert!(trace.lines().count() > 2);

    // ryu output is a bijection on f64, so equal text means bit-identical metrics
    let written = fs::read_to_string(out_dir.join("metrics.json")).unwrap();
    let reread = powersplit(&["metrics", arg(&out_dir.join("optimal.csv")), "--name", "optimal"]);
    assert!(reread.status.success());
    assert_eq!(String::from_utf8(reread.stdout).unwrap().trim_end(), written.trim_end());
}

#[test]
fn identical_inputs_give_identical_outputs() {
    let dir = TempDir::new().unwrap();
    let a = gen(&dir, "a.csv", "urban", 400, 11);
    let b = gen(&dir, "b.csv", "urban", 400, 11);
    let c = gen(&dir, "c.csv", "urban", 400, 12);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());

    let parallel = write_config(&dir, "par.toml", &DEFAULT_TOML.replace("parallel = false", "parallel = true"));
    let mut outputs = Vec::new();
    for (i, config) in [None, None, Some(&parallel)].into_iter().enumerate() {
        let out_dir = dir.path().join(format!("run{i}"));
        let mut args = vec!["solve", arg(&a), "-o", arg(&out_dir)];
        if let Some(c) = config {
            args.extend(["-c", arg(c)]);
        }
        assert!(powersplit(&args).status.success());
        let files: Vec<Vec<u8>> =
            ["optimal.csv", "metrics.json", "trace.csv"].iter().map(|f| fs::read(out_dir.join(f)).unwrap()).collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn baseline_outputs() {
    let dir = TempDir::new().unwrap();
    let cycle = gen(&dir, "c.csv", "highway", 300, 3);
    for controller in ["all-battery", "low-pass"] {
        let out_dir = dir.path().join(controller);
        let out = powersplit(&["baseline", arg(&cycle), "--controller", controller, "-o", arg(&out_dir)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let written = fs::read_to_string(out_dir.join("metrics.json")).unwrap();
        let traj = out_dir.join(format!("{controller}.csv"));
        let reread = powersplit(&["metrics", arg(&traj), "--name", controller]);
        assert_eq!(String::from_utf8(reread.stdout).unwrap().trim_end(), written.trim_end());
    }
    let out = powersplit(&["baseline", arg(&cycle), "--controller", "fuzzy"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_ranks_optimal_first_on_energy() {
    let dir = TempDir::new().unwrap();
    let cycles = [gen(&dir, "u.csv", "urban", 600, 1), gen(&dir, "m.csv", "mixed", 600, 2)];
    let out_dir = dir.path().join("cmp");
    let out = powersplit(&["compare", arg(&cycles[0]), arg(&cycles[1]), "-o", arg(&out_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("== mean over 2 cycles"));

    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("compare.json")).unwrap()).unwrap();
    let mut reports: Vec<&serde_json::Value> = doc["cycles"].as_object().unwrap().values().collect();
    reports.push(&doc["mean"]);
    for report in reports {
        let energy = |c: &str| report[c]["energy"].as_f64().unwrap();
        assert!(energy("optimal") <= energy("all-battery"), "{report}");
        assert!(energy("optimal") <= energy("low-pass"), "{report}");
    }
}

#[test]
fn missing_config_key_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cycle = gen(&dir, "c.csv", "mixed", 100, 1);
    let text: String = DEFAULT_TOML.lines().filter(|l| !l.starts_with("rolling_resistance")).map(|l| format!("{l}\n")).collect();
    let config = write_config(&dir, "bad.toml", &text);
    let out = powersplit(&["solve", arg(&cycle), "-c", arg(&config)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rolling_resistance"));
}

#[test]
fn unreadable_inputs_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.csv");
    assert_eq!(powersplit(&["solve", arg(&missing)]).status.code(), Some(2));
    let garbage = write_config(&dir, "g.csv", "time_s,velocity_mps\n0,1\n");
    assert_eq!(powersplit(&["solve", arg(&garbage)]).status.code(), Some(2));
    assert_eq!(powersplit(&["solve"]).status.code(), Some(2));
}

#[test]
fn solver_failures_exit_one() {
    let dir = TempDir::new().unwrap();
    let cycle = gen(&dir, "c.csv", "mixed", 300, 5);
    let short = write_config(&dir, "short.toml", &DEFAULT_TOML.replace("max_iters = 100000", "max_iters = 3"));
    let out = powersplit(&["solve", arg(&cycle), "-c", arg(&short)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver stopped with status"));

    let weak = write_config(&dir, "weak.toml", &DEFAULT_TOML.replace("power_max = 70e3", "power_max = 1e3"));
    let out = powersplit(&["solve", arg(&cycle), "-c", arg(&weak)]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bench_reports_each_horizon() {
    let out = powersplit(&["bench", "--horizons", "50,100", "--kind", "urban", "--seed", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = stdout.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].trim_start().starts_with("50"));
    assert!(rows[1].trim_start().starts_with("100"));
}
