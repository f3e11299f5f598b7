//! End-to-end tests of the `campaign` binary: artifact layout, exit codes,
//! determinism and cross-subcommand consistency.

use std::path::Path;
use std::process::{Command, Output};

fn campaign() -> Command {
    Command::new(env!("CARGO_BIN_EXE_campaign"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    campaign().args(args).output().unwrap()
}

fn small_scenario(out_dir: &Path, strategy: &str) -> String {
    format!(
        r#"
[model]
groups = 2
time_points = 11
strategy = "{strategy}"

[solver]
seed = 7
n_starts = 2
max_inner = 400

[output]
dir = "{}"
"#,
        out_dir.display()
    )
}

#[test]
fn solve_writes_all_artifacts_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "s.toml", &small_scenario(&out, "optimal"));
    let result = run(&["solve", cfg.to_str().unwrap()]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    for artifact in [
        "schedule.csv",
        "trajectory.csv",
        "resource_rates.csv",
        "summary.json",
        "degree_pmf.csv",
        "degree_cdf.csv",
    ] {
        assert!(out.join(artifact).exists(), "missing {artifact}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["strategy_details"]["converged"].as_bool().unwrap());
    assert!(summary["spend_residual_rel"].as_f64().unwrap() <= 1e-6);
    // no stray temp files from the atomic writes
    assert!(std::fs::read_dir(&out)
        .unwrap()
        .all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
}

#[test]
fn none_strategy_writes_trajectory_only() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "s.toml", &small_scenario(&out, "none"));
    let result = run(&["solve", cfg.to_str().unwrap()]);
    assert!(result.status.success());
    assert!(out.join("trajectory.csv").exists());
    assert!(out.join("summary.json").exists());
    assert!(!out.join("schedule.csv").exists());
    assert!(!out.join("resource_rates.csv").exists());
}

#[test]
fn malformed_config_exits_2_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(
        tmp.path(),
        "bad.toml",
        &format!(
            "[model]\nnot_a_real_key = 1\n\n[output]\ndir = \"{}\"\n",
            out.display()
        ),
    );
    let result = run(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    assert!(!out.exists(), "no artifacts may be written for a bad config");
}

#[test]
fn infeasible_budget_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(
        tmp.path(),
        "s.toml",
        &format!(
            "[model]\ngroups = 2\ntime_points = 11\nbudget = 10.0\n\n[output]\ndir = \"{}\"\n",
            out.display()
        ),
    );
    let result = run(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(3));
}

#[test]
fn iteration_starved_solver_exits_4_but_writes_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(
        tmp.path(),
        "s.toml",
        &format!(
            r#"
[model]
groups = 2
time_points = 11

[solver]
max_inner = 1
max_outer = 1
n_starts = 1
tol_grad = 1e-12

[output]
dir = "{}"
"#,
            out.display()
        ),
    );
    let result = run(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(4));
    assert!(out.join("summary.json").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(
        summary["strategy_details"]["converged"].as_bool(),
        Some(false)
    );
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    for out in [&out_a, &out_b] {
        let cfg = write_config(tmp.path(), "s.toml", &small_scenario(out, "optimal"));
        assert!(run(&["solve", cfg.to_str().unwrap()]).status.success());
    }
    for artifact in ["schedule.csv", "trajectory.csv", "resource_rates.csv"] {
        let a = std::fs::read(out_a.join(artifact)).unwrap();
        let b = std::fs::read(out_b.join(artifact)).unwrap();
        assert_eq!(a, b, "{artifact} differs between identical runs");
    }
}

#[test]
fn output_root_env_var_relocates_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("root");
    let cfg = write_config(
        tmp.path(),
        "s.toml",
        "[model]\ngroups = 2\ntime_points = 11\nstrategy = \"none\"\n\n[output]\ndir = \"sub\"\n",
    );
    let result = campaign()
        .args(["solve", cfg.to_str().unwrap()])
        .env("CAMPAIGN_OUTPUT_ROOT", &root)
        .output()
        .unwrap();
    assert!(result.status.success());
    assert!(root.join("sub").join("trajectory.csv").exists());
}

#[test]
fn baseline_writes_calibrated_schedules() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "s.toml", &small_scenario(&out, "optimal"));
    let result = run(&["baseline", cfg.to_str().unwrap()]);
    assert!(result.status.success());
    for artifact in [
        "baseline_none_trajectory.csv",
        "baseline_static_schedule.csv",
        "baseline_static_trajectory.csv",
        "baseline_bang_bang_schedule.csv",
        "baseline_bang_bang_trajectory.csv",
        "summary.json",
    ] {
        assert!(out.join(artifact).exists(), "missing {artifact}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let j_static = summary["static"]["objective"].as_f64().unwrap();
    let j_bang = summary["bang_bang"]["objective"].as_f64().unwrap();
    let j_none = summary["none"]["objective"].as_f64().unwrap();
    assert!(j_static >= j_bang && j_bang > j_none);
}

fn parse_sweep_row(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn field(header: &[String], row: &[String], name: &str) -> f64 {
    let idx = header.iter().position(|h| h == name).unwrap();
    row[idx].parse().unwrap()
}

#[test]
fn sweep_rows_are_self_consistent_and_match_solve() {
    let tmp = tempfile::tempdir().unwrap();
    let out_sweep = tmp.path().join("sweep");
    let out_solve = tmp.path().join("solve");

    // default budget on the same scenario, once through each subcommand
    let base = small_scenario(&out_solve, "optimal");
    let cfg_solve = write_config(tmp.path(), "solve.toml", &base);
    assert!(run(&["solve", cfg_solve.to_str().unwrap()]).status.success());

    let sweep_cfg = format!(
        "{}\n[sweep]\nparameter = \"B\"\nvalues = [0.0018]\n",
        small_scenario(&out_sweep, "optimal")
    );
    let cfg_sweep = write_config(tmp.path(), "sweep.toml", &sweep_cfg);
    assert!(run(&["sweep", cfg_sweep.to_str().unwrap()]).status.success());

    let csv = std::fs::read_to_string(out_sweep.join("sweep.csv")).unwrap();
    let (header, rows) = parse_sweep_row(&csv);
    assert_eq!(rows.len(), 1);
    let row = &rows[0];

    // improvement percentages recompute from the emitted J columns
    let j_opt = field(&header, row, "J_opt");
    let j_static = field(&header, row, "J_static");
    let j_bang = field(&header, row, "J_bang");
    let impr_static = field(&header, row, "impr_vs_static_pct");
    let impr_bang = field(&header, row, "impr_vs_bang_pct");
    assert!((impr_static - 100.0 * (j_opt - j_static) / j_static).abs() < 1e-9);
    assert!((impr_bang - 100.0 * (j_opt - j_bang) / j_bang).abs() < 1e-9);

    // a single-value sweep reproduces the solve summary numbers
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_solve.join("summary.json")).unwrap(),
    )
    .unwrap();
    let solved_j = summary["objective"].as_f64().unwrap();
    assert!(
        (j_opt - solved_j).abs() <= 1e-12 * solved_j.abs().max(1.0),
        "sweep J_opt {j_opt} vs solve {solved_j}"
    );
    let j_none = field(&header, row, "J_none");
    let uncontrolled = summary["uncontrolled_objective"].as_f64().unwrap();
    assert!((j_none - uncontrolled).abs() <= 1e-15);
}

#[test]
fn validation_reports_deviation_and_network_ordering() {
    let tmp = tempfile::tempdir().unwrap();
    let mut finals = Vec::new();
    for (tag, network) in [
        ("er", "[network]\nkind = \"poisson\"\nlambda = 23.60\nk_min = 1\nk_max = 60\n"),
        (
            "pl2",
            "[network]\nkind = \"power_law\"\ngamma = 2.0\nk_min = 6\nk_max = 300\n",
        ),
    ] {
        let out = tmp.path().join(tag);
        let cfg_text = format!(
            r#"{network}
[model]
groups = 2
time_points = 11
strategy = "none"
alpha = 1.0
v_max = 0.0

[validation]
n_nodes = 4000
n_runs = 2

[output]
dir = "{}"
"#,
            out.display()
        );
        let cfg = write_config(tmp.path(), &format!("{tag}.toml"), &cfg_text);
        let result = run(&["validate", cfg.to_str().unwrap()]);
        assert!(
            result.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&result.stderr)
        );
        assert!(String::from_utf8_lossy(&result.stdout).contains("sup-norm deviation"));
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap())
                .unwrap();
        finals.push(summary["final_mean_infected"].as_f64().unwrap());
        assert!(out.join("validation.csv").exists());
    }
    // heavier-tailed network spreads further by the deadline
    assert!(finals[1] > finals[0], "PL2 {} vs ER {}", finals[1], finals[0]);
}

#[test]
fn single_run_validation_has_zero_std() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg_text = format!(
        r#"
[model]
groups = 2
time_points = 11
strategy = "none"

[validation]
n_nodes = 1000
n_runs = 1

[output]
dir = "{}"
"#,
        out.display()
    );
    let cfg = write_config(tmp.path(), "v.toml", &cfg_text);
    assert!(run(&["validate", cfg.to_str().unwrap()]).status.success());
    let csv = std::fs::read_to_string(out.join("validation.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let std_col: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(std_col, 0.0);
    }
}
