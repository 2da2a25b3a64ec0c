use std::path::Path;
use std::process::Command;

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn mcb_with(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mcb"));
    cmd.args(args).env_remove("MCB_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn mcb(args: &[&str]) -> Run {
    mcb_with(args, &[])
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

/// Parses the report and checks it against the report schema.
fn report(run: &Run) -> Value {
    let doc: Value = serde_json::from_str(&run.stdout).unwrap_or_else(|e| panic!("{e}: {}", run.stderr));
    let errors: Vec<String> = schema().iter_errors(&doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
    doc
}

fn ok(args: &[&str]) -> Value {
    let run = mcb(args);
    assert_eq!(run.code, 0, "{args:?}: {}", run.stderr);
    report(&run)
}

fn matrix_file(dir: &Path, rows: &[&[&str]]) -> String {
    let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
    let body = serde_json::json!({ "size": rows.len(), "rows": rows });
    let path = dir.join("p.json");
    std::fs::write(&path, body.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn pseudo_certificate_on_grid() {
    let doc = ok(&["finite", "pseudo", "--grid", "3x3", "--n0", "2"]);
    let r = &doc["result"];
    assert_eq!(r["certificate"]["epsilon"], "1/3");
    let pairs = r["certificate"]["argmin_pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 2);
    assert!(pairs.contains(&serde_json::json!([1, 9])));
    assert!(pairs.contains(&serde_json::json!([3, 7])));
    assert_eq!(r["steps_to_threshold"], 24);
}

#[test]
fn single_state_stationary_law() {
    let doc = ok(&["finite", "stationary", "--grid", "1x1"]);
    assert_eq!(doc["result"]["stationary"]["exact"], serde_json::json!(["1"]));
}

#[test]
fn exact_tv_curve_stays_below_both_bounds() {
    let run = mcb(&["finite", "tv-exact", "--grid", "3x3", "--n", "10", "--format", "both"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let (json, csv) = run.stdout.split_at(run.stdout.find("n,value").unwrap());
    let doc: Value = serde_json::from_str(json).unwrap();
    assert_eq!(doc["result"]["bound_violations"], 0);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,value,uniform_bound,pseudo_bound"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 11);
    for r in rows {
        assert!(r[1] <= r[2] && r[1] <= r[3], "{r:?}");
    }
}

#[test]
fn eigen_bound_report() {
    let doc = ok(&["finite", "eigen-bound", "--grid", "3x3"]);
    assert_eq!(doc["result"]["violations_of_exact_deviation"], 0);
}

#[test]
fn minorization_bound_crossings() {
    let doc = ok(&["bound", "t1", "--epsilon", "0.117", "--n0", "1", "--delta", "0.01"]);
    assert_eq!(doc["result"]["steps_to_threshold"], 38);
    let doc = ok(&["bound", "t1", "--epsilon", "1", "--n0", "1", "--delta", "0.5"]);
    assert_eq!(doc["result"]["steps_to_threshold"], 1);
    let doc = ok(&["bound", "t1", "--epsilon", "1/3", "--n0", "2"]);
    assert_eq!(doc["result"]["steps_to_threshold"], 24);
    assert_eq!(doc["result"]["bound"]["inputs"][0]["exact"], "1/3");
}

#[test]
fn point_process_preset_crosses_at_38() {
    let doc = ok(&["bound", "t1", "--preset", "point-process"]);
    assert_eq!(doc["result"]["steps_to_threshold"], 38);
}

#[test]
fn drift_bound_preset_meets_the_linear_schedule() {
    let doc = ok(&["bound", "t2", "--preset", "rwm-laplace", "--delta", "0.01"]);
    let r = &doc["result"];
    let n_star = r["steps_to_threshold"].as_u64().unwrap();
    assert!(n_star <= 120_000, "{n_star}");
    let eval = &r["evaluations"][0];
    assert_eq!(eval["n"], 120_000);
    assert_eq!(eval["j"], 274);
    assert!(eval["value"].as_f64().unwrap() < 0.01);

    let inputs = r["bound"]["inputs"].as_array().unwrap();
    let source = |name: &str| inputs.iter().find(|i| i["name"] == name).unwrap()["source"].clone();
    assert_eq!(source("lambda"), "preset");
    assert_eq!(source("alpha_inverse"), "computed");
    assert_eq!(source("B"), "computed");
    assert_eq!(source("Eh"), "preset");
}

#[test]
fn drift_bound_from_explicit_constants() {
    let e = (1.0f64).exp().to_string();
    let doc = ok(&[
        "bound", "t2", "--epsilon", "0.0169", "--n0", "2", "--lambda", "0.916", "--b", "0.285", "--d", &e, "--B",
        "20.04", "--eh", "2", "--at-n", "120000", "--at-j", "274",
    ]);
    let eval = &doc["result"]["evaluations"][0];
    assert!((eval["value"].as_f64().unwrap() - 0.00933).abs() < 5e-5);
    let inputs = doc["result"]["bound"]["inputs"].as_array().unwrap();
    assert!(inputs.iter().any(|i| i["name"] == "B" && i["source"] == "user-supplied"));
}

#[test]
fn drift_bound_rejects_small_d_with_the_inequality() {
    let run = mcb(&[
        "bound", "t2", "--epsilon", "0.01", "--n0", "2", "--lambda", "0.916", "--b", "0.285", "--d", "2", "--B",
        "20", "--eh", "2",
    ]);
    assert_eq!(run.code, 3);
    assert!(run.stderr.contains("b/(1-lambda) - 1"), "{}", run.stderr);
}

#[test]
fn drift_bound_missing_constant_is_a_usage_error() {
    let run = mcb(&["bound", "t2", "--epsilon", "0.01", "--n0", "2"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("--lambda"));
}

#[test]
fn grid_simulation_stays_below_the_bound() {
    let doc = ok(&["simulate", "--grid", "3x3", "--cert", "pseudo", "--n-max", "60", "--reps", "100000", "--seed", "42"]);
    assert_eq!(doc["seed"], 42);
    for row in doc["result"]["curve"].as_array().unwrap() {
        let n = row["n"].as_u64().unwrap();
        let bound = (2.0f64 / 3.0).powi((n / 2) as i32);
        assert!((row["bound"].as_f64().unwrap() - bound).abs() < 1e-12);
        let value = row["non_coupling"].as_f64().unwrap();
        assert!(value <= bound + 3.0 * row["se"].as_f64().unwrap(), "n = {n}");
    }
}

#[test]
fn halfline_simulation_matches_geometric_tail() {
    let doc = ok(&["simulate", "--halfline", "--reps", "10000", "--n-max", "12"]);
    for row in doc["result"]["curve"].as_array().unwrap() {
        let n = row["n"].as_u64().unwrap() as i32;
        let p = 0.5f64.powi(n);
        let se = (p * (1.0 - p) / 10_000.0).sqrt();
        assert!((row["non_coupling"].as_f64().unwrap() - p).abs() <= 4.0 * se + 1e-12, "n = {n}");
    }
}

#[test]
fn simulation_output_is_byte_identical_across_runs_and_worker_counts() {
    let args = ["simulate", "--grid", "3x3", "--reps", "5000", "--seed", "7", "--format", "both"];
    let a = mcb(&args);
    let b = mcb(&args);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let mut with_workers = args.to_vec();
    with_workers.extend(["--workers", "1"]);
    let seq = mcb(&with_workers);
    let last = with_workers.len() - 1;
    with_workers[last] = "3";
    let par = mcb(&with_workers);
    // The resolved config records the worker count, so compare results only.
    let result = |r: &Run| -> Value {
        let json = &r.stdout[..r.stdout.find("n,value").unwrap()];
        serde_json::from_str::<Value>(json).unwrap()["result"].clone()
    };
    assert_eq!(result(&seq), result(&par));
    assert_eq!(result(&seq), result(&a));
}

#[test]
fn seed_falls_back_to_environment() {
    let run = mcb_with(&["simulate", "--grid", "2x2", "--reps", "100", "--n-max", "4"], &[("MCB_SEED", "1234")]);
    assert_eq!(run.code, 0);
    assert_eq!(report(&run)["seed"], 1234);
    let args = ["simulate", "--grid", "2x2", "--reps", "100", "--n-max", "4", "--seed", "5"];
    let run = mcb_with(&args, &[("MCB_SEED", "1234")]);
    assert_eq!(report(&run)["seed"], 5);
}

#[test]
fn rwm_laplace_simulation_tracks_drift() {
    let doc = ok(&["simulate", "--rwm-laplace", "--reps", "300", "--n-max", "1000000", "--record-horizon", "40"]);
    let r = &doc["result"];
    assert_eq!(r["mode"], "small-set");
    let cap = doc["result"]["model"]["mean_v_cap"].as_f64().unwrap();
    for e in r["mean_lyapunov"].as_array().unwrap() {
        assert!(e["value"].as_f64().unwrap() <= cap + 3.0 * e["se"].as_f64().unwrap());
    }
}

#[test]
fn output_directory_receives_report_and_trajectory_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = mcb(&[
        "simulate", "--grid", "3x3", "--reps", "50", "--n-max", "6", "--trajectories", "2", "--format", "both",
        "--output", out,
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.is_empty());
    let json = std::fs::read_to_string(dir.path().join("simulate.json")).unwrap();
    let doc: Value = serde_json::from_str(&json).unwrap();
    assert!(schema().is_valid(&doc));
    let csv = std::fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    assert!(csv.starts_with("n,value,se,bound,empirical_tv,empirical_tv_se\n"));
    let traj = std::fs::read_to_string(dir.path().join("simulate-trajectories.csv")).unwrap();
    assert!(traj.starts_with("replication,n,x,x_prime,coupled\n"));
    assert_eq!(traj.lines().count(), 1 + 2 * 4);
}

#[test]
fn drift_condition_holds_for_laplace_preset() {
    let doc = ok(&["verify", "drift", "--preset", "rwm-laplace"]);
    assert_eq!(doc["result"]["passed"], true);
    assert_eq!(doc["result"]["lambda"], 0.916);
    assert_eq!(doc["result"]["b"], 0.285);
}

#[test]
fn too_small_lambda_fails_verification() {
    let run = mcb(&["verify", "drift", "--preset", "rwm-laplace", "--lambda", "0.5", "--b", "0"]);
    assert_eq!(run.code, 3);
    let doc = report(&run);
    assert_eq!(doc["status"], "fail");
    assert!(doc["result"]["max_violation"].as_f64().unwrap() > 0.0);
}

#[test]
fn minorization_conditions_hold_for_presets() {
    let doc = ok(&["verify", "minorization", "--preset", "halfline"]);
    assert_eq!(doc["result"]["report"]["passed"], true);
    assert_eq!(doc["result"]["report"]["epsilon"], 0.5);
    let doc = ok(&["verify", "minorization", "--preset", "rwm-laplace"]);
    assert_eq!(doc["result"]["report"]["passed"], true);
}

#[test]
fn overstated_minorization_fails_verification() {
    let run = mcb(&["verify", "minorization", "--preset", "halfline", "--epsilon", "0.6"]);
    assert_eq!(run.code, 3);
    assert_eq!(report(&run)["status"], "fail");
}

#[test]
fn usage_errors_exit_with_2() {
    assert_eq!(mcb(&["finite", "stationary", "--grid", "3by3"]).code, 2);
    assert_eq!(mcb(&["finite", "stationary"]).code, 2);
    assert_eq!(mcb(&["finite", "stationary", "--grid", "3x3", "--bogus"]).code, 2);
    assert_eq!(mcb(&["simulate", "--grid", "3x3", "--start", "10"]).code, 2);
    assert_eq!(mcb(&["simulate", "--grid", "3x3", "--workers", "0"]).code, 2);
    assert_eq!(mcb(&["verify", "drift", "--preset", "halfline"]).code, 2);
    let dir = tempfile::tempdir().unwrap();
    let path = matrix_file(dir.path(), &[&["1/2", "1/3"], &["0", "1"]]);
    assert_eq!(mcb(&["finite", "stationary", "--matrix", &path]).code, 2);
}

#[test]
fn mathematical_failures_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let reducible = matrix_file(dir.path(), &[&["1", "0"], &["0", "1"]]);
    let run = mcb(&["finite", "stationary", "--matrix", &reducible]);
    assert_eq!(run.code, 3);
    assert!(run.stderr.contains("not unique"), "{}", run.stderr);
    // Period 2 with n0 = 2: P^2 = I has no overlap, so no certificate exists.
    let periodic = matrix_file(dir.path(), &[&["0", "1"], &["1", "0"]]);
    assert_eq!(mcb(&["simulate", "--matrix", &periodic, "--n0", "2"]).code, 3);
}

#[test]
fn matrix_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = matrix_file(dir.path(), &[&["1/2", "1/2"], &["1/4", "3/4"]]);
    let doc = ok(&["finite", "stationary", "--matrix", &path]);
    assert_eq!(doc["result"]["stationary"]["exact"], serde_json::json!(["1/3", "2/3"]));
    let doc = ok(&["finite", "minorization", "--matrix", &path, "--n0", "1"]);
    assert_eq!(doc["result"]["certificate"]["epsilon"], "3/4");
}
