//! Exit-code contract and artifact shapes of the `nscontract` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nscontract(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nscontract"))
        .args(args)
        .env("NSCONTRACT_LOG", "silent")
        .output()
        .unwrap()
}

fn run_with_report(dir: &Path, args: &[&str]) -> (i32, Value) {
    let report = dir.join("report.json");
    let mut all = vec!["run"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out-report", report.to_str().unwrap()]);
    let out = nscontract(&all);
    let code = out.status.code().unwrap();
    let v = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    (code, v)
}

#[test]
fn affine_run_certifies_limit_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = run_with_report(
        dir.path(),
        &[
            "--scenario",
            "affine",
            "--param",
            "a=0.5",
            "--param",
            "b=const:1",
            "--tol",
            "1e-10",
        ],
    );
    assert_eq!(code, 0);
    assert!((r["limit"][0].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(r["seed"], 0);
    assert_eq!(r["hypotheses"]["boundedness"]["verdict"], "Pass");
}

#[test]
fn counterexamples_exit_two_and_name_the_condition() {
    let dir = tempfile::tempdir().unwrap();
    for (name, cond) in [
        ("remark1", "(1) base boundedness"),
        ("cond2", "(2) fiber boundedness"),
        ("cond3", "(3) equicontinuity"),
    ] {
        let (code, r) = run_with_report(dir.path(), &["--scenario", name]);
        assert_eq!(code, 2, "{name}");
        assert_eq!(r["refusal"]["condition"], cond);
        assert_eq!(r["certification"], "none");
    }
    let (_, r) = run_with_report(dir.path(), &["--scenario", "cond3", "--start", "x=1,y=1"]);
    assert!(r["raw_limit"][0][0].as_f64().unwrap().abs() < 1e-9);
    assert!((r["raw_limit"][1][0].as_f64().unwrap() - 0.25).abs() < 1e-9);
}

#[test]
fn convergent_scenarios_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["--scenario", "affine-skew"][..],
        &["--scenario", "cocycle", "--param", "matrices=alternating"],
        &["--scenario", "smooth-graph", "--param", "grid_size=32"],
    ] {
        let (code, r) = run_with_report(dir.path(), args);
        assert_eq!(code, 0, "{args:?}: {r}");
        assert_eq!(r["status"], "certified");
    }
}

#[test]
fn non_convergence_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = run_with_report(dir.path(), &["--scenario", "affine", "--max-n", "3"]);
    assert_eq!(code, 3);
    assert_eq!(r["status"], "non-convergence");
}

#[test]
fn config_errors_exit_one() {
    for args in [
        &["run", "--scenario", "nope"][..],
        &["run", "--scenario", "affine", "--tol", "0"],
        &["run", "--scenario", "affine", "--param", "a=1.5"],
        &["run", "--scenario", "cocycle", "--param", "matrices=1,0,0,1"],
        &["run", "--config", "/nonexistent/cfg"],
        &["run"],
    ] {
        let out = nscontract(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let trace = dir.path().join("trace.json");
    std::fs::write(
        &cfg,
        format!(
            "scenario = affine\nparam.a = 0.5\nparam.b = geom:0.5\nseed = 4\nformat = json\nout_trace = {}\n",
            trace.display()
        ),
    )
    .unwrap();
    let out = nscontract(&["run", "--config", cfg.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(v["meta"]["seed"], 9);
    assert_eq!(v["meta"]["config_echo"]["param.b"], "geom:0.5");
    let last = v["rows"].as_array().unwrap().last().unwrap();
    assert!((last["point"][0].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-10);
}

#[test]
fn csv_trace_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let p = path.to_str().unwrap();
    nscontract(&["run", "--scenario", "affine", "--out-trace", p]);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("n,coord_0,step_distance,bound\n"));
    nscontract(&["run", "--scenario", "affine-skew", "--out-trace", p]);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,base_0,fiber_0,base_bound,fiber_step"));
    let cells: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(cells.len(), 5);
    // 17 significant digits: one leading digit, sixteen after the point
    assert_eq!(cells[1].split('e').next().unwrap().len(), 18);
}

#[test]
fn list_names_every_scenario() {
    let out = String::from_utf8(nscontract(&["list"]).stdout).unwrap();
    for name in [
        "remark1",
        "cond2",
        "cond3",
        "affine",
        "affine-skew",
        "smooth-graph",
        "cocycle",
    ] {
        assert!(out.lines().any(|l| l.starts_with(name)), "{name}");
    }
}
