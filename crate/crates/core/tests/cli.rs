use std::fs;
use std::path::{Path, PathBuf};

use chainsched::cli::run;
use serde_json::Value;
use tempfile::TempDir;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn chainsched(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("chainsched").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes the two-processor example scenario for `lambda` into `dir`.
fn example_scenario(dir: &TempDir, lambda: &str) -> PathBuf {
    let file = dir.path().join(format!("example-{}.json", lambda.replace('/', "_")));
    let r = chainsched(&["example", "--lambda", lambda, "--emit-scenario", "--out", path(&file)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    file
}

fn stderr_json(r: &Outcome) -> Value {
    serde_json::from_str(r.stderr.trim()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {}", r.stderr))
}

#[test]
fn solve_reports_the_exact_optimum() {
    let dir = TempDir::new().unwrap();
    let sc = example_scenario(&dir, "2");
    let r = chainsched(&["solve", "--scenario", path(&sc)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["makespan"], "28/13");
}

#[test]
fn float_mode_prints_the_same_optimum() {
    let dir = TempDir::new().unwrap();
    let sc = example_scenario(&dir, "2");
    let r = chainsched(&["--mode", "float", "solve", "--scenario", path(&sc)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["makespan_decimal"], "2.15384615385");
}

#[test]
fn example_summary_line() {
    let r = chainsched(&["example", "--lambda", "1/2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout.lines().next().unwrap(), "HeuristicIncomplete; coverage bound 1/2; LP(1,1) makespan 7/10");
    let r = chainsched(&["example", "--lambda", "2"]);
    assert!(r.stdout.starts_with("HeuristicSingle; heuristic makespan 11/5; LP(1,1) makespan 28/13; gap 3/65\n"));
}

#[test]
fn example_grid_has_one_row_per_lambda() {
    let r = chainsched(&["example", "--lambda-from", "1/2", "--lambda-to", "2", "--lambda-step", "1/2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("lambda,"));
    assert!(lines[4].starts_with("2,"));
}

#[test]
fn written_schedules_validate() {
    let dir = TempDir::new().unwrap();
    let sc = example_scenario(&dir, "3/2");
    let sched = dir.path().join("opt.json");
    let r = chainsched(&["solve", "--scenario", path(&sc), "--q", "2", "--out", path(&sched)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let plan = dir.path().join("plan.json");
    let mut scenario: Value = serde_json::from_str(&fs::read_to_string(&sc).unwrap()).unwrap();
    scenario["plan"]["q"] = serde_json::json!([2, 2]);
    fs::write(&plan, scenario.to_string()).unwrap();
    let r = chainsched(&["validate", "--scenario", path(&plan), "--schedule", path(&sched)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let report: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(report["feasible"], true);
}

#[test]
fn short_fractions_fail_validation_naming_the_family() {
    let dir = TempDir::new().unwrap();
    let sc = example_scenario(&dir, "2");
    let r = chainsched(&["solve", "--scenario", path(&sc)]);
    let mut s: Value = serde_json::from_str(&r.stdout).unwrap();
    // Shrink load 1's first fraction so its total is 0.999 short of one.
    let g = s["gamma"][0][0][0].as_str().unwrap().to_string();
    let shrunk = chainsched::rational::parse_rational(&g).unwrap() - chainsched::rational::ratio(1, 1000);
    s["gamma"][0][0][0] = Value::String(chainsched::rational::to_exact_string(&shrunk));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, s.to_string()).unwrap();

    let r = chainsched(&["validate", "--scenario", path(&sc), "--schedule", path(&bad)]);
    assert_eq!(r.code, 1);
    let err = stderr_json(&r);
    assert_eq!(err["error"], "infeasible");
    let families: Vec<u64> = err["detail"]["families"].as_array().unwrap().iter().map(|f| f.as_u64().unwrap()).collect();
    assert!(families.contains(&12), "{families:?}");
    let report: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(report["feasible"], false);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let sc = example_scenario(&dir, "5/4");
    for args in [
        vec!["solve", "--scenario", path(&sc), "--q", "2,3"],
        vec!["sweep", "--scenario", path(&sc), "--q-max", "3"],
        vec!["export-lp", "--scenario", path(&sc), "--format", "mps"],
        vec!["gantt", "--scenario", path(&sc), "--format", "svg"],
    ] {
        let a = chainsched(&args);
        let b = chainsched(&args);
        assert_eq!(a.code, 0, "{args:?}: {}", a.stderr);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn refine_splits_without_delay() {
    let dir = TempDir::new().unwrap();
    let sc = example_scenario(&dir, "2");
    let r = chainsched(&["refine", "--scenario", path(&sc), "--split", "1,1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["plan"]["q"], serde_json::json!([2, 1]));
    let m = chainsched::rational::parse_rational(v["makespan"].as_str().unwrap()).unwrap();
    assert!(m <= chainsched::rational::ratio(28, 13));
}

#[test]
fn missing_files_exit_two() {
    let r = chainsched(&["solve", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(r.code, 2);
    assert_eq!(stderr_json(&r)["error"], "io");
}

#[test]
fn malformed_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"platform": {"w": ["1"], "z": []}, "loads": {"v_comm": ["-1"], "v_comp": ["1"]}}"#).unwrap();
    let r = chainsched(&["solve", "--scenario", path(&bad)]);
    assert_eq!(r.code, 2);
    assert_eq!(stderr_json(&r)["error"], "structural");

    fs::write(&bad, "not json").unwrap();
    assert_eq!(chainsched(&["solve", "--scenario", path(&bad)]).code, 2);

    let r = chainsched(&["solve"]);
    assert_eq!(r.code, 2);
    assert_eq!(stderr_json(&r)["error"], "usage");
}
