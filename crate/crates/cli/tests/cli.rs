use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_indeptest")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// Deterministic pseudo-noise: 30 rows x 10 columns from a small LCG.
fn noise_csv() -> String {
    let mut state = 12345u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    let mut s = (0..10).map(|j| format!("x{j}")).collect::<Vec<_>>().join(",");
    s.push('\n');
    for _ in 0..30 {
        let row: Vec<String> = (0..10).map(|_| format!("{:.6}", next())).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[test]
fn test_command_reports_every_test() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "noise.csv", &noise_csv());
    let out = run(&["test", &path, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["n"], 30);
    assert_eq!(v["p"], 10);
    assert_eq!(v["columns"][3], "x3");
    let decisions = v["decisions"].as_array().unwrap();
    let names: Vec<&str> = decisions.iter().map(|d| d["test_name"].as_str().unwrap()).collect();
    assert_eq!(names, ["t_star", "T_star", "t_c", "T_c"]);
    for d in decisions {
        let pv = d["p_value"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&pv));
        assert_eq!(d["reject"].as_bool().unwrap(), pv < 0.05);
    }
    for key in ["t", "T", "Q", "t_star", "T_star", "t_c", "T_c"] {
        assert!(v["statistics"][key].is_f64(), "{key}");
    }

    let again = run(&["test", &path, "--format", "json"]);
    assert_eq!(out.stdout, again.stdout);

    let text = stdout(&run(&["test", &path]));
    assert!(text.contains("t_star"));
    let subset = run(&["test", &path, "--tests", "T_c", "--format", "csv"]);
    let csv = stdout(&subset);
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("T_c,"));
}

#[test]
fn json_preserves_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "noise.csv", &noise_csv());
    let v: Value = serde_json::from_str(&stdout(&run(&["test", &path, "--format", "json"]))).unwrap();
    for key in ["t", "T", "t_star", "T_c"] {
        let text = v["statistics"][key].to_string();
        let digits = text.trim_start_matches(['-', '0', '.']).replace('.', "").len();
        assert!(digits >= 12, "{key} = {text}");
    }
}

#[test]
fn duplicated_columns() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("a,b,c\n");
    for k in 0..12 {
        let x = (k as f64 * 0.7).sin();
        text.push_str(&format!("{x},{},{x}\n", (k as f64 * 1.3).cos()));
    }
    let path = write(dir.path(), "dup.csv", &text);
    let out = run(&["test", &path, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["statistics"]["t"].as_f64().unwrap() >= 1.0);
    assert!(v["statistics"]["T"].is_null());
    for d in v["decisions"].as_array().unwrap() {
        match d["test_name"].as_str().unwrap() {
            "T_star" | "T_c" => assert!(d["error"].as_str().unwrap().contains("`c` and `a`")),
            _ => assert_eq!(d["reject"], true),
        }
    }
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "a,b\n1,2\n3,x\n4,5\n");
    let out = run(&["test", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3, column b"));

    let flat = write(dir.path(), "flat.csv", "a,b\n1,2\n1,3\n1,7\n");
    let out = run(&["test", &flat]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("column `a`"));

    assert_eq!(run(&["test", dir.path().join("missing.csv").to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["simulate"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--n", "15", "--p", "3", "--alpha", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--preset", "table1", "--n", "15"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--n", "15", "--p", "3", "--tests", "bogus"]).status.code(), Some(1));
    assert_eq!(run(&["--threads", "0", "validate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn single_cell_simulation() {
    let out = run(&["simulate", "--n", "15", "--p", "3", "--rho", "0", "--reps", "100", "--seed", "7", "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "test,n,p,rho,alpha,replications,seed,reject_rate,mc_se");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("t_star,15,3,0,0.05,100,7,"));
}

#[test]
fn invalid_cells_are_reported_inline() {
    let out = run(&["simulate", "--n", "15", "--p", "3", "--rho", "-0.6", "--reps", "10", "--format", "json", "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v[0]["error"].as_str().unwrap().contains("rho"));
    assert!(v[0]["reject_rate"].is_null());
}

#[test]
fn resume_skips_finished_cells() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.csv");
    let part = dir.path().join("part.csv");
    let args = |out: &Path, preset_reps: &str| {
        vec![
            "simulate".to_string(),
            "--preset".into(),
            "table1".into(),
            "--reps".into(),
            preset_reps.into(),
            "--tests".into(),
            "t_c".into(),
            "--quiet".into(),
            "--output".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let a = args(&full, "20");
    assert_eq!(run(&a.iter().map(String::as_str).collect::<Vec<_>>()).status.code(), Some(0));
    let full_text = std::fs::read_to_string(&full).unwrap();
    assert_eq!(full_text.lines().count(), 31);

    // keep the header and the first 12 cells, as if interrupted
    let head: String = full_text.lines().take(13).map(|l| format!("{l}\n")).collect();
    std::fs::write(&part, head).unwrap();
    let mut b = args(&part, "20");
    b.push("--resume".into());
    let out = run(&b.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&part).unwrap(), full_text);
}

#[test]
fn validate_reports_each_identity() {
    let out = run(&["validate", "--reps", "1000", "--seed", "3", "--format", "csv"]);
    assert!(matches!(out.status.code(), Some(0) | Some(3)));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 14);
    assert!(text.contains("mao_fourth_all_equal,20,1000,"));
    let again = run(&["validate", "--reps", "1000", "--seed", "3", "--format", "csv", "--threads", "1"]);
    assert_eq!(out.stdout, again.stdout);
}
