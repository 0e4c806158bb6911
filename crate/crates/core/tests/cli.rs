use std::path::Path;
use std::process::{Command, Output};

const GHZ: &str = "[[[[0.7071067811865476,0],[0,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[0.7071067811865476,0]]]]";
const BELL: &str = "[[[0.7071067811865476,0],[0,0]],[[0,0],[0.7071067811865476,0]]]";

fn entmono(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entmono"))
        .current_dir(dir)
        .env_remove("ENTMONO_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn workdir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ghz.json"), GHZ).unwrap();
    std::fs::write(dir.path().join("bell.json"), BELL).unwrap();
    dir
}

#[test]
fn ghz_tripartite_value() {
    let dir = workdir();
    let o = entmono(dir.path(), &["tripartite", "--state", "ghz.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), r#"{"value":1.0}"#);
    for route in ["m-svd", "rho-product", "c-side"] {
        let o = entmono(
            dir.path(),
            &["tripartite", "--state", "ghz.json", "--route", route],
        );
        assert_eq!(stdout(&o).trim(), r#"{"value":1.0}"#, "{route}");
    }
}

#[test]
fn scalar_commands() {
    let dir = workdir();
    let o = entmono(
        dir.path(),
        &["bipartite", "--state", "bell.json", "--frame", "bell"],
    );
    assert_eq!(stdout(&o).trim(), r#"{"value":1.0}"#);
    let o = entmono(dir.path(), &["tangle", "--state", "ghz.json"]);
    assert_eq!(stdout(&o).trim(), r#"{"value":1.0}"#);
    let o = entmono(dir.path(), &["concurrence", "--state", "ghz.json"]);
    assert_eq!(stdout(&o).trim(), r#"{"value":0.0}"#);

    let rho = "[[[0.5,0],[0,0],[0,0],[0.5,0]],[[0,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]],[[0.5,0],[0,0],[0,0],[0.5,0]]]";
    std::fs::write(dir.path().join("rho.json"), rho).unwrap();
    let o = entmono(dir.path(), &["concurrence", "--rho", "rho.json"]);
    assert_eq!(stdout(&o).trim(), r#"{"value":1.0}"#);
}

#[test]
fn invalid_input_exits_one() {
    let dir = workdir();
    std::fs::write(dir.path().join("bad.json"), "[[[1,0]],[[0,0],[1,0]]]").unwrap();
    let not_psd = "[[[1.5,0],[0,0]],[[0,0],[-0.5,0]]]";
    std::fs::write(dir.path().join("neg.json"), not_psd).unwrap();
    for args in [
        vec!["spinchain", "--lambda-min", "2", "--lambda-max", "1"],
        vec!["bipartite", "--state", "missing.json"],
        vec!["bipartite", "--state", "bad.json"],
        vec!["concurrence", "--rho", "neg.json"],
        vec!["tangle", "--state", "bell.json"],
        vec!["fuzz", "--shape", "2,2", "--parties", "C"],
        vec!["no-such-command"],
    ] {
        let o = entmono(dir.path(), &args);
        assert_eq!(
            o.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn help_and_version_exit_zero() {
    let dir = workdir();
    assert_eq!(entmono(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(entmono(dir.path(), &["--version"]).status.code(), Some(0));
}

#[test]
fn tampered_fuzz_exits_three() {
    let dir = workdir();
    let args = [
        "fuzz",
        "--shape",
        "2,2,2",
        "--trials",
        "50",
        "--tamper-branch-bias",
        "0.1",
    ];
    let o = entmono(dir.path(), &args);
    assert_eq!(o.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn fuzz_report_is_reproducible() {
    let dir = workdir();
    let args = [
        "fuzz", "--shape", "2,2,3", "--trials", "300", "--seed", "7", "--report", "r.json",
    ];
    let first = entmono(dir.path(), &args);
    assert_eq!(first.status.code(), Some(0));
    let report = std::fs::read(dir.path().join("r.json")).unwrap();
    let second = entmono(dir.path(), &args);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(report, std::fs::read(dir.path().join("r.json")).unwrap());
    let parsed: serde_json::Value = serde_json::from_slice(&report).unwrap();
    assert_eq!(parsed["passed"], true);
    assert_eq!(parsed["trials_run"], 300);
}

#[test]
fn default_scan_writes_csv() {
    let dir = workdir();
    let o = entmono(dir.path(), &["spinchain", "--svg", "fig.svg"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("spinchain.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2002);
    assert_eq!(lines[0], "lambda,G,E,C,dE_dlambda,dC_dlambda");
    assert!(lines[2001].starts_with("2.5,"));
    let svg = std::fs::read_to_string(dir.path().join("fig.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["rows"], 2001);
    assert_eq!(summary["kinks"]["E"].as_array().unwrap().len(), 1);
}

#[test]
fn scan_output_independent_of_thread_count() {
    let dir = workdir();
    let run = |threads: &str, out: &str| {
        Command::new(env!("CARGO_BIN_EXE_entmono"))
            .current_dir(dir.path())
            .env("ENTMONO_THREADS", threads)
            .args(["spinchain", "--steps", "501", "--out", out])
            .output()
            .unwrap()
    };
    let a = run("1", "a.csv");
    let b = run("4", "b.csv");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout.len(), b.stdout.len());
    assert_eq!(
        std::fs::read(dir.path().join("a.csv")).unwrap(),
        std::fs::read(dir.path().join("b.csv")).unwrap()
    );
    assert_eq!(run("0", "c.csv").status.code(), Some(1));
    assert_eq!(run("many", "c.csv").status.code(), Some(1));
}
