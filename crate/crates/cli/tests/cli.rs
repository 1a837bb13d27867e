use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value as Json;

fn programs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/programs")
}

fn certinum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_certinum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<Json> {
    stdout(o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("{l}: {e}")))
        .collect()
}

const SQRT2: &str = "f = x^2 - 2, a = 1, b = 1.5, tol = 0.0001";

#[test]
fn run_bisection_terminates_with_iter_13() {
    let gcl = programs().join("bisection.gcl");
    let o = certinum(&["run", gcl.to_str().unwrap(), "--args", SQRT2]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let out = stdout(&o);
    assert!(out.contains("status=terminated"), "{out}");
    assert!(out.contains("iter=13 "), "{out}");
    assert!(out.contains("xmid=1.4142456054687500e0"), "{out}");
}

#[test]
fn trace_records_every_loop_head() {
    let gcl = programs().join("bisection.gcl");
    let o = certinum(&[
        "--json",
        "--trace",
        "run",
        gcl.to_str().unwrap(),
        "--args",
        SQRT2,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let heads: Vec<Json> = json_lines(&o)
        .into_iter()
        .filter(|r| r["record"] == "trace" && r["kind"] == "loop_head")
        .collect();
    // 13 iterations plus the exit test.
    assert_eq!(heads.len(), 14);
    assert_eq!(heads.last().unwrap()["vars"]["iter"], 13);
}

#[test]
fn check_bundled_specs_pass() {
    for spec in ["bisection.spec", "vec_scale.spec"] {
        let path = programs().join(spec);
        let o = certinum(&["check", path.to_str().unwrap()]);
        let out = stdout(&o);
        assert_eq!(o.status.code(), Some(0), "{spec}: {out}");
        assert!(out.contains("aggregate=pass"), "{out}");
    }
}

#[test]
fn falsify_reports_a_counterexample_with_exit_1() {
    let dir = std::env::temp_dir().join(format!("certinum-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let spec = dir.join("loose_tol.spec");
    let gcl = programs().join("bisection.gcl");
    // tol = 2(b - a): the loop never runs, but ⌈log2 1/2⌉ = -1 differs from iter = 0.
    std::fs::write(
        &spec,
        format!(
            "include {}\nrequires: tol > 0\nensures: iter = ⌈log 2 ((b - a) / tol)⌉\n\
             instance: f = x^2 - 2, a = 1, b = 1.5, tol = 1\n",
            gcl.display()
        ),
    )
    .unwrap();
    let o = certinum(&["--json", "check", spec.to_str().unwrap(), "--falsify"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let recs = json_lines(&o);
    let cx = recs
        .iter()
        .find(|r| r["record"] == "counterexample")
        .unwrap();
    assert_eq!(cx["verdict"], "post-violation");
    assert_eq!(cx["tol"], "1.0");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(certinum(&["run"]).status.code(), Some(2));
    assert_eq!(
        certinum(&["run", "/nonexistent.gcl"]).status.code(),
        Some(2)
    );
    assert_eq!(
        certinum(&["bisect", "--f", "x^", "--a", "0", "--b", "1", "--tol", "0.1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(certinum(&["--seed", "zz", "bisect"]).status.code(), Some(2));
    let gcl = programs().join("bisection.gcl");
    assert_eq!(
        certinum(&["run", gcl.to_str().unwrap(), "--args", "a = 1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn same_inputs_give_identical_bytes() {
    let spec = programs().join("bisection.spec");
    let args = ["--seed", "0x2a", "check", spec.to_str().unwrap()];
    let a = certinum(&args);
    let b = certinum(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("header command=check seed=0x2a "));
}

#[test]
fn json_numbers_round_trip() {
    let o = certinum(&[
        "--json", "bisect", "--f", "x^2 - 2", "--a", "1", "--b", "1.5", "--tol", "0.0001",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let recs = json_lines(&o);
    let r = recs.iter().find(|r| r["record"] == "bisection").unwrap();
    assert_eq!(r["xmid"].as_f64(), Some(1.41424560546875));
    assert_eq!(r["bracket_midpoint"].as_f64(), Some(1.414215087890625));
    assert_eq!(r["iter"], 13);
    assert_eq!(r["predicted_iter"], 13);
}

#[test]
fn negative_arguments_parse() {
    let o = certinum(&[
        "bisect", "--f", "x^2 - 2", "--a", "-3", "--b", "-1", "--tol", "0.001",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("lower=-1.41"));
}

#[test]
fn fixed_point_certificates() {
    let o = certinum(&[
        "fpm",
        "--f",
        "cos(x)",
        "--x0",
        "1",
        "--tol",
        "1e-10",
        "--max-iter",
        "200",
        "--certify",
        "c1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("kind=c1"));
    let o = certinum(&[
        "fpm",
        "--f",
        "0.5*x + 1",
        "--x0",
        "0",
        "--tol",
        "1e-10",
        "--max-iter",
        "200",
        "--certify",
        "linear",
    ]);
    // The linear certificate needs a rate.
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn derive_matches_jet_of_exp() {
    let o = certinum(&[
        "--json", "derive", "--f", "exp(x)", "--at", "0", "--order", "4",
    ]);
    let values: Vec<f64> = json_lines(&o)
        .iter()
        .filter(|r| r["record"] == "derivative")
        .map(|r| r["value"].as_f64().unwrap())
        .collect();
    assert_eq!(values, vec![1.0; 5]);
}
