use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const ONE_VAR: &str = r#"{"n":1,"c":[0],"d":[1],"blocks":[{"indices":[0],"p":1}],"ineq":{"H":[[1]],"K":[[0]],"p":[1]}}"#;

fn pho(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pho")).args(args).output().expect("run pho")
}

fn put(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(out: &Output) -> serde_json::Value {
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("JSON on stdout");
    v["report"].clone()
}

#[test]
fn dualize_then_solve_one_var() {
    let dir = TempDir::new().unwrap();
    let f = put(&dir, "onevar.json", ONE_VAR);
    let out = pho(&["dualize", s(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let dual = dir.path().join("onevar.dual.json");
    assert!(dual.exists());

    let out = pho(&["solve", "--dual", s(&dual)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["status"], "Optimal");
    assert!((r["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);

    let r = report(&pho(&["solve", "--lp", s(&dual)]));
    assert_eq!(r["value"].as_f64(), Some(1.0));
    let r = report(&pho(&["solve", "--brute", s(&f), "--box", "5"]));
    assert_eq!(r["value"].as_f64(), Some(1.0));
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let ok = put(&dir, "ok.json", ONE_VAR);
    assert_eq!(pho(&["validate", s(&ok)]).status.code(), Some(0));

    let overlap = put(
        &dir,
        "overlap.json",
        r#"{"n":2,"c":[0,0],"d":[1,1],"blocks":[{"indices":[0,1],"p":2},{"indices":[1],"p":1}]}"#,
    );
    let out = pho(&["validate", s(&overlap)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("pairwise disjoint"));

    let bad = put(&dir, "bad.json", r#"{"n": 1, "c": [0"#);
    let out = pho(&["validate", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    assert_eq!(pho(&["validate", "/nonexistent/problem.json"]).status.code(), Some(2));
    assert_eq!(pho(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn invalid_problem_is_semantic_failure() {
    let dir = TempDir::new().unwrap();
    let f = put(&dir, "short.json", r#"{"n":2,"c":[0],"d":[1],"blocks":[{"indices":[0,1],"p":2}]}"#);
    assert_eq!(pho(&["dualize", s(&f)]).status.code(), Some(1));
}

#[test]
fn omega_prints_negative_infinity_and_witness() {
    let dir = TempDir::new().unwrap();
    let f = put(&dir, "onevar.json", ONE_VAR);
    let at = put(&dir, "uv.json", r#"{"u":[],"v":[2]}"#);
    let r = report(&pho(&["eval", "--omega", s(&f), "--at", s(&at)]));
    assert_eq!(r["value"], "-inf");
    assert_eq!(r["witness"]["block"], 0);

    let at = put(&dir, "uv1.json", r#"{"u":[],"v":[1]}"#);
    let r = report(&pho(&["eval", "--omega", s(&f), "--at", s(&at)]));
    assert_eq!(r["value"].as_f64(), Some(1.0));

    let x = put(&dir, "x.json", r#"{"x":[-2]}"#);
    let r = report(&pho(&["eval", "--ph", s(&f), "--at", s(&x)]));
    assert_eq!(r["psi"][0].as_f64(), Some(2.0));
    assert_eq!(r["residuals"]["feasible"], false);
}

#[test]
fn transforms_write_problem_and_dual() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("avo", r#"{"c":[1],"a":[[1]],"b_abs":[[-0.5]],"b":[1]}"#),
        ("socp", r#"{"c":[1,0.5],"a":[[1,0]],"b":[2]}"#),
        (
            "gauge",
            r#"{"n":2,"objective":[{"weight":1,"matrix":[[1,0],[0,1]],"offset":[1,1],"p":"inf"}],
                "constraints":[{"weight":2,"matrix":[[1,1]],"offset":[0],"p":2}]}"#,
        ),
        (
            "group-lasso",
            r#"{"a":[[1,0,1],[0,1,1]],"b":[1,2],"lambda1":0.5,"lambda2":0.3,"groups":[[0],[1,2]],
                "m_prime":1,"p1":0.5,"p2":2}"#,
        ),
        ("lasso", r#"{"a":[[1,2]],"b":[1],"beta":0.5,"lambda1":1,"lambda2":0,"p1":1,"p2":2}"#),
        (
            "sum-norms",
            r#"{"terms":[{"lambda":1,"matrix":[[1,0]],"offset":[1],"p":2},
                         {"lambda":-0.5,"matrix":[[0,1]],"offset":[0],"p":1}],
                "linear":{"b_mat":[[1,1]],"b":[3]}}"#,
        ),
        (
            "binary",
            r#"{"direction":"maximize","objective":[1,2],
                "constraints":[{"coeffs":[1,1],"sense":"<=","rhs":1}]}"#,
        ),
    ];
    for (kind, params) in cases {
        let f = put(&dir, &format!("{kind}.json"), params);
        let out = pho(&["transform", "--kind", kind, s(&f)]);
        assert_eq!(out.status.code(), Some(0), "{kind}: {}", String::from_utf8_lossy(&out.stderr));
        let problem = dir.path().join(format!("{kind}.problem.json"));
        assert_eq!(pho(&["validate", s(&problem)]).status.code(), Some(0), "{kind}");
        let dual = dir.path().join(format!("{kind}.dual.json"));
        assert!(dual.exists(), "{kind}");
        if kind == "sum-norms" {
            assert!(!report(&out)["notes"].as_array().unwrap().is_empty());
        }
    }
    // The one-variable AVO instance has dual value 2.
    let dual = dir.path().join("avo.dual.json");
    let r = report(&pho(&["solve", "--lp", s(&dual)]));
    assert!((r["value"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn lp_file_solves() {
    let dir = TempDir::new().unwrap();
    let f = put(
        &dir,
        "lp.json",
        r#"{"direction":"maximize","objective":[1,1],"matrix":[[1,2],[3,1]],"rhs":[4,6],"senses":["<=","<="]}"#,
    );
    let r = report(&pho(&["solve", "--lp", s(&f)]));
    assert_eq!(r["status"], "Optimal");
    assert!((r["value"].as_f64().unwrap() - 2.8).abs() < 1e-12);
}

#[test]
fn check_prop1_passes_and_is_reproducible() {
    let a = pho(&["check", "--suite", "prop1", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    let b = pho(&["check", "--suite", "prop1", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(report(&a)["passed"], true);
}

#[test]
fn check_small_suites() {
    for suite in ["weak-duality", "lemma1", "theorem2"] {
        let out = pho(&["check", "--suite", suite, "--seed", "3", "--instances", "4"]);
        assert_eq!(out.status.code(), Some(0), "{suite}");
    }
}

#[test]
fn help_documents_schemas() {
    let out = pho(&["transform", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for field in ["b_abs", "m_prime", "safeguards", "constraints", "lambda2"] {
        assert!(text.contains(field), "{field}");
    }
    let text = String::from_utf8_lossy(&pho(&["validate", "--help"]).stdout).into_owned();
    assert!(text.contains("blocks") && text.contains("ineq"));
}
