use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

use meadowprob::lang::parse;
use meadowprob::solver::{verify_witness, SolverMode, Witness};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn meadowprob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meadowprob"))
        .args(args)
        .output()
        .unwrap()
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

#[test]
fn check_refutes_case_r() {
    let out = meadowprob(&["check", &path("example1_r.spec")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), golden("check_example1_r.out"));
    assert!(stdout(&out).contains("contradiction: 1/1000000 >= 1/125000"));
}

#[test]
fn check_finds_witness_for_case_p() {
    let out = meadowprob(&["check", &path("example1_p.spec")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), golden("check_example1_p.out"));
}

#[test]
fn check_json_round_trips() {
    let text = std::fs::read_to_string(fixture("example1_p.spec")).unwrap();
    let doc = parse(&text).unwrap();
    let out = meadowprob(&["--format", "json", "check", &path("example1_p.spec")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "sat");
    let w = Witness::from_json(doc.generators().unwrap(), &v["witness"]).unwrap();
    assert!(verify_witness(&doc, &w, SolverMode::Strict));

    let out = meadowprob(&["--format", "json", "check", &path("example1_r.spec")]);
    let v = json(&out);
    assert_eq!(v["status"], "unsat");
    let trace = v["trace"].as_array().unwrap();
    assert_eq!(
        trace.last().unwrap()["contradiction"],
        "1/1000000 >= 1/125000"
    );
    assert!(trace[..trace.len() - 1].iter().all(|s| s["op"].is_string()));
}

#[test]
fn eval_case_p_and_q() {
    for (spec, value) in [("example1_p.spec", "1/50000"), ("example1_q.spec", "1/250")] {
        let out = meadowprob(&["eval", &path(spec), "--query", "P(RD|NH)"]);
        assert_eq!(out.status.code(), Some(0));
        let text = stdout(&out);
        assert!(text.starts_with("note: "), "{text}");
        assert!(text.ends_with(&format!("P(RD | NH) = {value}\n")), "{text}");
    }
    let out = meadowprob(&[
        "--format",
        "json",
        "eval",
        &path("example1_p.spec"),
        "--query",
        "P(RD|NH)",
    ]);
    let v = json(&out);
    assert_eq!(v["queries"][0]["value"], "1/50000");
    assert!(v["caveat"].is_string());
}

#[test]
fn eval_refuses_inconsistent_specifications() {
    let out = meadowprob(&["eval", &path("example1_r.spec"), "--query", "P(RD|NH)"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stdout(&out).contains("P(RD | NH) ="));
    assert!(stdout(&out).contains("inconsistent"));
}

#[test]
fn eval_boxes_in_both_modes_and_in_a_given_model() {
    for mode in ["strict", "meadow"] {
        let out = meadowprob(&["--mode", mode, "eval", &path("example2.spec")]);
        assert_eq!(out.status.code(), Some(0));
        assert!(stdout(&out).ends_with("P(C = occ | A = empty | B = empty) = 1\n"));
    }
    let out = meadowprob(&[
        "--format",
        "json",
        "--mode",
        "meadow",
        "eval",
        &path("example2.spec"),
        "--model",
        &path("boxes_p1_zero.model"),
        "--query",
        "P(C = occ | B = empty)",
        "--query",
        "P(B = empty | B = empty)",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["satisfies_specification"], true);
    let values: Vec<&str> = v["queries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|q| q["value"].as_str().unwrap())
        .collect();
    assert_eq!(values, ["1", "0", "0"]);
    assert!(v["caveat"].is_null());
}

#[test]
fn update_models_and_specifications() {
    let out = meadowprob(&["update", &path("boxes_p1_zero.model"), "--evidence", "!B"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("degenerate evidence"));

    let out = meadowprob(&[
        "--format",
        "json",
        "update",
        &path("boxes_p1_zero.model"),
        "--evidence",
        "A",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "posterior");
    assert_eq!(v["model"]["weights"]["110"], "1");

    let out = meadowprob(&["update", &path("example1_p.spec"), "--evidence", "NH"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("11: 1/50000\n"));
}

#[test]
fn decompose_prints_guarded_equation() {
    let args = [
        "decompose",
        "--lhs",
        "P((x | y))",
        "--rhs",
        "P(x) + P(y) - P(x & y)",
        "--events",
        "x,y",
    ];
    let out = meadowprob(&args);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), golden("decompose_additivity.out"));

    let mut json_args = vec!["--format", "json"];
    json_args.extend(args);
    let v = json(&meadowprob(&json_args));
    let h: Vec<usize> = v["z_defs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| z["minterms"].as_array().unwrap().len())
        .collect();
    assert_eq!(h, [3, 2, 2, 1]);
    assert_eq!(v["u_vars"].as_array().unwrap().len(), 4);
}

#[test]
fn selftest_on_one_sample() {
    let out = meadowprob(&["selftest", "--trials", "1", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).ends_with("47/47 items passed\n"));
    let out = meadowprob(&[
        "--format", "json", "selftest", "--trials", "1", "--seed", "0",
    ]);
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn errors_exit_with_two() {
    let out = meadowprob(&["check", &path("bad.spec")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).starts_with("error: 3:1: syntax error"),
        "{}",
        stderr(&out)
    );
    assert!(stdout(&out).is_empty());

    let out = meadowprob(&["check", "--inline", "event a; P(b) = 1;"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("b"));

    let out = meadowprob(&["check", "--inline", "event a; independent(a, a);"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("quadratic"));

    let out = meadowprob(&["check", &path("missing.spec")]);
    assert_eq!(out.status.code(), Some(2));

    let out = meadowprob(&["decompose", "--lhs", "P(w)", "--rhs", "0", "--events", "x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn inputs_are_exclusive() {
    let out = meadowprob(&["check", &path("example1_p.spec"), "--inline", "event a;"]);
    assert_eq!(out.status.code(), Some(2));
    let out = meadowprob(&["check"]);
    assert_eq!(out.status.code(), Some(2));
    let out = meadowprob(&["selftest", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generator_cap_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_meadowprob"))
        .args(["check", "--inline", "event a; event b; event c;"])
        .env("MEADOWPROB_MAX_GENERATORS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
