use nugrass_cli::{run_suite, EXIT_FAIL, EXIT_INPUT, EXIT_PASS};
use serde_json::Value;
use std::process::Command;

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["nugrass"];
    all.extend_from_slice(args);
    let (code, out) = run_suite(all);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{args:?}: {e}\n{out}"));
    (code, v)
}

fn witnesses(v: &Value) -> Vec<String> {
    v["witnesses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| format!("{} | {} | {} | {}", w["at"], w["item"], w["expected"], w["got"]))
        .collect()
}

#[test]
fn atlas_verify_passes_exhaustively() {
    let (code, v) = run(&["atlas", "verify", "--k", "1", "--l", "1", "--m", "2", "--n", "2"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["details"]["pairs_exhaustive"], true);
    assert_eq!(v["details"]["triples_exhaustive"], true);
    for key in ["check", "status", "witnesses", "assumptions", "timing"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn atlas_build_lists_chart_matrices() {
    let (code, v) = run(&["atlas", "build", "--k", "1", "--l", "0", "--m", "2", "--n", "0"]);
    assert_eq!(code, EXIT_PASS);
    let charts = v["details"]["chart_matrices"].as_array().unwrap();
    assert_eq!(charts.len(), 2);
    assert_eq!(charts[0]["index"], "{1}");
    assert_eq!(charts[0]["matrix"], serde_json::json!([["1", "x1"]]));
}

#[test]
fn negated_transition_image_is_a_check_failure() {
    let (code, v) = run(&["atlas", "verify", "--k", "1", "--l", "1", "--m", "2", "--n", "2", "--corrupt", "1,3:2,3:x1"]);
    assert_eq!(code, EXIT_FAIL);
    assert!(witnesses(&v)[0].contains("I={1,3} J={2,3}"));
}

#[test]
fn bundle_verify_on_fixtures() {
    for f in ["line.json", "superline.json", "trivial3.json"] {
        let (code, v) = run(&["bundle", "verify", &fixture(f)]);
        assert_eq!(code, EXIT_PASS, "{f}: {v}");
    }
    let (code, v) = run(&["bundle", "verify", &fixture("corrupted.json")]);
    assert_eq!(code, EXIT_FAIL);
    assert!(witnesses(&v).iter().any(|w| w.contains("(x + 1)/x")), "{v}");
}

#[test]
fn input_errors_exit_with_two() {
    let (code, v) = run(&["bundle", "verify", &fixture("missing.json")]);
    assert_eq!(code, EXIT_INPUT);
    assert_eq!(v["status"], "error");
    assert_eq!(v["error"]["code"], "IoError");
    let (code, v) = run(&["gauss", "build", &fixture("line.json"), "--charts", "3"]);
    assert_eq!(code, EXIT_INPUT);
    assert_eq!(v["error"]["code"], "PreconditionFailed");
    let (code, v) = run(&["atlas", "verify", "--k", "1", "--l", "1", "--m", "2", "--n", "2", "--corrupt", "1,3"]);
    assert_eq!(code, EXIT_INPUT);
    assert_eq!(v["error"]["code"], "SchemaError");
    let (code, _) = run_suite(["nugrass", "atlas", "verify", "--k", "x"]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn gauss_classify_and_pullback_on_the_line_bundle() {
    let (code, v) = run(&["gauss", "build", &fixture("line.json"), "--charts", "2"]);
    assert_eq!(code, EXIT_PASS, "{v}");
    assert_eq!(v["details"]["rank"], "1|0");
    let (code, v) = run(&["classify", &fixture("line.json")]);
    assert_eq!(code, EXIT_PASS, "{v}");
    assert_eq!(v["details"]["target"], "(1,0,2,0)");
    let (code, v) = run(&["pullback", "verify", &fixture("line.json")]);
    assert_eq!(code, EXIT_PASS, "{v}");
}

#[test]
fn homotopy_between_two_chart_orders() {
    let (code, v) = run(&["homotopy", "endpoints", &fixture("line.json"), &fixture("line_swapped.json")]);
    assert_eq!(code, EXIT_PASS, "{v}");
    assert_eq!(v["details"]["order"], serde_json::json!([1, 0]));
    let (code, v) = run(&["homotopy", "endpoints", &fixture("line.json"), &fixture("superline.json")]);
    assert_eq!(code, EXIT_INPUT);
    assert_eq!(v["error"]["code"], "PreconditionFailed");
}

#[test]
fn retraction_and_its_corruption() {
    let (code, _) = run(&["retraction", "--m", "1", "--n", "1"]);
    assert_eq!(code, EXIT_PASS);
    let (code, v) = run(&["retraction", "--m", "1", "--n", "1", "--corrupt-h"]);
    assert_eq!(code, EXIT_FAIL);
    assert!(witnesses(&v)[0].contains("2*e1"));
}

#[test]
fn tower_of_depth_two() {
    let (code, v) = run(&["tower", "verify", "--k", "1", "--l", "1", "--depth", "2"]);
    assert_eq!(code, EXIT_PASS, "{v}");
    assert_eq!(v["details"]["levels"], serde_json::json!(["2|2", "3|3"]));
    assert_eq!(v["details"]["section_top"], "x1");
    let (code, _) = run(&["tower", "verify", "--k", "1", "--l", "1", "--depth", "1"]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn universality_and_dependent_rows() {
    let (code, v) = run(&["universality", &fixture("line.json"), "--level", "2,0", "--depth", "3"]);
    assert_eq!(code, EXIT_PASS, "{v}");
    let (code, v) = run(&["universality", &fixture("line.json"), "--level", "2,0", "--corrupt-basis"]);
    assert_eq!(code, EXIT_FAIL);
    assert!(witnesses(&v).iter().any(|w| w.contains("kernel of T")));
    let (code, _) = run_suite(["nugrass", "universality", &fixture("line.json"), "--level", "2"]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn reports_are_byte_identical_without_timing() {
    let args = ["nugrass", "--no-timing", "--threads", "3", "atlas", "verify", "--k", "2", "--l", "1", "--m", "3", "--n", "2", "--sample", "20", "--seed", "5"];
    let (c1, a) = run_suite(args);
    let (c2, b) = run_suite(args);
    assert_eq!((c1, c2), (EXIT_PASS, EXIT_PASS));
    assert_eq!(a, b);
    let mut single = args;
    single[3] = "1";
    assert_eq!(run_suite(single).1, a);
}

#[test]
fn binary_prints_the_report_and_sets_the_exit_code() {
    let out = Command::new(env!("CARGO_BIN_EXE_nugrass"))
        .args(["bundle", "verify", &fixture("negated_transition.json")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_FAIL));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["check"], "bundle.verify_cocycle");
    assert!(!v["witnesses"].as_array().unwrap().is_empty());
}
