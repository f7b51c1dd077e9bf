use std::path::{Path, PathBuf};
use std::process::Command;

use cardionet_core::cvd_fixture;
use cardionet_core::inference::query_conditional;
use cardionet_core::io::{parse_network, parse_structure, serialize_network, serialize_structure};
use cardionet_core::learning::forward_sample;
use cardionet_core::{Dag, Evidence};
use cardionet_interfaces::run_cli;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cardionet"))
}

/// Runs in-process and returns (code, stdout, stderr).
fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(args.iter().copied(), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn value(stdout: &str, key: &str) -> String {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('\t')))
        .unwrap_or_else(|| panic!("no {key} in {stdout:?}"))
        .to_string()
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("cardionet-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn table3_query_through_the_binary() {
    let out = bin()
        .args(["query", "--net", "fixture", "--evidence", "v2=(64-74]", "--target", "v7=<6h"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let p: f64 = value(&stdout, "probability").parse().unwrap();
    let direct = query_conditional(
        &cvd_fixture(),
        &Evidence::new().with("v2", "(64-74]"),
        &Evidence::new().with("v7", "<6h"),
    )
    .unwrap();
    assert_eq!(p, direct.probability);
    assert!((p - 0.1964).abs() <= 1e-4);
}

#[test]
fn exit_codes_follow_the_error_class() {
    let (code, _, err) = run(&["query", "--net", "fixture", "--evidence", "v7=<6h", "--target", "v7=<6h"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("OverlapError:"), "{err}");

    let (code, _, err) = run(&["query", "--net", "fixture", "--target"]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());

    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);

    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("compare-beta"));

    let (code, _, err) = run(&["query", "--net", "/no/such/file.json", "--target", "v7=<6h"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("IoError:"));

    let (code, _, err) = run(&["query", "--net", "fixture", "--target", "v7=<7h"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("UnknownState:"));

    let out = bin().args(["query", "--net", "fixture"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn methods_agree_and_json_mirrors_text() {
    let args = ["query", "--net", "fixture", "--evidence", "v1=female", "v8=smoker|ex-smoker", "--target", "v13=yes"];
    let (_, ve, _) = run(&args);
    let mut with_enum = args.to_vec();
    with_enum.extend(["--method", "enum"]);
    let (code, en, _) = run(&with_enum);
    assert_eq!(code, 0, "{en}");
    let a: f64 = value(&ve, "probability").parse().unwrap();
    let b: f64 = value(&en, "probability").parse().unwrap();
    assert!((a - b).abs() <= 1e-12);
    assert_eq!(value(&en, "method"), "enum");

    let mut json = args.to_vec();
    json.push("--json");
    let (_, js, _) = run(&json);
    let v: serde_json::Value = serde_json::from_str(&js).unwrap();
    assert_eq!(v["probability"].as_f64().unwrap(), a);
}

#[test]
fn compare_beta_prints_probability_and_error() {
    let (code, out, _) = run(&["compare-beta", "--a", "79,353", "--b", "59,1900", "-n", "200000", "--seed", "7"]);
    assert_eq!(code, 0);
    let p: f64 = value(&out, "probability").parse().unwrap();
    let se: f64 = value(&out, "standard_error").parse().unwrap();
    assert!(p >= 0.999);
    assert!(se <= 1e-3);
    let (code, _, err) = run(&["compare-beta", "--a", "0,1", "--b", "1,1"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn analysis_commands_render_tables() {
    let (code, out, _) = run(&[
        "influence", "--net", "fixture", "--evidence", "v2=(64-74]", "v1=male", "v9=yes", "--target", "v7=<6h",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("most influential: v2"));

    let (code, out, err) = run(&[
        "whatif", "--net", "fixture", "--base", "v1=male", "v5=obese", "v9=yes", "--improve", "v5=normal", "v9=no",
        "--combined", "--target", "v11=yes",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("combined"));

    let (code, out, _) = run(&["prevalence", "--net", "fixture", "--group", "v4", "--outcome", "v11=yes", "v13=yes"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 5);

    let (code, out, _) = run(&["marginals", "--net", "fixture"]);
    assert_eq!(code, 0);
    let total_states: usize = cvd_fixture().variables().iter().map(|v| v.states.len()).sum();
    assert_eq!(out.lines().count(), total_states);
}

#[test]
fn sample_fit_crossval_pipeline() {
    let dir = Scratch::new("pipeline");
    let net_path = dir.write("net.json", &serialize_network(&cvd_fixture()));
    let structure = dir.write(
        "structure.json",
        &serialize_structure(cvd_fixture().variables(), cvd_fixture().dag(), Default::default()),
    );
    let data = dir.path("data.csv");
    let (code, _, err) = run(&["sample", "--net", s(&net_path), "-n", "3000", "--seed", "4", "--out", s(&data)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(std::fs::read_to_string(&data).unwrap(), forward_sample(&cvd_fixture(), 3000, 4).to_csv());

    let fitted = dir.path("fitted.json");
    let (code, out, err) = run(&["fit", "--data", s(&data), "--structure", s(&structure), "--out", s(&fitted)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(value(&out, "records"), "3000");
    let net = parse_network(&std::fs::read_to_string(&fitted).unwrap()).unwrap();
    assert_eq!(net.dag(), cvd_fixture().dag());
    assert!(net.cpts().iter().all(|c| c.has_counts()));

    let (code, out, err) = run(&[
        "crossval", "--data", s(&data), "--structure", s(&structure), "--folds", "3", "--seed", "1",
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 1 + 3 + 3);
    let gap: f64 = value(&out, "gap").parse().unwrap();
    assert!(gap.is_finite());

    let (code, _, err) = run(&[
        "crossval", "--data", s(&data), "--structure", s(&structure), "--folds", "1",
    ]);
    assert_eq!(code, 1);
    assert!(err.starts_with("InvalidFolds"), "{err}");
}

#[test]
fn learn_structure_then_edit_to_the_fixture() {
    let dir = Scratch::new("learn");
    let truth = cvd_fixture();
    let data = dir.write("data.csv", &forward_sample(&truth, 4000, 9).to_csv());
    let schema = dir.write(
        "schema.json",
        &serialize_structure(truth.variables(), &Dag::empty(truth.dag().nodes().iter().cloned()).unwrap(), Default::default()),
    );
    let required = dir.write("required.txt", "# keep sex as a cause of smoking\nv1 v8\n");
    let forbidden = dir.write("forbidden.txt", "v13 v1\n");
    let learned = dir.path("learned.json");
    let (code, out, err) = run(&[
        "learn-structure", "--data", s(&data), "--schema", s(&schema), "--required", s(&required), "--forbidden",
        s(&forbidden), "--max-parents", "3", "--out", s(&learned),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(value(&out, "local_optimum"), "true");
    let (vars, dag, notes) = parse_structure(&std::fs::read_to_string(&learned).unwrap()).unwrap();
    assert_eq!(vars, truth.variables());
    assert!(dag.has_arc("v1", "v8"));
    assert!(!dag.has_arc("v13", "v1"));
    assert!(notes.contains_key("search_score"));

    let script = cardionet_core::structure::EditScript::between(&dag, truth.dag()).unwrap();
    let script_path = dir.write("edits.txt", &script.to_text());
    let edited = dir.path("edited.json");
    let (code, _, err) = run(&["edit", "--structure", s(&learned), "--script", s(&script_path), "--out", s(&edited)]);
    assert_eq!(code, 0, "{err}");
    let (_, edited_dag, _) = parse_structure(&std::fs::read_to_string(&edited).unwrap()).unwrap();
    assert_eq!(edited_dag.arcs().len(), truth.dag().arcs().len());
    for (from, to) in truth.dag().arcs() {
        assert!(edited_dag.has_arc(&from, &to));
    }

    let bad = dir.write("cycle.txt", "add v8 v1\n");
    let (code, _, err) = run(&["edit", "--structure", s(&edited), "--script", s(&bad), "--out", "-"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("CycleError"), "{err}");
}

#[test]
fn out_dash_writes_to_stdout() {
    let (code, out, _) = run(&["sample", "--net", "fixture", "-n", "5", "--seed", "1", "--out", "-"]);
    assert_eq!(code, 0);
    assert_eq!(out, forward_sample(&cvd_fixture(), 5, 1).to_csv());
}
