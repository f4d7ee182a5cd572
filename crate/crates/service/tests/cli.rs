mod common;

use std::path::Path;
use std::process::Command;

use serde_json::Value;
use seqsym::cli::{run, EXIT_INVALID, EXIT_OK, EXIT_USAGE};
use seqsym_core::{build_sequences, load_cohort, stratify_by_treatment, Thresholds, Treatment};

fn run_args(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("seqsym").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_spec(dir: &Path) -> String {
    let path = dir.join("spec.json");
    std::fs::write(&path, serde_json::to_string(&common::small_spec()).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn synth(dir: &Path) -> String {
    let spec = write_spec(dir);
    let data = dir.join("cohort");
    let (code, _, err) = run_args(&["synth", "--spec", &spec, "--out", data.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    data.to_str().unwrap().to_string()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    assert_eq!(run_args(&["mine", "--treatment", "CC"]).0, EXIT_USAGE);
    assert_eq!(run_args(&["mine", "--data", &data, "--treatment", "CC", "--bogus"]).0, EXIT_USAGE);
    assert_eq!(run_args(&["mine", "--data", &data, "--treatment", "CC", "--min-support", "2"]).0, EXIT_INVALID);
    assert_eq!(run_args(&["mine", "--data", &data, "--treatment", "XRT"]).0, EXIT_INVALID);
    let (code, _, err) = run_args(&["mine", "--data", dir.path().join("missing").to_str().unwrap(), "--treatment", "CC"]);
    assert_ne!(code, EXIT_OK);
    assert!(err.starts_with("error:"), "{err}");
}

#[test]
fn mined_rules_from_written_files_match_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    let (code, out, err) = run_args(&[
        "mine", "--data", &data, "--treatment", "ICC", "--min-support", "0.25", "--min-confidence", "0.5", "--min-lift", "1",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let body: Value = serde_json::from_str(&out).unwrap();

    let base = Path::new(&data);
    let cohort = load_cohort(&base.join("clinical.csv"), &base.join("ratings.csv")).unwrap();
    let strata = stratify_by_treatment(&cohort);
    let sequences = build_sequences(&strata[&Treatment::Icc].cohort, Thresholds::default());
    let expected = seqsym_oracle::brute_force_rules(&sequences, 0.25, 0.5, 1.0, 4);

    let mut got: Vec<(Vec<String>, Vec<String>, Vec<String>)> = body["data"]["rules"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            let names = |v: &Value| v.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect();
            (names(&r["antecedent"]), names(&r["consequent"]), names(&r["supporters"]))
        })
        .collect();
    let mut want: Vec<_> = expected
        .iter()
        .map(|r| {
            let names = |s: &seqsym_oracle::Items| s.iter().map(|x| x.name().to_string()).collect();
            (names(&r.antecedent), names(&r.consequent), r.supporters.clone())
        })
        .collect();
    got.sort();
    want.sort();
    assert!(!want.is_empty());
    assert_eq!(got, want);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    let args = ["analytics", "--data", &data, "--treatment", "ICC", "--seed", "5"];
    let (code, first, err) = run_args(&args);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(first, run_args(&args).1);
    let cluster = ["cluster", "--data", &data, "--treatment", "ICC", "--clusters", "2"];
    assert_eq!(run_args(&cluster).1, run_args(&cluster).1);
}

#[test]
fn out_flag_writes_the_same_document() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path());
    let file = dir.path().join("rules.json");
    let args = ["mine", "--data", &data, "--treatment", "CC"];
    let (_, stdout, _) = run_args(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", file.to_str().unwrap()]);
    let (code, empty, _) = run_args(&with_out);
    assert_eq!(code, EXIT_OK);
    assert!(empty.is_empty());
    assert_eq!(std::fs::read_to_string(&file).unwrap(), stdout);
}

#[test]
fn synthetic_flag_matches_written_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path());
    let data = synth(dir.path());
    let from_spec: Value =
        serde_json::from_str(&run_args(&["mine", "--synthetic", &spec, "--treatment", "ICC"]).1).unwrap();
    let from_files: Value = serde_json::from_str(&run_args(&["mine", "--data", &data, "--treatment", "ICC"]).1).unwrap();
    assert_eq!(from_spec["data"], from_files["data"]);
}

#[test]
fn binary_reports_usage_errors() {
    let status = Command::new(env!("CARGO_BIN_EXE_seqsym")).arg("mine").stderr(std::process::Stdio::null()).status().unwrap();
    assert_eq!(status.code(), Some(EXIT_USAGE));
}
