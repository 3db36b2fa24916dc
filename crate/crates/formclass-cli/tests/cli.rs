//! Black-box tests of the `formclass` binary: exit codes, document
//! fields, determinism, and the content cache.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_formclass"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .env_remove("FORMCLASS_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout_str(out)).expect("stdout is JSON")
}

fn cache_files(dir: &Path) -> Vec<String> {
    let cache = dir.join(".formclass-cache");
    if !cache.is_dir() {
        return Vec::new();
    }
    let mut names: Vec<String> = fs::read_dir(cache)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

#[test]
fn help_and_version_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["--help"]);
    assert!(out.status.success());
    assert!(stdout_str(&out).contains("verify-all"));
    let out = run_in(tmp.path(), &["--version"]);
    assert!(out.status.success());
}

#[test]
fn usage_errors_exit_one_with_structured_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();

    // unknown flag: raw argument parser diagnostic
    let out = run_in(tmp.path(), &["forms", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));

    // positive discriminant: structured diagnostic
    let out = run_in(tmp.path(), &["forms", "--disc", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_str(&stderr_str(&out)).unwrap();
    assert_eq!(err["error"], "usage");

    // unknown group spelling
    let out = run_in(
        tmp.path(),
        &["acts", "--disc", "-15", "--level", "2", "--group", "gamma9:2"],
    );
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_str(&stderr_str(&out)).unwrap();
    assert_eq!(err["error"], "usage");

    // triangular modulus must divide the level
    let out = run_in(
        tmp.path(),
        &["acts", "--disc", "-15", "--level", "2", "--group", "gamma0:3@2"],
    );
    assert_eq!(out.status.code(), Some(1));

    // group level must match --level
    let out = run_in(
        tmp.path(),
        &["acts", "--disc", "-15", "--level", "3", "--group", "gamma1:2"],
    );
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_str(&stderr_str(&out)).unwrap();
    assert_eq!(err["error"], "usage");
}

#[test]
fn forms_reports_the_three_classes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["forms", "--disc", "-23"]);
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let doc = json_of(&out);
    assert_eq!(doc["schema"], "forms.v1");
    assert_eq!(doc["class_number"], 3);
    assert_eq!(doc["principal"], serde_json::json!([1, 1, 6]));
    let forms: Vec<_> = doc["forms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["form"].clone())
        .collect();
    assert_eq!(
        forms,
        vec![
            serde_json::json!([1, 1, 6]),
            serde_json::json!([2, -1, 3]),
            serde_json::json!([2, 1, 3]),
        ]
    );
}

#[test]
fn classgroup_counts_match_the_formula() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["classgroup", "--disc", "-15", "--level", "2", "--group", "gamma1:2"],
    );
    assert!(out.status.success());
    let doc = json_of(&out);
    assert_eq!(doc["schema"], "classgroup.v1");
    assert_eq!(doc["class_count"], 2);
    assert_eq!(doc["ray_class_formula"], 2);
    assert_eq!(doc["induces"], true);
    assert_eq!(doc["invariant_factors"], serde_json::json!([2]));
    assert_eq!(doc["consistent"], true);
}

#[test]
fn acts_carries_a_live_counterexample() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["acts", "--disc", "-15", "--level", "2", "--group", "sl2:2"],
    );
    assert!(out.status.success());
    let doc = json_of(&out);
    assert_eq!(doc["schema"], "verdict.v1");
    assert_eq!(doc["kind"], "acts");
    assert_eq!(doc["m_value"], 2);
    assert_eq!(doc["criterion"], false);
    assert_eq!(doc["verdict"]["acts"], false);
    let cx = &doc["verdict"]["counterexample"];
    assert_eq!(cx["form"], serde_json::json!([1, 1, 4]));
    assert_eq!(cx["gamma"], serde_json::json!([0, -1, 1, 0]));
    assert_eq!(cx["leading_coeff"], 4);
    assert_eq!(doc["consistent"], true);
}

#[test]
fn cache_round_trip_is_byte_identical_and_survives_corruption() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["classgroup", "--disc", "-15", "--level", "2", "--group", "gamma1:2"];

    let first = run_in(tmp.path(), &args);
    assert!(first.status.success());
    let files = cache_files(tmp.path());
    assert_eq!(files.len(), 1, "one entry per computed document");
    let name = &files[0];
    assert_eq!(name.len(), 64 + 5, "hex digest plus .json: {name}");
    assert!(name.ends_with(".json"));
    assert!(name[..64].chars().all(|c| c.is_ascii_hexdigit()));

    // second run: served from cache, identical bytes
    let second = run_in(tmp.path(), &args);
    assert!(second.status.success());
    assert_eq!(first.stdout, second.stdout);

    // corrupt the entry: the run warns, recomputes, and repairs it
    let path = tmp.path().join(".formclass-cache").join(name);
    fs::write(&path, b"{ not json").unwrap();
    let third = run_in(tmp.path(), &args);
    assert!(third.status.success());
    assert!(stderr_str(&third).contains("corrupt"));
    assert_eq!(first.stdout, third.stdout);
    let repaired: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(repaired["schema"], "classgroup.v1");

    // a different document gets a different key
    let other = run_in(tmp.path(), &["forms", "--disc", "-23"]);
    assert!(other.status.success());
    assert_eq!(cache_files(tmp.path()).len(), 2);
}

#[test]
fn cache_location_flag_beats_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let env_dir = tmp.path().join("from-env");
    let flag_dir = tmp.path().join("from-flag");

    let out = bin()
        .args(["forms", "--disc", "-23"])
        .current_dir(tmp.path())
        .env("FORMCLASS_CACHE_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(env_dir.is_dir(), "env var selects the cache directory");

    let out = bin()
        .args(["--cache-dir"])
        .arg(&flag_dir)
        .args(["forms", "--disc", "-23"])
        .current_dir(tmp.path())
        .env("FORMCLASS_CACHE_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(flag_dir.is_dir(), "the flag wins over the env var");
    assert_eq!(fs::read_dir(&env_dir).unwrap().count(), 1);

    // and --no-cache writes nothing
    let bare = tmp.path().join("bare");
    fs::create_dir(&bare).unwrap();
    let out = run_in(&bare, &["--no-cache", "forms", "--disc", "-23"]);
    assert!(out.status.success());
    assert!(cache_files(&bare).is_empty());
}

#[test]
fn sweep_filters_run_clean() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &[
            "sweep",
            "--disc",
            "-15",
            "--level",
            "2",
            "--check",
            "class-bijection",
            "--check",
            "tower-commute",
        ],
    );
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let cases: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let arr = cases.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    for case in arr {
        assert_eq!(case["status"], "pass");
        assert_eq!(case["disc"], -15);
        assert_eq!(case["level"], 2);
    }

    // unknown check name is a usage error
    let out = run_in(tmp.path(), &["sweep", "--check", "no-such-check"]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_str(&stderr_str(&out)).unwrap();
    assert_eq!(err["error"], "usage");
}

#[test]
fn verify_all_writes_both_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("small.conf");
    fs::write(
        &config,
        "discriminants = -15 -20\nlevels = 1 2\ngroups = gamma1 sl2\n",
    )
    .unwrap();
    let out_dir = tmp.path().join("result");
    let out = bin()
        .args(["verify-all", "--config"])
        .arg(&config)
        .args(["--output-dir"])
        .arg(&out_dir)
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], "report.v1");
    assert_eq!(report["summary"]["fail"], 0);
    assert!(report["summary"]["total"].as_u64().unwrap() > 0);
    let md = fs::read_to_string(out_dir.join("report.md")).unwrap();
    assert!(md.contains("## Results by check"));
    assert!(md.contains("None."));
}
