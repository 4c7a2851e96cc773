use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn splitqm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splitqm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = splitqm(&all);
    let code = o.status.code().unwrap();
    (
        code,
        serde_json::from_str(&stdout(&o)).unwrap_or(Value::Null),
    )
}

fn free() -> String {
    config("free.json").display().to_string()
}

#[test]
fn eval_sign_map() {
    let c = free();
    let o = splitqm(&["eval", "--config", &c, "--name", "sign", "a b^-2 a^3 b"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "2\n");
    let o = splitqm(&[
        "eval", "--config", &c, "--name", "sign", "a", "b^-2", "a^3", "b",
    ]);
    assert_eq!(stdout(&o), "2\n");
    let o = splitqm(&["eval", "--config", &c, "--name", "sign", ""]);
    assert_eq!(stdout(&o), "0\n");
}

#[test]
fn malformed_word_exits_2_with_position() {
    let o = splitqm(&["eval", "--config", &free(), "--name", "sign", "a b^x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("position"), "{}", stderr(&o));
}

#[test]
fn defect_of_sign_map() {
    let (code, v) = json(&["defect", "--config", &free(), "--name", "sign"]);
    assert_eq!(code, 0);
    let r = &v["results"];
    assert_eq!(r["split defect"], "1");
    assert_eq!(r["sampled defect"], "1");
    assert!(r["gromov norm"].as_str().unwrap().starts_with("1 "));
    assert_eq!(r["homogenized gap"], "2");
}

#[test]
fn defect_of_homomorphism_is_zero() {
    let (code, v) = json(&["defect", "--config", &free(), "--name", "hom"]);
    assert_eq!(code, 0);
    let r = &v["results"];
    for key in [
        "factor defect A",
        "factor defect B",
        "split defect",
        "sampled defect",
    ] {
        assert_eq!(r[key], "0", "{key}");
    }
    assert!(r["gromov norm"].as_str().unwrap().starts_with("0 "));
}

#[test]
fn output_is_deterministic_for_a_seed() {
    let c = free();
    let run = |seed: &str| {
        stdout(&splitqm(&[
            "tau-check",
            "--config",
            &c,
            "--name",
            "bumps",
            "--n",
            "2",
            "--seed",
            seed,
        ]))
    };
    assert_eq!(run("5"), run("5"));
    assert_ne!(run("5"), run("6"));
}

#[test]
fn homogenize_and_decompose() {
    let c = free();
    let (code, v) = json(&["homogenize", "--config", &c, "--name", "hom", "a^2 b"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["homogenized"], "7/2");
    let (code, v) = json(&[
        "decompose",
        "--config",
        &c,
        "--name",
        "bumps",
        "--samples",
        "300",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["residual"], "0 on every word");
    let (code, _) = json(&["decompose", "--config", &c, "--name", "sign"]);
    assert_eq!(code, 2, "sign map has no finite support");
}

#[test]
fn tau_check_reports_fixed_and_violated() {
    let c = free();
    let (code, v) = json(&[
        "tau-check",
        "--config",
        &c,
        "--name",
        "periodic",
        "--n",
        "3",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["fixed"], "yes");
    let (code, v) = json(&["tau-check", "--config", &c, "--name", "bumps", "--n", "-2"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["fixed"], "no");
}

#[test]
fn growth_vectors_serialize() {
    let (code, v) = json(&["qc-growth", "--config", &free(), "--depth", "3"]);
    assert_eq!(code, 0);
    assert_eq!(
        v["results"]["prime 2 values"][2],
        serde_json::json!(["0", "2", "-2"])
    );

    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(
        f,
        r#"{{"schema": "splitqm-config/1",
            "growth": {{"action": {{"regular": {{"p": 2.0}}}}, "vector": [["", "1"]]}}}}"#
    )
    .unwrap();
    let path = f.path().display().to_string();
    let (code, v) = json(&["qc-growth", "--config", &path, "--depth", "2"]);
    assert_eq!(code, 0);
    assert_eq!(
        v["results"]["staircase values"][1],
        serde_json::json!([["", "1"]])
    );
    assert_eq!(
        v["results"]["staircase values"][2],
        serde_json::json!([["", "2"]])
    );
    assert_eq!(
        v["results"]["prime 2 values"][1],
        serde_json::json!([["", "1"]])
    );
}

#[test]
fn finite_config_reports() {
    let c = config("finite.json").display().to_string();
    let (code, v) = json(&["qrep", "--config", &c]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["near defect"], "3/2");
    assert_eq!(v["results"]["near vs zero distance"], "1/2");
    let (code, v) = json(&["defect-space", "--config", &c]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["z3 defect norm"], "3");
    assert_eq!(v["results"]["z3 -> Z/12 -> z4 combined norm"], "3");
    let (code, v) = json(&["rademacher"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["split defect"], v["results"]["gromov norm"]);
}

#[test]
fn config_errors_exit_2_with_path() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(
        f,
        r#"{{"schema": "splitqm-config/1", "quasimorphisms": {{"f": {{"b": {{"slope": 3}}}}}}}}"#
    )
    .unwrap();
    let path = f.path().display().to_string();
    let o = splitqm(&["defect", "--config", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("quasimorphisms.f.b.slope"),
        "{}",
        stderr(&o)
    );

    let o = splitqm(&["defect"]);
    assert_eq!(o.status.code(), Some(2));
    let o = splitqm(&["defect", "--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selftest_negative_control_fails() {
    let o = splitqm(&["selftest", "--literal-convention", "--only", "9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o).lines().any(|l| l.starts_with("FAIL [ 9]")),
        "{}",
        stdout(&o)
    );
}

#[test]
fn selftest_config_checks_run_or_skip() {
    let o = splitqm(&["selftest", "--only", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("SKIP [cfg]"));
    let o = splitqm(&[
        "selftest",
        "--only",
        "2",
        "--config",
        &free(),
        "--samples",
        "200",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS [cfg] quasimorphism sign"));
    assert!(stdout(&o).contains("PASS [cfg] representation quarter"));
}

#[test]
fn selftest_passes() {
    let o = splitqm(&["selftest"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert_eq!(
        out.lines().filter(|l| l.starts_with("PASS [")).count(),
        13,
        "{out}"
    );
}
