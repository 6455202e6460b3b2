use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn data(name: &str) -> PathBuf {
    manifest_dir().join("tests/data").join(name)
}

fn simsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_on(args: &[&str], input: &Path) -> Output {
    let mut full = args.to_vec();
    full.extend(["--input", input.to_str().unwrap()]);
    simsim(&full)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_schema(schema: &str, value: &Value) {
    let path = manifest_dir()
        .join("schemas")
        .join(format!("{schema}.schema.json"));
    let text = std::fs::read_to_string(&path).unwrap();
    let schema_value: Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::validator_for(&schema_value).expect("schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(value)
        .map(|e| e.to_string())
        .collect();
    assert!(
        errors.is_empty(),
        "{schema} schema violations: {errors:?}\n{value:#}"
    );
}

fn write_temp(dir: &tempfile::TempDir, name: &str, value: &Value) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path
}

fn instance(mode: &str, a: Value, b: Value, alphas: Value, betas: Value) -> Value {
    json!({ "schema": 1, "mode": mode, "A": a, "B": b, "alphas": alphas, "betas": betas })
}

fn entry_value(x: &Value) -> f64 {
    match x {
        Value::Number(n) => n.as_f64().unwrap(),
        Value::String(s) => match s.split_once('/') {
            Some((p, q)) => p.parse::<f64>().unwrap() / q.parse::<f64>().unwrap(),
            None => s.parse().unwrap(),
        },
        _ => panic!("bad entry {x}"),
    }
}

#[test]
fn gen_is_deterministic_and_schema_valid() {
    let args = [
        "gen", "--n", "6", "--m", "3", "--seed", "42", "--mults", "2,3,1",
    ];
    let first = simsim(&args);
    let second = simsim(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    assert_schema("instance", &stdout_json(&first));
    let other = simsim(&[
        "gen", "--n", "6", "--m", "3", "--seed", "43", "--mults", "2,3,1",
    ]);
    assert_ne!(first.stdout, other.stdout);
}

#[test]
fn gen_nonneg_has_nonnegative_entries() {
    for extra in [&[][..], &["--disjoint"][..], &["--adversarial"][..]] {
        let mut args = vec!["gen", "--n", "5", "--m", "3", "--seed", "9", "--nonneg"];
        args.extend_from_slice(extra);
        let out = simsim(&args);
        assert_eq!(code(&out), 0, "{extra:?}: {}", stderr(&out));
        let v = stdout_json(&out);
        assert_eq!(v["mode"], "nonnegative");
        for key in ["A", "B", "alphas", "betas"] {
            for row in v[key].as_array().unwrap() {
                for x in row.as_array().unwrap() {
                    assert!(entry_value(x) >= 0.0, "{extra:?} {key} has {x}");
                }
            }
        }
    }
}

#[test]
fn gen_rejects_bad_spec() {
    let out = simsim(&["gen", "--n", "4", "--m", "2", "--mults", "2,1"]);
    assert_eq!(code(&out), 2);
    assert_schema("error", &stdout_json(&out));
}

#[test]
fn decide_positive_exits_zero() {
    let out = run_on(&["decide"], &data("positive.json"));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_schema("decide", &v);
    assert_eq!(v["verdict"], true);
    assert_eq!(v["arithmetic"], "exact");
    assert_eq!(v["witness"], Value::Null);
    assert_eq!(v["checks"].as_array().unwrap().len(), 7);
}

#[test]
fn decide_adversarial_names_failing_pair() {
    let out = run_on(&["decide"], &data("adversarial.json"));
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_schema("decide", &v);
    assert_eq!(v["verdict"], false);
    let witness = v["witness"].as_array().unwrap();
    assert_eq!(witness.len(), 2);
    assert!(stderr(&out).contains("similarity condition fails at subset {"));
}

#[test]
fn decide_float_arithmetic() {
    let out = run_on(&["decide", "--float"], &data("positive.json"));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_schema("decide", &v);
    assert_eq!(v["arithmetic"], "float");
}

#[test]
fn decide_reads_stdin() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_simsim"))
        .arg("decide")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let text = std::fs::read(data("single_vector.json")).unwrap();
    child.stdin.take().unwrap().write_all(&text).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["verdict"], true);
}

#[test]
fn decide_writes_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let out = simsim(&[
        "decide",
        "--input",
        data("single_vector.json").to_str().unwrap(),
        "--output",
        target.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_schema("decide", &v);
}

#[test]
fn construct_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_on(&["construct", "--seed", "3"], &data("positive.json"));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let cert = stdout_json(&out);
    assert_schema("certificate", &cert);
    assert_eq!(cert["seed"], 3);
    let cert_path = write_temp(&dir, "cert.json", &cert);
    let out = run_on(
        &["verify", "--cert", cert_path.to_str().unwrap()],
        &data("positive.json"),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_schema("verify", &v);
    assert_eq!(v["pass"], true);
}

#[test]
fn construct_is_reproducible_for_a_seed() {
    let a = run_on(&["construct", "--seed", "5"], &data("all_ones.json"));
    let b = run_on(&["construct", "--seed", "5"], &data("all_ones.json"));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn construct_adversarial_exits_one_with_witness() {
    let out = run_on(&["construct"], &data("adversarial.json"));
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_schema("error", &v);
    assert_eq!(v["error"], "condition");
    assert_eq!(v["witness"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_identity_and_scaled_identity() {
    let dir = tempfile::tempdir().unwrap();
    let inst = json!({
        "schema": 1,
        "mode": "general",
        "A": [[2, 1, 0], [1, 3, 1], [0, 1, 4]],
        "B": [[2, 1, 0], [1, 3, 1], [0, 1, 4]],
        "alphas": [[1, 0, 2]],
        "betas": [[1, 0, 2]]
    });
    let inst_path = write_temp(&dir, "inst.json", &inst);
    let identity = write_temp(
        &dir,
        "id.json",
        &json!({ "Q": [[1, 0, 0], [0, 1, 0], [0, 0, 1]] }),
    );
    let doubled = write_temp(
        &dir,
        "two.json",
        &json!({ "Q": [[2, 0, 0], [0, 2, 0], [0, 0, 2]] }),
    );

    let out = run_on(
        &["verify", "--cert", identity.to_str().unwrap()],
        &inst_path,
    );
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("verify", &v);
    assert_eq!(v["residuals"]["orth"], 0.0);

    let out = run_on(&["verify", "--cert", doubled.to_str().unwrap()], &inst_path);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_schema("verify", &v);
    assert_eq!(v["pass"], false);
}

#[test]
fn verify_rejects_wrong_order_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cert = write_temp(&dir, "q.json", &json!({ "Q": [[1, 0], [0, 1]] }));
    let out = run_on(
        &["verify", "--cert", cert.to_str().unwrap()],
        &data("positive.json"),
    );
    assert_eq!(code(&out), 2);
    assert_schema("error", &stdout_json(&out));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let truncated = dir.path().join("truncated.json");
    std::fs::write(&truncated, "{\"A\": [[1, 2], [2").unwrap();
    let asymmetric = write_temp(
        &dir,
        "asym.json",
        &instance(
            "general",
            json!([[1, 2], [3, 4]]),
            json!([[1, 0], [0, 1]]),
            json!([]),
            json!([]),
        ),
    );
    let mismatched = write_temp(
        &dir,
        "sizes.json",
        &instance(
            "general",
            json!([[1]]),
            json!([[1]]),
            json!([[1]]),
            json!([]),
        ),
    );
    let negative = write_temp(
        &dir,
        "neg.json",
        &instance(
            "nonnegative",
            json!([[1]]),
            json!([[1]]),
            json!([[-1]]),
            json!([[1]]),
        ),
    );
    let bad_entry = write_temp(
        &dir,
        "entry.json",
        &instance(
            "general",
            json!([["1/0"]]),
            json!([[1]]),
            json!([]),
            json!([]),
        ),
    );
    let missing_schema = write_temp(
        &dir,
        "bare.json",
        &json!({ "A": [[1]], "B": [[1]], "alphas": [], "betas": [] }),
    );
    let cases = [
        (&truncated, "malformed JSON"),
        (&asymmetric, "symmetric"),
        (&mismatched, "betas"),
        (&negative, "negative"),
        (&bad_entry, "A[0][0]"),
        (&missing_schema, "schema"),
    ];
    for (path, needle) in cases {
        for cmd in ["decide", "construct", "diag"] {
            let out = run_on(&[cmd], path);
            assert_eq!(
                code(&out),
                2,
                "{cmd} on {}: {}",
                path.display(),
                stderr(&out)
            );
            assert_schema("error", &stdout_json(&out));
            let err = stderr(&out);
            assert!(
                err.starts_with("error: ") && err.contains(needle),
                "{cmd}: {err}"
            );
        }
    }
    let missing = simsim(&["decide", "--input", "/nonexistent/instance.json"]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn mode_override_enforces_nonnegativity() {
    let out = run_on(
        &["decide", "--mode", "nonnegative"],
        &data("single_vector.json"),
    );
    assert_eq!(code(&out), 2);
    let out = run_on(
        &["decide", "--mode", "nonnegative"],
        &data("disjoint_indicators.json"),
    );
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["rule"], "sum_of_outers");
}

#[test]
fn invalid_tolerance_is_rejected() {
    let out = run_on(&["decide", "--tol-poly", "-1"], &data("positive.json"));
    assert_eq!(code(&out), 2);
}

#[test]
fn diag_reports_tables() {
    let out = run_on(&["diag"], &data("disjoint_indicators.json"));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_schema("diag", &v);
    assert!(v["norms"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["equal"] == true));
    let resolutions = v["inner"]["resolutions"].as_array().unwrap();
    assert_eq!(resolutions.len(), 3);
    let out = run_on(&["diag"], &data("adversarial.json"));
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("diag", &v);
    assert!(v["inner"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["equal"] == false));
}

#[test]
fn diag_on_different_spectra_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_temp(
        &dir,
        "spec.json",
        &instance(
            "general",
            json!([[1, 0], [0, 2]]),
            json!([[1, 0], [0, 3]]),
            json!([[1, 1]]),
            json!([[1, 1]]),
        ),
    );
    let out = run_on(&["diag"], &inst);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_schema("error", &v);
    assert_eq!(v["error"], "not_similar");
}

#[test]
fn charpoly_of_bare_matrix_and_instance() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_temp(&dir, "m.json", &json!([[2, 1], [1, 2]]));
    let out = run_on(&["charpoly"], &m);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_schema("charpoly", &v);
    assert_eq!(v["charpoly"]["coeffs"], json!(["3", "-4", "1"]));
    assert_eq!(v["charpoly"]["text"], "x^2 - 4x + 3");

    let out = run_on(&["charpoly"], &data("all_ones.json"));
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("charpoly", &v);
    assert_eq!(v["similar"], true);
}

#[test]
fn golden_inputs_match_instance_schema() {
    for name in [
        "all_ones.json",
        "single_vector.json",
        "disjoint_indicators.json",
        "positive.json",
        "adversarial.json",
    ] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(data(name)).unwrap()).unwrap();
        assert_schema("instance", &v);
    }
    for name in [
        "decide_positive.expected.json",
        "decide_adversarial.expected.json",
    ] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(data(name)).unwrap()).unwrap();
        assert_schema("decide", &v);
    }
}
