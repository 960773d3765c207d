use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn entangle(args: &[&str], stdin: &str) -> Output {
    entangle_env(args, stdin, &[])
}

fn entangle_env(args: &[&str], stdin: &str, env: &[(&str, &str)]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_entangle"))
        .args(args)
        .env_remove("ENTANGLE_MAX_DIM")
        .envs(env.iter().copied())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    // the binary may exit before reading stdin, e.g. on usage errors
    let _ = child.stdin.take().unwrap().write_all(stdin.as_bytes());
    child.wait_with_output().unwrap()
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

const SIX: &str = "1/2*(|000000>+|000111>+|110000>+|110111>)";
const EPR_GHZ: &str = "(|00>+|11>)*(|000>+|111>)";

#[test]
fn ce_six_qubit_example() {
    let o = entangle(&["ce"], SIX);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("EC: [(A3),(A1,A2),(A4,A5,A6)]"));
    assert!(stdout(&o).contains("CE: 4.0"));
    assert!(stderr(&o).is_empty());
}

#[test]
fn ce_json_schema_and_key_order() {
    let o = entangle(&["ce", "--json", "--detail"], EPR_GHZ);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        [
            "dims",
            "ce",
            "ec",
            "blocks",
            "subset_entropies",
            "tolerances",
            "normalized_input"
        ]
    );
    assert_eq!(v["dims"], serde_json::json!([2, 2, 2, 2, 2]));
    assert_eq!(v["ce"].as_f64().unwrap(), 4.0);
    assert_eq!(v["ec"], serde_json::json!([[1, 2], [3, 4, 5]]));
    assert_eq!(v["blocks"][1]["cef"].as_f64().unwrap(), 3.0);
    assert_eq!(v["subset_entropies"].as_object().unwrap().len(), 8);
    assert_eq!(v["subset_entropies"]["3,5"].as_f64().unwrap(), 1.0);
    assert_eq!(v["tolerances"]["rank_eps"].as_f64().unwrap(), 1e-9);
    assert_eq!(v["normalized_input"], Value::Bool(true));
}

#[test]
fn json_is_deterministic() {
    let a = entangle(&["ce", "--json", "--detail", "--threads", "4"], SIX);
    let b = entangle(&["ce", "--json", "--detail"], SIX);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn detail_is_absent_by_default() {
    let v = json(&entangle(&["ce", "--json"], EPR_GHZ));
    assert!(v.get("subset_entropies").is_none());
}

#[test]
fn trivial_and_product_reports() {
    let v = json(&entangle(&["ce", "--json"], "|0>"));
    assert_eq!(v["ce"].as_f64().unwrap(), 0.0);
    assert_eq!(v["ec"], serde_json::json!([[1]]));
    assert_eq!(v["normalized_input"], Value::Bool(false));

    let v = json(&entangle(&["ce", "--json"], "|00>"));
    assert_eq!(v["ec"], serde_json::json!([[1], [2]]));

    let v = json(&entangle(&["ce", "--json"], "(|00>+|11>)/sqrt(2)"));
    assert_eq!(v["ce"].as_f64().unwrap(), 1.0);
    assert_eq!(v["ec"], serde_json::json!([[1, 2]]));
}

#[test]
fn entropy_of_subset() {
    let o = entangle(&["entropy", "--subset", "1,3"], "(|00>+|11>)*(|00>+|11>)");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "2.0");

    let v = json(&entangle(
        &["entropy", "--subset", "3,1", "--json"],
        "(|00>+|11>)*(|00>+|11>)",
    ));
    assert_eq!(v["subset"], serde_json::json!([1, 3]));
    assert_eq!(v["entropy"].as_f64().unwrap(), 2.0);
}

#[test]
fn entropy_rejects_bad_subsets() {
    for subset in ["0", "3", "1,2"] {
        let o = entangle(&["entropy", "--subset", subset], "(|00>+|11>)");
        assert_eq!(o.status.code(), Some(1), "{subset}");
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn ec_and_cef() {
    let o = entangle(&["ec"], SIX);
    assert_eq!(stdout(&o).trim(), "[(A3),(A1,A2),(A4,A5,A6)]");

    let o = entangle(&["cef"], "|000>+|111>");
    assert_eq!(stdout(&o).trim(), "3.0");
    assert!(stderr(&o).is_empty());

    let o = entangle(&["cef"], "(|00>+|11>)*|0>");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "2.0");
    assert!(stderr(&o).contains("[(A3),(A1,A2)]"));
}

#[test]
fn table_input_from_file() {
    let path = std::env::temp_dir().join(format!("entangle-cli-{}.txt", std::process::id()));
    std::fs::write(
        &path,
        "# EPR\ndims: 2 2\n0 0 0.70710678 0\n1 1 0.70710678 0\n",
    )
    .unwrap();
    let o = entangle(&["ec", "--json", path.to_str().unwrap()], "");
    std::fs::remove_file(&path).unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["ec"], serde_json::json!([[1, 2]]));
}

#[test]
fn explicit_format_overrides_detection() {
    let o = entangle(&["ec", "--format", "table"], "|00>");
    assert_eq!(o.status.code(), Some(2));
    let o = entangle(&["ec", "--format", "ket"], "dims: 3 2; |20> + |11>");
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn exit_codes() {
    let cases: &[(&[&str], &str, i32)] = &[
        (&["ce"], "|00> + |1>", 2),
        (&["ce"], "(|00> + ", 2),
        (&["ce", "--format", "table"], "dims: 2\n2 1 0\n", 2),
        (&["ce"], "|00> - |00>", 3),
        (&["ce", "--no-normalize"], "2*|00>", 3),
        (&["ec"], "|00> + 3e-5*|11>", 4),
        (&["ce"], "hello", 1),
        (&["ce"], "", 1),
        (&["ce", "--bogus"], "|0>", 1),
        (&["ce", "--tol", "0.5"], "|0>", 1),
        (&["ce", "/nonexistent/file"], "", 1),
    ];
    for (args, input, code) in cases {
        let o = entangle(args, input);
        assert_eq!(
            o.status.code(),
            Some(*code),
            "{args:?} {input:?}: {}",
            stderr(&o)
        );
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn parse_errors_carry_positions() {
    let o = entangle(&["ce"], "|00> + |1>");
    assert!(stderr(&o).contains("<stdin>:1:"), "{}", stderr(&o));
}

#[test]
fn no_normalize_accepts_normalized_input() {
    let o = entangle(&["ce", "--no-normalize", "--json"], "(|00>+|11>)/sqrt(2)");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["normalized_input"], Value::Bool(false));
}

#[test]
fn size_cap_from_environment() {
    let o = entangle_env(&["ce"], "|0000>", &[("ENTANGLE_MAX_DIM", "8")]);
    assert_eq!(o.status.code(), Some(3));
    let o = entangle_env(&["ce"], "|000>", &[("ENTANGLE_MAX_DIM", "8")]);
    assert_eq!(o.status.code(), Some(0));
    let o = entangle_env(&["ce"], "|0>", &[("ENTANGLE_MAX_DIM", "lots")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(entangle(&["--help"], "").status.code(), Some(0));
    assert_eq!(entangle(&["--version"], "").status.code(), Some(0));
    assert_eq!(entangle(&[], "").status.code(), Some(1));
}

#[test]
fn verify_lu_on_ghz() {
    let o = entangle(
        &["verify", "lu", "--trials", "50", "--seed", "3"],
        "|000>+|111>",
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn verify_additivity_on_files() {
    let dir = std::env::temp_dir();
    let a = dir.join(format!("entangle-epr-{}.txt", std::process::id()));
    let b = dir.join(format!("entangle-ghz-{}.txt", std::process::id()));
    std::fs::write(&a, "|00>+|11>").unwrap();
    std::fs::write(&b, "|000>+|111>").unwrap();
    let o = entangle(
        &[
            "verify",
            "additivity",
            "--json",
            a.to_str().unwrap(),
            b.to_str().unwrap(),
        ],
        "",
    );
    std::fs::remove_file(&a).unwrap();
    std::fs::remove_file(&b).unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v[0]["passed"], Value::Bool(true));
    assert!(v[0]["max_violation"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn verify_locc_random() {
    let o = entangle(
        &[
            "verify", "locc", "--random", "--qubits", "3", "--trials", "100", "--seed", "11",
            "--json",
        ],
        "",
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v[0]["property"], "locc-subset-entropy");
    assert_eq!(v[0]["passed"], Value::Bool(true));
    assert_eq!(v[1]["property"], "locc-ce-monotonicity");
}

#[test]
fn verify_is_reproducible() {
    let args = [
        "verify", "lu", "--random", "--qubits", "3", "--trials", "10", "--seed", "5", "--json",
    ];
    assert_eq!(entangle(&args, "").stdout, entangle(&args, "").stdout);
}

#[test]
fn verify_usage_errors() {
    let cases: &[&[&str]] = &[
        &["verify", "additivity", "-"],
        &["verify", "lu", "--random"],
        &["verify", "lu", "--trials", "0", "-"],
        &["verify", "lu", "--random", "--qubits", "2", "x.txt"],
        &["verify", "bogus"],
    ];
    for args in cases {
        let o = entangle(args, "|00>");
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
}
