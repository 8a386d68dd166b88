//! End-to-end runs of the `trispec` binary against the shipped fixture
//! models: each run must exit 0 and produce byte-identical reports when
//! repeated.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.pop();
    p.pop();
    p.push("fixtures");
    p.push(name);
    p.to_str().unwrap().to_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trispec"))
        .args(args)
        .output()
        .expect("binary launches")
}

/// Runs twice, asserts exit 0 both times and byte-identical stdout, and
/// returns the report text.
fn run_deterministic(args: &[&str]) -> String {
    let first = run(args);
    assert!(
        first.status.success(),
        "exit {:?}\nstderr: {}",
        first.status.code(),
        String::from_utf8_lossy(&first.stderr)
    );
    let second = run(args);
    assert!(second.status.success());
    assert_eq!(
        first.stdout, second.stdout,
        "repeated run changed the report"
    );
    String::from_utf8(first.stdout).expect("reports are UTF-8")
}

#[test]
fn essential_fixture_run_reports_the_assembled_union() {
    let model = fixture("identical-nn-zr.cfg");
    let report = run_deterministic(&[
        "essential", "--model", &model, "--K", "0,0,0", "--n", "8",
    ]);
    assert!(report.contains("[result]"));
    assert!(report.contains("band = 0.000000000000e0 1.350000000000e1"));
    assert!(report.contains("union_count = 1"));
    // audit trail: the resolved model rides along
    assert!(report.contains("potential1[0,0,0] = 8.000000000000e0"));
    assert!(report.contains("n = 8"));
}

#[test]
fn twobody_fixture_run_reports_the_z_table() {
    let model = fixture("weak-nn-zr.cfg");
    let report = run_deterministic(&[
        "twobody",
        "--model",
        &model,
        "--k",
        "0,0,0",
        "--z-sweep",
        "-2.0:-0.5:7",
    ]);
    assert!(report.contains("table_columns = z below_count fredholm_determinant"));
    assert!(report.contains("table_rows = 7"));
    // weak coupling: no level below the window, determinant short of 1
    for line in report.lines().filter(|l| l.starts_with("table[")) {
        let value = line.split(" = ").nth(1).unwrap();
        let fields: Vec<&str> = value.split(' ').collect();
        assert_eq!(fields.len(), 3, "bad row `{line}`");
        assert_eq!(fields[1], "0", "unexpected bound level in `{line}`");
        let det: f64 = fields[2].parse().unwrap();
        assert!(det > 0.0 && det < 1.0, "determinant out of range in `{line}`");
    }
}

#[test]
fn oracle_fixture_run_accounts_for_every_eigenvalue() {
    let model = fixture("deep-nn-zr.cfg");
    let report = run_deterministic(&["oracle", "--model", &model, "--K", "0,0,0", "--n", "4"]);
    assert!(report.contains("full_count = 4096"));
    assert!(report.contains("containment_fraction = 1.000000000000e0"));
    assert!(report.contains("above_union = 0"));
    assert!(report.contains("in_gaps = 0"));
    assert!(report.contains("isolated_below_count = 1"));
}

#[test]
fn exit_codes_distinguish_failure_families() {
    // missing file: configuration error
    let missing = run(&["validate", "--model", "/nonexistent/x.cfg"]);
    assert_eq!(missing.status.code(), Some(2));

    // spectral parameter inside the band: precondition violation
    let model = fixture("weak-nn-zr.cfg");
    let in_band = run(&["twobody", "--model", &model, "--z", "4.0"]);
    assert_eq!(in_band.status.code(), Some(3));

    // resolution over the dense-operator cap: precondition violation
    let over_cap = run(&["oracle", "--model", &model, "--n", "6"]);
    assert_eq!(over_cap.status.code(), Some(3));
}
