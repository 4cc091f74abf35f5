use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use psdcert::CertificateRecord;
use tempfile::TempDir;

fn psdcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psdcert")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn bound_of(o: &Output) -> f64 {
    let out = stdout(o);
    let line = out.lines().find(|l| l.starts_with("bound = ")).expect("bound line");
    line["bound = ".len()..].parse().unwrap()
}

const EXAMPLE1: &str = "%%MatrixMarket matrix array real general\n2 2\n1\n-1\n-1\n0\n";

#[test]
fn project_writes_factors_and_a_valid_certificate() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "ex1.mtx", EXAMPLE1);
    let out = dir.path().join("out");
    let o = psdcert(&["project", &input, "--out", out.to_str().unwrap(), "--dense"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // a 2x2 matrix is solved exactly, so the certificate is at rounding level
    assert!(bound_of(&o) < 1e-12);
    for f in ["ex1_basis.mtx", "ex1_values.mtx", "ex1_projection.mtx"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let p = psdcert::read_matrix_market(out.join("ex1_projection.mtx")).unwrap();
    let expected = psdcert::generators::example1().expected_projection;
    assert!((p - expected).norm() < 1e-12);

    // a second run appends
    let o = psdcert(&["project", &input, "--out", out.to_str().unwrap(), "--side", "pos"]);
    assert!(o.status.success());
    let text = fs::read_to_string(out.join("ex1_certificate.jsonl")).unwrap();
    let records: Vec<CertificateRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 2);
    for r in &records {
        assert!(r.revalidate(1e-12).unwrap());
        assert_eq!((r.n, r.conservative), (2, true));
    }
    assert_eq!(records[1].side, psdcert::Side::Positive);
}

#[test]
fn zero_and_identity_matrices_have_zero_bounds() {
    let dir = TempDir::new().unwrap();
    let zero = write(dir.path(), "zero.mtx", "%%MatrixMarket matrix coordinate real symmetric\n4 4 0\n");
    let o = psdcert(&["project", &zero, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(bound_of(&o), 0.0);

    let eye = write(
        dir.path(),
        "eye.mtx",
        "%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 1\n2 2 1\n3 3 1\n",
    );
    let o = psdcert(&["project", &eye, "--side", "neg", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("side = negative"));
    assert!(bound_of(&o) < 1e-12);
}

#[test]
fn bad_inputs_map_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.mtx");
    assert_eq!(psdcert(&["project", missing.to_str().unwrap()]).status.code(), Some(2));

    let asym = write(dir.path(), "asym.mtx", "%%MatrixMarket matrix array real general\n2 2\n1\n2\n0\n1\n");
    let o = psdcert(&["project", &asym, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let nan = write(dir.path(), "nan.mtx", "%%MatrixMarket matrix array real general\n2 2\n1\nNaN\nNaN\n1\n");
    let o = psdcert(&["project", &nan, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn verify_examples_passes() {
    let o = psdcert(&["verify-examples"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().count() >= 5);
    assert!(!out.contains("FAIL"));
}

#[test]
fn gap_sweep_is_deterministic() {
    let args = ["gap-sweep", "--eps", "1", "--n", "60", "--wanted", "10"];
    let a = psdcert(&args);
    let b = psdcert(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    // header plus one row
    assert_eq!(stdout(&a).lines().count(), 2);
}

#[test]
fn trace_writes_csv_to_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("trace.csv");
    let o = psdcert(&["trace", "--n", "60", "--wanted", "5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out).unwrap();
    assert!(text.starts_with("iter,"));
    assert!(text.lines().count() > 1);
}
