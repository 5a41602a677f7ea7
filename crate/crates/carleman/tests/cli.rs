use std::path::Path;
use std::process::Command;

use carleman::cli::{exit, run};
use serde_json::Value;

const VDP: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/demos/vanderpol.ode");

fn carleman(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("carleman").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn read_mm(path: &Path) -> (usize, usize, Vec<(usize, usize, f64)>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("%%MatrixMarket matrix coordinate real general")
    );
    let dims: Vec<usize> = lines
        .next()
        .unwrap()
        .split(' ')
        .map(|s| s.parse().unwrap())
        .collect();
    let entries: Vec<(usize, usize, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(' ').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(entries.len(), dims[2]);
    (dims[0], dims[1], entries)
}

#[test]
fn lift_van_der_pol() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, _) = carleman(&["lift", VDP, "-N", "3", "-N", "1", "--out", out]);
    assert_eq!(code, exit::OK);
    let meta = read_json(&dir.path().join("lift_N3.json"));
    assert_eq!(meta["dimension"], 14);
    assert_eq!(meta["k"], 3);
    assert_eq!(meta["block_offsets"], serde_json::json!([0, 2, 6]));
    let (rows, cols, entries) = read_mm(&dir.path().join("A_N3.mtx"));
    assert_eq!((rows, cols), (14, 14));
    assert_eq!(entries.len(), meta["nnz"].as_u64().unwrap() as usize);

    let (rows, _, entries) = read_mm(&dir.path().join("A_N1.mtx"));
    assert_eq!(rows, 2);
    assert_eq!(entries, [(1, 2, 1.0), (2, 1, -1.0), (2, 2, 0.6)]);
    let summary: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(summary.as_array().unwrap().len(), 2);
}

#[test]
fn lift_scalar_quadratic() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "scalar.ode", "x1' = -0.5*x1 + 2*x1^2\n");
    let out = dir.path().join("out");
    let (code, _, _) = carleman(&[
        "lift",
        &input,
        "-N",
        "3",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, exit::OK);
    let m = read_json(&out.join("A_N3.json"));
    assert_eq!(
        m["entries"],
        serde_json::json!([
            [0, 0, -0.5],
            [0, 1, 2.0],
            [1, 1, -1.0],
            [1, 2, 4.0],
            [2, 2, -1.5]
        ])
    );
}

#[test]
fn bounds_van_der_pol() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, _) = carleman(&["bounds", VDP, "--x0", "0,0.5", "-N", "4", "--out", out]);
    assert_eq!(code, exit::OK);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert!((report["T_star"].as_f64().unwrap() - 0.5768).abs() < 1e-3);
    assert!((report["beta0"].as_f64().unwrap() - 0.1875).abs() < 1e-12);
    assert_eq!(report["norm_F1_tilde"], 3.2);
    assert_eq!(report["norm_F2_tilde"], 1.2);
    let csv = std::fs::read_to_string(dir.path().join("bounds_N4.csv")).unwrap();
    assert!(csv.starts_with("t,bound_E2,bound_E1\n0,0,0\n"));
    assert_eq!(report, read_json(&dir.path().join("bounds.json")));
}

#[test]
fn bounds_with_alpha_reports_e1_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, _) = carleman(&[
        "bounds", VDP, "--x0", "0,0.5", "--alpha", "1", "-N", "2", "--out", out,
    ]);
    assert_eq!(code, exit::OK);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["alpha"], 1.0);
    assert!(report["E1_horizon"].as_f64().unwrap() > 0.0);
}

#[test]
fn linear_system_has_infinite_horizon_and_no_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "linear.ode",
        "x1' = -x1 + 0.5*x2\nx2' = -2*x2\n",
    );
    let out = dir.path().to_str().unwrap();
    let (code, stdout, _) = carleman(&["bounds", &input, "--x0", "0.3,-0.4", "--out", out]);
    assert_eq!(code, exit::OK);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["T_star"], "inf");

    let (code, _, _) = carleman(&[
        "compare", &input, "--x0", "0.3,-0.4", "-N", "3", "--tend", "1", "--out", out,
    ]);
    assert_eq!(code, exit::OK);
    let csv = std::fs::read_to_string(dir.path().join("compare_N3.csv")).unwrap();
    for line in csv.lines().skip(1) {
        assert_eq!(line.split(',').nth(1), Some("0"), "{line}");
    }
}

#[test]
fn compare_van_der_pol_is_sound() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, stderr) = carleman(&[
        "compare", VDP, "--x0", "0,0.5", "-N", "2,4", "--step", "0.005", "--out", out,
    ]);
    assert_eq!(code, exit::OK, "{stderr}");
    let report: Value = serde_json::from_str(&stdout).unwrap();
    for order in report["orders"].as_array().unwrap() {
        assert_eq!(order["violations"], 0);
        assert!(order["max_ratio"].as_f64().unwrap() < 1.0);
    }
    let csv = std::fs::read_to_string(dir.path().join("compare_N2.csv")).unwrap();
    assert!(csv.starts_with("t,err,bound_E2,bound_E1\n"));
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = dir.path().to_str().unwrap();
        let (code, _, _) = carleman(&[
            "compare", VDP, "--x0", "0,0.5", "-N", "2,3", "--step", "0.01", "--out", out,
        ]);
        assert_eq!(code, exit::OK);
    }
    for name in ["compare.json", "compare_N2.csv", "compare_N3.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap()
        );
    }
}

#[test]
fn simulate_records_blow_up() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "riccati.ode", "x1' = x1^2\n");
    let out = dir.path().to_str().unwrap();
    let (code, stdout, _) = carleman(&[
        "simulate", &input, "--x0", "1", "--tend", "2", "-N", "3", "--out", out,
    ]);
    assert_eq!(code, exit::OK);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    let t = report["nonlinear_blow_up"].as_f64().unwrap();
    assert!(t > 0.99 && t < 1.1);
    assert_eq!(report["truncated"][0]["blow_up"], Value::Null);
    let csv = std::fs::read_to_string(dir.path().join("nonlinear.csv")).unwrap();
    assert!(csv.starts_with("t,comp_1\n0,1\n"));
}

#[test]
fn simulate_van_der_pol() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _, _) = carleman(&[
        "simulate",
        VDP,
        "--x0=0,0.5",
        "--tend",
        "1",
        "--step",
        "0.01",
        "--out",
        out,
    ]);
    assert_eq!(code, exit::OK);
    let nonlinear = std::fs::read_to_string(dir.path().join("nonlinear.csv")).unwrap();
    let truncated = std::fs::read_to_string(dir.path().join("truncated_N8.csv")).unwrap();
    assert_eq!(nonlinear.lines().count(), 102);
    let last = |s: &str| -> Vec<f64> {
        s.lines()
            .last()
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect()
    };
    let (a, b) = (last(&nonlinear), last(&truncated));
    assert!((a[1] - b[1]).abs() < 1e-2 && (a[2] - b[2]).abs() < 1e-2);
}

#[test]
fn reduce_writes_a_loadable_quadratic_system() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, _) = carleman(&["reduce", VDP, "--out", out]);
    assert_eq!(code, exit::OK);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["reduced_dim"], 6);
    assert_eq!(report["norm_F1_tilde"], 3.2);
    let reduced = carleman::input::load(&dir.path().join("reduced.json")).unwrap();
    assert_eq!(reduced.ode.degree(), 2);
    assert_eq!(reduced.ode.dim(), 6);
    let (rows, cols, _) = read_mm(&dir.path().join("F2_tilde.mtx"));
    assert_eq!((rows, cols), (6, 36));
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = carleman(&[
        "verify",
        "--cases",
        "10",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, exit::OK);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 5);
    assert_eq!(
        read_json(&dir.path().join("verify.json"))
            .as_array()
            .unwrap()
            .len(),
        5
    );
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let bad = write(dir.path(), "bad.ode", "x1' = 1 + x1\n");
    assert_eq!(
        carleman(&["lift", &bad, "-N", "2", "--out", out]).0,
        exit::PARSE
    );
    let syntax = write(dir.path(), "syntax.ode", "x1' = x1 *\n");
    let (code, _, stderr) = carleman(&["lift", &syntax, "-N", "2", "--out", out]);
    assert_eq!(code, exit::PARSE);
    assert!(stderr.contains("1:11"), "{stderr}");
    assert_eq!(
        carleman(&["lift", "/nonexistent/system.ode", "-N", "2", "--out", out]).0,
        exit::PARSE
    );
    assert_eq!(carleman(&["lift", VDP, "--out", out]).0, exit::PARSE);
    assert_eq!(
        carleman(&["lift", VDP, "-N", "0", "--out", out]).0,
        exit::PARSE
    );
    assert_eq!(carleman(&["bounds", VDP, "--out", out]).0, exit::PARSE);
    assert_eq!(
        carleman(&["bounds", VDP, "--x0", "1,2,3", "--out", out]).0,
        exit::PARSE
    );
    assert_eq!(
        carleman(&["compare", VDP, "--x0", "0,0.5", "--step", "0", "--out", out]).0,
        exit::PARSE
    );
    assert_eq!(
        carleman(&["bounds", VDP, "--x0", "0,0.5", "--alpha", "0.1", "--out", out]).0,
        exit::PARSE
    );
    assert_eq!(
        carleman(&["lift", VDP, "-N", "40", "--out", out]).0,
        exit::SIZE_GUARD
    );
    assert_eq!(carleman(&["unknown"]).0, exit::PARSE);
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_carleman");
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(bin)
        .args(["lift", VDP, "-N", "40", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(exit::SIZE_GUARD));
    assert!(String::from_utf8_lossy(&status.stderr).starts_with("error: "));
    let ok = Command::new(bin)
        .args(["lift", VDP, "-N", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(exit::OK));
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(exit::OK));
}
