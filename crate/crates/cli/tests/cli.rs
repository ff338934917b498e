use std::path::Path;
use std::process::{Command, Output};

use spin_wigner::phase_space::slice_quadrature;
use spin_wigner::state::write_state_file;
use spin_wigner::{evolve, integrate, make_state, oat_hamiltonian, Kernel, StateSpec};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spin-wigner"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(args: &[&str], dir: &Path) -> i32 {
    run(args, dir).status.code().unwrap()
}

fn csv_values(path: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,phi,value"));
    lines
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&["verify", "--kernel", "qubit", "--out", "q.json"], d),
        0
    );
    let report = json(&d.join("q.json"));
    for key in [
        "standardization_residual",
        "self_duality_residual",
        "covariance_residual",
    ] {
        assert!(report[key].as_f64().unwrap() <= 1e-10, "{key}");
    }
    assert_eq!(report["completeness"], "true");

    assert_eq!(
        code(&["verify", "--kernel", "tensorqubit", "--k", "2"], d),
        0
    );

    assert_eq!(
        code(
            &["verify", "--kernel", "spinj", "--j", "1", "--out", "s.json"],
            d
        ),
        0
    );
    assert!(
        json(&d.join("s.json"))["self_duality_residual"]
            .as_f64()
            .unwrap()
            > 1e-3
    );

    // Monte Carlo nodes cannot meet the standardization threshold.
    assert_eq!(
        code(&["verify", "--kernel", "qubit", "--quad", "mc:500"], d),
        1
    );
    assert_eq!(
        code(&["verify", "--kernel", "multiqubit", "--k", "7"], d),
        4
    );
    assert_eq!(code(&["verify", "--kernel", "nope"], d), 2);
    assert_eq!(code(&["verify", "--kernel", "spinj"], d), 2);
    assert_eq!(
        code(&["verify", "--kernel", "qubit", "--quad", "gauss:3"], d),
        2
    );
}

#[test]
fn field_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let base = ["wigner", "--kernel", "qubit"];
    let with = |extra: &[&str]| -> Vec<String> {
        base.iter().chain(extra).map(|s| s.to_string()).collect()
    };
    let c = |args: Vec<String>| code(&args.iter().map(String::as_str).collect::<Vec<_>>(), d);
    assert_eq!(c(with(&["--state", "cat:j=1/2", "--grid", "1x5"])), 2);
    assert_eq!(c(with(&["--state", "ghz:0"])), 2);
    assert_eq!(c(with(&["--state", "file:missing.json"])), 3);
    assert_eq!(
        c(with(&[
            "--state",
            "cat:j=1/2",
            "--out",
            "no/such/dir/w.csv"
        ])),
        3
    );
    assert_eq!(c(with(&["--state", "cat:j=3/2"])), 2);
    assert_eq!(
        code(
            &[
                "wigner",
                "--kernel",
                "multiqubit",
                "--k",
                "2",
                "--state",
                "bell:phi+"
            ],
            d
        ),
        2,
        "multi-site fields need --slice"
    );
    assert_eq!(code(&["kernels", "list"], d), 0);
    assert_eq!(code(&["states", "list"], d), 0);
}

#[test]
fn spin_field_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = [
        "wigner",
        "--kernel",
        "spinj",
        "--j",
        "3/2",
        "--state",
        "cat:j=3/2",
        "--grid",
        "181x361",
        "--out",
        "w.csv",
        "--gnuplot",
    ];
    assert_eq!(code(&args, d), 0);
    assert_eq!(csv_values(&d.join("w.csv")).len(), 65341);
    let script = std::fs::read_to_string(d.join("w.gp")).unwrap();
    assert!(script.contains("w.csv"));
}

#[test]
fn ghz_collective_slice() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "wigner",
        "--kernel",
        "multiqubit",
        "--k",
        "3",
        "--state",
        "ghz:3",
        "--slice",
        "collective",
        "--grid",
        "91x181",
        "--out",
        "g.csv",
    ];
    assert_eq!(code(&args, dir.path()), 0);
    let w = csv_values(&dir.path().join("g.csv"));
    assert_eq!(w.len(), 91 * 181);
    assert!(w.iter().any(|v| *v < 0.0));
}

#[test]
fn squeezed_state_q_function_is_nonnegative() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let rho = make_state(&StateSpec::Plus(6)).unwrap();
    let sq = evolve(
        &rho,
        &oat_hamiltonian(6).unwrap(),
        std::f64::consts::PI / 125.0,
    )
    .unwrap();
    write_state_file(&d.join("sq.json"), sq.matrix()).unwrap();
    let args = [
        "qfunc",
        "--kernel",
        "multiqubit",
        "--k",
        "6",
        "--state",
        "file:sq.json",
        "--slice",
        "collective",
        "--grid",
        "41x41",
        "--phirange=-1.5708,1.5708",
        "--out",
        "q.csv",
    ];
    let out = run(&args, d);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(csv_values(&d.join("q.csv")).iter().all(|v| *v >= -1e-12));
}

#[test]
fn evolve_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = [
        "evolve", "--k", "6", "--state", "plus:6", "--time", "pi/125", "--out", "sq",
    ];
    assert_eq!(code(&args, d), 0);
    let s = json(&d.join("sq/summary.json"));
    assert!(s["min_w"].as_f64().unwrap() < 0.0);
    assert!(s["min_q"].as_f64().unwrap() >= -1e-12);
    assert!(s["negativity_volume"].as_f64().unwrap() > 0.0);
    assert!(s["identity_residual"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn evolve_at_time_zero_is_static_field() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let ev = [
        "evolve", "--k", "1", "--state", "plus:1", "--time", "0", "--grid", "11x13", "--out", "ev",
    ];
    assert_eq!(code(&ev, d), 0);
    let field = [
        "wigner",
        "--kernel",
        "multiqubit",
        "--k",
        "1",
        "--state",
        "plus:1",
        "--grid",
        "11x13",
        "--thetarange",
        "0,pi/2",
        "--phirange",
        "0,pi",
        "--out",
        "w.csv",
    ];
    assert_eq!(code(&field, d), 0);
    assert_eq!(
        std::fs::read(d.join("ev/wigner.csv")).unwrap(),
        std::fs::read(d.join("w.csv")).unwrap()
    );
}

#[test]
fn csv_reintegrates_to_summary_normalization() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = [
        "evolve",
        "--k",
        "2",
        "--time",
        "pi/125",
        "--grid",
        "31x17",
        "--phirange=-pi/2,pi/2",
        "--out",
        "ev",
    ];
    assert_eq!(code(&args, d), 0);
    let s = json(&d.join("ev/summary.json"));
    assert!(s["identity_residual"].as_f64().unwrap() <= 1e-12);
    let w = csv_values(&d.join("ev/wigner.csv"));
    let kernel = Kernel::multiqubit(2).unwrap();
    let pi = std::f64::consts::PI;
    let q = slice_quadrature(&kernel, (0.0, pi / 2.0), (-pi / 2.0, pi / 2.0), (31, 17)).unwrap();
    let total = integrate(&w, &q).unwrap();
    assert!((total - s["normalization"].as_f64().unwrap()).abs() <= 1e-10);
}

#[test]
fn reconstruct_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(
        &[
            "reconstruct",
            "--kernel",
            "spinj",
            "--j",
            "1",
            "--state",
            "cat:j=1",
            "--out",
            "r.json",
        ],
        d,
    );
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary["max_abs_error"].as_f64().unwrap() <= 1e-8);
    let rec = spin_wigner::state::read_state_file(&d.join("r.json")).unwrap();
    assert!((rec.purity() - 1.0).abs() < 1e-8);
}
