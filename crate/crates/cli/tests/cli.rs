use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qphase_cli::documents::Document;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn qphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qphase"))
        .args(args)
        .env_remove("QPHASE_TOL")
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_p_exit_codes() {
    let ok = qphase(&["validate-p", "--in", path_str(&fixture("hadamard_p.json"))]);
    assert_eq!(ok.status.code(), Some(0));
    let v = stdout_json(&ok);
    assert_eq!(v["legal"], true);
    assert_eq!(v["unitary"], true);
    assert_eq!(v["rank"], 1);

    let bad = qphase(&["validate-p", "--in", path_str(&fixture("transpose_p.json"))]);
    assert_eq!(bad.status.code(), Some(2));
    let v = stdout_json(&bad);
    assert_eq!(v["legal"], false);
    assert!((v["min_eigenvalue"].as_f64().unwrap() + 0.5).abs() < 1e-10);
}

#[test]
fn validate_r_zero_rates_are_legal() {
    let o = qphase(&[
        "validate-r",
        "--in",
        path_str(&fixture("zero_rates_n3.json")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["fixed_point_residual"], 0.0);
}

#[test]
fn errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(
        qphase(&["validate-p", "--in", path_str(&missing)])
            .status
            .code(),
        Some(1)
    );

    let garbage = dir.path().join("garbage.json");
    std::fs::write(
        &garbage,
        "{\"format_version\": 1, \"kind\": \"transition\", \"n\": 2, \"data\": [[1]]}",
    )
    .unwrap();
    let o = qphase(&["validate-p", "--in", path_str(&garbage)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("data"));

    // a rates document where a transition matrix is expected
    let o = qphase(&[
        "validate-p",
        "--in",
        path_str(&fixture("zero_rates_n3.json")),
    ]);
    assert_eq!(o.status.code(), Some(1));

    assert_eq!(qphase(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        qphase(&["ops", "--n", "4", "--check"]).status.code(),
        Some(1)
    );
    assert_eq!(qphase(&["channel-p"]).status.code(), Some(1));
    let both = qphase(&[
        "channel-p",
        "--kraus",
        "a.json",
        "--unitary",
        path_str(&fixture("hadamard_unitary.json")),
    ]);
    assert_eq!(both.status.code(), Some(1));
    assert_eq!(
        qphase(&["validate-p", "--in", "x", "--tol", "-1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn help_documents_exit_codes() {
    let o = qphase(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("Exit codes"));
    assert!(text.contains("QPHASE_TOL"));
}

#[test]
fn tolerance_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_qphase"))
        .args([
            "validate-r",
            "--in",
            path_str(&fixture("zero_rates_n3.json")),
        ])
        .env("QPHASE_TOL", "1e-6")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&o)["tol"], 1e-6);
    let o = Command::new(env!("CARGO_BIN_EXE_qphase"))
        .args([
            "validate-r",
            "--in",
            path_str(&fixture("zero_rates_n3.json")),
            "--tol",
            "1e-4",
        ])
        .env("QPHASE_TOL", "1e-6")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&o)["tol"], 1e-4);
    let o = Command::new(env!("CARGO_BIN_EXE_qphase"))
        .args([
            "validate-r",
            "--in",
            path_str(&fixture("zero_rates_n3.json")),
        ])
        .env("QPHASE_TOL", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn wigner_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");
    let rho = dir.path().join("rho.json");
    let src = fixture("position2_density_n5.json");
    assert_eq!(
        qphase(&["wigner", "--in", path_str(&src), "--out", path_str(&w)])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        qphase(&[
            "wigner",
            "--in",
            path_str(&w),
            "--inverse",
            "--out",
            path_str(&rho)
        ])
        .status
        .code(),
        Some(0)
    );
    let (Document::Density { matrix: a, .. }, Document::Density { matrix: b, .. }) =
        (Document::load(&src).unwrap(), Document::load(&rho).unwrap())
    else {
        panic!("expected density documents");
    };
    assert!(a.max_abs_diff(&b) < 1e-12);
}

#[test]
fn channel_p_from_kraus() {
    let dir = tempfile::tempdir().unwrap();
    let k = dir.path().join("k.json");
    // amplitude damping with gamma = 0.3
    let g: f64 = 0.3;
    let doc = serde_json::json!({
        "format_version": 1, "kind": "kraus_set", "n": 2,
        "data": [
            [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [(1.0 - g).sqrt(), 0.0]]],
            [[[0.0, 0.0], [g.sqrt(), 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
        ]
    });
    std::fs::write(&k, doc.to_string()).unwrap();
    let p = dir.path().join("p.json");
    assert_eq!(
        qphase(&["channel-p", "--kraus", path_str(&k), "--out", path_str(&p)])
            .status
            .code(),
        Some(0)
    );
    let v = qphase(&["validate-p", "--in", path_str(&p)]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(stdout_json(&v)["unitary"], false);
}

#[test]
fn rates_and_evolve() {
    let dir = tempfile::tempdir().unwrap();
    let r = dir.path().join("r.json");
    assert_eq!(
        qphase(&["rates", "--ring", "--n", "5", "--out", path_str(&r)])
            .status
            .code(),
        Some(0)
    );
    let v = qphase(&["validate-r", "--in", path_str(&r)]);
    assert_eq!(v.status.code(), Some(0));
    assert!(
        stdout_json(&v)["odd_prime_condition_residual"]
            .as_f64()
            .unwrap()
            < 1e-9
    );

    let traj = dir.path().join("traj.json");
    let o = qphase(&[
        "evolve",
        "--w0",
        path_str(&fixture("position2_wigner_n5.json")),
        "--rates",
        path_str(&r),
        "--t",
        "1.0",
        "--frames",
        "10",
        "--out",
        path_str(&traj),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let Document::Trajectory { times, frames, .. } = Document::load(&traj).unwrap() else {
        panic!("expected a trajectory");
    };
    assert_eq!(times.len(), 11);
    assert_eq!(frames.len(), 11);
    for f in &frames {
        assert!((f.sum() - 1.0).abs() < 1e-9);
    }

    // a nonzero diagonal rate never comes from a Hamiltonian
    let bad = dir.path().join("bad.json");
    let mut data = vec![vec![0.0; 25]; 25];
    data[0][0] = 1.0;
    let doc = serde_json::json!({"format_version": 1, "kind": "rates", "n": 5, "data": data});
    std::fs::write(&bad, doc.to_string()).unwrap();
    assert_eq!(
        qphase(&["validate-r", "--in", path_str(&bad)])
            .status
            .code(),
        Some(2)
    );
    let w0 = fixture("position2_wigner_n5.json");
    let args = [
        "evolve",
        "--w0",
        path_str(&w0),
        "--rates",
        path_str(&bad),
        "--t",
        "1.0",
        "--frames",
        "2",
    ];
    assert_eq!(qphase(&args).status.code(), Some(2));
    let mut forced = args.to_vec();
    forced.push("--allow-illegal");
    assert_eq!(qphase(&forced).status.code(), Some(0));
}

#[test]
fn rates_from_hamiltonian_documents() {
    let dir = tempfile::tempdir().unwrap();
    // ring Hamiltonian in displacement form at N = 5: kappa_0 = 2, kappa_(+-1,0) = -1
    let mut grid = vec![vec![[0.0, 0.0]; 5]; 5];
    grid[0][0] = [2.0, 0.0];
    grid[1][0] = [-1.0, 0.0];
    grid[4][0] = [-1.0, 0.0];
    let hd = dir.path().join("hd.json");
    let doc =
        serde_json::json!({"format_version": 1, "kind": "hamiltonian_d", "n": 5, "data": grid});
    std::fs::write(&hd, doc.to_string()).unwrap();
    let o = qphase(&["rates", "--hamiltonian", path_str(&hd)]);
    assert_eq!(o.status.code(), Some(0));
    let Document::Rates(from_d) = Document::parse(&String::from_utf8_lossy(&o.stdout)).unwrap()
    else {
        panic!("expected rates");
    };
    let Document::Rates(ring) = Document::load(&fixture("ring_rates_n5.json")).unwrap() else {
        panic!("expected rates");
    };
    assert!(from_d.matrix().max_abs_diff(ring.matrix()) < 1e-12);

    let ha = dir.path().join("ha.json");
    let doc = serde_json::json!({"format_version": 1, "kind": "hamiltonian_a", "n": 3, "data": vec![vec![0.5; 3]; 3]});
    std::fs::write(&ha, doc.to_string()).unwrap();
    let o = qphase(&["rates", "--hamiltonian", path_str(&ha), "--hbar", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["hbar"], 2.0);

    assert_eq!(qphase(&["rates", "--ring"]).status.code(), Some(1));
    assert_eq!(
        qphase(&["rates", "--ring", "--n", "2"]).status.code(),
        Some(1)
    );
}

#[test]
fn ops_outputs() {
    let o = qphase(&["ops", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let Document::PhasePointOperators { operators, .. } =
        Document::parse(&String::from_utf8_lossy(&o.stdout)).unwrap()
    else {
        panic!("expected operators");
    };
    assert_eq!(operators.len(), 9);
    let o = qphase(&["ops", "--n", "5", "--check"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["pass"], true);
}

#[test]
fn selftest_passes() {
    let o = qphase(&["selftest"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}
