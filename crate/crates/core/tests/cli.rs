use std::path::Path;
use std::process::{Command, Output};

use qmac::channels::erasure_mac;
use qmac::regions::{analytic_erasure_region, cq_state};
use qmac::states::{maximally_entangled_on, CqEnsemble, PureState};
use serde_json::json;
use sha2::{Digest, Sha256};

fn qmac(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmac"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

fn write_json(dir: &Path, name: &str, v: &serde_json::Value) {
    std::fs::write(dir.join(name), serde_json::to_vec(v).unwrap()).unwrap();
}

fn real_matrix(rows: &[&[f64]]) -> serde_json::Value {
    json!(rows
        .iter()
        .map(|r| r.iter().map(|x| [*x, 0.0]).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

#[test]
fn eval_standard_quantities() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_json(d, "pi.json", &real_matrix(&[&[0.5, 0.0], &[0.0, 0.5]]));
    let bell = real_matrix(&[
        &[0.5, 0.0, 0.0, 0.5],
        &[0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0],
        &[0.5, 0.0, 0.0, 0.5],
    ]);
    write_json(d, "bell.json", &json!({"matrix": bell, "dims": [2, 2]}));
    write_json(d, "zero.json", &real_matrix(&[&[1.0, 0.0], &[0.0, 0.0]]));

    let o = qmac(d, &["eval", "entropy", "--state", "pi.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1.000000000000");
    assert_eq!(
        stdout(&qmac(d, &["eval", "ic", "--state", "bell.json"])),
        "1.000000000000"
    );
    assert_eq!(
        stdout(&qmac(d, &["eval", "mi", "--state", "bell.json"])),
        "2.000000000000"
    );
    assert_eq!(
        stdout(&qmac(
            d,
            &[
                "eval",
                "trace_distance",
                "--state",
                "pi.json",
                "--other",
                "zero.json"
            ]
        )),
        "1.000000000000"
    );
    assert_eq!(
        stdout(&qmac(
            d,
            &[
                "eval",
                "fidelity",
                "--state",
                "pi.json",
                "--other",
                "zero.json"
            ]
        )),
        "0.500000000000"
    );
    // missing --other is a validation error
    assert_eq!(
        qmac(d, &["eval", "fidelity", "--state", "pi.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn eval_conditional_coherent_information_of_erasure_output() {
    let q = 0.2;
    let ens = CqEnsemble::new(
        vec![q, 1.0 - q],
        vec![
            PureState::basis(2, 0, "A'").unwrap(),
            PureState::basis(2, 1, "A'").unwrap(),
        ],
        maximally_entangled_on(2, "B", "B'").unwrap(),
    )
    .unwrap();
    let omega = cq_state(&erasure_mac(2).unwrap(), &ens).unwrap().assemble();
    let m = omega.matrix();
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    write_json(
        dir.path(),
        "omega.json",
        &json!({"matrix": rows, "dims": omega.layout().dims(), "labels": omega.layout().labels()}),
    );
    let o = qmac(
        dir.path(),
        &[
            "eval",
            "cond_ic",
            "--state",
            "omega.json",
            "--out",
            "v.json",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(stdout(&o), "0.600000000000");
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("v.json")).unwrap()).unwrap();
    assert!((doc["value"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert!(dir.path().join("v.manifest.json").exists());
}

#[test]
fn validation_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.json"), "{\"name\": \"x\", \"din\": 2,").unwrap();
    let o = qmac(
        d,
        &["region", "cq", "--spec", "bad.json", "--out", "r.json"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json"));

    write_json(
        d,
        "ragged.json",
        &json!({"name": "r", "din": [2], "dout": [2], "kraus": [[[[1, 0]], [[0, 0], [1, 0]]]]}),
    );
    let o = qmac(
        d,
        &["region", "cq", "--spec", "ragged.json", "--out", "r.json"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row"));

    write_json(
        d,
        "scalar.json",
        &json!({"name": "s", "din": 2, "dout": [2], "kraus": []}),
    );
    let o = qmac(
        d,
        &["region", "cq", "--spec", "scalar.json", "--out", "r.json"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    assert_eq!(
        qmac(d, &["region", "cq", "--restarts"]).status.code(),
        Some(2)
    );
    assert_eq!(qmac(d, &["no-such-command"]).status.code(), Some(2));
    assert_eq!(qmac(d, &["--help"]).status.code(), Some(0));
    assert!(!d.join("r.json").exists());
}

#[test]
fn dimension_cap_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmac(
        dir.path(),
        &[
            "region",
            "cq",
            "--builtin",
            "erasure",
            "--k",
            "4",
            "--out",
            "r.json",
        ],
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("64"));
    // hyphenated alias of the builtin name; 4^4 inputs also exceed the cap
    let o = qmac(
        dir.path(),
        &[
            "region",
            "qq",
            "--builtin",
            "phase-flip",
            "--k",
            "4",
            "--out",
            "r.json",
        ],
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn props_writes_a_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmac(dir.path(), &["props", "--trials", "5", "--out", "p.json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("p.json")).unwrap()).unwrap();
    assert_eq!(doc["passed"], json!(true));
    assert_eq!(doc["trials"], json!(5));
    assert_eq!(
        doc["checks"].as_array().unwrap().len(),
        qmac::information::CHECK_NAMES.len()
    );
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("p.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], json!("props"));
    assert_eq!(manifest["seed"], json!(42));
}

#[test]
fn region_run_writes_json_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = qmac(
        d,
        &[
            "region",
            "qq",
            "--builtin",
            "phase_flip",
            "--p",
            "0.1",
            "--restarts",
            "1",
            "--max-iters",
            "300",
            "--weights",
            "3",
            "--out",
            "out/q.json",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(d.join("out/q.csv")).unwrap();
    assert!(csv.starts_with("rate1,rate2,generator_id\n"));
    let max_sum = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').take(2).map(|x| x.parse().unwrap()).collect();
            f[0] + f[1]
        })
        .fold(f64::MIN, f64::max);
    let h = qmac::information::binary_entropy(0.1).unwrap().0;
    assert!((max_sum - (2.0 - h)).abs() < 0.01, "max sum {max_sum}");
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.join("out/q.manifest.json")).unwrap()).unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    for entry in outputs {
        let path = Path::new(entry["path"].as_str().unwrap());
        let path = if path.is_absolute() {
            path.to_path_buf()
        } else {
            d.join(path)
        };
        let digest = hex(&Sha256::digest(std::fs::read(path).unwrap()));
        assert_eq!(entry["sha256"].as_str().unwrap(), digest);
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn plot_of_the_analytic_erasure_region_is_frozen() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let region = analytic_erasure_region(2, 11).unwrap();
    std::fs::write(d.join("a.json"), serde_json::to_vec(&region).unwrap()).unwrap();
    let o = qmac(d, &["plot", "--region", "a.json", "--out", "a.svg"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let svg = std::fs::read(d.join("a.svg")).unwrap();
    assert!(svg.starts_with(b"<?xml"));
    assert_eq!(hex(&Sha256::digest(&svg)), GOLDEN_SVG_SHA256);
}

const GOLDEN_SVG_SHA256: &str = "f7490ed2cbd4411afe889ceab9e9e8679827776661fbec89680c67f69f389cba";

#[test]
fn outputs_default_to_the_working_directory() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = qmac(d, &["props", "--trials", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.join("props_report.json")).unwrap()).unwrap();
    assert_eq!(doc["trials"], json!(1));
    let o = qmac(
        d,
        &[
            "region",
            "cq",
            "--builtin",
            "erasure",
            "--restarts",
            "1",
            "--max-iters",
            "50",
            "--weights",
            "2",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    for f in ["cq_region.json", "cq_region.csv", "cq_region.manifest.json"] {
        assert!(d.join(f).exists(), "{f} missing");
    }
}
