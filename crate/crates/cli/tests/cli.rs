use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qchan(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qchan"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("QCHAN_THREADS", t),
        None => cmd.env_remove("QCHAN_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn analyze_identity_reports_extreme_point_and_region_a() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "id.json",
        r#"{"dim":2,"form":"family","family":{"name":"identity"}}"#,
    );
    let out = qchan(&["analyze", "--spec", &spec, "--q", "1,2"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let e = &v["entropies"][0];
    assert!(e["s_map"].as_f64().unwrap().abs() < 1e-10);
    assert!((e["s_rec"].as_f64().unwrap() - 4f64.ln()).abs() < 1e-10);
    assert_eq!(v["separability"][0][1]["region"], "A");
    assert_eq!(v["sigma1"].as_f64().unwrap(), 1.0);
}

#[test]
fn analyze_completely_depolarizing_is_region_c() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "star.json",
        r#"{"dim":2,"form":"family","family":{"name":"depolarizing","params":{"alpha":0.0}}}"#,
    );
    let out = qchan(&["analyze", "--spec", &spec, "--q", "2"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["separability"][0][1]["region"], "C");
}

#[test]
fn analyze_bits_scales_entropies() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "id.json",
        r#"{"dim":2,"form":"kraus","matrices":[[[1,0],[0,0],[0,0],[1,0]]]}"#,
    );
    let out = qchan(&["analyze", "--spec", &spec, "--q", "1", "--bits"], None);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["units"], "bits");
    assert!((v["entropies"][0]["s_rec"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let malformed = write(dir.path(), "bad.json", "{\"dim\": 2,\n \"form\": ");
    let out = qchan(&["analyze", "--spec", &malformed], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    let not_tp = write(
        dir.path(),
        "half.json",
        r#"{"dim":2,"form":"kraus","matrices":[[[0.5,0],[0,0],[0,0],[0.5,0]]]}"#,
    );
    let out = qchan(&["analyze", "--spec", &not_tp], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("validation"), "{}", stderr(&out));

    for args in [
        vec!["analyze", "--spec", "/nonexistent/spec.json"],
        vec!["scan", "--n", "0"],
        vec!["scan", "--dim", "9"],
        vec!["scan", "--ensemble", "pauli", "--dim", "3"],
        vec!["scan", "--mode", "sideways"],
        vec!["curve", "--name", "zigzag"],
        vec!["verify", "--suite", "everything"],
        vec!["frobnicate"],
    ] {
        assert_eq!(qchan(&args, None).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(
        qchan(&["verify", "--n", "1"], Some("zero")).status.code(),
        Some(2)
    );
}

#[test]
fn scan_bytes_do_not_depend_on_threads_or_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "8", "8"].iter().enumerate() {
        let path = dir.path().join(format!("scan{i}.csv"));
        let out = qchan(
            &[
                "scan",
                "--n",
                "64",
                "--seed",
                "7",
                "--q",
                "2",
                "--out",
                path.to_str().unwrap(),
            ],
            Some(threads),
        );
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        outputs.push(fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    assert_eq!(text.lines().count(), 65);
    assert!(text.starts_with("label,seed_index,params,q,s_map,s_rec,s_output,sigma1,"));
}

#[test]
fn scan_json_and_gnuplot() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchan(
        &[
            "scan",
            "--n",
            "3",
            "--format",
            "json",
            "--ensemble",
            "random_bistochastic",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let rows: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3);
    assert!(rows[0]["slacks"]["tradeoff_unital"].as_f64().unwrap() >= -1e-8);

    let csv = dir.path().join("plane.csv");
    let gp = dir.path().join("plane.gp");
    let out = qchan(
        &[
            "scan",
            "--n",
            "3",
            "--mode",
            "appendixC_plane",
            "--out",
            csv.to_str().unwrap(),
            "--gnuplot",
            gp.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(fs::read_to_string(gp)
        .unwrap()
        .contains(csv.to_str().unwrap()));
}

#[test]
fn curve_ab_endpoints() {
    let out = qchan(&["curve", "--name", "ab", "--grid", "11"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    let ln4 = 4f64.ln();
    assert!((rows[0][1] - ln4).abs() < 1e-10 && rows[0][2].abs() < 1e-10);
    assert!(rows[10][1].abs() < 1e-10 && (rows[10][2] - ln4).abs() < 1e-10);
}

#[test]
fn curve_diagonal_rows_have_equal_collision_entropies() {
    let out = qchan(
        &[
            "curve",
            "--name",
            "diagonal_Rinv",
            "--grid",
            "7",
            "--q",
            "2",
        ],
        None,
    );
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] - v[2]).abs() < 1e-10, "{line}");
    }
}

#[test]
fn verify_passes_is_reproducible_and_catches_invalid_maps() {
    let a = qchan(&["verify", "--n", "10", "--seed", "5"], Some("1"));
    let b = qchan(&["verify", "--n", "10", "--seed", "5"], Some("4"));
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stdout)
    );
    assert_eq!(a.stdout, b.stdout);

    let bad = qchan(
        &[
            "verify",
            "--suite",
            "bounds",
            "--n",
            "4",
            "--inject-invalid",
        ],
        None,
    );
    assert_eq!(bad.status.code(), Some(1));
    let text = String::from_utf8(bad.stdout).unwrap();
    assert!(
        text.contains("reproduce: suite=bounds seed=0 index=4"),
        "{text}"
    );
}

#[test]
fn closed_stdout_is_not_a_crash() {
    use std::io::Read;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_qchan"))
        .args(["scan", "--n", "4000"])
        .env("QCHAN_THREADS", "1")
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut head = [0u8; 16];
    child.stdout.take().unwrap().read_exact(&mut head).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(!stderr(&out).contains("panicked"));
}
