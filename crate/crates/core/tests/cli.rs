use std::path::{Path, PathBuf};
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_bootlasso");

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/diabetes_quadratic.csv")
}

struct Run {
    code: i32,
    stderr: String,
}

fn run(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env("BOOTLASSO_THREADS", "2")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Compares exit code and stderr with `tests/golden/<name>.txt`, whose first
/// line is `exit: N`.
fn check_golden(name: &str, r: &Run) {
    let got = format!("exit: {}\n{}", r.code, r.stderr);
    let path = golden_dir().join(format!("{name}.txt"));
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(got, want, "golden mismatch for {name}");
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn malformed_cell_names_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "a,b,y\n1,2,3\n2,x,4\n").unwrap();
    let r = run(dir.path(), &["tune", "bad.csv", "--response", "y", "--out", "out"]);
    check_golden("malformed_cell", &r);
    let m = manifest(&dir.path().join("out"));
    assert_eq!(m["status"], "error");
    assert_eq!(m["exit_code"], 2);
}

#[test]
fn missing_response_column() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.csv"), "a,b,y\n1,2,3\n2,3,4\n").unwrap();
    let r = run(dir.path(), &["tune", "d.csv", "--response", "z", "--out", "out"]);
    check_golden("missing_response", &r);
}

#[test]
fn constant_column_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.csv"), "a,b,y\n1,2,3\n1,3,4\n1,5,6\n").unwrap();
    let r = run(dir.path(), &["tune", "d.csv", "--response", "y", "--out", "out"]);
    check_golden("constant_column", &r);
    assert_eq!(manifest(&dir.path().join("out"))["exit_code"], 3);
}

#[test]
fn invalid_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(
        dir.path(),
        &["weights-preview", "--scheme", "beta:0,2", "--n", "10", "--out", "out"],
    );
    check_golden("invalid_scheme", &r);
    assert_eq!(manifest(&dir.path().join("out"))["status"], "error");
}

#[test]
fn config_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("noseed.cfg"), "# study\nb = 3\n").unwrap();
    check_golden(
        "missing_seed",
        &run(dir.path(), &["simulate", "noseed.cfg", "--out", "out"]),
    );
    std::fs::write(dir.path().join("typo.cfg"), "seed = 1\n\nreplications = 3\n").unwrap();
    check_golden(
        "unknown_key",
        &run(dir.path(), &["simulate", "typo.cfg", "--out", "out"]),
    );
}

#[test]
fn tune_is_reproducible_and_reports_rho() {
    let dir = tempfile::tempdir().unwrap();
    let csv = fixture();
    let args = |out: &str, threads: &str| {
        vec![
            "--threads".to_owned(),
            threads.to_owned(),
            "tune".to_owned(),
            csv.display().to_string(),
            "--response".into(),
            "y".into(),
            "--scheme".into(),
            "mofn:0.25".into(),
            "--b".into(),
            "12".into(),
            "--seed".into(),
            "7".into(),
            "--grid-size".into(),
            "40".into(),
            "--out".into(),
            out.to_owned(),
        ]
    };
    let a: Vec<String> = args("a", "1");
    let b: Vec<String> = args("b", "3");
    assert_eq!(
        run(dir.path(), &a.iter().map(String::as_str).collect::<Vec<_>>()).code,
        0
    );
    assert_eq!(
        run(dir.path(), &b.iter().map(String::as_str).collect::<Vec<_>>()).code,
        0
    );
    for f in ["mspe_curve.csv", "tuning_result.csv"] {
        let x = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let y = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
    let m = manifest(&dir.path().join("a"));
    assert_eq!(m["config"]["rho"], 0.25);
    assert_eq!(m["status"], "ok");

    // Replaying the manifest into a new directory reproduces the outputs.
    let r = run(dir.path(), &["replay", "a/manifest.json", "--out", "c"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    for f in ["mspe_curve.csv", "tuning_result.csv"] {
        let x = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let z = std::fs::read(dir.path().join("c").join(f)).unwrap();
        assert_eq!(x, z, "{f} differs after replay");
    }
}

#[test]
fn kfold_tuning_reports_both_rules() {
    let dir = tempfile::tempdir().unwrap();
    let csv = fixture();
    let r = run(
        dir.path(),
        &[
            "tune",
            csv.to_str().unwrap(),
            "--response",
            "y",
            "--scheme",
            "kfold:10",
            "--b",
            "10",
            "--grid-size",
            "40",
            "--out",
            "out",
        ],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let mut rdr = csv::Reader::from_path(dir.path().join("out/tuning_result.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((&rows[0][0], &rows[1][0]), ("min", "one_se"));
    let lmin: f64 = rows[0][1].parse().unwrap();
    let l1se: f64 = rows[1][1].parse().unwrap();
    assert!(l1se >= lmin);
}

#[test]
fn weights_preview_writes_step_profile() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(
        dir.path(),
        &[
            "weights-preview",
            "--scheme",
            "kfold:3",
            "--n",
            "9",
            "--replicates",
            "20",
            "--out",
            "out",
        ],
    );
    assert_eq!(r.code, 0);
    let text = std::fs::read_to_string(dir.path().join("out/weights_train.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# rho=0.6666666666666666"));
    assert_eq!(lines.next(), Some("rank,mean_weight,scheme,rho"));
    let weights: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(weights, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
    let test = std::fs::read_to_string(dir.path().join("out/weights_test.csv")).unwrap();
    assert!(test.lines().nth(2).unwrap().starts_with("1,0,"));
}

#[test]
fn version_flag() {
    let out = Command::new(BIN).arg("--version").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.starts_with(&format!("bootlasso {}", env!("CARGO_PKG_VERSION"))),
        "{text}"
    );
}
