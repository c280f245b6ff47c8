use std::path::Path;
use std::process::{Command, Output};

fn errdens(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_errdens"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("ERRDENS_THREADS", t);
    }
    cmd.output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let out = dir.path().join("density.csv");
    let sim = errdens(&["simulate", "--n", "400", "--d", "2", "--seed", "5", "--output", path_str(&data)], None);
    assert!(sim.status.success(), "{}", String::from_utf8_lossy(&sim.stderr));
    let est = errdens(
        &["estimate", "--input", path_str(&data), "--output", path_str(&out), "--grid-count", "101"],
        None,
    );
    assert!(est.status.success(), "{}", String::from_utf8_lossy(&est.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 102);
    let meta: String = std::fs::read_to_string(dir.path().join("density.csv.meta.json")).unwrap();
    for key in ["\"b0\"", "\"b1\"", "\"n_trimmed_in\"", "\"a11\"", "\"config\""] {
        assert!(meta.contains(key), "missing {key}");
    }
}

#[test]
fn config_file_with_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let out = dir.path().join("sup.csv");
    std::fs::write(&cfg, format!("# diagnostic\nn_grid = 100,200\nreps = 3\noutput = {}\nseed = 1\n", path_str(&out))).unwrap();
    let r = errdens(&["supnorm", "--reps", "2", "--config", path_str(&cfg)], None);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    // header plus |n_grid| × reps rows
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 5);
    let summary = std::fs::read_to_string(dir.path().join("sup.csv.summary.json")).unwrap();
    assert!(summary.contains("\"reps\": \"2\""));
}

#[test]
fn malformed_csv_reports_code_and_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x1,y\n0.5,abc\n").unwrap();
    let r = errdens(&["estimate", "--input", path_str(&bad), "--output", path_str(&dir.path().join("o.csv"))], None);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8(r.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: code=MalformedCsv"), "{err}");
    assert!(err.contains("row 2, column 2"), "{err}");
}

#[test]
fn config_errors_are_single_line() {
    for args in [vec!["rate", "--bogus", "1"], vec!["nonsense"], vec!["estimate"]] {
        let r = errdens(&args, None);
        assert_eq!(r.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(r.stderr).unwrap();
        assert!(err.starts_with("error: code=Config"), "{err}");
    }
}

#[test]
fn reruns_and_thread_counts_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rate.csv");
    let args = [
        "rate", "--n-grid", "60,90,120,150", "--reps", "50", "--seed", "12", "--output", path_str(&out),
    ];
    let mut snapshots = Vec::new();
    for threads in [None, Some("1"), Some("0")] {
        let r = errdens(&args, threads);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        snapshots.push((
            std::fs::read(&out).unwrap(),
            std::fs::read(dir.path().join("rate.csv.summary.json")).unwrap(),
        ));
    }
    assert!(snapshots.windows(2).all(|w| w[0] == w[1]));
}
