use std::process::Command;

fn primeq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_primeq"))
}

#[test]
fn malformed_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ \"grid\": { \"nx\": ").unwrap();
    let status = primeq().arg("--config").arg(&path).arg("classify").status().unwrap();
    assert_eq!(status.code(), Some(2));

    std::fs::write(&path, r#"{ "grid": { "nz": 3 } }"#).unwrap();
    let status = primeq().arg("--config").arg(&path).arg("simulate").status().unwrap();
    assert_eq!(status.code(), Some(2));

    let status = primeq().args(["--set", "grid.bogus=1", "classify"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn verify_subset_passes() {
    let out = primeq().args(["verify", "--only", "1,10"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|l| l.starts_with("PASS")));
}

#[test]
fn simulate_writes_csv_and_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    let snap = dir.path().join("s.bin");
    let status = primeq()
        .args(["--set", "grid.nx=8", "--set", "grid.ny=8", "--set", "grid.nz=4", "--set", "time.t_end=0.01"])
        .arg("--set")
        .arg(format!("output.csv=\"{}\"", csv.display()))
        .arg("--set")
        .arg(format!("output.snapshot=\"{}\"", snap.display()))
        .arg("simulate")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let rows = primeq_harness::io::read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    let s = primeq_harness::io::read_snapshot(&snap).unwrap();
    assert!((s.state.t - 0.01).abs() < 1e-12);
}
