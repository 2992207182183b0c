use std::fs;
use std::process::{Command, Output};

fn qnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnet")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn lists_presets() {
    let o = qnet(&["preset", "--list"]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert!(names.contains(&"fig3".to_owned()));
    assert!(names.contains(&"entvar".to_owned()));
}

#[test]
fn unknown_preset_fails() {
    let o = qnet(&["preset", "nope"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown preset"));
}

#[test]
fn dumped_preset_config_runs_as_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnet(&["preset", "fig5", "--dump", "--horizon", "0.3"]);
    assert!(o.status.success());
    let path = dir.path().join("cfg.json");
    fs::write(&path, stdout(&o)).unwrap();
    let out = dir.path().join("run");
    let o = qnet(&[
        "sweep",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--threads",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("fig5_ent.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "drive,P3,eta_eff,trace_drift,min_eig,status");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("3.88000000000e1,"));
    assert!(out.join("fig5_ent_corr_00001.csv").exists());
    assert!(out.join("fig5_ent_traj_00000.csv").exists());
    assert!(out.join("fig5_ent_manifest.json").exists());
}

#[test]
fn bad_config_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"horizon": 1.0}"#).unwrap();
    let o = qnet(&["sweep", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));
    let o = qnet(&["sweep", dir.path().join("missing.json").to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn fmap_writes_long_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnet(&[
        "fmap",
        "--pair",
        "2,4",
        "--eta-points",
        "5",
        "--dphi-points",
        "3",
        "--name",
        "m",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 15);
    assert!(text.starts_with("eta,delta_phi,abs_f\n"));
}
