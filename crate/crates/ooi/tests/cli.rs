use std::fs;
use std::process::Command;

fn ooi() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ooi"))
}

#[test]
fn train_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.toml");
    fs::write(&config, "agent = \"scripted_oracle\"\nepisodes = 3\nruns = 2\n[env]\nid = \"treemaze\"\n").unwrap();
    let out = ooi()
        .args(["train", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/treemaze14_scripted_oracle.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(dir.path().join("out/treemaze14_scripted_oracle.toml").exists());
}

#[test]
fn bad_config_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.toml");
    fs::write(&config, "agent = \"ooi\"\nepisodes = 0\n[env]\nid = \"gathering\"\n").unwrap();
    let out = ooi().args(["train", "--config"]).arg(&config).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn oracle_reports_the_treemaze_optimum() {
    let out = ooi().args(["oracle", "--env", "treemaze", "--episodes", "20"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("8.2000"));
}

#[test]
fn verify_fsc_accepts_a_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = ooi::fixture::FscFixture::from_fsc(&ooi_core::fsc::make_alternator());
    let path = dir.path().join("alt.toml");
    fs::write(&path, fixture.to_toml().unwrap()).unwrap();
    let out = ooi().args(["verify-fsc", "--fixture"]).arg(&path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("max trace distance"));
}
