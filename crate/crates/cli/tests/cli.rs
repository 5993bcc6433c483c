//! Binary-level checks: exit codes, file outputs, and byte determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_irs-hma"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../scenarios/{name}"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("irs-hma-cli-{tag}-{}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    dir
}

#[test]
fn usage_errors_exit_one() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["run", "--scenario"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solve_prints_schedule() {
    let out = bin()
        .args(["solve", "--config"])
        .arg(scenario("asym_two_device_power.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("sum delay"));
    assert!(text.contains("slot 1"));
    assert!(text.contains("completes at"));
}

#[test]
fn thresholds_prints_regime() {
    let out = bin()
        .args(["thresholds", "--config"])
        .arg(scenario("asym_two_device_energy.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("regime:"));
    assert!(text.contains("thresholds per-slot"));
}

#[test]
fn run_is_byte_deterministic() {
    let dir_a = temp_dir("a");
    let dir_b = temp_dir("b");
    for dir in [&dir_a, &dir_b] {
        let out = bin()
            .args(["run", "--scenario"])
            .arg(scenario("asym_two_device_power.toml"))
            .args(["--out", dir.to_str().unwrap(), "--draws", "1"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["rows.csv", "summary.csv", "hma_d_pro.dat"] {
        let a = std::fs::read(dir_a.join(file)).unwrap();
        let b = std::fs::read(dir_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
    std::fs::remove_dir_all(&dir_a).ok();
    std::fs::remove_dir_all(&dir_b).ok();
}

#[test]
fn infeasible_instance_exits_two() {
    let dir = temp_dir("infeasible");
    std::fs::create_dir_all(&dir).unwrap();
    let config = r#"
[system]
bandwidth_khz = 500.0
noise_dbm = -80.0
irs_elements = 4
alpha_direct = 3.6
alpha_cascaded = 2.2
bs_pos = [0.0, 0.0, 0.0]
irs_pos = [30.0, 0.0, 5.0]

[[device]]
pos = [20.0, 0.0, 0.0]
energy_j = 1e-9
target_kbits = 2000.0
"#;
    let path = dir.join("starved.toml");
    std::fs::write(&path, config).unwrap();
    let out = bin().args(["solve", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn baseline_override_filters_outputs() {
    let dir = temp_dir("filter");
    let out = bin()
        .args(["run", "--scenario"])
        .arg(scenario("asym_two_device_power.toml"))
        .args([
            "--out",
            dir.to_str().unwrap(),
            "--draws",
            "1",
            "--baselines",
            "tdma,noma",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.join("tdma_d_pro.dat").exists());
    assert!(dir.join("noma_d_pro.dat").exists());
    assert!(!dir.join("hma_d_pro.dat").exists());
    std::fs::remove_dir_all(&dir).ok();
}
