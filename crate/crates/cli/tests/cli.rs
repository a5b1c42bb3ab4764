use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("bergman-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn bergman(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(args)
        .current_dir(dir)
        .env("BERGMAN_CACHE_DIR", dir.join("cache"))
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const EXPANSION: &str = "experiment = \"expansion\"\nks = [8, 12, 16, 20, 24]\nsamples = 3\n[model]\nname = \"sphere\"\n";

#[test]
fn list_prints_the_catalog() {
    let dir = scratch("list");
    let out = bergman(&dir, &["list"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 9);
    let json = bergman(&dir, &["list", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 9);
}

#[test]
fn run_writes_deterministic_outputs_and_uses_the_cache() {
    let dir = scratch("run");
    let cfg = write_config(&dir, "e.toml", EXPANSION);
    let a = bergman(&dir, &["run", &cfg, "--set", "output=a", "--set", "workers=1"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = bergman(&dir, &["run", &cfg, "--set", "output=b", "--set", "workers=4"]);
    assert_eq!(b.status.code(), Some(0));
    for f in ["bergman-function.csv", "expansion-fit.csv", "expansion-fit.dat"] {
        let x = std::fs::read(dir.join("a").join(f)).unwrap();
        assert_eq!(x, std::fs::read(dir.join("b").join(f)).unwrap(), "{f}");
    }
    let manifest = std::fs::read_to_string(dir.join("cache/manifest.json")).unwrap();
    assert!(manifest.contains("-k24-auto.json"));
    let clean = bergman(&dir, &["clean-cache"]);
    assert!(clean.status.success());
    assert!(String::from_utf8(clean.stdout).unwrap().contains("removed 6 cache files"));
}

#[test]
fn failed_assertion_exits_with_one() {
    let dir = scratch("assert");
    let cfg = write_config(&dir, "e.toml", EXPANSION);
    let out = bergman(&dir, &["run", &cfg, "--set", "tolerances.leading=1e-20"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("[FAIL] leading-coefficient"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = scratch("usage");
    let cfg = write_config(&dir, "e.toml", EXPANSION);
    let bad = write_config(&dir, "bad.toml", "experiment = \"nope\"\nks = [1]\n[model]\nname = \"sphere\"\n");
    for args in [
        vec!["frobnicate"],
        vec!["run", bad.as_str()],
        vec!["run", "missing.toml"],
        vec!["run", cfg.as_str(), "--set", "ks=[4,2]"],
        vec!["run", cfg.as_str(), "--set", "unknown=3"],
        vec!["verify", "--profile", "slow"],
    ] {
        assert_eq!(bergman(&dir, &args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numerical_errors_exit_with_three() {
    let dir = scratch("numerics");
    // A bump that makes the curvature negative somewhere.
    let cfg = write_config(
        &dir,
        "neg.toml",
        "experiment = \"expansion\"\nks = [8, 12, 16, 20, 24]\nsamples = 40\n[model]\nname = \"sphere\"\n[[model.perturbations]]\ncenter = [0.0, 0.0]\namplitude = -2.0\nradius = 0.5\n",
    );
    let out = bergman(&dir, &["run", &cfg]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
