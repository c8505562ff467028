//! End-to-end tests of the `nlhodge` binary: artifacts, determinism, and
//! the exit-code contract.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nlhodge"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn catalog_lists_all_entries() {
    let out = bin().arg("catalog").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "uniform",
        "harmonic-quadratic",
        "radial-power",
        "abelian-plaquette",
        "nonabelian-sample",
    ] {
        assert!(text.contains(name), "catalog is missing {name}");
    }
}

#[test]
fn solve_is_deterministic_and_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "cfg.json",
        r#"{
            "domain": { "n": 3, "extents": [[-1.2, 1.2]], "resolution": [12] },
            "density": { "kind": "polytropic", "gamma": 1.4 },
            "problem": { "q": 1, "boundary": "harmonic-quadratic", "scale": 0.2 }
        }"#,
    );
    for sub in ["a", "b"] {
        let status = bin()
            .args(["solve", "--config", &cfg, "--out"])
            .arg(tmp.path().join(sub))
            .args(["--seed", "7"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    for artifact in ["summary.json", "convergence.csv", "field.nlh"] {
        let a = fs::read(tmp.path().join("a").join(artifact)).unwrap();
        let b = fs::read(tmp.path().join("b").join(artifact)).unwrap();
        assert_eq!(a, b, "{artifact} differs between identical runs");
        assert!(!a.is_empty());
    }
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("a/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["command"], "solve");
    assert!(summary["el_residual_relative"].as_f64().unwrap() <= 1e-10);
    let csv = fs::read_to_string(tmp.path().join("a/convergence.csv")).unwrap();
    assert!(csv.starts_with("iter,energy,el_residual,max_Q\n"));
}

#[test]
fn verify_solved_snapshot_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let snap = tmp.path().join("s/field.nlh");
    let cfg = write_config(
        tmp.path(),
        "cfg.json",
        &format!(
            r#"{{
            "domain": {{ "n": 3, "extents": [[-1.2, 1.2]], "resolution": [16] }},
            "density": {{ "kind": "polytropic", "gamma": 1.4 }},
            "problem": {{ "q": 1, "boundary": "harmonic-quadratic", "scale": 0.2 }},
            "verify": {{
                "checks": ["monotonicity", "liouville"],
                "snapshot": {:?},
                "radii": [0.4, 0.6, 0.8],
                "growth_k": 5.0
            }}
        }}"#,
            snap
        ),
    );
    let status = bin()
        .args(["solve", "--config", &cfg, "--out"])
        .arg(tmp.path().join("s"))
        .status()
        .unwrap();
    assert!(status.success());
    let out = bin()
        .args(["verify", "--config", &cfg, "--out"])
        .arg(tmp.path().join("v"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "verify failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("v/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["monotonicity"]["pass"], true);
    // growth k = 5 gives criterion exponent 2 + 5 - 3 = 4 > 0
    assert_eq!(summary["liouville"]["verdict"], "no-conclusion");
    let csv = fs::read_to_string(tmp.path().join("v/monotonicity.csv")).unwrap();
    assert!(csv.starts_with("r,energy,conformal_energy,pass_flag\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn refine_reports_first_order_bianchi() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "cfg.json",
        r#"{
            "domain": { "n": 3, "extents": [[-1.0, 1.0]], "resolution": [8] },
            "refine": { "check": "bianchi", "levels": 2 }
        }"#,
    );
    let status = bin()
        .args(["refine", "--config", &cfg, "--out"])
        .arg(tmp.path().join("r"))
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("r/summary.json")).unwrap()).unwrap();
    assert!(summary["fitted_order"].as_f64().unwrap() >= 1.0);
    let csv = fs::read_to_string(tmp.path().join("r/refine.csv")).unwrap();
    assert!(csv.starts_with("level,resolution,h,value,order\n"));
}

#[test]
fn verify_uniform_catalog_monotonicity_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "uni.json",
        r#"{
            "domain": { "n": 3, "extents": [[-1.2, 1.2]], "resolution": [32] },
            "problem": { "q": 1, "boundary": "uniform", "scale": 1.0 },
            "verify": {
                "checks": ["monotonicity"],
                "radii": [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
            }
        }"#,
    );
    let out = bin()
        .args(["verify", "--config", &cfg, "--out"])
        .arg(tmp.path().join("u"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "uniform monotonicity failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(tmp.path().join("u/monotonicity.csv")).unwrap();
    // every row carries a passing step flag
    for line in csv.lines().skip(1) {
        assert!(line.ends_with(",1"), "row failed: {line}");
    }
}

#[test]
fn verify_cutoff_on_radial_power() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "cut.json",
        r#"{
            "domain": { "n": 3, "extents": [[-0.6, 0.6]], "resolution": [48] },
            "problem": { "q": 1, "boundary": "radial-power", "beta": -0.25, "scale": 1.0 },
            "verify": {
                "checks": ["cutoff"],
                "tau": 0.45, "delta": 0.1,
                "sigmas": [0.2, 0.1],
                "nus": [1, 2],
                "r_out": 0.4, "ratio": 2.0
            }
        }"#,
    );
    let out = bin()
        .args(["verify", "--config", &cfg, "--out"])
        .arg(tmp.path().join("c"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "cutoff verify failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("c/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["cutoff"]["pass"], true);
    assert!(summary["cutoff"]["annulus_rate"].as_f64().unwrap() > 0.0);
    let csv = fs::read_to_string(tmp.path().join("c/cutoff.csv")).unwrap();
    assert!(csv.starts_with("sigma_or_nu,grad_norm,annulus_e,annulus_radial\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn refine_cell_cap_guards_resources() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "cap.json",
        r#"{
            "domain": { "n": 3, "resolution": [16] },
            "refine": { "check": "bianchi", "levels": 3, "max_cells": 10000 }
        }"#,
    );
    let out = bin()
        .args(["refine", "--config", &cfg, "--out"])
        .arg(tmp.path().join("r"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(6));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("cap"), "unexpected message: {text}");
}

#[test]
fn exit_codes_match_the_documented_table() {
    let tmp = tempfile::tempdir().unwrap();

    // 3: dimension hypothesis violated (q = 2 monotonicity in n = 3)
    let cfg = write_config(
        tmp.path(),
        "hyp.json",
        r#"{
            "domain": { "n": 3, "resolution": [8] },
            "problem": { "q": 2, "boundary": "uniform", "scale": 1.0 },
            "verify": { "checks": ["monotonicity"], "radii": [0.3, 0.6, 0.9] }
        }"#,
    );
    let out = bin()
        .args(["verify", "--config", &cfg, "--out"])
        .arg(tmp.path().join("o3"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    // 2: subsonic violation on sonic-exceeding data
    let cfg = write_config(
        tmp.path(),
        "sonic.json",
        r#"{
            "domain": { "n": 3, "resolution": [8] },
            "density": { "kind": "polytropic", "gamma": 1.4 },
            "problem": { "q": 1, "boundary": "uniform", "scale": 1.0 }
        }"#,
    );
    let out = bin()
        .args(["solve", "--config", &cfg, "--out"])
        .arg(tmp.path().join("o2"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // 4: geometry error (ball exits the domain)
    let cfg = write_config(
        tmp.path(),
        "geo.json",
        r#"{
            "domain": { "n": 3, "resolution": [8] },
            "verify": { "checks": ["monotonicity"], "radii": [0.5, 2.0] }
        }"#,
    );
    let out = bin()
        .args(["verify", "--config", &cfg, "--out"])
        .arg(tmp.path().join("o4"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));

    // 5: missing snapshot
    let cfg = write_config(
        tmp.path(),
        "io.json",
        r#"{ "verify": { "checks": ["monotonicity"], "snapshot": "missing.nlh" } }"#,
    );
    let out = bin()
        .args(["verify", "--config", &cfg, "--out"])
        .arg(tmp.path().join("o5"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5));

    // 6: config error
    let cfg = write_config(
        tmp.path(),
        "bad.json",
        r#"{ "density": { "kind": "isothermal" } }"#,
    );
    let out = bin()
        .args(["solve", "--config", &cfg, "--out"])
        .arg(tmp.path().join("o6"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(6));

    // 1: a requested check fails beyond tolerance (harmonic field is not
    // stationary for the polytropic energy at this resolution)
    let cfg = write_config(
        tmp.path(),
        "fail.json",
        r#"{
            "domain": { "n": 3, "resolution": [12] },
            "density": { "kind": "polytropic", "gamma": 1.4 },
            "problem": { "q": 1, "boundary": "harmonic-quadratic", "scale": 0.2 },
            "verify": { "checks": ["identity"], "identity_tol": 1e-6 }
        }"#,
    );
    let out = bin()
        .args(["verify", "--config", &cfg, "--out"])
        .arg(tmp.path().join("o1"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
