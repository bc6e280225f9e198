//! End-to-end runs of the binary in scratch directories.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rydion(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydion"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn trap_info_reports_axial_length() {
    let dir = tempfile::tempdir().unwrap();
    let o = rydion(dir.path(), &["trap-info", "--out", "t"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&dir.path().join("t/report.json"));
    assert!((r["ell_z_um"].as_f64().unwrap() - 6.906).abs() < 1e-3);
    assert!((r["rf_only"]["secular_kHz"].as_f64().unwrap() - 254.0896).abs() < 1e-3);
}

#[test]
fn missing_unit_suffix_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "[trap]\nsecular = 250\n").unwrap();
    let o = rydion(
        dir.path(),
        &["trap-info", "--config", "c.toml", "--out", "t"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("secular_kHz"), "{}", stderr(&o));
}

#[test]
fn invalid_value_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "[micromotion]\ngrid = 100\n").unwrap();
    let o = rydion(
        dir.path(),
        &["micromotion", "--config", "c.toml", "--out", "m"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("micromotion.grid"), "{}", stderr(&o));
}

#[test]
fn unknown_figure_exits_2_listing_ids() {
    let dir = tempfile::tempdir().unwrap();
    let o = rydion(dir.path(), &["figures", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fig5mm"));
}

#[test]
fn reruns_are_byte_identical_and_manifest_is_complete() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = rydion(dir.path(), &["dressed", "--out", out, "--no-cache"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["potential.csv", "summary.json", "config.toml"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(f)).unwrap(),
            fs::read(dir.path().join("b").join(f)).unwrap()
        );
    }
    let m = json(&dir.path().join("a/manifest.json"));
    let listed: Vec<&str> = m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["file"].as_str().unwrap())
        .collect();
    for e in fs::read_dir(dir.path().join("a")).unwrap() {
        let name = e.unwrap().file_name().into_string().unwrap();
        assert!(
            name == "manifest.json" || listed.contains(&name.as_str()),
            "{name} missing from manifest"
        );
    }
    assert_eq!(m["command"], "dressed");
}

#[test]
fn written_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = rydion(dir.path(), &["dressed", "--out", "a", "--no-cache"]);
    assert!(o.status.success());
    let o = rydion(
        dir.path(),
        &[
            "dressed",
            "--config",
            "a/config.toml",
            "--out",
            "b",
            "--no-cache",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let (a, b) = (
        json(&dir.path().join("a/manifest.json")),
        json(&dir.path().join("b/manifest.json")),
    );
    assert_eq!(a["config_sha256"], b["config_sha256"]);
    assert_eq!(a["outputs"], b["outputs"]);
}

#[test]
fn coarse_micromotion_grid_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.toml"),
        "[micromotion]\ngrid = 32\nt_end_us = 60\nramp_us = 3\nsamples = 50\n",
    )
    .unwrap();
    let o = rydion(
        dir.path(),
        &[
            "micromotion",
            "--config",
            "c.toml",
            "--out",
            "m",
            "--no-cache",
        ],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn short_micromotion_writes_zoom_windows() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.toml"),
        "[micromotion]\ngrid = 64\nt_end_us = 60\nramp_us = 3\nsamples = 50\n",
    )
    .unwrap();
    let o = rydion(
        dir.path(),
        &[
            "micromotion",
            "--config",
            "c.toml",
            "--out",
            "m",
            "--zoom",
            "10:2",
            "--threads",
            "2",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let zoom = fs::read_to_string(dir.path().join("m/zoom_0.csv")).unwrap();
    let mut lines = zoom.lines();
    assert_eq!(
        lines.next(),
        Some("t_us,sector,x_i_nm,x_a_nm,n_i_eff,n_a_eff")
    );
    let times: Vec<f64> = lines
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(times.len() > 4 * 10);
    assert!(times.iter().all(|t| (10.0..=12.0).contains(t)));
    let s = json(&dir.path().join("m/summary.json"));
    assert!(s["norm_drift"]
        .as_array()
        .unwrap()
        .iter()
        .all(|v| v.as_f64().unwrap() < 1e-7));
}

#[test]
fn gate_defaults_reach_target_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let o = rydion(dir.path(), &["gate", "--out", "g", "--no-cache"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = json(&dir.path().join("g/summary.json"));
    for input in s["inputs"].as_array().unwrap() {
        assert!((input["fidelity"].as_f64().unwrap() - 0.997).abs() <= 0.003);
    }
    let traces = fs::read_to_string(dir.path().join("g/traces.csv")).unwrap();
    assert!(traces.starts_with("input,t_us,P_uu,P_ud,P_du,P_dd,n_ion,n_atom\n"));
}

#[test]
fn fig3_writes_data_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let o = rydion(dir.path(), &["figures", "fig3", "--out", "f", "--no-cache"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let meta = json(&dir.path().join("f/fig3.csv.meta.json"));
    assert_eq!(meta["figure"], "fig3");
    assert_eq!(meta["columns"].as_array().unwrap().len(), 4);
    let m = json(&dir.path().join("f/manifest.json"));
    assert_eq!(m["command"], "figures fig3");
}
