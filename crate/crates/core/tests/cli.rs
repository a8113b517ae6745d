use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thermoflow"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(cmd: &mut Command) -> String {
    let out: Output = cmd.output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn last_row(path: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .last()
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect()
}

#[test]
fn critical_reports_example_discrepancy() {
    let out = run(bin().args(["critical", "--config"]).arg(config("example.cfg")));
    assert!(out.contains("m_c = 1"));
    assert!(out.contains("R_c = 13.55050"));
    assert!(out.contains("note: published example"));
}

#[test]
fn critical_json_on_desk_layer() {
    let out = run(bin().args(["critical", "--json", "--config"]).arg(config("desk.cfg")));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let r_c = v["critical"]["r_c"].as_f64().unwrap();
    assert!((r_c - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-9, "{v}");
}

#[test]
fn spectrum_csv_has_both_branches() {
    let out = run(bin()
        .args(["spectrum", "--mmax", "2", "--nmax", "3", "--config"])
        .arg(config("desk.cfg")));
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "m,n,a,A,B,C,beta_plus,beta_minus");
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 3 * 3);
    for row in rows {
        let cells: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(cells[6] >= cells[7]);
    }
}

#[test]
fn reduce_prints_ring_radius() {
    let out = run(bin()
        .args(["reduce", "--super-eps", "0.01", "--config"])
        .arg(config("desk.cfg")));
    assert!(out.contains("ring radius = 2.52580"), "{out}");
}

#[test]
fn checkpoint_resume_matches_straight_run() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    let common = ["simulate", "--modes", "8,8", "--dt", "1e-2", "--delta", "0.5"];
    run(bin()
        .args(common)
        .args(["--tend", "0.4", "--csv"])
        .arg(p("full.csv"))
        .arg("--config")
        .arg(config("desk.cfg")));
    run(bin()
        .args(common)
        .args(["--tend", "0.2", "--checkpoint"])
        .arg(p("half.state"))
        .arg("--config")
        .arg(config("desk.cfg")));
    run(bin()
        .args(common)
        .args(["--tend", "0.4", "--resume"])
        .arg(p("half.state"))
        .arg("--csv")
        .arg(p("rest.csv"))
        .arg("--config")
        .arg(config("desk.cfg")));
    let (a, b) = (last_row(&p("full.csv")), last_row(&p("rest.csv")));
    assert!((a[0] - 0.4).abs() < 1e-12 && (b[0] - 0.4).abs() < 1e-12);
    let scale = a[1];
    for (x, y) in a.iter().zip(&b).take(9) {
        assert!((x - y).abs() <= 1e-12 * x.abs().max(scale), "{a:?} vs {b:?}");
    }
}

#[test]
fn sweep_writes_table_plot_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    run(bin()
        .args([
            "sweep",
            "--alpha",
            "2:6:3",
            "--pra",
            "0.5:2:3",
            "--kappa-a",
            "1",
            "--out",
        ])
        .arg(dir.path()));
    let table = std::fs::read_to_string(dir.path().join("mc_sweep_mc_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 9);
    assert!(dir.path().join("mc_sweep_mc_map.gp").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("mc_sweep.json")).unwrap()).unwrap();
    assert_eq!(manifest["pass"], true);
    assert_eq!(manifest["files"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_cells_suite_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(bin()
        .args(["verify", "--suite", "cells", "--config"])
        .arg(config("desk.cfg"))
        .arg("--out")
        .arg(dir.path()));
    assert!(out.contains("PASS counts_identical"));
    for s in 1..=4 {
        let gp = std::fs::read_to_string(dir.path().join(format!("cell_figure_psi_s{s}.gp"))).unwrap();
        assert!(gp.contains(&format!("cell_figure_psi_s{s}.csv")));
    }
    assert!(dir.path().join("cell_figure.json").exists());
}

#[test]
fn bad_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "t0 = 1\nt1 = 1\n").unwrap();
    let out = bin().args(["critical", "--config"]).arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}
