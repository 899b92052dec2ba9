use std::path::Path;
use std::process::{Command, Output};

use nms_sim::csv_io::{read_table, table_to_string};

fn nms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nms-sim"))
        .args(args)
        .env("NMS_SIM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn read(path: &Path) -> (Vec<String>, Vec<Vec<Option<f64>>>) {
    read_table(std::fs::File::open(path).unwrap()).unwrap()
}

fn column(table: &(Vec<String>, Vec<Vec<Option<f64>>>), name: &str) -> Vec<Option<f64>> {
    let idx = table.0.iter().position(|h| h == name).unwrap();
    table.1.iter().map(|r| r[idx]).collect()
}

#[test]
fn modes_reports_reference_splitting() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("modes.csv");
    let o = nms(&["modes", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("splitting_hz"));
    let t = read(&out);
    assert_eq!(t.1.len(), 1);
    let split = column(&t, "splitting_hz")[0].unwrap();
    assert!((split / 325e3 - 1.0).abs() < 0.05, "{split}");
    let threshold = column(&t, "threshold_power_w")[0].unwrap();
    assert!((3.8e-3..6.9e-3).contains(&threshold));
}

#[test]
fn zero_power_gives_bare_modes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("modes.csv");
    let o = nms(&["modes", "--power-w", "0", "--detuning-hz", "900e3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read(&out);
    assert_eq!(column(&t, "g_hz")[0], Some(0.0));
    let wp = column(&t, "omega_plus_undamped_hz")[0].unwrap();
    let wm = column(&t, "omega_minus_undamped_hz")[0].unwrap();
    assert!((wp - 947e3).abs() < 1e-6 && (wm - 900e3).abs() < 1e-6, "{wp} {wm}");
}

#[test]
fn malformed_config_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    let text = nms_sim::config::PAPER_CONFIG.replace("mass_kg", "mass_kg = = 1");
    std::fs::write(&cfg, &text).unwrap();
    let line = text.lines().position(|l| l.starts_with("mass_kg")).unwrap() + 1;
    let o = nms(&["modes", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(&format!("line {line}")), "{}", stderr(&o));

    std::fs::write(&cfg, nms_sim::config::PAPER_CONFIG.replace("kappa_hz", "kapa_hz")).unwrap();
    let o = nms(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kapa_hz"));
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let o = nms(&["modes", "--config", "/nonexistent/device.cfg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn instability_exits_3() {
    // blue-detuned drive at full power is dynamically unstable
    for cmd in ["modes", "spectrum"] {
        let o = nms(&[cmd, "--detuning-hz", "-947e3"]);
        assert_eq!(o.status.code(), Some(3), "{cmd}: {}", stderr(&o));
    }
    // past g² = Δω_m the red-detuned system is statically unstable
    let o = nms(&["modes", "--power-w", "0.2"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn zero_width_grid_is_a_usage_error() {
    let o = nms(&["spectrum", "--grid-start-hz", "9e5", "--grid-stop-hz", "9e5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = nms(&["spectrum", "--grid-points", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spectrum_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| {
        vec![
            "spectrum".to_string(),
            "--grid-points".into(),
            "257".into(),
            "--out".into(),
            p.to_str().unwrap().into(),
        ]
    };
    let run = |p: &Path| {
        let v = args(p);
        let refs: Vec<&str> = v.iter().map(String::as_str).collect();
        assert!(nms(&refs).status.success());
        std::fs::read(p).unwrap()
    };
    let bytes = run(&a);
    assert_eq!(bytes, run(&b));
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.starts_with("freq_hz,s_pos,s_neg,s_nps\n"));
    assert!(!text.contains('\r'));
    let (header, rows) = read(&a);
    assert_eq!(rows.len(), 257);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    assert_eq!(table_to_string(&header, &rows), text);
    for r in &rows {
        assert!(r[3].unwrap() >= 0.5);
    }
}

#[test]
fn merged_and_split_emission() {
    // one merged peak at 0.6 mW; at 10.7 mW the doublet is resolved on
    // resonance and only a shoulder at Δ = 1.02 ω_m
    let peaks_at = |power: &str, detuning: &str| {
        let o = nms(&[
            "spectrum",
            "--power-w",
            power,
            "--detuning-hz",
            detuning,
            "--grid-start-hz",
            "5e5",
            "--grid-stop-hz",
            "1.4e6",
            "--grid-points",
            "1801",
        ]);
        assert!(o.status.success());
        let (_, rows) = read_table(o.stdout.as_slice()).unwrap();
        let y: Vec<f64> = rows.iter().map(|r| r[3].unwrap()).collect();
        (1..y.len() - 1).filter(|&i| y[i] > y[i - 1] && y[i] > y[i + 1]).count()
    };
    assert_eq!(peaks_at("0.6e-3", "965940"), 1);
    assert_eq!(peaks_at("3.8e-3", "947e3"), 1);
    assert_eq!(peaks_at("10.7e-3", "947e3"), 2);
    assert_eq!(peaks_at("10.7e-3", "965940"), 1);
}

#[test]
fn sweep_two_points_and_failure_count() {
    let o = nms(&["sweep", "--variable", "power", "--start", "1e-3", "--stop", "1e-2", "--points", "2"]);
    assert!(o.status.success());
    let (header, rows) = read_table(o.stdout.as_slice()).unwrap();
    assert_eq!(header, ["x", "omega_plus_hz", "omega_minus_hz", "gamma_plus_hz", "gamma_minus_hz"]);
    assert_eq!(rows.len(), 2);

    let o = nms(&["sweep", "--variable", "detuning", "--start", "-1.2e6", "--stop", "1.2e6", "--points", "9"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"), "{}", stderr(&o));
    let (_, rows) = read_table(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().any(|r| r[1].is_none()));

    let o = nms(&["sweep", "--variable", "power", "--start", "1e-2", "--stop", "1e-3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_spectrum_peaks() {
    let o = nms(&[
        "sweep",
        "--variable",
        "detuning",
        "--start",
        "0.9e6",
        "--stop",
        "1.0e6",
        "--points",
        "3",
        "--what",
        "spectrum-peaks",
        "--grid-points",
        "1024",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_table(o.stdout.as_slice()).unwrap();
    assert_eq!(header[1], "center_low_hz");
    for r in rows {
        assert!(r[1].unwrap() < r[2].unwrap());
    }
}

#[test]
fn dressed_counts_and_cap() {
    let o = nms(&["dressed", "--n-max", "1", "--m-max", "1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ladder"]["levels"].as_array().unwrap().len(), 4);
    assert_eq!(v["ladder"]["transitions"].as_array().unwrap().len(), 4);
    let o = nms(&["dressed", "--n-max", "65"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dressed_convention_switch_is_isolated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("half.cfg");
    std::fs::write(
        &cfg,
        nms_sim::config::PAPER_CONFIG.replace("= printed", "= half"),
    )
    .unwrap();
    let printed: serde_json::Value = serde_json::from_slice(&nms(&["dressed"]).stdout).unwrap();
    let o = nms(&["dressed", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let half: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed["ladder"], half["ladder"]);
    assert_eq!(printed["emission_lines_hz"], half["emission_lines_hz"]);
    assert_ne!(printed["nonlinear"], half["nonlinear"]);
}

#[test]
fn oracle_guard_and_short_run() {
    let o = nms(&["oracle", "--dt-s", "1e-7"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("guard"), "{}", stderr(&o));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("oracle.csv");
    let o = nms(&[
        "oracle",
        "--steps",
        "4010000",
        "--burn-in",
        "10000",
        "--segments",
        "19",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("seed             42"));
    assert!(text.contains("max_delta_hz"));
    let t = read(&out);
    assert_eq!(t.0, ["freq_hz", "s_pos", "s_neg", "s_nps", "s_nps_analytic"]);
}
