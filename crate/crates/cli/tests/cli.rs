use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tmpdir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("nematic-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nematic")).args(args).current_dir(dir).output().unwrap()
}

/// Column rows of a CSV with its provenance line stripped.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let head = lines.next().unwrap();
    assert!(head.starts_with("# nematic ") && head.contains("config_sha256="), "{head}");
    let cols = lines.next().unwrap().split(',').map(String::from).collect();
    (cols, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn column(cols: &[String], rows: &[Vec<String>], name: &str) -> Vec<String> {
    let i = cols.iter().position(|c| c == name).unwrap();
    rows.iter().map(|r| r[i].clone()).collect()
}

#[test]
fn phase_sweep_crosses_critical_point_once() {
    let d = tmpdir("phase");
    let out = run(&["phase", "--alpha-min", "5", "--alpha-max", "9", "--count", "81", "-o", "p.csv"], &d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (cols, rows) = table(&std::fs::read_to_string(d.join("p.csv")).unwrap());
    let alpha: Vec<f64> = column(&cols, &rows, "alpha").iter().map(|s| s.parse().unwrap()).collect();
    assert!(alpha.windows(2).all(|w| w[1] > w[0]));
    let counts: Vec<usize> = column(&cols, &rows, "root_count").iter().map(|s| s.parse().unwrap()).collect();
    // the nematic branch appears once; η₂ crossing zero at α = 7.5 is the only other event
    assert_eq!(counts.windows(2).filter(|w| w[0] == 1 && w[1] > 1).count(), 1);
    assert!(counts.windows(2).all(|w| w[1] != 1 || w[0] == 1));
    assert_eq!((counts[0], counts[counts.len() - 1]), (1, 3));
    let eta1: Vec<f64> = column(&cols, &rows, "eta1").iter().filter(|s| !s.is_empty()).map(|s| s.parse().unwrap()).collect();
    assert!(eta1.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(column(&cols, &rows, "marker").iter().filter(|m| *m == "alpha*").count(), 1);
}

#[test]
fn empty_sweep_is_a_usage_error() {
    let d = tmpdir("empty");
    let out = run(&["phase", "--count", "0"], &d);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["phase", "--alpha-min", "9", "--alpha-max", "8"], &d);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn leslie_reports_all_coefficients() {
    let d = tmpdir("leslie");
    let out = run(&["--alpha", "7", "leslie", "--j", "1,0,0,0,0"], &d);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for k in ["alpha1", "alpha2", "alpha3", "alpha4", "alpha5", "alpha6", "gamma1", "gamma2", "lambda"] {
        assert!(v[k].as_f64().unwrap().is_finite(), "{k}");
    }
    assert_eq!(v["parodi"], "pass");
    assert_eq!(v["regime"], "flow-aligning");
    assert_eq!(v["header"]["params"]["flow.alpha"], "7.0");
    let s2 = v["s2"].as_f64().unwrap();
    assert!((v["frank"]["k1"].as_f64().unwrap() - 2.0 * s2 * s2).abs() < 1e-14);
}

#[test]
fn subcritical_alpha_is_a_usage_error() {
    let d = tmpdir("subcritical");
    assert_eq!(run(&["--alpha", "5", "leslie"], &d).status.code(), Some(2));
}

#[test]
fn equilibrium_fixture_energy_does_not_increase() {
    let d = tmpdir("equilibrium");
    let out = run(&["simulate", "--init", "equilibrium", "--nx", "8", "--ny", "8", "--t-end", "1", "--dt", "0.1", "-o", "run"], &d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (cols, rows) = table(&std::fs::read_to_string(d.join("run/timeseries.csv")).unwrap());
    let e: Vec<f64> = column(&cols, &rows, "total").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(e.len(), 11);
    assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));
    assert!(d.join("run/checkpoint.csv").exists());
}

#[test]
fn perturbed_run_dissipates_and_checkpoints() {
    let d = tmpdir("perturbed");
    let out = run(&["--seed", "3", "simulate", "--nx", "16", "--ny", "16", "--t-end", "0.4", "--every", "2", "--checkpoint-format", "binary", "-o", "run"], &d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (cols, rows) = table(&std::fs::read_to_string(d.join("run/timeseries.csv")).unwrap());
    let e: Vec<f64> = column(&cols, &rows, "total").iter().map(|s| s.parse().unwrap()).collect();
    assert!(e.windows(2).all(|w| w[1] < w[0]));
    let bytes = std::fs::read(d.join("run/checkpoint.bin")).unwrap();
    let (st, h) = nematic::dynamics::checkpoint::read_binary(bytes.as_slice()).unwrap();
    assert_eq!((st.nx, st.ny), (16, 16));
    assert!((st.t - 0.4).abs() < 1e-12);
    assert_eq!(h["param.seed"], "3");
    assert_eq!(h["config_sha256"].len(), 64);
}

#[test]
fn admissibility_loss_exits_with_three() {
    let d = tmpdir("admissibility");
    let out = run(
        &["--eps", "0.05", "--gamma-par", "0.5", "--gamma-perp", "0.2", "simulate", "--t-end", "0.5", "--dt", "0.05", "-o", "run"],
        &d,
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(d.join("run/timeseries.csv").exists());
}

#[test]
fn closure_check_reports_residual() {
    let d = tmpdir("closure");
    let out = run(&["closure-check", "--samples", "20", "-o", "c.csv"], &d);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("max roundtrip residual"));
    let (cols, rows) = table(&std::fs::read_to_string(d.join("c.csv")).unwrap());
    assert_eq!(rows.len(), 20);
    assert!(column(&cols, &rows, "roundtrip_residual").iter().all(|s| s.parse::<f64>().unwrap() <= 1e-10));
}

#[test]
fn config_file_and_flag_precedence() {
    let d = tmpdir("config");
    std::fs::write(d.join("c.toml"), "[phase]\nalpha_min = 6\nalpha_max = 8\ncount = 5\n").unwrap();
    let out = run(&["--config", "c.toml", "phase", "--count", "3"], &d);
    assert!(out.status.success());
    let (_, rows) = table(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 3);
    std::fs::write(d.join("bad.toml"), "[phase]\ncuont = 5\n").unwrap();
    assert_eq!(run(&["--config", "bad.toml", "phase"], &d).status.code(), Some(2));
    assert_eq!(run(&["--config", "missing.toml", "phase"], &d).status.code(), Some(2));
}

#[test]
fn plot_scripts_sit_next_to_csv() {
    let d = tmpdir("plot");
    let out = run(&["--plot", "limit", "--de-list", "0.1,0.05", "--t-end", "1", "-o", "lim.csv"], &d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let script = std::fs::read_to_string(d.join("lim.gp")).unwrap();
    assert!(script.starts_with("# nematic "));
    assert!(script.contains("'lim.csv'"));
    assert_eq!(run(&["--plot", "phase", "--count", "2", "--alpha-min", "5", "--alpha-max", "6"], &d).status.code(), Some(2));
}

#[test]
fn non_decreasing_de_list_is_rejected() {
    let d = tmpdir("delist");
    assert_eq!(run(&["limit", "--de-list", "0.05,0.1"], &d).status.code(), Some(2));
}
