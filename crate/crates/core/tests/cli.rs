use std::path::{Path, PathBuf};
use std::process::Command as Process;

use serde_json::Value;
use tempfile::TempDir;
use twophase::analysis::VALUE_BAND_C;
use twophase::cli::{execute, Command, Config, EXIT_CHECK_FAILED, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use twophase::discretization::io::read_field_csv;
use twophase::elliptic::exact_ball_v;

const BALL: &str = r#"
[shape]
kind = "ball"
radius = 1.0
"#;

const ELLIPSE: &str = r#"
[shape]
kind = "ellipse"
a = 2.0
b = 1.0
"#;

const EGG: &str = r#"
[shape]
kind = "egg"
a = 1.5
b = 1.0
amplitude = 0.3
frequency = 1
"#;

fn config(shape: &str, rest: &str, dir: &Path) -> Config {
    let text = format!("{shape}\n{rest}\n[output]\ndir = {:?}\n", dir.display().to_string());
    Config::from_toml(&text).unwrap()
}

fn read_json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows (after the `#` block and the column row) and the column row.
fn read_csv(path: impl AsRef<Path>) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let columns = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (columns, rows)
}

fn binary(args: &[&str]) -> std::process::Output {
    Process::new(env!("CARGO_BIN_EXE_twophase")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn simulate_ball_writes_traces_and_small_deviation() {
    let dir = TempDir::new().unwrap();
    let c =
        config(BALL, "[grid]\nn = 48\nhalf_width = 4.0\n[time]\nhorizon = 0.5\n[analysis]\nsamples = 64", dir.path());
    let outcome = execute(Command::Simulate, &c).unwrap();
    assert!(outcome.passed);
    let report = read_json(dir.path().join("deviation.json"));
    assert_eq!(report["command"], "simulate");
    assert_eq!(report["config_sha256"], c.hash());
    assert_eq!(report["twophase_version"], twophase::VERSION);
    assert_eq!(report["samples"], 64);
    let steps = report["steps"].as_u64().unwrap() as usize;
    assert!(report["heat_drift"].as_f64().unwrap() < 1e-10);
    assert!(report["max_range"].as_f64().unwrap() < 2e-2, "{report:#}");
    assert!(report["warnings"].as_array().unwrap().is_empty());

    let (columns, rows) = read_csv(dir.path().join("traces.csv"));
    assert_eq!(columns.len(), 4 + 64);
    assert_eq!(&columns[..5], ["t", "mean", "range", "std", "u_0"]);
    assert_eq!(rows.len(), steps + 1);
    assert!(rows.iter().all(|r| r.len() == columns.len()));
    let (columns, rows) = read_csv(dir.path().join("samples.csv"));
    assert_eq!(columns[0], "index");
    assert_eq!(rows.len(), 64);
}

#[test]
fn elliptic_ball_matches_the_exact_interface_value() {
    let dir = TempDir::new().unwrap();
    let c = config(BALL, "[grid]\nn = 96\nhalf_width = 6.0\n[analysis]\nsamples = 128", dir.path());
    execute(Command::Elliptic, &c).unwrap();
    let report = read_json(dir.path().join("elliptic.json"));
    let exact = exact_ball_v(1.0, 2.0, 1.0, 2).unwrap().a_star_exact;
    let a_star = report["a_star"].as_f64().unwrap();
    assert!((a_star - exact).abs() < 5e-3 * exact, "{a_star} vs {exact}");
    assert_eq!(report["a_star_exact"].as_f64().unwrap(), twophase::cli::round_float(exact));

    let (columns, rows) = read_csv(dir.path().join("residuals.csv"));
    assert_eq!(columns, ["index", "component", "x", "y", "a_star_sample", "jump_value", "jump_flux", "collision"]);
    assert_eq!(rows.len(), 128);

    let field =
        read_field_csv(std::io::BufReader::new(std::fs::File::open(dir.path().join("v_field.csv")).unwrap())).unwrap();
    assert_eq!(field.grid.n(), 96);
}

#[test]
fn elliptic_ellipse_has_a_spread_of_interface_values() {
    let dir = TempDir::new().unwrap();
    let c = config(ELLIPSE, "[grid]\nn = 96\nhalf_width = 6.0\n[analysis]\nsamples = 128", dir.path());
    execute(Command::Elliptic, &c).unwrap();
    let report = read_json(dir.path().join("elliptic.json"));
    let h = report["h"].as_f64().unwrap();
    assert!(report["a_star_std"].as_f64().unwrap() > 10.0 * VALUE_BAND_C * h, "{report:#}");
    assert!(report["a_star_exact"].is_null());
}

#[test]
fn transform_check_reports_its_budget_terms() {
    let dir = TempDir::new().unwrap();
    for horizon in [6.0f64, 3.0] {
        let c = config(
            BALL,
            &format!("[grid]\nn = 48\nhalf_width = 6.0\n[time]\nhorizon = {horizon}\n[analysis]\nsamples = 32"),
            dir.path(),
        );
        let outcome = execute(Command::TransformCheck, &c).unwrap();
        let report = read_json(dir.path().join("transform_check.json"));
        assert!(outcome.passed && report["passed"].as_bool().unwrap(), "{report:#}");
        let eps_tail = report["eps_tail"].as_f64().unwrap();
        assert!((eps_tail - (-horizon).exp()).abs() < 1e-12 * eps_tail, "{eps_tail}");
        let sum = report["eps_quad"].as_f64().unwrap() + eps_tail + 2.0 * report["eps_h"].as_f64().unwrap();
        assert!((report["budget"].as_f64().unwrap() - sum).abs() < 1e-11 * sum);
    }
}

#[test]
fn transform_check_on_the_ellipse_passes() {
    let dir = TempDir::new().unwrap();
    let c = config(
        ELLIPSE,
        "[grid]\nn = 48\nhalf_width = 6.0\n[time]\nhorizon = 6.0\n[analysis]\nsamples = 32",
        dir.path(),
    );
    assert!(execute(Command::TransformCheck, &c).unwrap().passed);
}

fn planes(shape: &str, dir: &Path) -> Value {
    let c = config(shape, "[analysis]\ndirections = 8\nscan_samples = 512\nchain = false", dir);
    execute(Command::MovingPlanes, &c).unwrap();
    read_json(dir.join("moving_planes.json"))
}

#[test]
fn moving_planes_verdicts() {
    let dir = TempDir::new().unwrap();
    let ball = planes(BALL, dir.path());
    assert_eq!(ball["ball_like"], true);
    assert_eq!(ball["directions"].as_array().unwrap().len(), 8);
    assert!(ball["chain"].is_null());
    assert_eq!(planes(ELLIPSE, dir.path())["ball_like"], false);

    let egg = planes(EGG, dir.path());
    assert_eq!(egg["ball_like"], false);
    let rows = egg["directions"].as_array().unwrap();
    assert!(rows.iter().any(|r| r["symmetric"] == false));
    for r in rows {
        assert!(matches!(r["event"].as_str().unwrap(), "InternalTangency" | "Orthogonality"));
        assert!(r["contact"].as_array().unwrap().len() == 2);
    }
    let (columns, rows) = read_csv(dir.path().join("planes.csv"));
    assert_eq!(columns.len(), 12);
    assert_eq!(rows.len(), 8);
}

#[test]
fn moving_planes_with_chain_and_random_directions() {
    let dir = TempDir::new().unwrap();
    let c = config(
        BALL,
        "[grid]\nn = 48\nhalf_width = 4.0\n[analysis]\ndirections = 4\nscan_samples = 512\nsamples = 64\nrandom_directions = 3\nseed = 7",
        dir.path(),
    );
    execute(Command::MovingPlanes, &c).unwrap();
    let report = read_json(dir.path().join("moving_planes.json"));
    assert_eq!(report["random_directions"].as_array().unwrap().len(), 3);
    assert_eq!(report["random_all_symmetric"], true);
    let chain = &report["chain"];
    assert_eq!(chain["coarse"]["resolution"], 48);
    assert_eq!(chain["fine"]["resolution"], 96);
    assert!(chain["persistent_failures"].as_array().unwrap().is_empty(), "{chain:#}");
    let (_, rows) = read_csv(dir.path().join("planes.csv"));
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[4][1], "random");
}

#[test]
fn converge_writes_rate_tables() {
    let dir = TempDir::new().unwrap();
    let c = config(
        BALL,
        "[grid]\nhalf_width = 2.0\n[analysis]\nresolutions = [16, 32, 64]\nstudies = [\"manufactured\"]",
        dir.path(),
    );
    execute(Command::Converge, &c).unwrap();
    let report = read_json(dir.path().join("rates.json"));
    let table = &report["studies"][0]["tables"][0];
    assert_eq!(table["label"], "manufactured_max_error");
    assert!((table["fitted_order"].as_f64().unwrap() - 2.0).abs() < 0.05);
    let (columns, rows) = read_csv(dir.path().join("rates.csv"));
    assert_eq!(columns, ["label", "resolution", "h", "error", "pairwise_order", "fitted_order"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][4], "");
}

#[test]
fn identical_configs_give_byte_identical_json() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let rest = "[grid]\nn = 48\nhalf_width = 4.0\n[analysis]\nsamples = 64";
    for dir in [&a, &b] {
        execute(Command::Elliptic, &config(ELLIPSE, rest, dir.path())).unwrap();
    }
    let read = |d: &TempDir| std::fs::read(d.path().join("elliptic.json")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn binary_exit_codes_and_messages() {
    let dir = TempDir::new().unwrap();
    let bad = write_config(dir.path(), "[physics]\nsigma_plus = \"two\"\n");
    let out = binary(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"));

    let out = binary(&["bogus"]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));

    let cfg = write_config(
        dir.path(),
        &format!("{BALL}\n[physics]\nsigma_plus = 1.0\nsigma_minus = 1.0\n[analysis]\nsamples = 32\n"),
    );
    let out_dir = dir.path().join("run");
    let out = binary(&[
        "elliptic",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--resolution",
        "40",
        "--quiet",
    ]);
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: sigma_plus = sigma_minus"));
    assert!(out.stdout.is_empty());
    let report = read_json(out_dir.join("elliptic.json"));
    assert_eq!(report["n"], 40);
    assert!(report["warnings"][0].as_str().unwrap().contains("homogeneous"));

    // an odd resolution cannot be restricted by the transform check
    let out = binary(&[
        "transform-check",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--resolution",
        "41",
    ]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert_ne!(EXIT_CHECK_FAILED, EXIT_NUMERICAL);
}
