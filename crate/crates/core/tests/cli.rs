use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fk_cim::cli::config::RunConfig;
use fk_cim::cli::output::config_from_csv;
use fk_cim::{FkError, FkParams, TmGrid, TmScheme, TmStepper};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fk-cim"))
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_config(dir: &TempDir, name: &str, cfg: &RunConfig) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, cfg.to_json()).unwrap();
    path.display().to_string()
}

#[test]
fn solve_csv_layout() {
    let cfg = example("example1.json");
    let out = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# fk-cim "));
    assert!(lines[1].starts_with("# config: {"));
    assert_eq!(lines[2], "t,G1,G2");
    let rows: Vec<Vec<f64>> = lines[3..]
        .iter()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 17);
    let last = rows.last().unwrap();
    assert_eq!(last[0], 3.0);
    assert!((last[1] - 8.9675e-3).abs() < 1e-6 && (last[2] - 2.3729e-2).abs() < 1e-6);
}

#[test]
fn outputs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = example("example1.json");
    let mut files = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("run{i}.csv"));
        let out = run(&[
            "converge",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        files.push(std::fs::read(path).unwrap());
    }
    // wall-time column aside, every byte must agree
    let strip = |b: &[u8]| -> Vec<String> {
        String::from_utf8(b.to_vec())
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| l.rsplit_once(',').map_or(l, |x| x.0).to_string())
            .collect()
    };
    assert_eq!(strip(&files[0]), strip(&files[1]));

    let a = run(&["solve", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    let b = run(&["solve", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_config_round_trip() {
    let dir = TempDir::new().unwrap();
    let cfg = example("example1.json");
    let first = run(&["solve", "--config", cfg.to_str().unwrap(), "--format", "json", "--n-nodes", "12"]);
    assert_eq!(code(&first), 0);
    let doc: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 17);
    assert!(doc["rows"][0]["G1"].is_number());
    let embedded = RunConfig::from_json(&doc["config"].to_string()).unwrap();
    assert_eq!(embedded.n_nodes, 12);

    let path = dir.path().join("embedded.json");
    std::fs::write(&path, doc["config"].to_string()).unwrap();
    let second = run(&["solve", "--config", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&second), 0);
    let mut reloaded = RunConfig::from_json(&config_from_csv(&stdout(&second)).unwrap()).unwrap();
    reloaded.format = embedded.format;
    assert_eq!(reloaded, embedded);
    let third = run(&["solve", "--config", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(third.stdout, first.stdout);
}

#[test]
fn invalid_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let mut cfg = RunConfig::example_one();
    cfg.alpha1 = 1.5;
    let path = write_config(&dir, "bad.json", &cfg);
    let out = run(&["solve", "--config", &path]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha1"));

    let unknown = dir.path().join("unknown.json");
    let mut v: Value = serde_json::from_str(&RunConfig::example_one().to_json()).unwrap();
    v["colour"] = Value::from("blue");
    std::fs::write(&unknown, v.to_string()).unwrap();
    assert_eq!(code(&run(&["solve", "--config", unknown.to_str().unwrap()])), 2);

    assert_eq!(code(&run(&["solve", "--config", "/nonexistent/config.json"])), 2);
    assert_eq!(code(&run(&["solve"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn contour_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = RunConfig::from_params(&FkParams {
        p: 0.1,
        b: 0.2,
        ..FkParams::example_one()
    });
    let path = write_config(&dir, "c3.json", &cfg);
    let out = run(&["solve", "--config", &path, "--n-nodes", "16"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("contour invalid"));
}

#[test]
fn singular_step_exits_4() {
    let params = FkParams {
        p: 0.1,
        b: 0.2,
        rho: 0.0,
        ..FkParams::example_one()
    };
    let det_at = |h: f64| match TmStepper::new(&params, TmGrid::new(h, 1).unwrap(), TmScheme::default()) {
        Ok(s) => {
            let m = s.step_matrix();
            m[0] * m[3] - m[1] * m[2]
        }
        Err(_) => 0.0,
    };
    let (mut lo, mut hi) = (1e-3f64, 1e3f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if det_at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let h = [lo, hi]
        .into_iter()
        .find(|&h| {
            matches!(
                TmStepper::new(&params, TmGrid::new(h, 1).unwrap(), TmScheme::default()),
                Err(FkError::SingularStep { .. })
            )
        })
        .expect("a singular step size");

    let dir = TempDir::new().unwrap();
    let mut cfg = RunConfig::from_params(&params);
    cfg.t1 = h;
    cfg.t0 = h / 5.0;
    let path = write_config(&dir, "c4.json", &cfg);
    let out = run(&["reference", "--config", &path, "--m", "1"]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn overflow_exits_5() {
    let cfg = example("example1.json");
    let out = run(&["solve", "--config", cfg.to_str().unwrap(), "--n-nodes", "20000"]);
    assert_eq!(code(&out), 5);
    assert!(String::from_utf8_lossy(&out.stderr).contains("overflow"));
}

#[test]
fn reference_rows_and_conservation() {
    let dir = TempDir::new().unwrap();
    let mut cfg = RunConfig::example_one();
    cfg.rho = 0.0;
    let path = write_config(&dir, "ref.json", &cfg);
    let out = run(&["reference", "--config", &path, "--m", "256"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(3)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 257);
    for r in rows {
        assert!((r[1] + r[2] - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn occupation_summary() {
    let cfg = example("example2.json");
    let out = run(&["occupation", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("t,A_mean,theory"));
    let value = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(&format!("# {key} = "))).unwrap();
        line.rsplit(' ').next().unwrap().parse().unwrap()
    };
    assert!((value("slope") - 1.0).abs() < 0.02);
    assert!((value("coefficient") - 0.5).abs() < 0.025);
    assert_eq!(value("theory_fraction"), 0.5);
}

#[test]
fn bench_reports_every_target() {
    let dir = TempDir::new().unwrap();
    let mut cfg = RunConfig::example_one();
    cfg.bench.targets = vec![1e-2, 1e-4];
    cfg.bench.n_max = 24;
    cfg.bench.m_max = 256;
    cfg.bench.repeats = 1;
    let path = write_config(&dir, "bench.json", &cfg);
    let out = run(&["bench", "--config", &path]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(3).filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().any(|r| r.contains("CIM-HC,3,")));
    assert!(rows.iter().any(|r| r.contains(",TM,")));
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(code(&run(&["--help"])), 0);
    let v = run(&["--version"]);
    assert_eq!(code(&v), 0);
    assert!(stdout(&v).contains(env!("CARGO_PKG_VERSION")));
}
