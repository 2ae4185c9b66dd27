use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn randsum(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randsum"))
        .args(args)
        .current_dir(dir)
        .env_remove("RANDSUM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

/// Header and rows of a CSV written by the tool, metadata lines dropped.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const MINIMAL_BOUND: &str = r#"
[summand]
kind = "normal"
[index]
kind = "geometric"
mean = 4.0
[grid]
start = 0.0
stop = 6.0
step = 0.25
"#;

#[test]
fn bound_column_is_monotone_with_known_branches() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bound.toml", MINIMAL_BOUND);
    let out = randsum(&["bound", "--config", cfg.to_str().unwrap(), "--out", "out", "--quiet"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());

    let (header, rows) = read_csv(&tmp.path().join("out/bound.csv"));
    assert_eq!(header, ["x", "bound", "branch", "dominant_n"]);
    assert_eq!(rows.len(), 25);
    let b = column(&header, "bound");
    let values: Vec<f64> = rows.iter().map(|r| r[b].parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] <= w[0]), "{values:?}");
    assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
    let br = column(&header, "branch");
    assert!(rows.iter().all(|r| ["W", "chi-star", "chebyshev"].contains(&r[br].as_str())));
}

#[test]
fn outputs_are_self_describing() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bound.toml", MINIMAL_BOUND);
    let out = randsum(&["bound", "--config", cfg.to_str().unwrap(), "--out", "o", "--seed", "17"], tmp.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(tmp.path().join("o/bound.csv")).unwrap();
    for key in ["# schema_version: 1", "# tool: randsum ", "# config_hash: ", "# seed: 17", "# rng: ChaCha8"] {
        assert!(csv.contains(key), "missing {key:?}");
    }
    let json = read_json(&tmp.path().join("o/bound.json"));
    assert_eq!(json["seed"], 17);
    assert_eq!(json["config"]["index"]["kind"], "geometric");
    assert_eq!(json["config"]["seed"], 17);
    let hash = json["config_hash"].as_str().unwrap();
    assert!(csv.contains(hash));

    // The embedded TOML reproduces the run exactly.
    let embedded = write_config(tmp.path(), "embedded.toml", json["config_toml"].as_str().unwrap());
    let again = randsum(&["bound", "--config", embedded.to_str().unwrap(), "--out", "o2"], tmp.path());
    assert!(again.status.success());
    assert_eq!(
        fs::read(tmp.path().join("o/bound.csv")).unwrap(),
        fs::read(tmp.path().join("o2/bound.csv")).unwrap()
    );
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sim.toml",
        &format!("{MINIMAL_BOUND}\n[simulate]\npaths = 50000\n"),
    );
    for cmd in ["bound", "simulate"] {
        for dir in ["a", "b"] {
            let out = randsum(&[cmd, "--config", cfg.to_str().unwrap(), "--out", dir, "--quiet"], tmp.path());
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        }
        for ext in ["csv", "json"] {
            let name = format!("{cmd}.{ext}");
            let a = fs::read(tmp.path().join("a").join(&name)).unwrap();
            let b = fs::read(tmp.path().join("b").join(&name)).unwrap();
            // The JSON embeds the output directory, the CSV does not.
            if ext == "csv" {
                assert_eq!(a, b, "{name} differs between reruns");
            } else {
                let strip = |v: &[u8]| {
                    let mut j: serde_json::Value = serde_json::from_slice(v).unwrap();
                    j["config"]["out"] = serde_json::Value::Null;
                    j["config_toml"] = serde_json::Value::Null;
                    j
                };
                assert_eq!(strip(&a), strip(&b));
            }
        }
    }
    let other = randsum(&["simulate", "--config", cfg.to_str().unwrap(), "--out", "c", "--seed", "2"], tmp.path());
    assert!(other.status.success());
    assert_ne!(
        fs::read(tmp.path().join("a/simulate.csv")).unwrap(),
        fs::read(tmp.path().join("c/simulate.csv")).unwrap()
    );
}

#[test]
fn verify_passes_for_normal_deterministic_index() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "verify.toml",
        r#"
seed = 3
[summand]
kind = "normal"
[index]
kind = "deterministic"
n = 4
[grid]
start = 0.0
stop = 6.0
step = 0.25
[verify]
paths = 400000
level = 0.999
"#,
    );
    let out = randsum(&["verify", "--config", cfg.to_str().unwrap(), "--out", "v"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let (header, rows) = read_csv(&tmp.path().join("v/verify.csv"));
    let verdict = column(&header, "verdict");
    assert!(rows.iter().all(|r| r[verdict] == "PASS" || r[verdict] == "SKIPPED"));
    let json = read_json(&tmp.path().join("v/verify.json"));
    let counts = &json["result"]["counts"];
    assert_eq!(counts["fail"], 0);
    assert!(counts["pass"].as_u64().unwrap() >= 10);
    assert_eq!(
        counts["pass"].as_u64().unwrap() + counts["skipped_infeasible"].as_u64().unwrap(),
        25
    );
    assert_eq!(json["result"]["verdict"], "PASS");
}

#[test]
fn verify_reports_failures_for_an_adversarial_reference() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "adv.toml",
        r#"
[index]
kind = "geometric"
mean = 4.0
[grid]
start = 0.5
stop = 3.0
step = 0.5
[verify]
paths = 50000
reference = { kind = "closed_form", rate = 50.0, scale = 1.0 }
"#,
    );
    let out = randsum(&["verify", "--config", cfg.to_str().unwrap(), "--out", "v", "--quiet"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    let json = read_json(&tmp.path().join("v/verify.json"));
    assert!(json["result"]["counts"]["fail"].as_u64().unwrap() > 0);
    assert_eq!(json["result"]["verdict"], "FAIL");

    // Scaling the series bound far down fails the same way.
    let scaled = write_config(
        tmp.path(),
        "scaled.toml",
        "[verify]\npaths = 50000\nreference = { kind = \"theorem\", scale = 1e-6 }\n",
    );
    let out = randsum(&["verify", "--config", scaled.to_str().unwrap(), "--out", "s", "--quiet"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_grid_mismatch_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "mismatch.toml",
        "[verify]\nmc_grid = { start = 0.0, stop = 5.0, step = 0.25 }\n",
    );
    let out = randsum(&["verify", "--config", cfg.to_str().unwrap(), "--out", "v"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mc_grid"));
}

#[test]
fn exponent_table_rows() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "exp.toml",
        r#"
[exponents]
rows = [
  { m = 2.0, r = 0.0 },
  { m = 2.0, r = 0.0, a = 2.0, b = 0.0 },
  { m = 1.5, r = 1.0 },
  { m = inf, r = 0.0 },
]
"#,
    );
    let out = randsum(&["exponents", "--config", cfg.to_str().unwrap(), "--out", "e"], tmp.path());
    assert!(out.status.success());
    let (header, rows) = read_csv(&tmp.path().join("e/exponents.csv"));
    assert_eq!(header, ["m", "r", "a", "b", "M", "L", "q", "w"]);
    let f = |s: &str| s.parse::<f64>().unwrap();
    assert_eq!((f(&rows[0][4]), f(&rows[0][5])), (2.0, 0.0));
    assert!(rows[0][6].is_empty());
    assert!((f(&rows[1][6]) - 4.0 / 7.0).abs() < 1e-15);
    assert_eq!(rows[2][4], "domain-error");
    assert_eq!(rows[2][5], "domain-error");
    assert_eq!(rows[3][0], "inf");
    assert_eq!((f(&rows[3][4]), f(&rows[3][5])), (2.0, 0.0));
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let bad_field = write_config(tmp.path(), "bad.toml", "[grid]\nstart = 0.0\nstop = 1.0\nstpe = 0.1\n");
    let out = randsum(&["bound", "--config", bad_field.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("stpe") && err.contains("line"), "{err}");

    let bad_mean = write_config(tmp.path(), "mean.toml", "[index]\nkind = \"geometric\"\nmean = 1.5\n");
    let out = randsum(&["bound", "--config", bad_mean.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("index"));

    let out = randsum(&["bound", "--grid", "0:6"], tmp.path());
    assert_eq!(out.status.code(), Some(2));

    let out = randsum(&["bound", "--config", "missing.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn grid_flag_and_env_out_dir() {
    let tmp = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_randsum"))
        .args(["bound", "--grid", "1:2:0.5", "--quiet"])
        .current_dir(tmp.path())
        .env("RANDSUM_OUT_DIR", "from-env")
        .output()
        .unwrap();
    assert!(out.status.success());
    let (_, rows) = read_csv(&tmp.path().join("from-env/bound.csv"));
    let xs: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(xs, ["1", "1.5", "2"]);
}

#[test]
fn lower_two_point_stays_above_the_floor() {
    let tmp = TempDir::new().unwrap();
    let out = randsum(&["lower", "--grid", "3:50:0.5", "--out", "l"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&tmp.path().join("l/lower.csv"));
    let (x2, floor, x) = (column(&header, "x2_exact"), column(&header, "floor"), column(&header, "x"));
    assert_eq!(rows.len(), 95);
    for r in &rows {
        let xv: f64 = r[x].parse().unwrap();
        let constant = r[floor].parse::<f64>().unwrap() * xv * xv;
        assert!(r[x2].parse::<f64>().unwrap() >= constant * (1.0 - 1e-12));
    }
}

#[test]
fn simulate_moment_mode_writes_the_inequality_columns() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "mom.toml",
        "[simulate]\nmode = \"moments\"\npaths = 40000\np_grid = [2.0, 4.0]\nbootstrap = 50\n",
    );
    let out = randsum(&["simulate", "--config", cfg.to_str().unwrap(), "--out", "m"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&tmp.path().join("m/simulate.csv"));
    assert_eq!(rows.len(), 2);
    let s = column(&header, "s_norm");
    // Wald: the normalized sum has unit second moment.
    let s2: f64 = rows[0][s].parse().unwrap();
    assert!((s2 - 1.0).abs() < 0.05, "{s2}");
    column(&header, "rhs");
}
