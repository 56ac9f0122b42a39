use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn stablelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stablelab"))
        .args(args)
        .env_remove("STABLELAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn eval(args: &[&str]) -> f64 {
    let mut all = vec!["kernel", "eval"];
    all.extend_from_slice(args);
    let out = stablelab(&all);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    stdout(&out).trim().parse().unwrap()
}

#[test]
fn kernel_values() {
    let pi = std::f64::consts::PI;
    let g = eval(&["--kind", "green-global", "--d", "2", "--alpha", "1", "--x", "0,0", "--y", "1,0"]);
    assert!((g - 1.0 / (2.0 * pi)).abs() < 1e-14, "{g}");
    let k = eval(&["--kind", "poisson-ball", "--d", "2", "--alpha", "1", "--r", "1", "--x", "0,0", "--z", "1.4142135,0"]);
    assert!((k - 1.0 / (2.0 * pi * pi)).abs() < 1e-7, "{k}");
    let j = eval(&["--kind", "jump", "--d", "2", "--alpha", "1", "--beta", "0.5", "--b", "zero", "--x", "0,0", "--y", "1,0"]);
    assert!((j - 1.0 / (2.0 * pi)).abs() < 1e-14, "{j}");
}

#[test]
fn kernel_prints_fifteen_digits() {
    let out = stablelab(&["kernel", "eval", "--kind", "jump", "--alpha", "1", "--x", "0,0", "--y", "1,0"]);
    assert_eq!(stdout(&out).trim(), "0.159154943091895");
}

#[test]
fn kernel_exit_codes() {
    let bad_alpha = stablelab(&["kernel", "eval", "--kind", "green-ball", "--alpha", "2.5", "--x", "0,0", "--y", "0.5,0"]);
    assert_eq!(code(&bad_alpha), 2);
    let bad_point = stablelab(&["kernel", "eval", "--kind", "green-ball", "--alpha", "1", "--x", "0,a", "--y", "0.5,0"]);
    assert_eq!(code(&bad_point), 2);
    let mismatch = stablelab(&["kernel", "eval", "--kind", "green-global", "--alpha", "1", "--x", "0,0", "--y", "1,0,0"]);
    assert_eq!(code(&mismatch), 2);
    let inside = stablelab(&["kernel", "eval", "--kind", "poisson-ball", "--alpha", "1", "--x", "0,0", "--z", "0.5,0"]);
    assert_eq!(code(&inside), 3);
    assert_eq!(String::from_utf8_lossy(&inside.stderr).lines().count(), 1);
}

#[test]
fn check_suites() {
    assert_eq!(code(&stablelab(&["check", "scaling"])), 0);
    assert_eq!(code(&stablelab(&["check", "assumption1"])), 0);
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "m2_1.cfg", "[model]\nb = trunc:1\neps0 = 0\nm2 = 1\n");
    let out = stablelab(&["check", "assumption1", "--config", &cfg]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn check_config_errors() {
    let dir = TempDir::new().unwrap();
    let unknown = write_config(dir.path(), "a.cfg", "[check]\nsamples_per_case = 3\n");
    assert_eq!(code(&stablelab(&["check", "scaling", "--config", &unknown])), 2);
    let bad_b = write_config(dir.path(), "b.cfg", "[model]\nb = wobble:1\n");
    assert_eq!(code(&stablelab(&["check", "assumption1", "--config", &bad_b])), 2);
    let bad_alpha = write_config(dir.path(), "c.cfg", "[model]\nalpha = 2.5\n");
    assert_eq!(code(&stablelab(&["check", "scaling", "--config", &bad_alpha])), 2);
    assert_eq!(code(&stablelab(&["check", "nonsense"])), 2);
    let missing = dir.path().join("missing.cfg");
    assert_eq!(code(&stablelab(&["check", "scaling", "--config", missing.to_str().unwrap()])), 2);
}

const SMALL_DECAY: &str = "[experiment]\nn = 4000\nlevels = 3\n";

#[test]
fn experiment_csv_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "decay.cfg", SMALL_DECAY);
    let mut csvs = Vec::new();
    for (i, workers) in ["1", "3", "1"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let o = stablelab(&[
            "--workers",
            workers,
            "experiment",
            "decay",
            "--config",
            &cfg,
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(matches!(code(&o), 0 | 1), "{}", String::from_utf8_lossy(&o.stderr));
        csvs.push(fs::read(out.join("decay.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(csvs[0], csvs[2]);
}

#[test]
fn experiment_outputs() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("gradient");
    let o = stablelab(&["experiment", "gradient", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    let csv = fs::read_to_string(out.join("gradient.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment,param_hash,seed,point_index,x_coords,estimate,stderr,n,statistic,statistic_err,pass"
    );
    assert!(lines.clone().all(|l| l.starts_with("gradient,") && l.ends_with(",true")));
    assert!(lines.any(|l| l.contains(",upper,")));

    let schema: Value = serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("gradient.json")).unwrap()).unwrap();
    let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");

    let manifest: Value = serde_json::from_str(&fs::read_to_string(out.join("gradient.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["pass"], true);
    assert_eq!(manifest["param_hash"], report["param_hash"]);
    assert_eq!(manifest["config"], report["config"]);
}

#[test]
fn manifest_config_reproduces_the_run() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "decay.cfg", SMALL_DECAY);
    let first = dir.path().join("first");
    stablelab(&["experiment", "decay", "--config", &cfg, "--seed", "11", "--out", first.to_str().unwrap()]);
    let manifest: Value = serde_json::from_str(&fs::read_to_string(first.join("decay.manifest.json")).unwrap()).unwrap();

    // rebuild a config file from the manifest alone
    let mut text = String::new();
    for (k, v) in manifest["config"].as_object().unwrap() {
        let (section, name) = k.split_once('.').unwrap();
        text.push_str(&format!("[{section}]\n{name} = {}\n", v.as_str().unwrap()));
    }
    let replay = write_config(dir.path(), "replay.cfg", &text);
    let second = dir.path().join("second");
    stablelab(&["experiment", "decay", "--config", &replay, "--out", second.to_str().unwrap()]);
    assert_eq!(fs::read(first.join("decay.csv")).unwrap(), fs::read(second.join("decay.csv")).unwrap());
}

#[test]
fn degenerate_estimates_exit_4_with_partial_report() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bhp.cfg", "[experiment]\nf2 = slab(1, -1000, -999)\nn = 50\ngrid = 2\n");
    let out = dir.path().join("bhp");
    let o = stablelab(&["experiment", "bhp", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 4, "{}", stdout(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("bhp.json")).unwrap()).unwrap();
    assert!(report["report"].is_null());
    assert!(report["error"].as_str().unwrap().contains("degenerate"));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out.join("bhp.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["exit_code"], 4);
}

#[test]
fn experiment_config_errors() {
    let dir = TempDir::new().unwrap();
    let perturbed = write_config(dir.path(), "b.cfg", "[model]\nb = const:0.3\n");
    assert_eq!(code(&stablelab(&["experiment", "decay", "--config", &perturbed, "--print-config"])), 0);
    let out = dir.path().join("x");
    assert_eq!(code(&stablelab(&["experiment", "decay", "--config", &perturbed, "--out", out.to_str().unwrap()])), 2);
    let bad_domain = write_config(dir.path(), "d.cfg", "[experiment]\ndomain = torus(1)\n");
    assert_eq!(code(&stablelab(&["experiment", "decay", "--config", &bad_domain, "--out", out.to_str().unwrap()])), 2);
    assert_eq!(code(&stablelab(&["experiment", "nonsense"])), 2);
}

#[test]
fn off_boundary_anchor_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "z.cfg", "[experiment]\nz0 = 0, 0.5\nn = 100\n");
    let out = dir.path().join("x");
    assert_eq!(code(&stablelab(&["experiment", "decay", "--config", &cfg, "--out", out.to_str().unwrap()])), 3);
}

#[test]
fn printed_config_round_trips() {
    let dir = TempDir::new().unwrap();
    let o = stablelab(&["experiment", "barrier", "--print-config"]);
    let cfg = write_config(dir.path(), "barrier.cfg", &stdout(&o));
    let again = stablelab(&["experiment", "barrier", "--config", &cfg, "--print-config"]);
    assert_eq!(stdout(&o), stdout(&again));
    assert!(stdout(&o).contains("domain = lipschitz(sine(0.1, 2), 0.32)"));
}

#[test]
fn keys_reference_lists_every_command() {
    let text = stdout(&stablelab(&["keys"]));
    for name in [
        "harnack",
        "chained-harnack",
        "bhp",
        "ratio-limit",
        "decay",
        "gradient",
        "barrier",
        "boundary-decay",
        "poisson-normalization",
        "dynkin",
        "scaling",
        "gradient-fd",
        "assumption1",
    ] {
        assert!(text.contains(&format!(" {name}: ")), "{name}");
    }
}
