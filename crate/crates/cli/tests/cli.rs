use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use postrisk::config::ExperimentConfig;
use postrisk::experiment::Report;
use postrisk::output;

const TOY_POSTRISK: &str = r#"
label = "toy-postrisk"
test_case = "gaussian-toy"
method = "postrisk"
seed = 7
reps = 3
threads = 2

[target]
direction = "geq"
value = 3.0
intermediate = [2.0]

[gaussian_toy]
dim = 2
observation = 1.0
noise_sd = 0.8

[posterior]
n_particles = 100

[rare]
s_r = 5

[rare.schedule]
mode = "log"
first = 0.5
levels = 8
"#;

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_postrisk")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("toy.cfg");
    fs::write(&path, text).unwrap();
    path
}

fn run_toy(dir: &Path) -> PathBuf {
    let cfg = write_config(dir, TOY_POSTRISK);
    let out = dir.join("run");
    let o = bin(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn shipped_configs_parse_and_round_trip() {
    let mut n = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("cfg") {
            continue;
        }
        let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
        let back = ExperimentConfig::parse(&cfg.to_text().unwrap()).unwrap();
        assert_eq!(cfg, back, "{}", path.display());
        n += 1;
    }
    assert!(n >= 14, "found {n} configs");
}

#[test]
fn run_writes_artifacts_and_report_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_toy(tmp.path());
    for f in [output::REPORT, output::ESTIMATES, output::LEVELS, "estimates.svg", "thresholds.svg", "alphas.svg"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }

    let text = fs::read_to_string(out.join(output::REPORT)).unwrap();
    let report: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(report.estimates.per_run.len(), 3);
    let again = serde_json::to_string(&report).unwrap();
    let back: Report = serde_json::from_str(&again).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), again);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["config", "method", "target", "summary", "per_run"] {
        assert!(v.get(key).is_some(), "report lacks {key}");
    }

    let mut est = csv::Reader::from_path(out.join(output::ESTIMATES)).unwrap();
    let headers = est.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "estimate"));
    assert!(headers.iter().any(|h| h.starts_with("estimate_at_")));
    assert_eq!(est.records().count(), 3);
    let levels = csv::Reader::from_path(out.join(output::LEVELS)).unwrap().into_records().count();
    assert!(levels >= 3 * 8);
}

#[test]
fn seed_flag_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), TOY_POSTRISK);
    let estimates = |seed: &str, dir: &str| {
        let out = tmp.path().join(dir);
        let o = bin(&["run", "--config", cfg.to_str().unwrap(), "--seed", seed, "--reps", "2", "--threads", "1", "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        fs::read_to_string(out.join(output::ESTIMATES)).unwrap()
    };
    assert_eq!(estimates("11", "a"), estimates("11", "b"));
    assert_ne!(estimates("11", "a"), estimates("12", "c"));
}

#[test]
fn plot_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_toy(tmp.path());
    let before = fs::read(out.join("estimates.svg")).unwrap();
    let o = bin(&["plot", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read(out.join("estimates.svg")).unwrap(), before);
    assert!(String::from_utf8(before).unwrap().starts_with("<svg"));
}

#[test]
fn summarize_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_toy(tmp.path());
    let csv_path = tmp.path().join("summary.csv");
    let o = bin(&["summarize", out.to_str().unwrap(), "--out", csv_path.to_str().unwrap()]);
    assert!(o.status.success());
    let rows = csv::Reader::from_path(&csv_path).unwrap().into_records().count();
    assert_eq!(rows, 2);
}

#[test]
fn generate_truth_prints_json() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("flow1d_table1_row1.cfg");
    let o = bin(&["generate-truth", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["truth_seed"], 2641);
    assert!(v["qoi"].as_f64().unwrap() > 0.0);
    assert!(tmp.path().join(output::TRUTH).is_file());
}

#[test]
fn errors_exit_nonzero_with_json() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = bin(&["run", "--config", tmp.path().join("none.cfg").to_str().unwrap()]);
    assert!(!missing.status.success());
    let v: serde_json::Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert!(v["error"].as_str().unwrap().contains("none.cfg"));

    let bad = write_config(tmp.path(), &TOY_POSTRISK.replace("n_particles = 100", "n_particles = 0"));
    let o = bin(&["run", "--config", bad.to_str().unwrap(), "--out", tmp.path().join("x").to_str().unwrap()]);
    assert!(!o.status.success());

    let toy_truth = write_config(tmp.path(), TOY_POSTRISK);
    let o = bin(&["generate-truth", "--config", toy_truth.to_str().unwrap()]);
    assert!(!o.status.success());

    let o = bin(&["run"]);
    assert!(!o.status.success());
}
