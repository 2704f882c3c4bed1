//! Run directory artifacts: `report.json`, `estimates.csv`, `levels.csv`,
//! `particles.json` and `truth.json`.

use std::fs;
use std::path::Path;

use anyhow::Context;
use postrisk_core::postrisk::RunRecord;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::experiment::{Outcome, ParticleDump, Report};

pub const REPORT: &str = "report.json";
pub const ESTIMATES: &str = "estimates.csv";
pub const LEVELS: &str = "levels.csv";
pub const PARTICLES: &str = "particles.json";
pub const TRUTH: &str = "truth.json";

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_outcome(dir: &Path, outcome: &Outcome) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_json(&dir.join(REPORT), &outcome.report)?;
    if let Some(p) = &outcome.particles {
        write_json(&dir.join(PARTICLES), p)?;
    }
    if let Some(t) = &outcome.truth {
        write_json(&dir.join(TRUTH), t)?;
    }
    write_estimates(&dir.join(ESTIMATES), &outcome.report)?;
    write_levels(&dir.join(LEVELS), &outcome.report)?;
    Ok(())
}

pub fn read_report(dir: &Path) -> anyhow::Result<Report> {
    read_json(&dir.join(REPORT))
}

pub fn read_particles(dir: &Path) -> anyhow::Result<ParticleDump> {
    read_json(&dir.join(PARTICLES))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn runs(report: &Report) -> impl Iterator<Item = (&str, &RunRecord)> {
    let main = report.estimates.per_run.iter().map(|r| (report.estimates.method.as_str(), r));
    let rerun = report
        .rerun
        .iter()
        .flat_map(|e| e.per_run.iter().map(|r| (e.method.as_str(), r)));
    main.chain(rerun)
}

/// One row per repetition: estimate, budget and intermediate estimates.
fn write_estimates(path: &Path, report: &Report) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let intermediate: Vec<f64> = report.config.target.intermediate.clone();
    let mut header: Vec<String> = [
        "method", "rep", "seed", "threshold", "estimate", "died_at_level", "g_evals", "r_evals", "failures", "hits",
        "samples",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for t in &intermediate {
        header.push(format!("estimate_at_{t:e}"));
        header.push(format!("g_evals_at_{t:e}"));
        header.push(format!("r_evals_at_{t:e}"));
    }
    w.write_record(&header)?;
    for (method, r) in runs(report) {
        let mut row = vec![
            method.to_string(),
            r.rep.to_string(),
            r.seed.to_string(),
            report.estimates.target.to_string(),
            r.estimate.to_string(),
            opt(r.died_at_level),
            r.counts.g_total().to_string(),
            r.counts.r_total().to_string(),
            r.counts.failures.to_string(),
            opt(r.hits.map(|h| h.0)),
            opt(r.hits.map(|h| h.1)),
        ];
        for t in &intermediate {
            match r.partial.iter().find(|p| p.threshold == *t) {
                Some(p) => {
                    row.push(p.estimate.to_string());
                    row.push(p.counts.g_total().to_string());
                    row.push(p.counts.r_total().to_string());
                }
                None => row.extend([String::new(), String::new(), String::new()]),
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per tempering iteration and per subset level.
fn write_levels(path: &Path, report: &Report) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "method", "rep", "stage", "k", "alpha", "ess", "cess", "resampled", "threshold", "survivors", "p_k",
        "log_estimate", "acceptance", "inner_acceptance", "step", "g_evals", "r_evals",
    ])?;
    for (method, r) in runs(report) {
        for it in &r.iterations {
            w.write_record([
                method.to_string(),
                r.rep.to_string(),
                "posterior".to_string(),
                it.k.to_string(),
                it.alpha.to_string(),
                it.ess.to_string(),
                it.cess.to_string(),
                it.resampled.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                opt(it.acceptance),
                String::new(),
                it.step.to_string(),
                String::new(),
                String::new(),
            ])?;
        }
        for l in &r.levels {
            w.write_record([
                method.to_string(),
                r.rep.to_string(),
                "rare".to_string(),
                l.k.to_string(),
                "1".to_string(),
                String::new(),
                String::new(),
                "true".to_string(),
                l.threshold.to_string(),
                l.survivors.to_string(),
                l.p_k.to_string(),
                l.log_estimate.to_string(),
                opt(l.acceptance),
                opt(l.inner_acceptance),
                l.step.to_string(),
                l.counts.g_total().to_string(),
                l.counts.r_total().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
