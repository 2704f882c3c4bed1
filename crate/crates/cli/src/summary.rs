//! Table of results across run directories.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::Method;
use crate::experiment::Report;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub label: String,
    pub method: String,
    pub n: usize,
    pub cess: String,
    pub s_p: usize,
    pub s_r: usize,
    pub levels: String,
    pub threshold: f64,
    pub reps: usize,
    pub mean: f64,
    pub cov: Option<f64>,
    pub min: f64,
    pub max: f64,
    pub zeros: usize,
    pub mean_g: f64,
    pub mean_r: f64,
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// One row per threshold and estimator in the report.
pub fn rows(report: &Report) -> Vec<Row> {
    let cfg = &report.config;
    let smc = !matches!(cfg.method, Method::Mh | Method::McPrior);
    let cess = match cfg.posterior.tempering {
        postrisk_core::smc::TemperingMode::Adaptive { cess_fraction } => cess_fraction.to_string(),
        postrisk_core::smc::TemperingMode::Fixed { ref alphas } => format!("fixed({})", alphas.len()),
    };
    let mut out = Vec::new();
    for e in std::iter::once(&report.estimates).chain(report.rerun.iter()) {
        let levels = mean(e.per_run.iter().map(|r| r.levels.len() as f64));
        let base = Row {
            label: cfg.label.clone(),
            method: e.method.clone(),
            n: if smc { cfg.posterior.n_particles } else { 0 },
            cess: if smc && cfg.method.uses_data() { cess.clone() } else { String::new() },
            s_p: if smc { cfg.posterior.s_p } else { 0 },
            s_r: if smc { cfg.rare.s_r } else { 0 },
            levels: if smc { format!("{levels:.1}") } else { String::new() },
            threshold: e.target,
            reps: e.summary.n,
            mean: e.summary.mean,
            cov: e.summary.cov,
            min: e.summary.min,
            max: e.summary.max,
            zeros: e.summary.zeros,
            mean_g: mean(e.per_run.iter().map(|r| r.counts.g_total() as f64)),
            mean_r: mean(e.per_run.iter().map(|r| r.counts.r_total() as f64)),
        };
        for (i, (t, s)) in e.partial_summaries.iter().enumerate() {
            let part = |f: fn(&postrisk_core::problem::EvalCounts) -> u64| {
                mean(e.per_run.iter().filter_map(|r| r.partial.get(i)).map(|p| f(&p.counts) as f64))
            };
            out.push(Row {
                threshold: *t,
                reps: s.n,
                mean: s.mean,
                cov: s.cov,
                min: s.min,
                max: s.max,
                zeros: s.zeros,
                mean_g: part(|c| c.g_total()),
                mean_r: part(|c| c.r_total()),
                ..base.clone()
            });
        }
        out.push(base);
    }
    out
}

pub fn write_csv(path: &Path, rows: &[Row]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn print_table(mut out: impl Write, rows: &[Row]) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<28} {:<18} {:>5} {:>8} {:>5} {:>5} {:>6} {:>9} {:>4} {:>10} {:>6} {:>10} {:>10} {:>5} {:>11} {:>9}",
        "label", "method", "N", "CESS", "s_P", "s_R", "K", "T", "reps", "mean", "COV", "min", "max", "zeros", "G", "R"
    )?;
    for r in rows {
        let cov = r.cov.map_or("-".to_string(), |c| format!("{c:.3}"));
        writeln!(
            out,
            "{:<28} {:<18} {:>5} {:>8} {:>5} {:>5} {:>6} {:>9.3e} {:>4} {:>10.3e} {:>6} {:>10.3e} {:>10.3e} {:>5} {:>11.0} {:>9.0}",
            r.label, r.method, r.n, r.cess, r.s_p, r.s_r, r.levels, r.threshold, r.reps, r.mean, cov, r.min, r.max,
            r.zeros, r.mean_g, r.mean_r
        )?;
    }
    Ok(())
}
