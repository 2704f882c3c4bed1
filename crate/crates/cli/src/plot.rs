//! Deterministic SVG figures of a run directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use postrisk_core::postrisk::RunRecord;

use crate::config::{Method, ScheduleSpec};
use crate::experiment::{ParticleDump, Report};
use crate::output;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 50.0); // left, right, top, bottom

fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

struct Svg {
    body: String,
    w: f64,
    h: f64,
}

impl Svg {
    fn new(w: f64, h: f64) -> Self {
        Self {
            body: String::new(),
            w,
            h,
        }
    }

    fn line(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, style: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" {style}/>"#,
            px(x0),
            px(y0),
            px(x1),
            px(y1)
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], style: &str) {
        let p: Vec<String> = pts.iter().map(|(x, y)| format!("{},{}", px(*x), px(*y))).collect();
        let _ = writeln!(self.body, r#"<polyline fill="none" points="{}" {style}/>"#, p.join(" "));
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, style: &str) {
        let _ = writeln!(self.body, r#"<circle cx="{}" cy="{}" r="{r}" {style}/>"#, px(x), px(y));
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, style: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" {style}/>"#,
            px(x),
            px(y),
            px(w),
            px(h)
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let s = s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" text-anchor="{anchor}" font-family="sans-serif" font-size="12">{s}</text>"#,
            px(x),
            px(y)
        );
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.w, self.h, self.w, self.h, self.body
        )
    }
}

/// Linear or log-10 axis pair inside the standard margins.
struct Axes {
    x: (f64, f64),
    y: (f64, f64),
    log_y: bool,
}

impl Axes {
    fn new(x: (f64, f64), y: (f64, f64), log_y: bool) -> Self {
        let pad = |(a, b): (f64, f64)| if a == b { (a - 0.5, b + 0.5) } else { (a, b) };
        let y = if log_y { (y.0.log10(), y.1.log10()) } else { y };
        Self {
            x: pad(x),
            y: pad(y),
            log_y,
        }
    }

    fn sx(&self, v: f64) -> f64 {
        MARGIN.0 + (v - self.x.0) / (self.x.1 - self.x.0) * (W - MARGIN.0 - MARGIN.1)
    }

    fn sy(&self, v: f64) -> f64 {
        let v = if self.log_y { v.log10() } else { v };
        H - MARGIN.3 - (v - self.y.0) / (self.y.1 - self.y.0) * (H - MARGIN.2 - MARGIN.3)
    }

    fn frame(&self, svg: &mut Svg, title: &str, xlabel: &str, ylabel: &str) {
        let (l, r, t, b) = (MARGIN.0, W - MARGIN.1, MARGIN.2, H - MARGIN.3);
        svg.rect(l, t, r - l, b - t, r#"fill="none" stroke="black""#);
        for i in 0..=4 {
            let fx = self.x.0 + (self.x.1 - self.x.0) * i as f64 / 4.0;
            let x = self.sx(fx);
            svg.line(x, b, x, b + 5.0, r#"stroke="black""#);
            svg.text(x, b + 18.0, "middle", &num(fx));
            let fy = self.y.0 + (self.y.1 - self.y.0) * i as f64 / 4.0;
            let value = if self.log_y { 10f64.powf(fy) } else { fy };
            let y = self.sy(value);
            svg.line(l - 5.0, y, l, y, r#"stroke="black""#);
            svg.text(l - 8.0, y + 4.0, "end", &num(value));
        }
        svg.text(W / 2.0, 24.0, "middle", title);
        svg.text((l + r) / 2.0, H - 12.0, "middle", xlabel);
        svg.text(14.0, t - 8.0, "start", ylabel);
    }
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values
        .filter(|v| v.is_finite())
        .fold(None, |acc, v| Some(acc.map_or((v, v), |(a, b): (f64, f64)| (a.min(v), b.max(v)))))
}

fn all_runs(report: &Report) -> Vec<(&RunRecord, bool)> {
    let main = report.estimates.per_run.iter().map(|r| (r, false));
    let rerun = report.rerun.iter().flat_map(|e| e.per_run.iter().map(|r| (r, true)));
    main.chain(rerun).collect()
}

/// Threshold sequences per run; adaptive sequences in red, fixed in black.
pub fn thresholds_svg(report: &Report) -> Option<String> {
    let runs = all_runs(report);
    let ys = range(runs.iter().flat_map(|(r, _)| r.levels.iter().map(|l| l.threshold)))?;
    let kmax = runs.iter().map(|(r, _)| r.levels.len()).max()? as f64;
    let target = report.estimates.target;
    let ax = Axes::new((0.0, kmax), (ys.0.min(target), ys.1.max(target)), false);
    let mut svg = Svg::new(W, H);
    ax.frame(&mut svg, "Threshold sequences", "level k", "threshold");
    let adaptive = matches!(report.config.rare.schedule, ScheduleSpec::Adaptive { .. });
    for (r, rerun) in &runs {
        let color = if adaptive && !rerun { "#d62728" } else { "black" };
        let pts: Vec<(f64, f64)> = r.levels.iter().map(|l| (ax.sx(l.k as f64), ax.sy(l.threshold))).collect();
        svg.polyline(&pts, &format!(r#"stroke="{color}" stroke-width="1" stroke-opacity="0.7""#));
    }
    svg.line(
        ax.sx(0.0),
        ax.sy(target),
        ax.sx(kmax),
        ax.sy(target),
        r##"stroke="#1f77b4" stroke-dasharray="4 3""##,
    );
    Some(svg.finish())
}

/// Range, mean (red cross) and single estimates per threshold and method.
pub fn estimates_svg(report: &Report) -> String {
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    let sets = std::iter::once(&report.estimates).chain(report.rerun.iter());
    for e in sets {
        groups.push((format!("{} {}", e.method, num(e.target)), e.estimates()));
        for (i, (t, _)) in e.partial_summaries.iter().enumerate() {
            let vals = e.per_run.iter().filter_map(|r| r.partial.get(i).map(|p| p.estimate)).collect();
            groups.push((format!("{} {}", e.method, num(*t)), vals));
        }
    }
    let positive = range(groups.iter().flat_map(|(_, v)| v.iter().copied().filter(|x| *x > 0.0)));
    let (lo, hi) = positive.map_or((1e-12, 1.0), |(a, b)| (a / 3.0, b * 3.0));
    let ax = Axes::new((0.0, groups.len() as f64), (lo, hi), true);
    let mut svg = Svg::new(W, H);
    ax.frame(&mut svg, "Estimates per run", "", "probability (log scale)");
    for (g, (label, vals)) in groups.iter().enumerate() {
        let x = ax.sx(g as f64 + 0.5);
        let pos: Vec<f64> = vals.iter().copied().filter(|v| *v > 0.0).collect();
        if let Some((a, b)) = range(pos.iter().copied()) {
            svg.line(x, ax.sy(a), x, ax.sy(b), r#"stroke="black" stroke-width="2""#);
        }
        for v in &pos {
            svg.circle(x, ax.sy(*v), 2.5, r#"fill="black""#);
        }
        let zeros = vals.len() - pos.len();
        let mean = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
        if mean > 0.0 {
            let (cx, cy) = (x, ax.sy(mean));
            svg.line(cx - 6.0, cy - 6.0, cx + 6.0, cy + 6.0, r##"stroke="#d62728" stroke-width="2""##);
            svg.line(cx - 6.0, cy + 6.0, cx + 6.0, cy - 6.0, r##"stroke="#d62728" stroke-width="2""##);
        }
        svg.text(x, H - MARGIN.3 + 32.0, "middle", label);
        if zeros > 0 {
            svg.text(x, MARGIN.2 + 14.0, "middle", &format!("zeros: {zeros}"));
        }
    }
    svg.finish()
}

/// Exponent sequences of the posterior stage.
pub fn alphas_svg(report: &Report) -> Option<String> {
    let runs = all_runs(report);
    let kmax = runs.iter().map(|(r, _)| r.alphas.len()).max().filter(|k| *k > 0)? as f64;
    let ax = Axes::new((0.0, kmax), (0.0, 1.0), false);
    let mut svg = Svg::new(W, H);
    ax.frame(&mut svg, "Likelihood exponents", "iteration k", "alpha");
    for (r, _) in &runs {
        let mut pts = vec![(ax.sx(0.0), ax.sy(0.0))];
        pts.extend(r.alphas.iter().enumerate().map(|(i, a)| (ax.sx(i as f64 + 1.0), ax.sy(*a))));
        svg.polyline(&pts, r#"stroke="black" stroke-opacity="0.7""#);
    }
    Some(svg.finish())
}

/// Largest R-hat over parameters at each checkpoint, with the 1.2 line.
pub fn rhat_svg(report: &Report) -> Option<String> {
    let runs = all_runs(report);
    let pts: Vec<(f64, f64)> = runs.iter().flat_map(|(r, _)| r.rhat.iter().map(|c| (c.iteration as f64, c.max()))).collect();
    let xs = range(pts.iter().map(|p| p.0))?;
    let ys = range(pts.iter().map(|p| p.1))?;
    let ax = Axes::new((0.0, xs.1), (1.0f64.min(ys.0), ys.1.max(1.3)), false);
    let mut svg = Svg::new(W, H);
    ax.frame(&mut svg, "Potential scale reduction (max over parameters)", "iteration", "R-hat");
    for (r, _) in &runs {
        let p: Vec<(f64, f64)> = r
            .rhat
            .iter()
            .filter(|c| c.max().is_finite())
            .map(|c| (ax.sx(c.iteration as f64), ax.sy(c.max())))
            .collect();
        svg.polyline(&p, r#"stroke="black" stroke-opacity="0.7""#);
    }
    svg.line(ax.sx(0.0), ax.sy(1.2), ax.sx(xs.1), ax.sy(1.2), r##"stroke="#d62728" stroke-dasharray="4 3""##);
    Some(svg.finish())
}

fn color(t: f64) -> String {
    // blue → white → red
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let s = t / 0.5;
        (40.0 + 215.0 * s, 80.0 + 175.0 * s, 200.0 + 55.0 * s)
    } else {
        let s = (t - 0.5) / 0.5;
        (255.0 - 40.0 * s, 255.0 - 200.0 * s, 255.0 - 215.0 * s)
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

/// Log-field profiles (1-D) or heatmaps (2-D) of the final particles.
pub fn fields_svg(p: &ParticleDump) -> anyhow::Result<String> {
    if p.fields.is_empty() {
        bail!("particle set is empty");
    }
    let n = p.nx * p.ny;
    if p.fields.iter().any(|f| f.len() != n) {
        bail!("particle fields do not match the {}x{} grid", p.nx, p.ny);
    }
    if p.ny == 1 {
        let vals = p.fields.iter().flatten().chain(p.truth_field.iter().flatten()).copied();
        let ys = range(vals).context("fields are not finite")?;
        let ax = Axes::new((0.0, n as f64), ys, false);
        let mut svg = Svg::new(W, H);
        ax.frame(&mut svg, &format!("{} particles ({})", p.fields.len(), p.stage), "cell", "log field");
        for f in &p.fields {
            let pts: Vec<(f64, f64)> = f.iter().enumerate().map(|(i, v)| (ax.sx(i as f64 + 0.5), ax.sy(*v))).collect();
            svg.polyline(&pts, r##"stroke="#1f77b4" stroke-opacity="0.5""##);
        }
        if let Some(t) = &p.truth_field {
            let pts: Vec<(f64, f64)> = t.iter().enumerate().map(|(i, v)| (ax.sx(i as f64 + 0.5), ax.sy(*v))).collect();
            svg.polyline(&pts, r#"stroke="black" stroke-width="2.5""#);
        }
        return Ok(svg.finish());
    }

    let mut panels: Vec<(String, Vec<f64>)> = Vec::new();
    if let Some(t) = &p.truth_field {
        panels.push(("truth".into(), t.clone()));
    }
    let mean: Vec<f64> = (0..n).map(|i| p.fields.iter().map(|f| f[i]).sum::<f64>() / p.fields.len() as f64).collect();
    panels.push((format!("mean of {}", p.fields.len()), mean));
    for (i, f) in p.fields.iter().take(3).enumerate() {
        panels.push((format!("particle {i}"), f.clone()));
    }
    let (lo, hi) = range(panels.iter().flat_map(|(_, f)| f.iter().copied())).context("fields are not finite")?;
    let size = 220.0;
    let cell = size / p.nx.max(p.ny) as f64;
    let mut svg = Svg::new(20.0 + panels.len() as f64 * (size + 20.0), size + 70.0);
    for (k, (label, f)) in panels.iter().enumerate() {
        let x0 = 20.0 + k as f64 * (size + 20.0);
        let y0 = 40.0;
        svg.text(x0 + size / 2.0, 28.0, "middle", label);
        for j in 0..p.ny {
            for i in 0..p.nx {
                let t = if hi > lo { (f[j * p.nx + i] - lo) / (hi - lo) } else { 0.5 };
                // row j = 0 is the bottom edge
                let y = y0 + (p.ny - 1 - j) as f64 * cell;
                svg.rect(x0 + i as f64 * cell, y, cell + 0.05, cell + 0.05, &format!(r#"fill="{}""#, color(t)));
            }
        }
    }
    svg.text(20.0, size + 62.0, "start", &format!("{} particles; color range {} to {}", p.stage, num(lo), num(hi)));
    Ok(svg.finish())
}

/// Writes every figure the run directory supports and returns their paths.
pub fn render_dir(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let report = output::read_report(dir)?;
    let mut files = vec![("estimates.svg", Some(estimates_svg(&report)))];
    files.push(("thresholds.svg", thresholds_svg(&report)));
    files.push(("alphas.svg", alphas_svg(&report)));
    files.push(("rhat.svg", rhat_svg(&report)));
    let has_particles = matches!(
        report.config.method,
        Method::Postrisk | Method::SmcRare | Method::SmcPosterior
    );
    if has_particles {
        let particles = output::read_particles(dir)?;
        files.push(("fields.svg", Some(fields_svg(&particles)?)));
    }
    let mut written = Vec::new();
    for (name, svg) in files {
        if let Some(svg) = svg {
            let path = dir.join(name);
            fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_particles_are_an_error() {
        let p = ParticleDump {
            stage: "rare".into(),
            nx: 4,
            ny: 1,
            fields: Vec::new(),
            qois: Vec::new(),
            truth_field: None,
        };
        assert!(fields_svg(&p).is_err());
    }

    #[test]
    fn heatmap_is_deterministic() {
        let p = ParticleDump {
            stage: "rare".into(),
            nx: 3,
            ny: 2,
            fields: vec![vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]; 2],
            qois: vec![Some(1.0); 2],
            truth_field: Some(vec![1.0; 6]),
        };
        let a = fields_svg(&p).unwrap();
        assert_eq!(a, fields_svg(&p).unwrap());
        assert_eq!(a.matches("<rect").count(), 1 + 4 * 6);
    }

    #[test]
    fn numbers_are_compact() {
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(3500.0), "3500");
        assert_eq!(num(9.5e-6), "9.50e-6");
    }
}
