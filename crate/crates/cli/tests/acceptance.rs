//! Acceptance criteria 1–8. Each test prints one `criterion k: PASS|FAIL`
//! line before asserting, so `cargo test --test acceptance -- --nocapture`
//! doubles as a report.

use std::path::PathBuf;

use postrisk::config::{ExperimentConfig, TestCase};
use postrisk::experiment::{run_experiment, Report};
use postrisk_core::exec::Sequential;
use postrisk_core::fields::Grid1D;
use postrisk_core::forward::{solve_diffusion_1d, Sources1D};
use postrisk_core::math::normal_sf;
use postrisk_core::mcmc::{mh_step_tempered, propose_pcn, ChainState, Proposal};
use postrisk_core::postrisk::{run_postrisk, summarize_runs, RunRecord};
use postrisk_core::problem::{EvalCounts, GaussianToy};
use postrisk_core::rare::ThresholdSchedule;
use postrisk_core::rng::stream_rng;
use postrisk_core::smc::{cess, ess, systematic_resample_with, TemperingMode};

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::load(&path).unwrap()
}

fn run(cfg: &ExperimentConfig) -> Report {
    run_experiment(cfg, &Sequential).unwrap().report
}

fn verdict(k: u32, ok: bool, detail: String) {
    println!("criterion {k}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {k}: {detail}");
}

/// Mean, sample sd and standard error of the mean.
fn moments(v: &[f64]) -> (f64, f64, f64) {
    let s = summarize_runs(v).unwrap();
    let sd = s.sd.unwrap();
    (s.mean, sd, sd / (v.len() as f64).sqrt())
}

fn partial_estimates(runs: &[RunRecord]) -> Vec<f64> {
    runs.iter().map(|r| r.partial[0].estimate).collect()
}

#[test]
fn criterion_1_gaussian_tail() {
    let cfg = config("gaussian_toy.cfg");
    assert_eq!((cfg.posterior.n_particles, cfg.rare.s_r, cfg.reps), (1000, 10, 20));
    let start = std::time::Instant::now();
    let r = run(&cfg);
    let secs = start.elapsed().as_secs_f64();
    assert!(r.estimates.per_run.iter().all(|x| x.levels.len() == 30));
    let exact = normal_sf(4.0);
    let rel = (r.estimates.summary.mean - exact).abs() / exact;
    verdict(
        1,
        rel <= 0.15 && secs < 60.0,
        format!("mean {:.4e} vs {exact:.4e}, relative error {rel:.3} <= 0.15, {secs:.1} s", r.estimates.summary.mean),
    );
}

#[test]
fn criterion_2_prior_probabilities() {
    let mut cfg = config("flow1d_prior_mc.cfg");
    assert_eq!(cfg.mc_prior.samples, 10_000);
    let start = std::time::Instant::now();
    let p_star = run(&cfg).estimates.summary.mean;
    cfg.target.value = 9.5e-6;
    let p_star2 = run(&cfg).estimates.summary.mean;
    let secs = start.elapsed().as_secs_f64();
    let ok = (p_star - 0.23).abs() <= 0.02 && (p_star2 - 0.22).abs() <= 0.02 && secs < 60.0;
    verdict(
        2,
        ok,
        format!("P(R >= T*) = {p_star:.4} vs 0.23, P(R >= T**) = {p_star2:.4} vs 0.22, tolerance 0.02, {secs:.1} s"),
    );
}

#[test]
fn criterion_3_method_agreement() {
    let mut pr = config("flow1d_table1_row2.cfg");
    pr.reps = 10;
    assert_eq!((pr.posterior.n_particles, pr.posterior.s_p, pr.rare.s_r), (200, 20, 20));
    assert_eq!(pr.posterior.tempering, TemperingMode::Adaptive { cess_fraction: 0.9 });
    let pr_runs = run(&pr).estimates.per_run;
    let a = partial_estimates(&pr_runs);

    let mh = config("flow1d_table1_mh_tstar.cfg");
    assert_eq!(mh.data.truth_seed, pr.data.truth_seed);
    assert_eq!(mh.mh.config.g_per_chain(), 400_000);
    let b: Vec<f64> = run(&mh).estimates.per_run.iter().map(|r| r.estimate).collect();
    assert_eq!(b.len(), 10);

    let (ma, sa, sea) = moments(&a);
    let (mb, sb, seb) = moments(&b);
    let (cov_a, cov_b) = (sa / ma, sb / mb);
    let gap = (ma - mb).abs();
    let bound = 2.0 * (sea * sea + seb * seb).sqrt();
    let ok = gap <= bound && cov_a <= 0.5 && cov_b <= 0.5;
    verdict(
        3,
        ok,
        format!(
            "PostRisk mean {ma:.3e} COV {cov_a:.3}; MH mean {mb:.3e} COV {cov_b:.3}; |diff| {gap:.2e} vs 2 se {bound:.2e}; COV bound 0.5"
        ),
    );
}

#[test]
fn criterion_4_deep_tail() {
    let pr = config("flow1d_table1_row1.cfg");
    let mut pr10 = pr.clone();
    pr10.reps = 10;
    let est: Vec<f64> = run(&pr10).estimates.per_run.iter().map(|r| r.estimate).collect();
    let positive = est.iter().filter(|e| **e > 0.0).count();

    let mh = config("flow1d_table1_mh_tstarstar.cfg");
    assert_eq!(mh.target.value, pr.target.value);
    assert_eq!(mh.mh.config.g_per_chain(), 550_000);
    let mh_est: Vec<f64> = run(&mh).estimates.per_run.iter().map(|r| r.estimate).collect();
    let mh_zero = mh_est.iter().filter(|e| **e == 0.0).count();
    verdict(
        4,
        positive >= 9 && mh_zero == mh_est.len(),
        format!("PostRisk positive in {positive}/10 runs (need >= 9); MH zero in {mh_zero}/{} runs", mh_est.len()),
    );
}

#[test]
fn criterion_5_adaptive_bias() {
    let cfg = config("flow1d_bias_probe.cfg");
    assert_eq!((cfg.posterior.n_particles, cfg.reps), (40, 10));
    let r = run(&cfg);
    let adaptive = r.estimates.summary.mean;
    let rerun = r.rerun.as_ref().unwrap().summary.mean;
    let factor = adaptive / rerun;
    verdict(
        5,
        factor >= 5.0,
        format!("adaptive mean {adaptive:.3e}, re-run mean {rerun:.3e}, factor {factor:.1} (need >= 5)"),
    );
}

#[test]
fn criterion_6_budgets() {
    // flow1d baseline: the T** run of the row-1 configuration
    let mut cfg = config("flow1d_table1_row1.cfg");
    cfg.reps = 1;
    let rec = &run(&cfg).estimates.per_run[0];
    let k_p = rec.alphas.len() as u64;
    let g1 = rec.counts.g_steps;
    let ok1 = g1 == 55_000;

    // transport2d posterior configuration: N = 40, K_P = 100, s_P = 100,
    // K_R = 38, s_R = 10, ss_R = 100. The counters do not depend on the
    // forward model, so the schedule runs on a one-dimensional stand-in.
    let mut cfg2 = config("transport2d_posterior.cfg");
    cfg2.posterior.tempering = TemperingMode::Fixed {
        alphas: (1..=100).map(|k| k as f64 / 100.0).collect(),
    };
    cfg2.test_case = TestCase::GaussianToy;
    let toy = GaussianToy::with_observation(1, 0.0, 1.0).unwrap();
    let pr = cfg2.postrisk_config().unwrap();
    match &pr.rare.schedule {
        ThresholdSchedule::Fixed { thresholds } => assert_eq!(thresholds.len(), 38),
        other => panic!("expected a fixed schedule, got {other:?}"),
    }
    let run2 = run_postrisk(&toy, &pr, 1, &Sequential).unwrap();
    let c = run2.record.counts;
    let ok2 = run2.record.died_at_level.is_none() && c.g_steps == 1_920_000 && c.r_steps == 15_200;

    verdict(
        6,
        ok1 && ok2,
        format!(
            "flow1d baseline G = {g1} with K_P = {k_p} (expected 55,000); transport2d posterior G = {}, R = {} (expected 1,920,000 and 15,200)",
            c.g_steps, c.r_steps
        ),
    );
}

#[test]
fn criterion_7_variance_reduction_desk() {
    let smc = run(&config("transport2d_prior_desk.cfg"));
    let mc = run(&config("transport2d_prior_desk_mc.cfg"));
    let r_smc: Vec<u64> = smc.estimates.per_run.iter().map(|r| r.counts.r_total()).collect();
    assert!(r_smc.iter().all(|r| *r == mc.config.mc_prior.samples as u64), "R budgets differ: {r_smc:?}");
    let (s, m) = (&smc.estimates.summary, &mc.estimates.summary);
    assert_eq!((s.n, m.n), (10, 10));
    let (cs, cm) = (s.cov.unwrap_or(f64::INFINITY), m.cov.unwrap_or(f64::INFINITY));
    verdict(
        7,
        cs < cm && s.zeros == 0,
        format!(
            "desk scale, not paper scale: PostRisk mean {:.3e} COV {cs:.3} min {:.2e} zeros {}; Monte Carlo mean {:.3e} COV {cm:.3} min {:.2e} zeros {}",
            s.mean, s.min, s.zeros, m.mean, m.min, m.zeros
        ),
    );
}

#[test]
fn criterion_8_unit_identities() {
    let mut notes = Vec::new();
    let mut ok = true;

    let n = 50;
    let w = vec![1.0 / n as f64; n];
    let ones = vec![1.0; n];
    let uniform = (ess(&w, &ones).unwrap() - n as f64).abs() < 1e-9 && (cess(&w, &ones).unwrap() - n as f64).abs() < 1e-9;
    ok &= uniform;
    notes.push(format!("ESS = CESS = N: {uniform}"));

    let weights = [0.05, 0.3, 0.15, 0.25, 0.2, 0.05];
    let mut within = true;
    for u in [0.0, 0.13, 0.5, 0.77, 0.999] {
        let idx = systematic_resample_with(&weights, u);
        for (i, wi) in weights.iter().enumerate() {
            let count = idx.iter().filter(|j| **j == i).count() as f64;
            within &= (count - weights.len() as f64 * wi).abs() < 1.0 + 1e-12;
        }
    }
    ok &= within;
    notes.push(format!("resample counts within 1 of N W: {within}"));

    let mut rng = stream_rng(17, 0);
    let steps = 100_000;
    let (mut z, mut out) = ([0.0; 2], [0.0; 2]);
    let (mut s1, mut s2) = ([0.0; 2], [0.0; 2]);
    for _ in 0..steps {
        propose_pcn(&z, 0.5, &mut rng, &mut out);
        z = out;
        for k in 0..2 {
            s1[k] += z[k];
            s2[k] += z[k] * z[k];
        }
    }
    let phi = 0.75f64.sqrt();
    let se_mean = ((1.0 + phi) / (1.0 - phi) / steps as f64).sqrt();
    let se_var = (2.0 * (1.0 + phi * phi) / (1.0 - phi * phi) / steps as f64).sqrt();
    let pcn = (0..2).all(|k| {
        let m = s1[k] / steps as f64;
        let v = s2[k] / steps as f64 - m * m;
        m.abs() < 3.0 * se_mean && (v - 1.0).abs() < 3.0 * se_var
    });
    ok &= pcn;
    notes.push(format!("pCN preserves N(0,1) within 3 se: {pcn}"));

    let toy = GaussianToy::with_observation(1, 1.5, 0.8).unwrap();
    let (m, sd) = toy.posterior_moments();
    let mut counts = EvalCounts::default();
    let mut state = ChainState::evaluate(&toy, vec![0.0], false, &mut counts).unwrap();
    let prop = Proposal::GaussianWalk { scales: vec![1.2] };
    let mut rng = stream_rng(23, 0);
    let mut scratch = Vec::new();
    let (mut a1, mut a2) = (0.0, 0.0);
    let steps = 1_000_000;
    for _ in 0..steps {
        mh_step_tempered(&toy, &mut state, &prop, 1.0, None, &mut rng, &mut counts, &mut scratch);
        a1 += state.z[0];
        a2 += state.z[0] * state.z[0];
    }
    let em = a1 / steps as f64;
    let esd = (a2 / steps as f64 - em * em).sqrt();
    let conj = (em - m).abs() < 0.02 * m.abs() && (esd - sd).abs() < 0.02 * sd;
    ok &= conj;
    notes.push(format!("conjugate MH mean {em:.4} vs {m:.4}, sd {esd:.4} vs {sd:.4}: {conj}"));

    let grid = Grid1D::new(40, 1.0).unwrap();
    let theta: f64 = 2e-5;
    let sources = Sources1D {
        positions: vec![0.51],
        strengths: vec![0.001],
    };
    let h = solve_diffusion_1d(&grid, &vec![theta.ln(); 40], &sources).unwrap();
    let xc = grid.cell_centers()[grid.cell_containing(0.51).unwrap()];
    let s = 0.001 * grid.cell_width();
    let worst = grid
        .cell_centers()
        .iter()
        .zip(&h)
        .map(|(x, hi)| {
            let exact = if *x <= xc { s / theta * x * (1.0 - xc) } else { s / theta * xc * (1.0 - x) };
            (hi - exact).abs() / exact.abs()
        })
        .fold(0.0, f64::max);
    let fd = worst <= 1e-10;
    ok &= fd;
    notes.push(format!("FD vs analytic max relative error {worst:.1e}: {fd}"));

    verdict(8, ok, notes.join("; "));
}
