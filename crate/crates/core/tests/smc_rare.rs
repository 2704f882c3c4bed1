mod common;

use common::Threads;
use postrisk_core::exec::Sequential;
use postrisk_core::math::normal_sf;
use postrisk_core::mcmc::{ChainState, KernelConfig};
use postrisk_core::problem::GaussianToy;
use postrisk_core::rare::{run_smc_rare, Direction, RareConfig, RareEventSpec, ThresholdSchedule};
use postrisk_core::rng::{standard_normal_vec, stream_rng};
use postrisk_core::smc::ParticleEnsemble;
use postrisk_core::Error;

fn prior_ensemble(n: usize, dim: usize, seed: u64) -> ParticleEnsemble {
    let mut rng = stream_rng(seed, 1 << 40);
    let particles = (0..n)
        .map(|_| ChainState {
            z: standard_normal_vec(&mut rng, dim),
            log_lik: 0.0,
            qoi: None,
        })
        .collect();
    ParticleEnsemble::equally_weighted(particles, 1.0)
}

fn geq(target: f64) -> RareEventSpec {
    RareEventSpec {
        direction: Direction::Geq,
        target,
    }
}

#[test]
fn gaussian_tail_fixed_schedule() {
    let toy = GaussianToy::prior(1).unwrap();
    let spec = geq(3.0);
    let cfg = RareConfig {
        schedule: ThresholdSchedule::Fixed {
            thresholds: (1..=6).map(|k| 0.5 * k as f64).collect(),
        },
        s_r: 10,
        kernel: KernelConfig::pcn_adaptive(0.8),
        ..RareConfig::default()
    };
    let runs = 10;
    let mean: f64 = (0..runs)
        .map(|s| run_smc_rare(&toy, &prior_ensemble(500, 1, s), &spec, &cfg, s, &Sequential).unwrap().estimate)
        .sum::<f64>()
        / runs as f64;
    let exact = normal_sf(3.0);
    assert!((mean / exact - 1.0).abs() < 0.2, "{mean} vs {exact}");
}

#[test]
fn budget_final_ensemble_and_records() {
    let toy = GaussianToy::prior(2).unwrap();
    let spec = geq(2.0);
    let thresholds = vec![0.5, 1.0, 1.5, 2.0];
    let cfg = RareConfig {
        schedule: ThresholdSchedule::Fixed {
            thresholds: thresholds.clone(),
        },
        s_r: 7,
        ..RareConfig::default()
    };
    let out = run_smc_rare(&toy, &prior_ensemble(100, 2, 3), &spec, &cfg, 3, &Sequential).unwrap();
    assert_eq!(out.thresholds(), thresholds);
    assert_eq!(out.counts.r_init, 100);
    assert_eq!(out.counts.r_steps, 100 * 4 * 7);
    assert_eq!(out.counts.g_total(), 0);
    assert!(out.ensemble.particles.iter().all(|p| p.qoi.unwrap() >= 2.0 && p.z[0] == p.qoi.unwrap()));
    let log_sum: f64 = out.levels.iter().map(|l| l.p_k.ln()).sum();
    assert!((out.log_estimate - log_sum).abs() < 1e-12);
    assert!((out.estimate - log_sum.exp()).abs() < 1e-15);
    assert!(out.estimate > 0.0 && out.estimate <= 1.0);
    let (p2, lvl) = out.partial_estimate(1.0).unwrap();
    assert_eq!(lvl.k, 2);
    assert!((p2 - out.levels[0].p_k * out.levels[1].p_k).abs() < 1e-15);
}

#[test]
fn adaptive_levels_keep_at_least_one_minus_gamma() {
    let toy = GaussianToy::prior(1).unwrap();
    let spec = geq(3.5);
    let gamma = 0.2;
    let cfg = RareConfig {
        schedule: ThresholdSchedule::Adaptive { gamma },
        s_r: 5,
        ..RareConfig::default()
    };
    let out = run_smc_rare(&toy, &prior_ensemble(200, 1, 9), &spec, &cfg, 9, &Sequential).unwrap();
    let t = out.thresholds();
    assert!(t.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(*t.last().unwrap(), 3.5);
    for l in &out.levels[..out.levels.len() - 1] {
        assert!(l.p_k >= 1.0 - gamma, "{}", l.p_k);
    }
}

#[test]
fn leq_direction_is_mirror_image() {
    let toy = GaussianToy::prior(1).unwrap();
    let spec = RareEventSpec {
        direction: Direction::Leq,
        target: -2.5,
    };
    let cfg = RareConfig {
        schedule: ThresholdSchedule::Adaptive { gamma: 0.3 },
        s_r: 8,
        ..RareConfig::default()
    };
    let runs = 20;
    let mean: f64 = (0..runs)
        .map(|s| run_smc_rare(&toy, &prior_ensemble(400, 1, s), &spec, &cfg, s, &Sequential).unwrap().estimate)
        .sum::<f64>()
        / runs as f64;
    let exact = normal_sf(2.5);
    assert!((mean / exact - 1.0).abs() < 0.25, "{mean} vs {exact}");
}

#[test]
fn death_is_reported_with_level() {
    let toy = GaussianToy::prior(1).unwrap();
    let spec = geq(50.0);
    let cfg = RareConfig {
        schedule: ThresholdSchedule::Fixed {
            thresholds: vec![0.0, 50.0],
        },
        s_r: 2,
        ..RareConfig::default()
    };
    match run_smc_rare(&toy, &prior_ensemble(50, 1, 0), &spec, &cfg, 0, &Sequential) {
        Err(Error::ParticleSystemDied { level, threshold }) => {
            assert_eq!(level, 2);
            assert_eq!(threshold, 50.0);
        }
        other => panic!("expected death, got {other:?}"),
    }
}

#[test]
fn thread_count_does_not_change_the_run() {
    let toy = GaussianToy::prior(3).unwrap();
    let spec = geq(2.5);
    let cfg = RareConfig {
        schedule: ThresholdSchedule::Adaptive { gamma: 0.1 },
        s_r: 4,
        ..RareConfig::default()
    };
    let init = prior_ensemble(96, 3, 4);
    let a = run_smc_rare(&toy, &init, &spec, &cfg, 4, &Sequential).unwrap();
    let b = run_smc_rare(&toy, &init, &spec, &cfg, 4, &Threads(3)).unwrap();
    assert_eq!(a.levels, b.levels);
    assert_eq!(a.ensemble.particles, b.ensemble.particles);
}
