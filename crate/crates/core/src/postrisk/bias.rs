use alloc::vec::Vec;

use super::report::RunRecord;
use super::run::{run_postrisk, PostRiskConfig};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::problem::ForwardProblem;
use crate::rare::ThresholdSchedule;
use crate::rng::derive_seed;

/// Paired runs: each adaptive-threshold run and a re-run on its frozen
/// thresholds with an independent seed.
#[derive(Debug, Clone)]
pub struct BiasProbe {
    pub adaptive: Vec<RunRecord>,
    pub rerun: Vec<RunRecord>,
    pub schedules: Vec<Vec<f64>>,
}

impl BiasProbe {
    pub fn adaptive_mean(&self) -> f64 {
        mean(&self.adaptive)
    }

    pub fn rerun_mean(&self) -> f64 {
        mean(&self.rerun)
    }
}

fn mean(runs: &[RunRecord]) -> f64 {
    runs.iter().map(|r| r.estimate).sum::<f64>() / runs.len() as f64
}

/// `config.rare.schedule` must be adaptive. Run `i` uses seeds
/// `derive_seed(master, 2i)` and `derive_seed(master, 2i + 1)`.
/// An adaptive run that dies has no schedule to freeze; its re-run is
/// recorded as a zero estimate.
pub fn adaptive_bias_probe<P, E>(
    problem: &P,
    config: &PostRiskConfig,
    n_runs: usize,
    master: u64,
    exec: &E,
) -> Result<BiasProbe>
where
    P: ForwardProblem + ?Sized,
    E: Executor,
{
    if n_runs < 2 {
        return Err(Error::invalid("n_runs must be at least 2"));
    }
    if !matches!(config.rare.schedule, ThresholdSchedule::Adaptive { .. }) {
        return Err(Error::invalid("the bias probe needs an adaptive schedule"));
    }
    let mut probe = BiasProbe {
        adaptive: Vec::with_capacity(n_runs),
        rerun: Vec::with_capacity(n_runs),
        schedules: Vec::with_capacity(n_runs),
    };
    for i in 0..n_runs {
        let seed_a = derive_seed(master, 2 * i as u64);
        let seed_b = derive_seed(master, 2 * i as u64 + 1);
        let mut a = run_postrisk(problem, config, seed_a, exec)?.record;
        a.rep = i;
        let thresholds = a.thresholds();
        let mut b = if a.died_at_level.is_none() {
            let mut fixed = config.clone();
            fixed.rare.schedule = ThresholdSchedule::Fixed {
                thresholds: thresholds.clone(),
            };
            fixed.intermediate.clear();
            run_postrisk(problem, &fixed, seed_b, exec)?.record
        } else {
            RunRecord {
                seed: seed_b,
                ..RunRecord::default()
            }
        };
        b.rep = i;
        probe.adaptive.push(a);
        probe.rerun.push(b);
        probe.schedules.push(thresholds);
    }
    Ok(probe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::problem::GaussianToy;
    use crate::rare::{Direction, RareConfig, RareEventSpec};
    use crate::smc::SmcPosteriorConfig;

    #[test]
    fn schedules_are_frozen_and_replayed() {
        let toy = GaussianToy::prior(1).unwrap();
        let cfg = PostRiskConfig {
            posterior: SmcPosteriorConfig {
                n_particles: 50,
                ..SmcPosteriorConfig::default()
            },
            rare: RareConfig {
                schedule: ThresholdSchedule::Adaptive { gamma: 0.5 },
                s_r: 5,
                ..RareConfig::default()
            },
            spec: RareEventSpec {
                direction: Direction::Geq,
                target: 2.0,
            },
            intermediate: Vec::new(),
        };
        let probe = adaptive_bias_probe(&toy, &cfg, 3, 11, &Sequential).unwrap();
        for ((a, b), s) in probe.adaptive.iter().zip(&probe.rerun).zip(&probe.schedules) {
            assert_eq!(&a.thresholds(), s);
            if b.died_at_level.is_none() {
                assert_eq!(&b.thresholds(), s);
            }
            assert_ne!(a.seed, b.seed);
        }
    }
}
