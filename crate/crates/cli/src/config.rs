//! Experiment configuration files.
//!
//! Configs are TOML documents with a `.cfg` extension. Every section is
//! optional and falls back to the defaults of the corresponding core type.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use postrisk_core::mcmc::{Direction, KernelConfig};
use postrisk_core::postrisk::{MhConfig, PostRiskConfig};
use postrisk_core::problem::{Flow1dSetup, Transport2dSetup};
use postrisk_core::rare::{
    fixed_log_schedule, log_then_linear_schedule, RareConfig, RareEventSpec, ThresholdSchedule,
};
use postrisk_core::smc::SmcPosteriorConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestCase {
    Flow1d,
    Transport2d,
    GaussianToy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Postrisk,
    SmcPosterior,
    SmcRare,
    Mh,
    McPrior,
    /// Adaptive-threshold runs paired with re-runs on their frozen schedules.
    BiasProbe,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Postrisk => "postrisk",
            Method::SmcPosterior => "smc-posterior",
            Method::SmcRare => "smc-rare",
            Method::Mh => "mh",
            Method::McPrior => "mc-prior",
            Method::BiasProbe => "bias-probe",
        }
    }

    /// Whether the method conditions on data when the case has any.
    pub fn uses_data(self) -> bool {
        !matches!(self, Method::SmcRare | Method::McPrior)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    /// Condition on a synthetic data set; `false` gives the prior problem.
    pub use_data: bool,
    pub truth_seed: u64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            use_data: true,
            truth_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToySetup {
    pub dim: usize,
    /// Observation of the first coordinate; absent for the prior.
    pub observation: Option<f64>,
    pub noise_sd: f64,
}

impl Default for ToySetup {
    fn default() -> Self {
        Self {
            dim: 1,
            observation: None,
            noise_sd: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetConfig {
    pub direction: Direction,
    pub value: f64,
    /// Less extreme thresholds read off the same runs.
    #[serde(default)]
    pub intermediate: Vec<f64>,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self {
            direction: Direction::Geq,
            value: 4.0,
            intermediate: Vec::new(),
        }
    }
}

impl TargetConfig {
    pub fn spec(&self) -> RareEventSpec {
        RareEventSpec {
            direction: self.direction,
            target: self.value,
        }
    }
}

/// Threshold schedule as written in a config; resolved against the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum ScheduleSpec {
    Adaptive { gamma: f64 },
    /// Logarithmic from `first` to the target in `levels` levels.
    Log { first: f64, levels: usize },
    /// Logarithmic from `first` to `pivot`, then steps of `step`.
    LogThenLinear {
        first: f64,
        pivot: f64,
        log_levels: usize,
        step: f64,
    },
    List { thresholds: Vec<f64> },
}

impl ScheduleSpec {
    pub fn resolve(&self, target: f64) -> anyhow::Result<ThresholdSchedule> {
        Ok(match self {
            ScheduleSpec::Adaptive { gamma } => ThresholdSchedule::Adaptive { gamma: *gamma },
            ScheduleSpec::Log { first, levels } => ThresholdSchedule::Fixed {
                thresholds: fixed_log_schedule(*first, target, *levels)?,
            },
            ScheduleSpec::LogThenLinear {
                first,
                pivot,
                log_levels,
                step,
            } => ThresholdSchedule::Fixed {
                thresholds: log_then_linear_schedule(*first, *pivot, *log_levels, *step, target)?,
            },
            ScheduleSpec::List { thresholds } => ThresholdSchedule::Fixed {
                thresholds: thresholds.clone(),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RareSection {
    pub schedule: ScheduleSpec,
    pub s_r: usize,
    pub ss_r: Option<usize>,
    pub kernel: KernelConfig,
    pub max_levels: usize,
}

impl Default for RareSection {
    fn default() -> Self {
        let d = RareConfig::default();
        Self {
            schedule: ScheduleSpec::Adaptive { gamma: 0.05 },
            s_r: d.s_r,
            ss_r: d.ss_r,
            kernel: d.kernel,
            max_levels: d.max_levels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MhSection {
    #[serde(flatten)]
    pub config: MhConfig,
    /// Report every chain as its own estimate instead of pooling them.
    pub split_chains: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McPriorConfig {
    pub samples: usize,
}

impl Default for McPriorConfig {
    fn default() -> Self {
        Self { samples: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub label: String,
    pub test_case: TestCase,
    pub method: Method,
    pub seed: u64,
    pub reps: usize,
    /// Worker threads; 1 runs everything on the calling thread.
    pub threads: usize,
    pub out: Option<PathBuf>,
    pub data: DataConfig,
    pub target: TargetConfig,
    pub flow1d: Flow1dSetup,
    pub transport2d: Transport2dSetup,
    pub gaussian_toy: ToySetup,
    pub posterior: SmcPosteriorConfig,
    pub rare: RareSection,
    pub mh: MhSection,
    pub mc_prior: McPriorConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            label: String::new(),
            test_case: TestCase::GaussianToy,
            method: Method::Postrisk,
            seed: 1,
            reps: 1,
            threads: 1,
            out: None,
            data: DataConfig::default(),
            target: TargetConfig::default(),
            flow1d: Flow1dSetup::default(),
            transport2d: Transport2dSetup::default(),
            gaussian_toy: ToySetup::default(),
            posterior: SmcPosteriorConfig::default(),
            rare: RareSection::default(),
            mh: MhSection::default(),
            mc_prior: McPriorConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg = Self::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.reps == 0 {
            bail!("reps must be at least 1");
        }
        if self.threads == 0 {
            bail!("threads must be at least 1");
        }
        if self.rare.ss_r == Some(0) {
            bail!("ss_r must be at least 1 when set");
        }
        if self.method == Method::BiasProbe {
            if !matches!(self.rare.schedule, ScheduleSpec::Adaptive { .. }) {
                bail!("bias-probe needs an adaptive threshold schedule");
            }
            if self.reps < 2 {
                bail!("bias-probe needs at least two repetitions");
            }
        }
        if self.method == Method::Mh {
            self.mh.config.validate()?;
        }
        let spec = self.target.spec();
        self.rare_config()?.validate(&spec)?;
        if !self.target.intermediate.is_empty() && !matches!(self.rare.schedule, ScheduleSpec::Adaptive { .. }) {
            for &t in &self.target.intermediate {
                if !spec.direction.satisfies(spec.target, t) || t == spec.target {
                    bail!("intermediate threshold {t} is not less extreme than the target");
                }
            }
        }
        Ok(())
    }

    pub fn rare_config(&self) -> anyhow::Result<RareConfig> {
        Ok(RareConfig {
            schedule: self.rare.schedule.resolve(self.target.value)?,
            s_r: self.rare.s_r,
            ss_r: self.rare.ss_r,
            kernel: self.rare.kernel.clone(),
            max_levels: self.rare.max_levels,
        })
    }

    pub fn postrisk_config(&self) -> anyhow::Result<PostRiskConfig> {
        Ok(PostRiskConfig {
            posterior: self.posterior.clone(),
            rare: self.rare_config()?,
            spec: self.target.spec(),
            intermediate: self.target.intermediate.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::parse(&cfg.to_text().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let cfg = ExperimentConfig::parse("test_case = \"gaussian-toy\"\nmethod = \"mc-prior\"\n").unwrap();
        assert_eq!(cfg.method, Method::McPrior);
        assert_eq!(cfg.posterior, SmcPosteriorConfig::default());
    }

    #[test]
    fn schedules_resolve() {
        let s = ScheduleSpec::LogThenLinear {
            first: 3500.0,
            pivot: 100.0,
            log_levels: 30,
            step: 5.0,
        };
        match s.resolve(60.0).unwrap() {
            ThresholdSchedule::Fixed { thresholds } => assert_eq!(thresholds.len(), 38),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(ExperimentConfig::parse("reps = 0").is_err());
        assert!(ExperimentConfig::parse("[rare]\nss_r = 0").is_err());
        assert!(ExperimentConfig::parse("method = \"bias-probe\"\nreps = 5\n[rare.schedule]\nmode = \"log\"\nfirst = 1.0\nlevels = 3").is_err());
        assert!(ExperimentConfig::parse("unknown_key = 1").is_err());
    }
}
