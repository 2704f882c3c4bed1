use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Which stage of the combined method produced an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Posterior,
    Rare,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Posterior => f.write_str("posterior"),
            Stage::Rare => f.write_str("rare-event"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("symmetric eigendecomposition failed: {0}")]
    Eigen(String),

    #[error(
        "observation covariance block is singular; increase noise_sd or add diagonal jitter (>= 1e-10)"
    )]
    SingularObservationBlock,

    #[error("linear system is singular (non-positive pivot at row {row})")]
    SingularSystem { row: usize },

    #[error("flow solution violates mass balance: relative residual {residual:e}")]
    MassBalance { residual: f64 },

    #[error("transport exceeded the maximum of {max_steps} time steps")]
    MaxStepsExceeded { max_steps: usize },

    #[error("forward model returned a non-finite value")]
    NonFinite,

    #[error("all particle weights vanished at iteration {iteration}")]
    DegenerateEnsemble { iteration: usize },

    #[error("particle system died at level {level}: no particle satisfies threshold {threshold:e}")]
    ParticleSystemDied { level: usize, threshold: f64 },

    #[error("threshold sequence did not reach the target within {levels} levels")]
    LevelLimit { levels: usize },

    #[error("{stage} stage: {source}")]
    Stage { stage: Stage, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn in_stage(self, stage: Stage) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}
