//! Experiment runner for the `twinchi2` binary: configuration, figure presets,
//! route dispatch and CSV rendering.

pub mod config;
pub mod presets;
mod run;

use thiserror::Error;
use twinchi2_core::analytic::AnalyticError;
use twinchi2_core::cavity::CavityError;
use twinchi2_core::model::{MomentError, SpecError};
use twinchi2_core::ppsde::SdeError;

pub use config::{ExperimentConfig, Pairs, Route};
pub use presets::{preset, PRESETS};
pub use run::{run, Output, RunOptions, Verdict};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("system: {0}")]
    Spec(#[from] SpecError),
    #[error("analytic: {0}")]
    Analytic(#[from] AnalyticError),
    #[error("moments: {0}")]
    Moment(#[from] MomentError),
    #[error("sde: {0}")]
    Sde(#[from] SdeError),
    #[error("cavity: {0}")]
    Cavity(#[from] CavityError),
    #[error("unknown preset `{0}`; known: fig1 .. fig8")]
    UnknownPreset(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 validation, 3 divergence abort, 4 unstable linearization, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Spec(_) | CliError::UnknownPreset(_) => 2,
            CliError::Analytic(AnalyticError::Integration(_)) => 1,
            CliError::Analytic(_) => 2,
            CliError::Sde(SdeError::TooManyDiverged { .. } | SdeError::TooFewTrajectories(_)) => 3,
            CliError::Sde(
                SdeError::BadGrid(_)
                | SdeError::BadConfig(_)
                | SdeError::SampleOffGrid(_)
                | SdeError::UnsupportedKind(_),
            ) => 2,
            CliError::Cavity(CavityError::Unstable(_) | CavityError::NoStableRoot(_)) => 4,
            CliError::Cavity(CavityError::NotCavity(_) | CavityError::NotSymmetric) => 2,
            _ => 1,
        }
    }
}

/// Numeric CSV field with 12 significant digits.
pub fn format_number(v: f64) -> String {
    format!("{v:.11e}")
}
