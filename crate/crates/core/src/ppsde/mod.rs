//! Positive-P stochastic integration of the travelling-wave systems and the
//! cascaded cavity.

mod charges;
mod ensemble;
mod noise;
mod system;

use thiserror::Error;

use crate::model::SystemKind;

pub use charges::{charge_labels, charge_values, conserved_charges, ChargeReport};
pub use ensemble::{
    run_ensemble, ComplexEstimate, EnsembleConfig, EnsembleResult, EnsembleSample, Estimate,
    GridKind, IntegrationGrid, BLOCK_SIZE, DEFAULT_STEP,
};
pub use noise::NoiseStream;
pub use system::{
    drift_and_noise, interaction_drift, noise_map, step_em, Drift, Interaction, NoiseMap,
    PhaseSpacePoint, SdeSystem, N_NOISES, N_VARS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdeError {
    #[error("{0:?} has no stochastic system")]
    UnsupportedKind(SystemKind),
    #[error("non-finite phase-space component")]
    NonFinite,
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("invalid ensemble configuration: {0}")]
    BadConfig(String),
    #[error("sample point {0} is not on the integration grid")]
    SampleOffGrid(f64),
    #[error(
        "{diverged} of {attempted} trajectories (of {n_traj} requested) left |z| <= {bound:e}, \
         above the allowed fraction {max_fraction}; first: {first:?} (trajectory, step)"
    )]
    TooManyDiverged {
        diverged: usize,
        attempted: usize,
        n_traj: usize,
        max_fraction: f64,
        bound: f64,
        first: Option<(usize, usize)>,
    },
    #[error("only {0} trajectories survived; at least 2 are needed")]
    TooFewTrajectories(usize),
}
