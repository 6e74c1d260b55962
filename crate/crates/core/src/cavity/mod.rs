//! Intracavity analysis: classical steady states, linearized fluctuations about
//! them, and the output spectral criteria `S_ij(ω)`.

mod classical;
mod linear;
mod spectra;
mod steady;

use num_complex::Complex64;
use thiserror::Error;

use crate::model::SystemKind;

pub use classical::{classical_equations, printed_cascaded_drift_matrix, CavityModel, Matrix10};
pub use linear::{eigenvalues, linearize, LinearizedModel, MARGINAL_REAL_PART};
pub use spectra::{closed_form_spectra, default_omega_grid, spectrum, thresholds, SpectrumSeries, Thresholds};
pub use steady::{
    above_threshold_candidates, below_threshold_candidate, find_steady_state, steady_state_roots, Branch,
    BranchHint, Candidate, SteadyState,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CavityError {
    #[error("{} is not a cavity system", .0.name())]
    NotCavity(SystemKind),
    #[error("analytic seeding needs symmetric concurrent pumping and losses")]
    NotSymmetric,
    #[error("no converged steady state on the requested branch")]
    NoRoot,
    #[error("no dynamically stable steady state; eigenvalues per root: {0:?}")]
    NoStableRoot(Vec<(Branch, Vec<Complex64>)>),
    #[error("linearization is unstable; eigenvalues {0:?}")]
    Unstable(Vec<Complex64>),
    #[error("A + iω is singular at ω = {0}")]
    Singular(f64),
    #[error("closed-form spectrum has a zero denominator")]
    ZeroDenominator,
    #[error("eigenvalue solver did not converge")]
    EigenSolver,
}
