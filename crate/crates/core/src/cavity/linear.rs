use nalgebra::SMatrix;
use num_complex::Complex64;

use super::classical::{classical_equations, CavityModel, Matrix10};
use super::steady::SteadyState;
use super::CavityError;
use crate::model::SystemSpec;
use crate::ppsde::N_VARS;

pub(crate) type CMatrix = SMatrix<Complex64, N_VARS, N_VARS>;

/// Eigenvalues with real part above this are reported as marginal.
pub const MARGINAL_REAL_PART: f64 = -1e-3;

/// Fluctuation dynamics `dδx = A δx dt + B dW` about a steady state.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedModel {
    pub steady: SteadyState,
    pub a: Matrix10,
    pub d: Matrix10,
    /// Sorted by decreasing real part.
    pub eigenvalues: [Complex64; N_VARS],
    /// No eigenvalue with positive real part, up to rounding.
    pub stable: bool,
    /// Some eigenvalue lies within `|MARGINAL_REAL_PART|` of the imaginary axis.
    pub marginal: bool,
}

impl LinearizedModel {
    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues[0].re
    }

    pub(crate) fn drift_matrix(&self) -> CMatrix {
        to_matrix(&self.a)
    }

    pub(crate) fn diffusion_matrix(&self) -> CMatrix {
        to_matrix(&self.d)
    }
}

pub(crate) fn to_matrix(m: &Matrix10) -> CMatrix {
    CMatrix::from_fn(|i, j| m[i][j])
}

/// Eigenvalues of a complex 10×10 matrix from its Schur form.
///
/// The QR iteration occasionally stalls on an exactly singular matrix; it is
/// then rerun on `M + sI` and the shift taken back off.
pub fn eigenvalues(m: &Matrix10) -> Result<[Complex64; N_VARS], CavityError> {
    let base = to_matrix(m);
    let scale = base.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for shift in [0.0, 0.5, -0.75] {
        let s = Complex64::new(shift * scale, 0.0);
        let Some(schur) = nalgebra::Schur::try_new(base + CMatrix::identity() * s, f64::EPSILON, 10_000) else {
            continue;
        };
        let (_, t) = schur.unpack();
        let mut ev = [Complex64::new(0.0, 0.0); N_VARS];
        for (k, e) in ev.iter_mut().enumerate() {
            *e = t[(k, k)] - s;
        }
        if ev.iter().all(|z| z.is_finite()) {
            ev.sort_by(|x, y| y.re.total_cmp(&x.re));
            return Ok(ev);
        }
    }
    Err(CavityError::EigenSolver)
}

pub(crate) fn linearize_model(model: &CavityModel, ss: &SteadyState) -> Result<LinearizedModel, CavityError> {
    let p = ss.point();
    let a = model.jacobian(&p);
    let d = model.diffusion(&p);
    let eigenvalues = eigenvalues(&a)?;
    // a symmetry-protected zero eigenvalue comes out at rounding level
    let norm = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = 1e-9 * norm.max(1.0);
    let max_re = eigenvalues[0].re;
    Ok(LinearizedModel {
        steady: *ss,
        a,
        d,
        eigenvalues,
        stable: max_re <= tol,
        marginal: max_re > MARGINAL_REAL_PART,
    })
}

/// Drift and diffusion matrices at `ss`, with the stability eigenvalues.
pub fn linearize(spec: &SystemSpec, ss: &SteadyState) -> Result<LinearizedModel, CavityError> {
    linearize_model(&classical_equations(spec)?, ss)
}
