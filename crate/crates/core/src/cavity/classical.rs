use num_complex::Complex64;

use super::CavityError;
use crate::model::{SystemKind, SystemSpec};
use crate::ppsde::{interaction_drift, noise_map, Interaction, PhaseSpacePoint, N_NOISES, N_VARS};

pub type Matrix10 = [[Complex64; N_VARS]; N_VARS];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Mean-field (classical) equations of a driven, damped cavity system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityModel {
    pub kind: SystemKind,
    pub interaction: Interaction,
    pub chi: [f64; 2],
    pub eps: [Complex64; 2],
    /// Signal losses `γ_1..γ_3`.
    pub loss_a: [f64; 3],
    /// Pump losses `κ_1, κ_2`.
    pub loss_b: [f64; 2],
}

/// The classical field equations of a cavity spec (noise terms dropped).
pub fn classical_equations(spec: &SystemSpec) -> Result<CavityModel, CavityError> {
    if !spec.kind().is_cavity() {
        return Err(CavityError::NotCavity(spec.kind()));
    }
    let (e1, e2) = spec.drives().expect("cavity kinds carry drives");
    let (loss_a, loss_b) = spec.losses().expect("cavity kinds carry losses");
    Ok(CavityModel {
        kind: spec.kind(),
        interaction: Interaction::of(spec.kind()),
        chi: [spec.chi1(), spec.chi2()],
        eps: [e1, e2],
        loss_a,
        loss_b,
    })
}

impl CavityModel {
    /// `d(α1, α2, α3)/dt` and `d(β1, β2)/dt` at the given classical fields.
    pub fn rates(&self, a: &[Complex64; 3], b: &[Complex64; 2]) -> ([Complex64; 3], [Complex64; 2]) {
        let d = self.doubled_drift(&PhaseSpacePoint::classical(*a, *b));
        ([d[0], d[2], d[4]], [d[6], d[8]])
    }

    /// Largest magnitude of the classical rates.
    pub fn residual(&self, a: &[Complex64; 3], b: &[Complex64; 2]) -> f64 {
        let (ra, rb) = self.rates(a, b);
        ra.iter().chain(&rb).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Drift of the doubled positive-P variables.
    pub fn doubled_drift(&self, p: &PhaseSpacePoint) -> [Complex64; N_VARS] {
        let mut d = interaction_drift(self.interaction, self.chi[0], self.chi[1], p);
        for v in 0..6 {
            d[v] -= self.loss_a[v / 2] * p.vars[v];
        }
        for j in 0..2 {
            d[6 + 2 * j] += self.eps[j] - self.loss_b[j] * p.vars[6 + 2 * j];
            d[7 + 2 * j] += self.eps[j].conj() - self.loss_b[j] * p.vars[7 + 2 * j];
        }
        d
    }

    /// `A[i][k] = ∂ drift_i / ∂ var_k` over `(α1, α1⁺, …, β2⁺)`.
    pub fn jacobian(&self, p: &PhaseSpacePoint) -> Matrix10 {
        let [a1, a1p, a2, a2p, a3, a3p, b1, b1p, b2, b2p] = p.vars;
        let [c1, c2] = self.chi;
        let mut m = [[ZERO; N_VARS]; N_VARS];
        // variable indices
        const A1: usize = 0;
        const A1P: usize = 1;
        const A2: usize = 2;
        const A2P: usize = 3;
        const A3: usize = 4;
        const A3P: usize = 5;
        const B1: usize = 6;
        const B1P: usize = 7;
        const B2: usize = 8;
        const B2P: usize = 9;
        // first process, shared by both schemes
        m[A1][A2P] = c1 * b1;
        m[A1][B1] = c1 * a2p;
        m[A1P][A2] = c1 * b1p;
        m[A1P][B1P] = c1 * a2;
        m[A2][A1P] = c1 * b1;
        m[A2][B1] = c1 * a1p;
        m[A2P][A1] = c1 * b1p;
        m[A2P][B1P] = c1 * a1;
        m[B1][A1] = -c1 * a2;
        m[B1][A2] = -c1 * a1;
        m[B1P][A1P] = -c1 * a2p;
        m[B1P][A2P] = -c1 * a1p;
        match self.interaction {
            Interaction::Cascaded => {
                m[A2][A3] = -c2 * b2p;
                m[A2][B2P] = -c2 * a3;
                m[A2P][A3P] = -c2 * b2;
                m[A2P][B2] = -c2 * a3p;
                m[A3][A2] = c2 * b2;
                m[A3][B2] = c2 * a2;
                m[A3P][A2P] = c2 * b2p;
                m[A3P][B2P] = c2 * a2p;
                m[B2][A2] = -c2 * a3p;
                m[B2][A3P] = -c2 * a2;
                m[B2P][A2P] = -c2 * a3;
                m[B2P][A3] = -c2 * a2p;
            }
            Interaction::Concurrent => {
                m[A2][A3P] = c2 * b2;
                m[A2][B2] = c2 * a3p;
                m[A2P][A3] = c2 * b2p;
                m[A2P][B2P] = c2 * a3;
                m[A3][A2P] = c2 * b2;
                m[A3][B2] = c2 * a2p;
                m[A3P][A2] = c2 * b2p;
                m[A3P][B2P] = c2 * a2;
                m[B2][A2] = -c2 * a3;
                m[B2][A3] = -c2 * a2;
                m[B2P][A2P] = -c2 * a3p;
                m[B2P][A3P] = -c2 * a2p;
            }
        }
        for v in 0..6 {
            m[v][v] -= self.loss_a[v / 2];
        }
        for v in 6..10 {
            m[v][v] -= self.loss_b[(v - 6) / 2];
        }
        m
    }

    /// `D = B Bᵀ` with `B` the positive-P noise matrix at `p`. The concurrent
    /// cavity reuses the concurrent travelling-wave noise map.
    pub fn diffusion(&self, p: &PhaseSpacePoint) -> Matrix10 {
        let b = noise_map(self.interaction, self.chi[0], self.chi[1], p);
        let mut d = [[ZERO; N_VARS]; N_VARS];
        for i in 0..N_VARS {
            for j in 0..N_VARS {
                d[i][j] = (0..N_NOISES).map(|k| b[i][k] * b[j][k]).sum();
            }
        }
        d
    }
}

/// The cascaded-cavity drift matrix entry by entry as published, at a classical
/// steady state. Rows 5 and 6 carry `χ2α2`, `χ2α2*` in the `δβ1` column; the
/// Jacobian puts them in the `δβ2` column. The two agree whenever `α2 = 0`.
pub fn printed_cascaded_drift_matrix(model: &CavityModel, a: &[Complex64; 3], b: &[Complex64; 2]) -> Matrix10 {
    let [g1, g2, g3] = model.loss_a;
    let [k1, k2] = model.loss_b;
    let [c1, c2] = model.chi;
    let z = ZERO;
    let r = |x: f64| Complex64::new(x, 0.0);
    let (a1, a2, a3) = (a[0], a[1], a[2]);
    let (b1, b2) = (b[0], b[1]);
    let (a1c, a2c, a3c, b1c, b2c) = (a1.conj(), a2.conj(), a3.conj(), b1.conj(), b2.conj());
    let a_1: [[Complex64; 6]; 10] = [
        [r(-g1), z, z, c1 * b1, z, z],
        [z, r(-g1), c1 * b1c, z, z, z],
        [z, c1 * b1, r(-g2), z, -c2 * b2c, z],
        [c1 * b1c, z, z, r(-g2), z, -c2 * b2],
        [z, z, c2 * b2, z, r(-g3), z],
        [z, z, z, c2 * b2c, z, r(-g3)],
        [-c1 * a2, z, -c1 * a1, z, z, z],
        [z, -c1 * a2c, z, -c1 * a1c, z, z],
        [z, z, -c2 * a3c, z, z, -c2 * a2],
        [z, z, z, -c2 * a3, -c2 * a2c, z],
    ];
    let a_2: [[Complex64; 4]; 10] = [
        [c1 * a2c, z, z, z],
        [z, c1 * a2, z, z],
        [c1 * a1c, z, z, -c2 * a3],
        [z, c1 * a1, -c2 * a3c, z],
        [c2 * a2, z, z, z],
        [z, c2 * a2c, z, z],
        [r(-k1), z, z, z],
        [z, r(-k1), z, z],
        [z, z, r(-k2), z],
        [z, z, z, r(-k2)],
    ];
    let mut m = [[ZERO; N_VARS]; N_VARS];
    for i in 0..N_VARS {
        m[i][..6].copy_from_slice(&a_1[i]);
        m[i][6..].copy_from_slice(&a_2[i]);
    }
    m
}
