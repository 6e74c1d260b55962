use num_complex::Complex64;

use super::{IntegrationGrid, SdeError};
use crate::model::{SystemKind, SystemSpec};

/// Number of phase-space variables per trajectory.
pub const N_VARS: usize = 10;
/// Number of real Gaussian noises driving each system.
pub const N_NOISES: usize = 8;

pub type Drift = [Complex64; N_VARS];
/// Row `v` maps the real deviates `η_1..η_8` into the increment of variable `v`.
pub type NoiseMap = [[Complex64; N_NOISES]; N_VARS];

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One positive-P sample `(α1, α1⁺, α2, α2⁺, α3, α3⁺, β1, β1⁺, β2, β2⁺)`.
///
/// `α_j⁺` is an independent variable; only ensemble means satisfy
/// `⟨α_j⁺⟩ = ⟨α_j⟩*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpacePoint {
    pub vars: [Complex64; N_VARS],
}

impl PhaseSpacePoint {
    pub fn new(
        a: [Complex64; 3],
        ap: [Complex64; 3],
        b: [Complex64; 2],
        bp: [Complex64; 2],
    ) -> Self {
        PhaseSpacePoint {
            vars: [
                a[0], ap[0], a[1], ap[1], a[2], ap[2], b[0], bp[0], b[1], bp[1],
            ],
        }
    }

    /// Vacuum signals with coherent pumps `β_j = β_j⁺* = pump_j`.
    pub fn coherent_pumps(pump1: Complex64, pump2: Complex64) -> Self {
        Self::new(
            [ZERO; 3],
            [ZERO; 3],
            [pump1, pump2],
            [pump1.conj(), pump2.conj()],
        )
    }

    /// Classical point with `α⁺ = α*`, `β⁺ = β*`.
    pub fn classical(a: [Complex64; 3], b: [Complex64; 2]) -> Self {
        Self::new(a, a.map(|z| z.conj()), b, b.map(|z| z.conj()))
    }

    /// `α_j` for `j` in `0..3`.
    pub fn a(&self, j: usize) -> Complex64 {
        self.vars[2 * j]
    }

    pub fn ap(&self, j: usize) -> Complex64 {
        self.vars[2 * j + 1]
    }

    /// `β_j` for `j` in `0..2`.
    pub fn b(&self, j: usize) -> Complex64 {
        self.vars[6 + 2 * j]
    }

    pub fn bp(&self, j: usize) -> Complex64 {
        self.vars[7 + 2 * j]
    }

    pub fn max_norm(&self) -> f64 {
        self.vars.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.vars
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Which pair of χ(2) processes couples the modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interaction {
    Cascaded,
    Concurrent,
}

impl Interaction {
    pub fn of(kind: SystemKind) -> Self {
        if kind.is_cascaded() {
            Interaction::Cascaded
        } else {
            Interaction::Concurrent
        }
    }
}

/// Principal `√(z/2)` in algebraic form (no trigonometry).
fn half_root(z: Complex64) -> Complex64 {
    let z = 0.5 * z;
    let r = z.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if z.re >= 0.0 {
        let t = (0.5 * (r + z.re)).sqrt();
        Complex64::new(t, z.im / (2.0 * t))
    } else {
        let t = (0.5 * (r - z.re)).sqrt();
        Complex64::new(z.im.abs() / (2.0 * t), t.copysign(z.im))
    }
}

/// Nonlinear drift, without losses or drives.
pub fn interaction_drift(
    interaction: Interaction,
    chi1: f64,
    chi2: f64,
    p: &PhaseSpacePoint,
) -> Drift {
    let [a1, a1p, a2, a2p, a3, a3p, b1, b1p, b2, b2p] = p.vars;
    match interaction {
        Interaction::Cascaded => [
            chi1 * a2p * b1,
            chi1 * a2 * b1p,
            chi1 * a1p * b1 - chi2 * a3 * b2p,
            chi1 * a1 * b1p - chi2 * a3p * b2,
            chi2 * a2 * b2,
            chi2 * a2p * b2p,
            -chi1 * a1 * a2,
            -chi1 * a1p * a2p,
            -chi2 * a2 * a3p,
            -chi2 * a2p * a3,
        ],
        Interaction::Concurrent => [
            chi1 * a2p * b1,
            chi1 * a2 * b1p,
            chi1 * a1p * b1 + chi2 * a3p * b2,
            chi1 * a1 * b1p + chi2 * a3 * b2p,
            chi2 * a2p * b2,
            chi2 * a2 * b2p,
            -chi1 * a1 * a2,
            -chi1 * a1p * a2p,
            -chi2 * a2 * a3,
            -chi2 * a2p * a3p,
        ],
    }
}

/// Noise coefficients of the positive-P equations (principal square roots).
pub fn noise_map(interaction: Interaction, chi1: f64, chi2: f64, p: &PhaseSpacePoint) -> NoiseMap {
    let mut n = [[ZERO; N_NOISES]; N_VARS];
    // indices below are η_k -> k - 1
    match interaction {
        Interaction::Cascaded => {
            let s1 = half_root(chi1 * p.b(0));
            let s1p = half_root(chi1 * p.bp(0));
            let s3 = half_root(chi2 * p.a(2));
            let s3p = half_root(chi2 * p.ap(2));
            // α1: s1 (η1 + iη3)
            n[0][0] = s1;
            n[0][2] = I * s1;
            // α1⁺: s1⁺ (η2 + iη4)
            n[1][1] = s1p;
            n[1][3] = I * s1p;
            // α2: s1 (η1 - iη3) - s3 (η7 - iη5)
            n[2][0] = s1;
            n[2][2] = -I * s1;
            n[2][6] = -s3;
            n[2][4] = I * s3;
            // α2⁺: s1⁺ (η2 - iη4) - s3⁺ (η8 - iη6)
            n[3][1] = s1p;
            n[3][3] = -I * s1p;
            n[3][7] = -s3p;
            n[3][5] = I * s3p;
            // β2: s3 (η7 + iη5)
            n[8][6] = s3;
            n[8][4] = I * s3;
            // β2⁺: s3⁺ (η8 + iη6)
            n[9][7] = s3p;
            n[9][5] = I * s3p;
        }
        Interaction::Concurrent => {
            let s1 = half_root(chi1 * p.b(0));
            let s1p = half_root(chi1 * p.bp(0));
            let s2 = half_root(chi2 * p.b(1));
            let s2p = half_root(chi2 * p.bp(1));
            // α1: s1 (η1 + iη6)
            n[0][0] = s1;
            n[0][5] = I * s1;
            // α1⁺: s1⁺ (η2 - iη5)
            n[1][1] = s1p;
            n[1][4] = -I * s1p;
            // α2: s1 (η1 - iη6) + s2 (η3 + iη7)
            n[2][0] = s1;
            n[2][5] = -I * s1;
            n[2][2] = s2;
            n[2][6] = I * s2;
            // α2⁺: s1⁺ (η2 + iη5) + s2⁺ (η4 + iη8)
            n[3][1] = s1p;
            n[3][4] = I * s1p;
            n[3][3] = s2p;
            n[3][7] = I * s2p;
            // α3: s2 (η3 - iη7)
            n[4][2] = s2;
            n[4][6] = -I * s2;
            // α3⁺: s2⁺ (η4 - iη8)
            n[5][3] = s2p;
            n[5][7] = -I * s2p;
        }
    }
    n
}

/// Deterministic rates and noise coefficients of the positive-P equations of `spec`.
///
/// Travelling-wave kinds evolve in the propagation coordinate `z`; the cascaded
/// cavity adds signal losses `γ_j`, pump losses `κ_j` and drives `ε_j` and
/// evolves in time. The concurrent cavity has no stochastic system here.
pub fn drift_and_noise(
    spec: &SystemSpec,
    point: &PhaseSpacePoint,
) -> Result<(Drift, NoiseMap), SdeError> {
    let system = SdeSystem::new(spec)?;
    let mut drift = [ZERO; N_VARS];
    let mut noise = [[ZERO; N_NOISES]; N_VARS];
    system.evaluate(point, &mut drift, &mut noise);
    Ok((drift, noise))
}

/// Validated, ready-to-integrate form of a [`SystemSpec`].
#[derive(Debug, Clone, Copy)]
pub struct SdeSystem {
    interaction: Interaction,
    chi1: f64,
    chi2: f64,
    cavity: Option<CavityTerms>,
}

#[derive(Debug, Clone, Copy)]
struct CavityTerms {
    eps: [Complex64; 2],
    loss_a: [f64; 3],
    loss_b: [f64; 2],
}

impl SdeSystem {
    pub fn new(spec: &SystemSpec) -> Result<Self, SdeError> {
        let cavity = match spec.kind() {
            SystemKind::CascadedTW | SystemKind::ConcurrentTW => None,
            SystemKind::CascadedCavity => {
                let (e1, e2) = spec.drives().expect("cavity kinds carry drives");
                let (loss_a, loss_b) = spec.losses().expect("cavity kinds carry losses");
                Some(CavityTerms {
                    eps: [e1, e2],
                    loss_a,
                    loss_b,
                })
            }
            SystemKind::ConcurrentCavity => return Err(SdeError::UnsupportedKind(spec.kind())),
        };
        Ok(SdeSystem {
            interaction: Interaction::of(spec.kind()),
            chi1: spec.chi1(),
            chi2: spec.chi2(),
            cavity,
        })
    }

    pub fn evaluate(&self, p: &PhaseSpacePoint, drift: &mut Drift, noise: &mut NoiseMap) {
        *drift = interaction_drift(self.interaction, self.chi1, self.chi2, p);
        *noise = noise_map(self.interaction, self.chi1, self.chi2, p);
        if let Some(c) = &self.cavity {
            for j in 0..3 {
                drift[2 * j] -= c.loss_a[j] * p.vars[2 * j];
                drift[2 * j + 1] -= c.loss_a[j] * p.vars[2 * j + 1];
            }
            for j in 0..2 {
                drift[6 + 2 * j] += c.eps[j] - c.loss_b[j] * p.vars[6 + 2 * j];
                drift[7 + 2 * j] += c.eps[j].conj() - c.loss_b[j] * p.vars[7 + 2 * j];
            }
        }
    }

    /// One explicit Euler–Maruyama step of length `dt` with standard-normal `deviates`.
    pub fn step(
        &self,
        p: &PhaseSpacePoint,
        dt: f64,
        deviates: &[f64; N_NOISES],
    ) -> PhaseSpacePoint {
        let sqrt_dt = dt.sqrt();
        self.step_with_increments(p, dt, &deviates.map(|e| e * sqrt_dt))
    }

    /// Euler–Maruyama step with Wiener increments `dw` (variance `dt`) supplied directly.
    ///
    /// Same result as contracting [`Self::evaluate`] with `dw`, but skips the
    /// structural zeros of the noise map.
    pub fn step_with_increments(
        &self,
        p: &PhaseSpacePoint,
        dt: f64,
        dw: &[f64; N_NOISES],
    ) -> PhaseSpacePoint {
        let [a1, a1p, a2, a2p, a3, a3p, b1, b1p, b2, b2p] = p.vars;
        let (c1, c2) = (self.chi1, self.chi2);
        let w = |re: usize, im: usize, sign: f64| Complex64::new(dw[re], sign * dw[im]);
        let drift = interaction_drift(self.interaction, c1, c2, p);
        let mut inc = drift.map(|d| d * dt);
        match self.interaction {
            Interaction::Cascaded => {
                let s1 = half_root(c1 * b1);
                let s1p = half_root(c1 * b1p);
                let s3 = half_root(c2 * a3);
                let s3p = half_root(c2 * a3p);
                inc[0] += s1 * w(0, 2, 1.0);
                inc[1] += s1p * w(1, 3, 1.0);
                inc[2] += s1 * w(0, 2, -1.0) - s3 * w(6, 4, -1.0);
                inc[3] += s1p * w(1, 3, -1.0) - s3p * w(7, 5, -1.0);
                inc[8] += s3 * w(6, 4, 1.0);
                inc[9] += s3p * w(7, 5, 1.0);
            }
            Interaction::Concurrent => {
                let s1 = half_root(c1 * b1);
                let s1p = half_root(c1 * b1p);
                let s2 = half_root(c2 * b2);
                let s2p = half_root(c2 * b2p);
                inc[0] += s1 * w(0, 5, 1.0);
                inc[1] += s1p * w(1, 4, -1.0);
                inc[2] += s1 * w(0, 5, -1.0) + s2 * w(2, 6, 1.0);
                inc[3] += s1p * w(1, 4, 1.0) + s2p * w(3, 7, 1.0);
                inc[4] += s2 * w(2, 6, -1.0);
                inc[5] += s2p * w(3, 7, -1.0);
            }
        }
        if let Some(c) = &self.cavity {
            let fields = [a1, a1p, a2, a2p, a3, a3p];
            for (v, z) in fields.iter().enumerate() {
                inc[v] -= c.loss_a[v / 2] * z * dt;
            }
            inc[6] += (c.eps[0] - c.loss_b[0] * b1) * dt;
            inc[7] += (c.eps[0].conj() - c.loss_b[0] * b1p) * dt;
            inc[8] += (c.eps[1] - c.loss_b[1] * b2) * dt;
            inc[9] += (c.eps[1].conj() - c.loss_b[1] * b2p) * dt;
        }
        let mut next = *p;
        for (v, d) in next.vars.iter_mut().zip(inc) {
            *v += d;
        }
        next
    }

    /// Reference step that contracts the full noise map; used to check [`Self::step`].
    pub fn step_reference(
        &self,
        p: &PhaseSpacePoint,
        dt: f64,
        deviates: &[f64; N_NOISES],
    ) -> PhaseSpacePoint {
        let mut drift = [ZERO; N_VARS];
        let mut noise = [[ZERO; N_NOISES]; N_VARS];
        self.evaluate(p, &mut drift, &mut noise);
        let sqrt_dt = dt.sqrt();
        let mut next = *p;
        for v in 0..N_VARS {
            let mut inc = drift[v] * dt;
            for (k, &e) in deviates.iter().enumerate() {
                inc += noise[v][k] * (e * sqrt_dt);
            }
            next.vars[v] += inc;
        }
        next
    }

    pub fn interaction(&self) -> Interaction {
        self.interaction
    }
}

/// `point + drift Δ + noise · deviates √Δ`, with coefficients taken at the start of the step.
///
/// Returns [`SdeError::NonFinite`] when any component overflows.
pub fn step_em(
    spec: &SystemSpec,
    point: &PhaseSpacePoint,
    grid: &IntegrationGrid,
    deviates: &[f64; N_NOISES],
) -> Result<PhaseSpacePoint, SdeError> {
    let next = SdeSystem::new(spec)?.step(point, grid.coordinate_step(), deviates);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(SdeError::NonFinite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid(dt: f64) -> IntegrationGrid {
        IntegrationGrid::new(super::super::GridKind::Temporal, dt, 1, 1.0).unwrap()
    }

    fn diffusion(n: &NoiseMap) -> [[Complex64; N_VARS]; N_VARS] {
        let mut d = [[ZERO; N_VARS]; N_VARS];
        for i in 0..N_VARS {
            for j in 0..N_VARS {
                d[i][j] = (0..N_NOISES).map(|k| n[i][k] * n[j][k]).sum();
            }
        }
        d
    }

    fn random_point(seed: u64) -> PhaseSpacePoint {
        // small deterministic pseudo-random point with independent ⁺ variables
        let mut s = seed;
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        let mut vars = [ZERO; N_VARS];
        for v in vars.iter_mut() {
            *v = c(next(), next());
        }
        PhaseSpacePoint { vars }
    }

    #[test]
    fn half_root_is_principal() {
        for z in [
            c(2.0, 0.0),
            c(-2.0, 0.0),
            c(-2.0, -0.0),
            c(0.0, 3.0),
            c(-1.0, -1e-300),
            c(3.0, -4.0),
            c(-1e-8, 1.0),
        ] {
            let want = (0.5 * z).sqrt();
            let got = half_root(z);
            assert!(
                (got - want).norm() <= 1e-15 * want.norm().max(1e-300),
                "{z}: {got} vs {want}"
            );
        }
        assert_eq!(half_root(ZERO), ZERO);
    }

    #[test]
    fn cascaded_tw_vacuum_signals() {
        let spec = SystemSpec::travelling_wave(SystemKind::CascadedTW, 0.01, 0.02, 1000.0, 1000.0)
            .unwrap();
        let p = PhaseSpacePoint::coherent_pumps(c(1000.0, 0.0), c(1000.0, 0.0));
        let (drift, noise) = drift_and_noise(&spec, &p).unwrap();
        for v in 0..6 {
            assert_eq!(drift[v], ZERO);
        }
        let s = (0.01f64 * 1000.0 / 2.0).sqrt();
        assert_eq!(noise[0][0], c(s, 0.0));
        assert_eq!(noise[0][2], c(0.0, s));
        // α3 = 0 switches off the second process noise
        assert_eq!(noise[2][6], ZERO);
        assert_eq!(noise[8][4], ZERO);
    }

    #[test]
    fn concurrent_tw_alpha3_row() {
        let spec = SystemSpec::travelling_wave(SystemKind::ConcurrentTW, 0.01, 0.01, 1000.0, 500.0)
            .unwrap();
        let p = random_point(3);
        let (drift, noise) = drift_and_noise(&spec, &p).unwrap();
        assert!((drift[4] - 0.01 * p.ap(1) * p.b(1)).norm() < 1e-15);
        let s2 = (0.5 * 0.01 * p.b(1)).sqrt();
        // √(χβ2/2)(η3 - iη7)
        let mut expect = [ZERO; N_NOISES];
        expect[2] = s2;
        expect[6] = -I * s2;
        assert_eq!(noise[4], expect);
    }

    /// Diffusion entries read off the Fokker–Planck second-derivative terms.
    #[test]
    fn noise_reproduces_diffusion() {
        for seed in 0..5 {
            let p = random_point(seed);
            let (c1, c2) = (0.3, 0.7);
            let d = diffusion(&noise_map(Interaction::Cascaded, c1, c2, &p));
            for i in 0..N_VARS {
                for j in 0..N_VARS {
                    let expect = match (i.min(j), i.max(j)) {
                        (0, 2) => c1 * p.b(0),
                        (1, 3) => c1 * p.bp(0),
                        (2, 8) => -c2 * p.a(2),
                        (3, 9) => -c2 * p.ap(2),
                        _ => ZERO,
                    };
                    assert!((d[i][j] - expect).norm() < 1e-12, "cascaded D[{i}][{j}]");
                }
            }
            let d = diffusion(&noise_map(Interaction::Concurrent, c1, c2, &p));
            for i in 0..N_VARS {
                for j in 0..N_VARS {
                    let expect = match (i.min(j), i.max(j)) {
                        (0, 2) => c1 * p.b(0),
                        (1, 3) => c1 * p.bp(0),
                        (2, 4) => c2 * p.b(1),
                        (3, 5) => c2 * p.bp(1),
                        _ => ZERO,
                    };
                    assert!((d[i][j] - expect).norm() < 1e-12, "concurrent D[{i}][{j}]");
                }
            }
        }
    }

    #[test]
    fn cascaded_cavity_pump_drift_from_vacuum() {
        let spec = SystemSpec::symmetric_cavity(
            SystemKind::CascadedCavity,
            0.01,
            0.01,
            90.0,
            90.0,
            1.0,
            1.0,
        )
        .unwrap();
        let p = PhaseSpacePoint {
            vars: [ZERO; N_VARS],
        };
        let (drift, noise) = drift_and_noise(&spec, &p).unwrap();
        for v in 0..6 {
            assert_eq!(drift[v], ZERO);
        }
        for v in 6..10 {
            assert_eq!(drift[v], c(90.0, 0.0));
        }
        assert!(noise.iter().flatten().all(|z| *z == ZERO));
        let next = step_em(&spec, &p, &grid(0.01), &[0.0; N_NOISES]).unwrap();
        assert!((next.b(0) - c(0.9, 0.0)).norm() < 1e-15);
        assert_eq!(next.a(0), ZERO);
    }

    #[test]
    fn fast_step_matches_noise_map_contraction() {
        let specs = [
            SystemSpec::travelling_wave(SystemKind::CascadedTW, 0.3, 0.7, 1.0, 1.0).unwrap(),
            SystemSpec::travelling_wave(SystemKind::ConcurrentTW, 0.3, 0.7, 1.0, 1.0).unwrap(),
            SystemSpec::new(
                SystemKind::CascadedCavity,
                0.3,
                0.7,
                crate::model::Drive::Cavity {
                    eps1: c(1.5, -0.2),
                    eps2: c(0.4, 0.9),
                    loss_a: [1.0, 0.8, 1.3],
                    loss_b: [0.6, 2.0],
                },
            )
            .unwrap(),
        ];
        for spec in specs {
            let sys = SdeSystem::new(&spec).unwrap();
            for seed in 0..10 {
                let p = random_point(seed);
                let q = random_point(seed + 100);
                let dev: [f64; N_NOISES] = std::array::from_fn(|k| q.vars[k].re);
                let fast = sys.step(&p, 0.013, &dev);
                let slow = sys.step_reference(&p, 0.013, &dev);
                for v in 0..N_VARS {
                    assert!(
                        (fast.vars[v] - slow.vars[v]).norm() < 1e-13,
                        "{:?} var {v}",
                        spec.kind()
                    );
                }
            }
        }
    }

    #[test]
    fn zero_noise_zero_drift_is_identity() {
        let spec =
            SystemSpec::travelling_wave(SystemKind::ConcurrentTW, 0.01, 0.01, 1000.0, 1000.0)
                .unwrap();
        let p = PhaseSpacePoint::coherent_pumps(c(1000.0, 0.0), c(1000.0, 0.0));
        assert_eq!(
            step_em(&spec, &p, &grid(1e-4), &[0.0; N_NOISES]).unwrap(),
            p
        );
    }

    #[test]
    fn concurrent_cavity_has_no_sde() {
        let spec = SystemSpec::symmetric_cavity(
            SystemKind::ConcurrentCavity,
            0.01,
            0.01,
            45.0,
            45.0,
            1.0,
            1.0,
        )
        .unwrap();
        let p = PhaseSpacePoint {
            vars: [ZERO; N_VARS],
        };
        assert!(matches!(
            drift_and_noise(&spec, &p),
            Err(SdeError::UnsupportedKind(_))
        ));
    }

    #[test]
    fn overflow_is_reported() {
        let spec = SystemSpec::travelling_wave(SystemKind::CascadedTW, 1.0, 1.0, 1.0, 1.0).unwrap();
        let p = PhaseSpacePoint::classical([c(1e200, 0.0); 3], [c(1e200, 0.0); 2]);
        assert_eq!(
            step_em(&spec, &p, &grid(1.0), &[0.0; N_NOISES]),
            Err(SdeError::NonFinite)
        );
    }

    /// Drift-only stepping of the classical cavity equations from vacuum: halving the
    /// step shrinks the error against a fine reference by about 2 (first order), and
    /// a single step differs from two half steps by O(Δ²).
    #[test]
    fn deterministic_step_convergence() {
        let spec = SystemSpec::symmetric_cavity(
            SystemKind::CascadedCavity,
            0.01,
            0.01,
            60.0,
            40.0,
            1.0,
            1.0,
        )
        .unwrap();
        let sys = SdeSystem::new(&spec).unwrap();
        let start = PhaseSpacePoint::classical([c(0.1, 0.0), c(0.2, 0.0), c(0.05, 0.0)], [ZERO; 2]);
        let run = |n: usize| {
            let mut p = start;
            for _ in 0..n {
                p = sys.step(&p, 1.0 / n as f64, &[0.0; N_NOISES]);
            }
            p
        };
        let reference = run(1 << 16);
        let err = |p: PhaseSpacePoint| {
            p.vars
                .iter()
                .zip(reference.vars.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(run(256)), err(run(512)));
        assert!((e1 / e2 - 2.0).abs() < 0.1, "ratio {}", e1 / e2);

        let dt = 1e-3;
        let full = sys.step(&start, dt, &[0.0; N_NOISES]);
        let half = sys.step(
            &sys.step(&start, dt / 2.0, &[0.0; N_NOISES]),
            dt / 2.0,
            &[0.0; N_NOISES],
        );
        let gap = full
            .vars
            .iter()
            .zip(half.vars.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let gap2 = {
            let f = sys.step(&start, dt / 2.0, &[0.0; N_NOISES]);
            let h = sys.step(
                &sys.step(&start, dt / 4.0, &[0.0; N_NOISES]),
                dt / 4.0,
                &[0.0; N_NOISES],
            );
            f.vars
                .iter()
                .zip(h.vars.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        };
        assert!(
            gap > 0.0 && (gap / gap2 - 4.0).abs() < 0.2,
            "ratio {}",
            gap / gap2
        );
    }
}
