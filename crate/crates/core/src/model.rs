//! Physical systems, quadrature moment conventions and the van Loock–Furusawa
//! tripartite criteria.
//!
//! Quadratures are `X = a + a†` and `Y = -i(a - a†)`, so the vacuum variance is 1
//! and each criterion `V_ij = V(X_i - X_j) + V(Y_1 + Y_2 + Y_3)` is bounded below by
//! 4 for separable states.

use num_complex::Complex64;
use thiserror::Error;

/// Value of each criterion for the vacuum (and any product of coherent states).
pub const VACUUM_CRITERION: f64 = 5.0;
/// Any two criteria strictly below this bound certify tripartite entanglement.
pub const ENTANGLEMENT_BOUND: f64 = 4.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("coupling {name} must be finite and non-negative, got {value}")]
    BadCoupling { name: &'static str, value: f64 },
    #[error("loss rate {name} must be finite and positive, got {value}")]
    BadLoss { name: &'static str, value: f64 },
    #[error("{name} must be finite")]
    NonFinite { name: &'static str },
    #[error("{kind:?} cannot be driven by {drive}")]
    DriveMismatch {
        kind: SystemKind,
        drive: &'static str,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("unknown mode index {0} (modes are 1, 2, 3)")]
    UnknownMode(usize),
    #[error("covariance needs two distinct modes, got {0} twice; use the variance instead")]
    SameMode(usize),
    #[error("ensemble holds {0} trajectories, at least 2 are needed")]
    EmptyEnsemble(usize),
}

/// The four physical models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    /// Downconversion `b1 -> a1 + a2` cascaded into sum-frequency `b2 + a2 -> a3`, travelling wave.
    CascadedTW,
    /// Two downconversions `b1 -> a1 + a2`, `b2 -> a2 + a3` in one crystal, travelling wave.
    ConcurrentTW,
    CascadedCavity,
    ConcurrentCavity,
}

impl SystemKind {
    pub const ALL: [SystemKind; 4] = [
        SystemKind::CascadedTW,
        SystemKind::ConcurrentTW,
        SystemKind::CascadedCavity,
        SystemKind::ConcurrentCavity,
    ];

    pub fn is_cavity(self) -> bool {
        matches!(
            self,
            SystemKind::CascadedCavity | SystemKind::ConcurrentCavity
        )
    }

    pub fn is_cascaded(self) -> bool {
        matches!(self, SystemKind::CascadedTW | SystemKind::CascadedCavity)
    }

    pub fn name(self) -> &'static str {
        match self {
            SystemKind::CascadedTW => "CascadedTW",
            SystemKind::ConcurrentTW => "ConcurrentTW",
            SystemKind::CascadedCavity => "CascadedCavity",
            SystemKind::ConcurrentCavity => "ConcurrentCavity",
        }
    }
}

impl std::str::FromStr for SystemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SystemKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown system kind `{s}`"))
    }
}

impl std::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How the pump modes are supplied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    /// Initial pump amplitudes `β1(0)`, `β2(0)` entering the crystal.
    TravellingWave {
        pump1_init: Complex64,
        pump2_init: Complex64,
    },
    /// Classical cavity drives `ε1`, `ε2`, signal losses `γ1..γ3` and pump losses `κ1, κ2`.
    Cavity {
        eps1: Complex64,
        eps2: Complex64,
        loss_a: [f64; 3],
        loss_b: [f64; 2],
    },
}

/// A fully specified physical system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec {
    kind: SystemKind,
    chi1: f64,
    chi2: f64,
    drive: Drive,
}

impl SystemSpec {
    pub fn new(kind: SystemKind, chi1: f64, chi2: f64, drive: Drive) -> Result<Self, SpecError> {
        for (name, value) in [("chi1", chi1), ("chi2", chi2)] {
            if !value.is_finite() || value < 0.0 {
                return Err(SpecError::BadCoupling { name, value });
            }
        }
        match (&drive, kind.is_cavity()) {
            (
                Drive::TravellingWave {
                    pump1_init,
                    pump2_init,
                },
                false,
            ) => {
                check_finite("pump1_init", *pump1_init)?;
                check_finite("pump2_init", *pump2_init)?;
            }
            (
                Drive::Cavity {
                    eps1,
                    eps2,
                    loss_a,
                    loss_b,
                },
                true,
            ) => {
                check_finite("eps1", *eps1)?;
                check_finite("eps2", *eps2)?;
                const A: [&str; 3] = ["loss_a1", "loss_a2", "loss_a3"];
                const B: [&str; 2] = ["loss_b1", "loss_b2"];
                for (name, &value) in A.iter().zip(loss_a).chain(B.iter().zip(loss_b)) {
                    if !value.is_finite() || value <= 0.0 {
                        return Err(SpecError::BadLoss { name, value });
                    }
                }
            }
            (Drive::TravellingWave { .. }, true) => {
                return Err(SpecError::DriveMismatch {
                    kind,
                    drive: "initial pump amplitudes",
                })
            }
            (Drive::Cavity { .. }, false) => {
                return Err(SpecError::DriveMismatch {
                    kind,
                    drive: "cavity drives and losses",
                })
            }
        }
        Ok(SystemSpec {
            kind,
            chi1,
            chi2,
            drive,
        })
    }

    /// Travelling-wave system with real initial pump amplitudes.
    pub fn travelling_wave(
        kind: SystemKind,
        chi1: f64,
        chi2: f64,
        pump1: f64,
        pump2: f64,
    ) -> Result<Self, SpecError> {
        Self::new(
            kind,
            chi1,
            chi2,
            Drive::TravellingWave {
                pump1_init: Complex64::new(pump1, 0.0),
                pump2_init: Complex64::new(pump2, 0.0),
            },
        )
    }

    /// Cavity system with real drives, all signal losses `gamma_a` and pump losses `gamma_b`.
    pub fn symmetric_cavity(
        kind: SystemKind,
        chi1: f64,
        chi2: f64,
        eps1: f64,
        eps2: f64,
        gamma_a: f64,
        gamma_b: f64,
    ) -> Result<Self, SpecError> {
        Self::new(
            kind,
            chi1,
            chi2,
            Drive::Cavity {
                eps1: Complex64::new(eps1, 0.0),
                eps2: Complex64::new(eps2, 0.0),
                loss_a: [gamma_a; 3],
                loss_b: [gamma_b; 2],
            },
        )
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn chi1(&self) -> f64 {
        self.chi1
    }

    pub fn chi2(&self) -> f64 {
        self.chi2
    }

    pub fn drive(&self) -> &Drive {
        &self.drive
    }

    /// `(β1(0), β2(0))` for travelling-wave kinds.
    pub fn pump_init(&self) -> Option<(Complex64, Complex64)> {
        match self.drive {
            Drive::TravellingWave {
                pump1_init,
                pump2_init,
            } => Some((pump1_init, pump2_init)),
            Drive::Cavity { .. } => None,
        }
    }

    /// `(ε1, ε2)` for cavity kinds.
    pub fn drives(&self) -> Option<(Complex64, Complex64)> {
        match self.drive {
            Drive::Cavity { eps1, eps2, .. } => Some((eps1, eps2)),
            Drive::TravellingWave { .. } => None,
        }
    }

    /// `([γ1, γ2, γ3], [κ1, κ2])` for cavity kinds.
    pub fn losses(&self) -> Option<([f64; 3], [f64; 2])> {
        match self.drive {
            Drive::Cavity { loss_a, loss_b, .. } => Some((loss_a, loss_b)),
            Drive::TravellingWave { .. } => None,
        }
    }

    /// Characteristic pump amplitude: `|β1(0)|` (travelling wave) or the largest
    /// below-threshold pump `|ε_j/κ_j|` (cavity).
    pub fn pump_scale(&self) -> f64 {
        match self.drive {
            Drive::TravellingWave { pump1_init, .. } => pump1_init.norm(),
            Drive::Cavity {
                eps1, eps2, loss_b, ..
            } => (eps1.norm() / loss_b[0]).max(eps2.norm() / loss_b[1]),
        }
    }
}

fn check_finite(name: &'static str, z: Complex64) -> Result<(), SpecError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(SpecError::NonFinite { name })
    }
}

/// Where a moment table came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Closed form or deterministic integration; standard errors are zero.
    Exact,
    /// Positive-P ensemble average over `n_traj` non-diverged trajectories.
    Ensemble { n_traj: usize },
}

/// Per-trajectory samples of `Re[(x_i - x_j)^2 + (y_1 + y_2 + y_3)^2]` for the pairs
/// (12, 13, 23), built from the complex stochastic quadratures. Their sample spread gives criterion standard errors that include
/// the correlations between individual moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionSamples {
    pub mean: [f64; 3],
    pub se: [f64; 3],
}

/// First moments and second-order mixed moments of the three signal quadratures.
///
/// `second_xx[j][k]` is the mean of `x_j x_k` with `x_j = α_j + α_j⁺`; in the
/// positive-P representation these are normally ordered expectation values, so
/// the diagonal lacks the vacuum term that [`variance_x`] restores.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub provenance: Provenance,
    pub mean_x: [f64; 3],
    pub mean_y: [f64; 3],
    pub second_xx: [[f64; 3]; 3],
    pub second_yy: [[f64; 3]; 3],
    pub intensity: [f64; 3],
    pub se_mean_x: [f64; 3],
    pub se_mean_y: [f64; 3],
    pub se_second_xx: [[f64; 3]; 3],
    pub se_second_yy: [[f64; 3]; 3],
    pub se_intensity: [f64; 3],
    pub criterion_samples: Option<CriterionSamples>,
    /// Largest magnitude of the imaginary part left in any averaged monomial.
    pub imag_residual: f64,
}

impl MomentTable {
    pub fn vacuum() -> Self {
        MomentTable {
            provenance: Provenance::Exact,
            mean_x: [0.0; 3],
            mean_y: [0.0; 3],
            second_xx: [[0.0; 3]; 3],
            second_yy: [[0.0; 3]; 3],
            intensity: [0.0; 3],
            se_mean_x: [0.0; 3],
            se_mean_y: [0.0; 3],
            se_second_xx: [[0.0; 3]; 3],
            se_second_yy: [[0.0; 3]; 3],
            se_intensity: [0.0; 3],
            criterion_samples: None,
            imag_residual: 0.0,
        }
    }

    /// Exact table from symmetric variances/covariances of zero-mean quadratures.
    ///
    /// `var_x[j]` is `V(X_j)`, `cov_x[j][k]` is `V(X_j, X_k)` for `j != k`.
    pub fn from_exact_covariances(
        var_x: [f64; 3],
        var_y: [f64; 3],
        cov_x: [[f64; 3]; 3],
        cov_y: [[f64; 3]; 3],
        intensity: [f64; 3],
    ) -> Self {
        let mut table = MomentTable::vacuum();
        for j in 0..3 {
            for k in 0..3 {
                if j == k {
                    table.second_xx[j][j] = var_x[j] - 1.0;
                    table.second_yy[j][j] = var_y[j] - 1.0;
                } else {
                    table.second_xx[j][k] = cov_x[j][k];
                    table.second_yy[j][k] = cov_y[j][k];
                }
            }
        }
        table.intensity = intensity;
        table
    }

    pub fn n_traj(&self) -> Option<usize> {
        match self.provenance {
            Provenance::Exact => None,
            Provenance::Ensemble { n_traj } => Some(n_traj),
        }
    }

    fn check_usable(&self) -> Result<(), MomentError> {
        match self.provenance {
            Provenance::Ensemble { n_traj } if n_traj < 2 => {
                Err(MomentError::EmptyEnsemble(n_traj))
            }
            _ => Ok(()),
        }
    }

    /// True when every diagonal normally ordered variance is above `-3 se`.
    pub fn variances_plausible(&self) -> bool {
        (0..3).all(|j| {
            let vx = self.second_xx[j][j] - self.mean_x[j].powi(2);
            let vy = self.second_yy[j][j] - self.mean_y[j].powi(2);
            vx >= -3.0 * self.se_second_xx[j][j] && vy >= -3.0 * self.se_second_yy[j][j]
        })
    }
}

fn mode_index(j: usize) -> Result<usize, MomentError> {
    match j {
        1..=3 => Ok(j - 1),
        _ => Err(MomentError::UnknownMode(j)),
    }
}

fn pair_indices(j: usize, k: usize) -> Result<(usize, usize), MomentError> {
    let (a, b) = (mode_index(j)?, mode_index(k)?);
    if a == b {
        return Err(MomentError::SameMode(j));
    }
    Ok((a, b))
}

/// `V(X_j)` for mode `j` in `1..=3`.
pub fn variance_x(table: &MomentTable, j: usize) -> Result<f64, MomentError> {
    table.check_usable()?;
    let j = mode_index(j)?;
    Ok(1.0 + table.second_xx[j][j] - table.mean_x[j] * table.mean_x[j])
}

/// `V(Y_j)` for mode `j` in `1..=3`.
pub fn variance_y(table: &MomentTable, j: usize) -> Result<f64, MomentError> {
    table.check_usable()?;
    let j = mode_index(j)?;
    Ok(1.0 + table.second_yy[j][j] - table.mean_y[j] * table.mean_y[j])
}

/// `V(X_j, X_k)` for distinct modes.
pub fn covariance_x(table: &MomentTable, j: usize, k: usize) -> Result<f64, MomentError> {
    table.check_usable()?;
    let (a, b) = pair_indices(j, k)?;
    Ok(table.second_xx[a][b] - table.mean_x[a] * table.mean_x[b])
}

/// `V(Y_j, Y_k)` for distinct modes.
pub fn covariance_y(table: &MomentTable, j: usize, k: usize) -> Result<f64, MomentError> {
    table.check_usable()?;
    let (a, b) = pair_indices(j, k)?;
    Ok(table.second_yy[a][b] - table.mean_y[a] * table.mean_y[b])
}

/// One of the three mode pairs that index the criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pair {
    P12,
    P13,
    P23,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::P12, Pair::P13, Pair::P23];

    /// Zero-based mode indices.
    pub fn modes(self) -> (usize, usize) {
        match self {
            Pair::P12 => (0, 1),
            Pair::P13 => (0, 2),
            Pair::P23 => (1, 2),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Pair::P12 => "12",
            Pair::P13 => "13",
            Pair::P23 => "23",
        }
    }
}

/// Values of `V12, V13, V23` with standard errors and the entanglement verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct CriteriaReport {
    pub values: [f64; 3],
    pub se: [f64; 3],
    pub violated: Vec<Pair>,
    pub entangled: bool,
}

impl CriteriaReport {
    pub fn new(values: [f64; 3], se: [f64; 3]) -> Self {
        let violated: Vec<Pair> = Pair::ALL
            .into_iter()
            .filter(|p| values[p.index()] < ENTANGLEMENT_BOUND)
            .collect();
        let entangled = violated.len() >= 2;
        CriteriaReport {
            values,
            se,
            violated,
            entangled,
        }
    }

    pub fn exact(values: [f64; 3]) -> Self {
        Self::new(values, [0.0; 3])
    }

    pub fn v12(&self) -> f64 {
        self.values[0]
    }

    pub fn v13(&self) -> f64 {
        self.values[1]
    }

    pub fn v23(&self) -> f64 {
        self.values[2]
    }

    pub fn get(&self, pair: Pair) -> f64 {
        self.values[pair.index()]
    }

    /// `v + 3 se` per pair.
    pub fn conservative_bound(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.values[i] + 3.0 * self.se[i])
    }

    /// Verdict computed from the conservative bounds instead of the point values.
    pub fn conservatively_entangled(&self) -> bool {
        self.conservative_bound()
            .iter()
            .filter(|&&v| v < ENTANGLEMENT_BOUND)
            .count()
            >= 2
    }
}

/// Assembles `V_ij = V(X_i - X_j) + V(Y1 + Y2 + Y3)` from a moment table.
///
/// Standard errors come from the per-trajectory criterion samples when the table
/// carries them, otherwise from a first-order quadrature sum over the per-moment
/// standard errors.
pub fn vlf_criteria(table: &MomentTable) -> Result<CriteriaReport, MomentError> {
    table.check_usable()?;
    let t = table;
    let sum_my: f64 = t.mean_y.iter().sum();
    let mut y_sum = 3.0 - sum_my * sum_my;
    for k in 0..3 {
        for l in 0..3 {
            y_sum += t.second_yy[k][l];
        }
    }

    let mut values = [0.0; 3];
    let mut se = [0.0; 3];
    for pair in Pair::ALL {
        let (i, j) = pair.modes();
        let dmean = t.mean_x[i] - t.mean_x[j];
        let x_diff = 2.0 + t.second_xx[i][i] + t.second_xx[j][j]
            - t.second_xx[i][j]
            - t.second_xx[j][i]
            - dmean * dmean;
        values[pair.index()] = x_diff + y_sum;

        let mean_terms = 4.0 * dmean * dmean * (t.se_mean_x[i].powi(2) + t.se_mean_x[j].powi(2))
            + 4.0 * sum_my * sum_my * t.se_mean_y.iter().map(|s| s * s).sum::<f64>();
        se[pair.index()] = match &t.criterion_samples {
            Some(samples) => (samples.se[pair.index()].powi(2) + mean_terms).sqrt(),
            None => {
                let mut acc = mean_terms
                    + t.se_second_xx[i][i].powi(2)
                    + t.se_second_xx[j][j].powi(2)
                    + 4.0 * t.se_second_xx[i][j].powi(2);
                for k in 0..3 {
                    acc += t.se_second_yy[k][k].powi(2);
                    for l in (k + 1)..3 {
                        acc += 4.0 * t.se_second_yy[k][l].powi(2);
                    }
                }
                acc.sqrt()
            }
        };
    }
    Ok(CriteriaReport::new(values, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vacuum_variances_and_criteria() {
        let t = MomentTable::vacuum();
        for j in 1..=3 {
            assert_eq!(variance_x(&t, j).unwrap(), 1.0);
            assert_eq!(variance_y(&t, j).unwrap(), 1.0);
        }
        assert_eq!(covariance_x(&t, 1, 2).unwrap(), 0.0);
        let r = vlf_criteria(&t).unwrap();
        assert_eq!(r.values, [5.0; 3]);
        assert!(!r.entangled);
        assert!(r.violated.is_empty());
    }

    #[test]
    fn mode_errors() {
        let t = MomentTable::vacuum();
        assert_eq!(variance_x(&t, 0), Err(MomentError::UnknownMode(0)));
        assert_eq!(variance_y(&t, 4), Err(MomentError::UnknownMode(4)));
        assert_eq!(covariance_x(&t, 2, 2), Err(MomentError::SameMode(2)));
        let mut small = MomentTable::vacuum();
        small.provenance = Provenance::Ensemble { n_traj: 1 };
        assert_eq!(variance_x(&small, 1), Err(MomentError::EmptyEnsemble(1)));
        assert!(vlf_criteria(&small).is_err());
    }

    #[test]
    fn spec_construction_rejects_mixtures() {
        let tw = Drive::TravellingWave {
            pump1_init: Complex64::new(1.0, 0.0),
            pump2_init: Complex64::new(1.0, 0.0),
        };
        assert!(matches!(
            SystemSpec::new(SystemKind::CascadedCavity, 1.0, 1.0, tw),
            Err(SpecError::DriveMismatch { .. })
        ));
        let cav = Drive::Cavity {
            eps1: Complex64::new(1.0, 0.0),
            eps2: Complex64::new(1.0, 0.0),
            loss_a: [1.0; 3],
            loss_b: [1.0, 0.0],
        };
        assert!(matches!(
            SystemSpec::new(SystemKind::ConcurrentCavity, 1.0, 1.0, cav),
            Err(SpecError::BadLoss {
                name: "loss_b2",
                ..
            })
        ));
        assert!(matches!(
            SystemSpec::new(SystemKind::ConcurrentTW, 1.0, 1.0, cav),
            Err(SpecError::DriveMismatch { .. })
        ));
        assert!(SystemSpec::travelling_wave(SystemKind::CascadedTW, -1.0, 1.0, 1.0, 1.0).is_err());
        assert!(SystemSpec::travelling_wave(SystemKind::CascadedTW, 0.01, 0.02, 1e3, 1e3).is_ok());
    }

    #[test]
    fn kind_parsing() {
        for k in SystemKind::ALL {
            assert_eq!(k.name().parse::<SystemKind>().unwrap(), k);
        }
        assert!("Cascaded".parse::<SystemKind>().is_err());
    }

    #[test]
    fn verdict_needs_two_violations() {
        assert!(!CriteriaReport::exact([3.0, 4.0, 4.5]).entangled);
        assert!(CriteriaReport::exact([3.0, 3.9, 4.5]).entangled);
        // the bound is strict
        assert!(!CriteriaReport::exact([4.0, 4.0, 4.0]).entangled);
        let r = CriteriaReport::new([3.0, 3.5, 5.0], [0.2, 0.2, 0.0]);
        assert_eq!(r.conservative_bound(), [3.6, 4.1, 5.0]);
        assert!(!r.conservatively_entangled());
    }

    /// Direct assembly from variances and covariances, written out term by term.
    fn reference_criteria(t: &MomentTable) -> [f64; 3] {
        let vx = |j| variance_x(t, j).unwrap();
        let vy = |j| variance_y(t, j).unwrap();
        let cx = |j, k| covariance_x(t, j, k).unwrap();
        let cy = |j, k| covariance_y(t, j, k).unwrap();
        let ysum = vy(1) + vy(2) + vy(3) + 2.0 * (cy(1, 2) + cy(1, 3) + cy(2, 3));
        [
            vx(1) + vx(2) - 2.0 * cx(1, 2) + ysum,
            vx(1) + vx(3) - 2.0 * cx(1, 3) + ysum,
            vx(2) + vx(3) - 2.0 * cx(2, 3) + ysum,
        ]
    }

    fn table_strategy() -> impl Strategy<Value = MomentTable> {
        (
            prop::array::uniform3(-1.0..1.0f64),
            prop::array::uniform3(-1.0..1.0f64),
            prop::array::uniform6(-2.0..2.0f64),
            prop::array::uniform6(-2.0..2.0f64),
        )
            .prop_map(|(mx, my, xx, yy)| {
                let mut t = MomentTable::vacuum();
                t.provenance = Provenance::Ensemble { n_traj: 100 };
                t.mean_x = mx;
                t.mean_y = my;
                let idx = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
                for (n, &(j, k)) in idx.iter().enumerate() {
                    t.second_xx[j][k] = xx[n];
                    t.second_xx[k][j] = xx[n];
                    t.second_yy[j][k] = yy[n];
                    t.second_yy[k][j] = yy[n];
                }
                t
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn assembly_matches_reference(t in table_strategy()) {
            let r = vlf_criteria(&t).unwrap();
            let expect = reference_criteria(&t);
            for i in 0..3 {
                prop_assert!((r.values[i] - expect[i]).abs() < 1e-12);
            }
        }

        #[test]
        fn assembly_is_linear_in_centered_moments(t in table_strategy(), lambda in 0.0..3.0f64) {
            // scale every centered second moment by lambda, keeping the means
            let mut scaled = t.clone();
            for j in 0..3 {
                for k in 0..3 {
                    let cx = t.second_xx[j][k] - t.mean_x[j] * t.mean_x[k];
                    let cy = t.second_yy[j][k] - t.mean_y[j] * t.mean_y[k];
                    scaled.second_xx[j][k] = lambda * cx + t.mean_x[j] * t.mean_x[k];
                    scaled.second_yy[j][k] = lambda * cy + t.mean_y[j] * t.mean_y[k];
                }
            }
            let base = vlf_criteria(&t).unwrap().values;
            let got = vlf_criteria(&scaled).unwrap().values;
            for i in 0..3 {
                let expect = 5.0 + lambda * (base[i] - 5.0);
                prop_assert!((got[i] - expect).abs() < 1e-10);
            }
        }

        #[test]
        fn verdict_is_monotone(
            v in prop::array::uniform3(0.0..8.0f64),
            which in 0usize..3,
            drop in 0.0..4.0f64,
        ) {
            let before = CriteriaReport::exact(v);
            let mut lowered = v;
            lowered[which] = (lowered[which] - drop).max(0.0);
            let after = CriteriaReport::exact(lowered);
            prop_assert!(!before.entangled || after.entangled);
            prop_assert_eq!(after.entangled, after.violated.len() >= 2);
        }
    }
}
