//! Undepleted-pump closed forms for the travelling-wave schemes.
//!
//! With the pumps frozen at their initial values the signal operators obey
//! linear equations. For the cascaded scheme (effective couplings `κ1, κ2`)
//!
//! ```text
//! da1/dt = κ1 a2†,   da2/dt = κ1 a1† - κ2 a3,   da3/dt = κ2 a2
//! ```
//!
//! and for the concurrent scheme (couplings `γ1, γ2`)
//!
//! ```text
//! da1/dt = γ1 a2†,   da2/dt = γ1 a1† + γ2 a3†,   da3/dt = γ2 a2†.
//! ```
//!
//! All tables start from vacuum signals. The hyperbolic and oscillatory cascaded
//! branches are evaluated through half-angle forms (`1 - cos x = 2 sin²(x/2)`,
//! `cosh x - 1 = 2 sinh²(x/2)`) so small rates do not lose digits.

mod oracle;

pub use oracle::moment_ode_oracle;

use crate::model::{CriteriaReport, MomentTable, SystemKind, SystemSpec};
use crate::ode::OdeError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("coupling {name} must be finite and positive, got {value}")]
    BadCoupling { name: &'static str, value: f64 },
    #[error("time must be finite and non-negative, got {0}")]
    BadTime(f64),
    #[error("κ1 = κ2 has no closed form; integrate the moment equations or the stochastic system instead")]
    DegenerateCascade,
    #[error("operation needs the {expected:?} scheme")]
    WrongScheme { expected: Scheme },
    #[error("{0:?} has no undepleted-pump closed form")]
    UnsupportedKind(SystemKind),
    #[error("moment integration failed: {0}")]
    Integration(#[from] OdeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Cascaded,
    Concurrent,
}

/// Solution class selected by the couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// Cascaded with `κ2 > κ1`: `Ω = sqrt(κ2² - κ1²)`, periodic solutions.
    Oscillatory { omega: f64 },
    /// Cascaded with `κ1 > κ2`: `ζ = sqrt(κ1² - κ2²)`, exponential growth.
    Hyperbolic { zeta: f64 },
    /// Cascaded with `κ1 = κ2`: polynomial growth, no printed closed form.
    Degenerate,
    /// Concurrent: `Ω = sqrt(γ1² + γ2²)`.
    Concurrent { omega: f64 },
}

impl Regime {
    /// `Ω`, `ζ`, or `None` for the degenerate cascade.
    pub fn rate(self) -> Option<f64> {
        match self {
            Regime::Oscillatory { omega } | Regime::Concurrent { omega } => Some(omega),
            Regime::Hyperbolic { zeta } => Some(zeta),
            Regime::Degenerate => None,
        }
    }
}

/// Effective pump couplings for the undepleted-pump equations.
///
/// `coupling1`/`coupling2` are `κ1, κ2` for the cascaded scheme and `γ1, γ2` for
/// the concurrent one, each being `χ_j |β_j(0)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticParams {
    pub scheme: Scheme,
    pub coupling1: f64,
    pub coupling2: f64,
}

impl AnalyticParams {
    pub fn cascaded(kappa1: f64, kappa2: f64) -> Result<Self, AnalyticError> {
        Self::new(Scheme::Cascaded, kappa1, kappa2)
    }

    pub fn concurrent(gamma1: f64, gamma2: f64) -> Result<Self, AnalyticError> {
        Self::new(Scheme::Concurrent, gamma1, gamma2)
    }

    pub fn new(scheme: Scheme, coupling1: f64, coupling2: f64) -> Result<Self, AnalyticError> {
        for (name, value) in [("coupling1", coupling1), ("coupling2", coupling2)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(AnalyticError::BadCoupling { name, value });
            }
        }
        Ok(AnalyticParams {
            scheme,
            coupling1,
            coupling2,
        })
    }

    /// Couplings `χ_j |β_j(0)|` of a travelling-wave system.
    pub fn from_spec(spec: &SystemSpec) -> Result<Self, AnalyticError> {
        let scheme = match spec.kind() {
            SystemKind::CascadedTW => Scheme::Cascaded,
            SystemKind::ConcurrentTW => Scheme::Concurrent,
            other => return Err(AnalyticError::UnsupportedKind(other)),
        };
        let (b1, b2) = spec
            .pump_init()
            .ok_or(AnalyticError::UnsupportedKind(spec.kind()))?;
        Self::new(scheme, spec.chi1() * b1.norm(), spec.chi2() * b2.norm())
    }

    pub fn regime(&self) -> Regime {
        let (c1, c2) = (self.coupling1, self.coupling2);
        match self.scheme {
            Scheme::Concurrent => Regime::Concurrent {
                omega: c1.hypot(c2),
            },
            Scheme::Cascaded => {
                let diff = (c2 - c1) * (c2 + c1);
                if diff > 0.0 {
                    Regime::Oscillatory { omega: diff.sqrt() }
                } else if diff < 0.0 {
                    Regime::Hyperbolic {
                        zeta: (-diff).sqrt(),
                    }
                } else {
                    Regime::Degenerate
                }
            }
        }
    }
}

fn check_time(t: f64) -> Result<(), AnalyticError> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(AnalyticError::BadTime(t))
    }
}

fn require(p: &AnalyticParams, expected: Scheme) -> Result<(), AnalyticError> {
    if p.scheme == expected {
        Ok(())
    } else {
        Err(AnalyticError::WrongScheme { expected })
    }
}

/// Exact cascaded quantities shared by the intensity and moment functions.
struct CascadedTerms {
    n: [f64; 3],
    var: [f64; 3],
    cov12: f64,
    cov13: f64,
    cov23: f64,
}

fn cascaded_terms(p: &AnalyticParams, t: f64) -> Result<CascadedTerms, AnalyticError> {
    require(p, Scheme::Cascaded)?;
    check_time(t)?;
    let (k1, k2) = (p.coupling1, p.coupling2);
    let (k1s, k2s) = (k1 * k1, k2 * k2);
    // `w` is Ω or ζ, `half` is 1 - cos(wt) or cosh(wt) - 1, `sn` is sin(wt) or sinh(wt).
    // In these variables both branches share one set of expressions.
    let (w, half, sn) = match p.regime() {
        Regime::Oscillatory { omega } => {
            let x = omega * t;
            (omega, 2.0 * (0.5 * x).sin().powi(2), x.sin())
        }
        Regime::Hyperbolic { zeta } => {
            let x = zeta * t;
            (zeta, 2.0 * (0.5 * x).sinh().powi(2), x.sinh())
        }
        Regime::Degenerate => return Err(AnalyticError::DegenerateCascade),
        Regime::Concurrent { .. } => unreachable!("scheme checked above"),
    };
    let (w2, w3, w4) = (w * w, w * w * w, w * w * w * w);

    let n2 = k1s * sn * sn / w2;
    let n3 = k1s * k2s * half * half / w4;
    // κ2² - κ1² cos Ωt  ->  Ω² + κ1²(1 - cos Ωt);  κ1² cosh ζt - κ2²  ->  ζ² + κ1²(cosh ζt - 1)
    let lead = w2 + k1s * half;
    let var1 = 1.0 + 2.0 * k1s * half * (2.0 * w2 + k1s * half) / w4;
    Ok(CascadedTerms {
        n: [n2 + n3, n2, n3],
        var: [var1, 1.0 + 2.0 * n2, 1.0 + 2.0 * n3],
        cov12: 2.0 * k1 * sn * lead / w3,
        cov13: 2.0 * k1 * k2 * lead * half / w4,
        cov23: 2.0 * k1s * k2 * sn * half / w3,
    })
}

/// Mean photon numbers `(⟨n1⟩, ⟨n2⟩, ⟨n3⟩)` of the cascaded scheme.
pub fn cascaded_intensities(p: &AnalyticParams, t: f64) -> Result<[f64; 3], AnalyticError> {
    Ok(cascaded_terms(p, t)?.n)
}

/// Exact moment table of the cascaded scheme.
///
/// Sign pattern: `V(Y1,Y2) = -V(X1,X2)`, `V(Y1,Y3) = -V(X1,X3)`, `V(Y2,Y3) = +V(X2,X3)`.
pub fn cascaded_moment_table(p: &AnalyticParams, t: f64) -> Result<MomentTable, AnalyticError> {
    let c = cascaded_terms(p, t)?;
    Ok(table_from_covariances(
        c.var,
        c.n,
        [c.cov12, c.cov13, c.cov23],
        [-1.0, -1.0, 1.0],
    ))
}

/// Exact moment table of the concurrent scheme.
///
/// Sign pattern: `V(Y1,Y2) = -V(X1,X2)`, `V(Y1,Y3) = +V(X1,X3)`, `V(Y2,Y3) = -V(X2,X3)`.
pub fn concurrent_moment_table(p: &AnalyticParams, t: f64) -> Result<MomentTable, AnalyticError> {
    require(p, Scheme::Concurrent)?;
    check_time(t)?;
    let (g1, g2) = (p.coupling1, p.coupling2);
    let omega = g1.hypot(g2);
    let x = omega * t;
    let sh2 = x.sinh().powi(2);
    let sh2x = (2.0 * x).sinh();
    let n = [
        g1 * g1 * sh2 / (omega * omega),
        sh2,
        g2 * g2 * sh2 / (omega * omega),
    ];
    let var = n.map(|nj| 1.0 + 2.0 * nj);
    let cov = [
        g1 * sh2x / omega,
        2.0 * g1 * g2 * sh2 / (omega * omega),
        g2 * sh2x / omega,
    ];
    Ok(table_from_covariances(var, n, cov, [-1.0, 1.0, -1.0]))
}

fn table_from_covariances(
    var: [f64; 3],
    n: [f64; 3],
    cov: [f64; 3],
    y_sign: [f64; 3],
) -> MomentTable {
    let mut cov_x = [[0.0; 3]; 3];
    let mut cov_y = [[0.0; 3]; 3];
    for (idx, (j, k)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        cov_x[j][k] = cov[idx];
        cov_x[k][j] = cov[idx];
        cov_y[j][k] = y_sign[idx] * cov[idx];
        cov_y[k][j] = y_sign[idx] * cov[idx];
    }
    MomentTable::from_exact_covariances(var, var, cov_x, cov_y, n)
}

/// Closed-form criteria of the concurrent scheme with equal couplings `γ1 = γ2 = gamma`:
/// `V12 = V23 = 5 + 9 sinh²Ωt - 3√2 sinh 2Ωt`, `V13 = 5 + 6 sinh²Ωt - 2√2 sinh 2Ωt`,
/// with `Ω = √2 γ`.
pub fn concurrent_vlf_closed_form(gamma: f64, t: f64) -> Result<CriteriaReport, AnalyticError> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(AnalyticError::BadCoupling {
            name: "gamma",
            value: gamma,
        });
    }
    check_time(t)?;
    let x = std::f64::consts::SQRT_2 * gamma * t;
    let sh2 = x.sinh().powi(2);
    let sh2x = (2.0 * x).sinh();
    let r2 = std::f64::consts::SQRT_2;
    let v12 = 5.0 + 9.0 * sh2 - 3.0 * r2 * sh2x;
    let v13 = 5.0 + 6.0 * sh2 - 2.0 * r2 * sh2x;
    Ok(CriteriaReport::exact([v12, v13, v12]))
}

/// `Ωt` at which the equal-coupling concurrent `V12` is smallest: `acosh(√2)`.
pub fn concurrent_optimal_omega_t() -> f64 {
    std::f64::consts::SQRT_2.acosh()
}
