use num_complex::Complex64;
use rayon::prelude::*;

use super::classical::classical_equations;
use super::linear::{linearize_model, CMatrix, LinearizedModel};
use super::steady::{below_threshold_candidate, symmetric_concurrent, Branch, SteadyState};
use super::CavityError;
use crate::model::SystemSpec;
use crate::ppsde::N_VARS;

/// Output spectral criteria over a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSeries {
    pub omega: Vec<f64>,
    pub s12: Vec<f64>,
    pub s13: Vec<f64>,
    pub s23: Vec<f64>,
    /// Output amplitude-quadrature spectra of the signal modes; vacuum is 1.
    pub x: [Vec<f64>; 3],
    /// Output phase-quadrature spectra of the signal modes.
    pub y: [Vec<f64>; 3],
    /// Pump amplitude-quadrature spectra, coupled out through `κ_j`. Which
    /// loss rate belongs here is a convention, so treat these as indicative.
    pub pump_x: [Vec<f64>; 2],
    /// Largest imaginary part discarded from any spectral value.
    pub max_imag: f64,
    /// The linearization is close to an instability.
    pub marginal: bool,
}

impl SpectrumSeries {
    pub fn criteria_at(&self, k: usize) -> [f64; 3] {
        [self.s12[k], self.s13[k], self.s23[k]]
    }

    /// At least two of the three criteria below 4 at sample `k`.
    pub fn entangled_at(&self, k: usize) -> bool {
        self.criteria_at(k).iter().filter(|&&s| s < 4.0).count() >= 2
    }
}

/// 401 points on `[-10, 10]` in units of the loss rate.
pub fn default_omega_grid() -> Vec<f64> {
    (0..=400).map(|k| -10.0 + 0.05 * k as f64).collect()
}

/// Quadrature read-out vector over the doubled variables plus its vacuum level.
///
/// `cx`, `cy` weight the `X` and `Y` quadratures of the signal modes. An output
/// quadrature couples through `√(2γ_j)`, so `vᵀ S v` is the normally ordered
/// part scaled by `2√(γ_iγ_j)`.
fn readout(gamma: &[f64; 3], cx: [f64; 3], cy: [f64; 3]) -> ([Complex64; N_VARS], f64) {
    let mut v = [Complex64::new(0.0, 0.0); N_VARS];
    let mut vacuum = 0.0;
    for j in 0..3 {
        let s = (2.0 * gamma[j]).sqrt();
        v[2 * j] += Complex64::new(cx[j] * s, -cy[j] * s);
        v[2 * j + 1] += Complex64::new(cx[j] * s, cy[j] * s);
        vacuum += cx[j] * cx[j] + cy[j] * cy[j];
    }
    (v, vacuum)
}

fn quadratic(s: &CMatrix, v: &[Complex64; N_VARS]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..N_VARS {
        if v[i] == Complex64::new(0.0, 0.0) {
            continue;
        }
        for j in 0..N_VARS {
            acc += v[i] * s[(i, j)] * v[j];
        }
    }
    acc
}

struct Point {
    crit: [f64; 3],
    x: [f64; 3],
    y: [f64; 3],
    pump_x: [f64; 2],
    max_imag: f64,
}

/// `S(ω) = (A + iω)⁻¹ D (Aᵀ − iω)⁻¹` and the output spectra built from it.
///
/// The model must be stable; each frequency is solved by LU independently.
pub fn spectrum(model: &LinearizedModel, spec: &SystemSpec, omegas: &[f64]) -> Result<SpectrumSeries, CavityError> {
    if !model.stable {
        return Err(CavityError::Unstable(model.eigenvalues.to_vec()));
    }
    let (gamma, kappa) = spec.losses().ok_or(CavityError::NotCavity(spec.kind()))?;
    let a = model.drift_matrix();
    let d = model.diffusion_matrix();
    let at = a.transpose();
    let eye = CMatrix::identity();

    let (ysum, ysum_vac) = readout(&gamma, [0.0; 3], [1.0; 3]);
    let xdiff: Vec<_> = [[1.0, -1.0, 0.0], [1.0, 0.0, -1.0], [0.0, 1.0, -1.0]]
        .into_iter()
        .map(|c| readout(&gamma, c, [0.0; 3]))
        .collect();
    let unit = |j: usize| {
        let mut c = [0.0; 3];
        c[j] = 1.0;
        c
    };
    let xs: Vec<_> = (0..3).map(|j| readout(&gamma, unit(j), [0.0; 3])).collect();
    let ys: Vec<_> = (0..3).map(|j| readout(&gamma, [0.0; 3], unit(j))).collect();
    let pumps: Vec<_> = (0..2)
        .map(|j| {
            let mut v = [Complex64::new(0.0, 0.0); N_VARS];
            let s = Complex64::new((2.0 * kappa[j]).sqrt(), 0.0);
            v[6 + 2 * j] = s;
            v[7 + 2 * j] = s;
            v
        })
        .collect();

    let points: Vec<Result<Point, CavityError>> = omegas
        .par_iter()
        .map(|&w| {
            let iw = Complex64::new(0.0, w);
            let left = (a + eye * iw).lu().try_inverse().ok_or(CavityError::Singular(w))?;
            let right = (at - eye * iw).lu().try_inverse().ok_or(CavityError::Singular(w))?;
            let s = left * d * right;
            let mut max_imag: f64 = 0.0;
            let mut real = |z: Complex64| {
                max_imag = max_imag.max(z.im.abs());
                z.re
            };
            let y = quadratic(&s, &ysum);
            let mut crit = [0.0; 3];
            for (k, (v, vac)) in xdiff.iter().enumerate() {
                crit[k] = vac + ysum_vac + real(quadratic(&s, v) + y);
            }
            let mut x = [0.0; 3];
            let mut yq = [0.0; 3];
            for j in 0..3 {
                x[j] = 1.0 + real(quadratic(&s, &xs[j].0));
                yq[j] = 1.0 + real(quadratic(&s, &ys[j].0));
            }
            let mut pump_x = [0.0; 2];
            for j in 0..2 {
                pump_x[j] = 1.0 + real(quadratic(&s, &pumps[j]));
            }
            if !crit.iter().chain(&x).chain(&yq).all(|v| v.is_finite()) {
                return Err(CavityError::Singular(w));
            }
            Ok(Point { crit, x, y: yq, pump_x, max_imag })
        })
        .collect();

    let n = omegas.len();
    let mut out = SpectrumSeries {
        omega: omegas.to_vec(),
        s12: Vec::with_capacity(n),
        s13: Vec::with_capacity(n),
        s23: Vec::with_capacity(n),
        x: Default::default(),
        y: Default::default(),
        pump_x: Default::default(),
        max_imag: 0.0,
        marginal: model.marginal,
    };
    for p in points {
        let p = p?;
        out.s12.push(p.crit[0]);
        out.s13.push(p.crit[1]);
        out.s23.push(p.crit[2]);
        for j in 0..3 {
            out.x[j].push(p.x[j]);
            out.y[j].push(p.y[j]);
        }
        for j in 0..2 {
            out.pump_x[j].push(p.pump_x[j]);
        }
        out.max_imag = out.max_imag.max(p.max_imag);
    }
    Ok(out)
}

/// Closed-form `(S12, S13)` of the symmetric concurrent cavity below threshold;
/// `S23 = S12`.
pub fn closed_form_spectra(
    gamma_a: f64,
    gamma_b: f64,
    chi: f64,
    eps: f64,
    omega: f64,
) -> Result<(f64, f64), CavityError> {
    let (ga, gb, w) = (gamma_a, gamma_b, omega);
    let ce = chi * eps;
    let num = ga * gb * ce * (ga * ga * gb * gb - 3.0 * ga * gb * ce + 2.0 * ce * ce + gb * gb * w * w);
    let den = ga.powi(4) * gb.powi(4)
        + (2.0 * ce * ce + gb * gb * w * w).powi(2)
        + 2.0 * ga * ga * gb * gb * (gb * gb * w * w - 2.0 * ce * ce);
    if den == 0.0 || !den.is_finite() {
        return Err(CavityError::ZeroDenominator);
    }
    Ok((5.0 - 24.0 * num / den, 5.0 - 16.0 * num / den))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Oscillation threshold `γ_aγ_b/2χ`.
    pub eps_th: f64,
    /// Critical point `γ_aγ_b/(√2χ)`.
    pub eps_c: f64,
    /// Pump amplitude where the zero-signal state's leading eigenvalue crosses zero.
    pub eps_crossing: f64,
}

/// Largest eigenvalue real part of the zero-signal state at real drive `eps`.
fn below_threshold_growth(spec: &SystemSpec, eps: f64) -> Result<f64, CavityError> {
    let mut model = classical_equations(spec)?;
    model.eps = [Complex64::new(eps, 0.0); 2];
    let c = below_threshold_candidate(&model);
    let ss = SteadyState { a: c.a, b: c.b, branch: Branch::BelowThreshold, residual: c.residual };
    Ok(linearize_model(&model, &ss)?.max_real_part())
}

/// Threshold pump amplitudes of the symmetric concurrent cavity; the crossing
/// is located by bisection on the leading eigenvalue.
pub fn thresholds(spec: &SystemSpec) -> Result<Thresholds, CavityError> {
    let model = classical_equations(spec)?;
    let (ga, gb, chi, _) = symmetric_concurrent(&model).ok_or(CavityError::NotSymmetric)?;
    let eps_th = ga * gb / (2.0 * chi);
    let eps_c = ga * gb / (std::f64::consts::SQRT_2 * chi);
    let (mut lo, mut hi) = (0.0, eps_th);
    while below_threshold_growth(spec, hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below_threshold_growth(spec, mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Thresholds { eps_th, eps_c, eps_crossing: 0.5 * (lo + hi) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::{find_steady_state, linearize, BranchHint};
    use crate::model::SystemKind;

    fn concurrent(chi: f64, eps: f64) -> SystemSpec {
        SystemSpec::symmetric_cavity(SystemKind::ConcurrentCavity, chi, chi, eps, eps, 1.0, 1.0).unwrap()
    }

    fn series(spec: &SystemSpec, hint: BranchHint, omegas: &[f64]) -> SpectrumSeries {
        let ss = find_steady_state(spec, hint).unwrap();
        spectrum(&linearize(spec, &ss).unwrap(), spec, omegas).unwrap()
    }

    #[test]
    fn closed_form_reference_values() {
        let (s12, s13) = closed_form_spectra(1.0, 1.0, 0.01, 45.0, 0.0).unwrap();
        assert!((s12 - 3.322152390367907).abs() < 1e-12);
        assert!((s13 - 3.881434926911938).abs() < 1e-12);
        let (s12, s13) = closed_form_spectra(1.0, 1.0, 0.01, 45.0, 0.7).unwrap();
        assert!((s12 - 2.0137365076546456).abs() < 1e-12);
        assert!((s13 - 3.009157671769764).abs() < 1e-12);
        assert_eq!(closed_form_spectra(1.0, 1.0, 0.01, 0.0, 1.3).unwrap(), (5.0, 5.0));
        let (s12, s13) = closed_form_spectra(1.0, 1.0, 0.01, 45.0, 1e6).unwrap();
        assert!((s12 - 5.0).abs() < 1e-9 && (s13 - 5.0).abs() < 1e-9);
        assert_eq!(closed_form_spectra(0.0, 1.0, 0.01, 0.0, 0.0), Err(CavityError::ZeroDenominator));
    }

    #[test]
    fn pipeline_matches_closed_form() {
        let omegas: Vec<f64> = (0..=40).map(|k| k as f64 * 0.125).collect();
        for eps in [15.0, 30.0, 45.0] {
            let s = series(&concurrent(0.01, eps), BranchHint::Below, &omegas);
            for (k, &w) in omegas.iter().enumerate() {
                let (c12, c13) = closed_form_spectra(1.0, 1.0, 0.01, eps, w).unwrap();
                assert!((s.s12[k] - c12).abs() < 1e-8, "ε={eps} ω={w}");
                assert!((s.s13[k] - c13).abs() < 1e-8, "ε={eps} ω={w}");
                assert!((s.s23[k] - c12).abs() < 1e-8);
            }
            assert!(s.max_imag < 1e-12);
        }
    }

    #[test]
    fn parity_and_vacuum_limit() {
        let spec = SystemSpec::symmetric_cavity(SystemKind::CascadedCavity, 0.01, 0.01, 90.0, 90.0, 1.0, 1.0).unwrap();
        let omegas = [-3.0, -0.5, 0.5, 3.0, 1e5];
        let s = series(&spec, BranchHint::Auto, &omegas);
        for (i, j) in [(0, 3), (1, 2)] {
            assert!((s.s12[i] - s.s12[j]).abs() < 1e-12);
            assert!((s.s13[i] - s.s13[j]).abs() < 1e-12);
            assert!((s.s23[i] - s.s23[j]).abs() < 1e-12);
        }
        for v in s.criteria_at(4) {
            assert!((v - 5.0).abs() < 1e-6);
        }
        assert!(s.max_imag < 1e-12);
    }

    #[test]
    fn cascaded_figure_parameters_entangle() {
        let spec = SystemSpec::symmetric_cavity(SystemKind::CascadedCavity, 0.01, 0.01, 90.0, 90.0, 1.0, 1.0).unwrap();
        let s = series(&spec, BranchHint::Auto, &default_omega_grid());
        assert!((0..s.omega.len()).any(|k| s.entangled_at(k)));
        let at0 = s.criteria_at(200);
        assert!((at0[0] - 3.6248).abs() < 1e-3, "{at0:?}");
        assert!(!s.marginal);
    }

    #[test]
    fn unstable_model_is_rejected() {
        let spec = concurrent(0.01, 100.0);
        let ss = find_steady_state(&spec, BranchHint::Below).unwrap();
        let lin = linearize(&spec, &ss).unwrap();
        assert!(matches!(spectrum(&lin, &spec, &[0.0]), Err(CavityError::Unstable(_))));
    }

    #[test]
    fn threshold_values() {
        let t = thresholds(&concurrent(0.01, 45.0)).unwrap();
        assert!((t.eps_th - 50.0).abs() < 1e-12);
        assert!((t.eps_c - 70.71067811865476).abs() < 1e-10);
        assert!((t.eps_crossing - t.eps_c).abs() < 1e-6 * t.eps_c);
        let t2 = thresholds(&concurrent(0.02, 45.0)).unwrap();
        assert!((t2.eps_th - 25.0).abs() < 1e-12 && (t2.eps_c - t.eps_c / 2.0).abs() < 1e-10);
    }
}
