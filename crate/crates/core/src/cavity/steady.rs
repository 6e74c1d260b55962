use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use super::classical::{classical_equations, CavityModel};
use super::linear::{linearize_model, LinearizedModel};
use super::CavityError;
use crate::model::{SystemKind, SystemSpec};
use crate::ppsde::PhaseSpacePoint;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    BelowThreshold,
    AboveThreshold,
}

/// Which root [`find_steady_state`] should return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchHint {
    /// The zero-signal root, stable or not.
    Below,
    /// A converged nonzero-signal root.
    Above,
    /// The dynamically stable root, preferring the zero-signal one.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub a: [Complex64; 3],
    pub b: [Complex64; 2],
    pub branch: Branch,
    /// Largest classical rate magnitude at the state.
    pub residual: f64,
}

impl SteadyState {
    pub fn point(&self) -> PhaseSpacePoint {
        PhaseSpacePoint::classical(self.a, self.b)
    }

    /// `max(1, largest field magnitude)`.
    pub fn field_scale(&self) -> f64 {
        self.a.iter().chain(&self.b).map(|z| z.norm()).fold(1.0, f64::max)
    }

    /// Residual tolerance for a converged root: `1e-10·max(1, field scale)`.
    pub fn tolerance(&self) -> f64 {
        1e-10 * self.field_scale()
    }
}

/// An analytic steady-state guess and how well it satisfies the equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub label: &'static str,
    pub a: [Complex64; 3],
    pub b: [Complex64; 2],
    /// Classical rates of `(α1, α2, α3)` at the guess.
    pub signal_rates: [Complex64; 3],
    pub residual: f64,
}

fn candidate(model: &CavityModel, label: &'static str, a: [Complex64; 3], b: [Complex64; 2]) -> Candidate {
    let (ra, _) = model.rates(&a, &b);
    Candidate { label, a, b, signal_rates: ra, residual: model.residual(&a, &b) }
}

/// `α = 0`, `β_j = ε_j/κ_j`.
pub fn below_threshold_candidate(model: &CavityModel) -> Candidate {
    let b = [model.eps[0] / model.loss_b[0], model.eps[1] / model.loss_b[1]];
    candidate(model, "below", [ZERO; 3], b)
}

/// Symmetric concurrent cavity parameters `(γ_a, γ_b, χ, ε)`, if the spec has them.
pub(crate) fn symmetric_concurrent(model: &CavityModel) -> Option<(f64, f64, f64, Complex64)> {
    let symmetric = model.kind == SystemKind::ConcurrentCavity
        && model.chi[0] == model.chi[1]
        && model.eps[0] == model.eps[1]
        && model.loss_a.iter().all(|&g| g == model.loss_a[0])
        && model.loss_b[0] == model.loss_b[1];
    symmetric.then_some((model.loss_a[0], model.loss_b[0], model.chi[0], model.eps[0]))
}

/// The two closed-form above-threshold guesses of the symmetric concurrent
/// cavity, for real positive `ε` above the respective threshold:
///
/// * `printed`: `β = γ_a/2χ`, `α2 = √(2(ε−ε_th)/χ)`, `α1 = α3 = √((ε−ε_th)/χ)`;
/// * `corrected`: `β = γ_a/(√2χ)`, `α1 = α3 = √((ε−ε_c)/(√2χ))`, `α2 = √2 α1`.
pub fn above_threshold_candidates(spec: &SystemSpec) -> Result<Vec<Candidate>, CavityError> {
    let model = classical_equations(spec)?;
    let (ga, gb, chi, eps) = symmetric_concurrent(&model).ok_or(CavityError::NotSymmetric)?;
    let e = eps.re;
    let mut out = Vec::new();
    if eps.im != 0.0 {
        return Ok(out);
    }
    let eps_th = ga * gb / (2.0 * chi);
    let eps_c = ga * gb / (std::f64::consts::SQRT_2 * chi);
    let r = |x: f64| Complex64::new(x, 0.0);
    if e > eps_th {
        let a1 = ((e - eps_th) / chi).sqrt();
        let a2 = (2.0 * (e - eps_th) / chi).sqrt();
        let b = ga / (2.0 * chi);
        out.push(candidate(&model, "printed", [r(a1), r(a2), r(a1)], [r(b); 2]));
    }
    if e > eps_c {
        let a1 = ((e - eps_c) / (std::f64::consts::SQRT_2 * chi)).sqrt();
        let b = ga / (std::f64::consts::SQRT_2 * chi);
        out.push(candidate(
            &model,
            "corrected",
            [r(a1), r(std::f64::consts::SQRT_2 * a1), r(a1)],
            [r(b); 2],
        ));
    }
    Ok(out)
}

fn pack(a: &[Complex64; 3], b: &[Complex64; 2]) -> SVector<f64, 10> {
    let mut x = SVector::<f64, 10>::zeros();
    for (k, z) in a.iter().chain(b).enumerate() {
        x[2 * k] = z.re;
        x[2 * k + 1] = z.im;
    }
    x
}

fn unpack(x: &SVector<f64, 10>) -> ([Complex64; 3], [Complex64; 2]) {
    let z = |k: usize| Complex64::new(x[2 * k], x[2 * k + 1]);
    ([z(0), z(1), z(2)], [z(3), z(4)])
}

fn real_rates(model: &CavityModel, x: &SVector<f64, 10>) -> SVector<f64, 10> {
    let (a, b) = unpack(x);
    let (ra, rb) = model.rates(&a, &b);
    pack(&ra, &rb)
}

/// Damped Newton iteration on the real form of the classical equations.
///
/// The real Jacobian follows from the doubled one: for field `k` with doubled
/// columns `k`, `k⁺`, `∂f/∂Re z_k = A[·][k] + A[·][k⁺]` and
/// `∂f/∂Im z_k = i(A[·][k] − A[·][k⁺])`. Steps solve the linear system by SVD,
/// so the singular direction of a phase-symmetric root is simply left alone.
pub(crate) fn newton(
    model: &CavityModel,
    a0: [Complex64; 3],
    b0: [Complex64; 2],
) -> Option<([Complex64; 3], [Complex64; 2], f64)> {
    let mut x = pack(&a0, &b0);
    let mut f = real_rates(model, &x);
    for _ in 0..100 {
        let (a, b) = unpack(&x);
        let scale = a.iter().chain(&b).map(|z| z.norm()).fold(1.0, f64::max);
        let res = f.amax();
        if res < 1e-12 * scale {
            return Some((a, b, model.residual(&a, &b)));
        }
        let doubled = model.jacobian(&PhaseSpacePoint::classical(a, b));
        let mut jac = SMatrix::<f64, 10, 10>::zeros();
        for (fi, row) in [0usize, 2, 4, 6, 8].into_iter().enumerate() {
            for (k, col) in [0usize, 2, 4, 6, 8].into_iter().enumerate() {
                let d_re = doubled[row][col] + doubled[row][col + 1];
                let d_im = Complex64::new(0.0, 1.0) * (doubled[row][col] - doubled[row][col + 1]);
                jac[(2 * fi, 2 * k)] = d_re.re;
                jac[(2 * fi + 1, 2 * k)] = d_re.im;
                jac[(2 * fi, 2 * k + 1)] = d_im.re;
                jac[(2 * fi + 1, 2 * k + 1)] = d_im.im;
            }
        }
        let svd = jac.svd(true, true);
        let cutoff = 1e-12 * svd.singular_values.max();
        let step = svd.solve(&(-f), cutoff).ok()?;
        let mut lambda = 1.0;
        loop {
            let trial = x + step * lambda;
            let ft = real_rates(model, &trial);
            if ft.amax() < res || lambda < 1e-6 {
                x = trial;
                f = ft;
                break;
            }
            lambda *= 0.5;
        }
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    let (a, b) = unpack(&x);
    let residual = model.residual(&a, &b);
    let scale = a.iter().chain(&b).map(|z| z.norm()).fold(1.0, f64::max);
    (residual < 1e-10 * scale).then_some((a, b, residual))
}

fn signal_free(a: &[Complex64; 3], scale: f64) -> bool {
    a.iter().all(|z| z.norm() <= 1e-9 * scale)
}

/// Every root reached from the analytic seeds, below-threshold root first.
pub fn steady_state_roots(spec: &SystemSpec) -> Result<Vec<SteadyState>, CavityError> {
    let model = classical_equations(spec)?;
    let below = below_threshold_candidate(&model);
    let mut roots = vec![SteadyState { a: [ZERO; 3], b: below.b, branch: Branch::BelowThreshold, residual: below.residual }];
    let seeds = match symmetric_concurrent(&model) {
        Some(_) => above_threshold_candidates(spec)?,
        None => Vec::new(),
    };
    for seed in seeds {
        if let Some((a, b, residual)) = newton(&model, seed.a, seed.b) {
            let scale = a.iter().chain(&b).map(|z| z.norm()).fold(1.0, f64::max);
            if signal_free(&a, scale) {
                continue;
            }
            let duplicate = roots.iter().any(|r| {
                r.a.iter().zip(&a).chain(r.b.iter().zip(&b)).all(|(x, y)| (x - y).norm() <= 1e-8 * scale)
            });
            if !duplicate {
                roots.push(SteadyState { a, b, branch: Branch::AboveThreshold, residual });
            }
        }
    }
    Ok(roots)
}

/// Finds a steady state by Newton iteration from the analytic candidates.
///
/// With [`BranchHint::Auto`] the first dynamically stable root is returned;
/// if none is, the error lists the eigenvalues of each root.
pub fn find_steady_state(spec: &SystemSpec, hint: BranchHint) -> Result<SteadyState, CavityError> {
    let roots = steady_state_roots(spec)?;
    match hint {
        BranchHint::Below => Ok(roots[0]),
        BranchHint::Above => roots
            .iter()
            .find(|r| r.branch == Branch::AboveThreshold)
            .copied()
            .ok_or(CavityError::NoRoot),
        BranchHint::Auto => {
            let model = classical_equations(spec)?;
            let mut report = Vec::new();
            for root in &roots {
                let lin: LinearizedModel = linearize_model(&model, root)?;
                if lin.stable {
                    return Ok(*root);
                }
                report.push((root.branch, lin.eigenvalues.to_vec()));
            }
            Err(CavityError::NoStableRoot(report))
        }
    }
}
