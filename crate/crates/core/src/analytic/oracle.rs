//! Numerical ground truth for the closed forms.
//!
//! Collect `v = (a1, a2, a3, a1†, a2†, a3†)`. The undepleted-pump equations are
//! `dv/dt = L v` with a real 6×6 `L`, so the matrix of ordered second moments
//! `G_ij = ⟨v_i v_j⟩` obeys `dG/dt = L G + G Lᵀ`. Starting from vacuum
//! (`⟨a_j a_k†⟩ = δ_jk`, everything else zero) this is integrated adaptively and
//! the quadrature moments are read off `G`. First moments stay zero.

use super::{AnalyticError, AnalyticParams, Scheme};
use crate::model::MomentTable;
use crate::ode::{integrate, Tolerance};

fn generator(p: &AnalyticParams) -> [[f64; 6]; 6] {
    let (c1, c2) = (p.coupling1, p.coupling2);
    let mut l = [[0.0; 6]; 6];
    // rows 0..3: a_j, rows 3..6: a_j†
    match p.scheme {
        Scheme::Cascaded => {
            l[0][4] = c1; // da1 = κ1 a2†
            l[1][3] = c1; // da2 = κ1 a1† - κ2 a3
            l[1][2] = -c2;
            l[2][1] = c2; // da3 = κ2 a2
        }
        Scheme::Concurrent => {
            l[0][4] = c1; // da1 = γ1 a2†
            l[1][3] = c1; // da2 = γ1 a1† + γ2 a3†
            l[1][5] = c2;
            l[2][4] = c2; // da3 = γ2 a2†
        }
    }
    // conjugate rows: same real coefficients with daggers swapped
    for j in 0..3 {
        for k in 0..6 {
            let swapped = (k + 3) % 6;
            l[j + 3][swapped] = l[j][k];
        }
    }
    l
}

/// Integrates the second-moment equations from vacuum to time `t`.
///
/// Works for any couplings, including the degenerate cascade `κ1 = κ2`.
pub fn moment_ode_oracle(p: &AnalyticParams, t: f64) -> Result<MomentTable, AnalyticError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(AnalyticError::BadTime(t));
    }
    let l = generator(p);
    let mut g0 = [0.0; 36];
    for j in 0..3 {
        g0[j * 6 + j + 3] = 1.0;
    }
    let rhs = |_t: f64, g: &[f64], dg: &mut [f64]| {
        for i in 0..6 {
            for j in 0..6 {
                let mut acc = 0.0;
                for k in 0..6 {
                    acc += l[i][k] * g[k * 6 + j] + g[i * 6 + k] * l[j][k];
                }
                dg[i * 6 + j] = acc;
            }
        }
    };
    let (g, _stats) = integrate(rhs, &g0, t, Tolerance::default())?;
    let at = |i: usize, j: usize| g[i * 6 + j];

    let mut table = MomentTable::vacuum();
    for j in 0..3 {
        for k in 0..3 {
            let aa = at(j, k);
            let aad = at(j, k + 3);
            let ada = at(j + 3, k);
            let adad = at(j + 3, k + 3);
            // symmetric operator products; the diagonal is shifted to normal order below
            table.second_xx[j][k] = aa + aad + ada + adad;
            table.second_yy[j][k] = -(aa - aad - ada + adad);
        }
        table.second_xx[j][j] -= 1.0;
        table.second_yy[j][j] -= 1.0;
        table.intensity[j] = at(j + 3, j);
    }
    Ok(table)
}
