//! Photon-number combinations left invariant by the travelling-wave interactions.

use super::ensemble::{EnsembleResult, Estimate};
use super::system::{Interaction, PhaseSpacePoint};
use super::SdeError;
use crate::model::SystemSpec;

/// Labels of the three charges, per interaction.
pub fn charge_labels(interaction: Interaction) -> [&'static str; 3] {
    match interaction {
        Interaction::Cascaded => ["n_a1+n_b1", "n_a3+n_b2", "n_a2+n_b1+n_a3"],
        Interaction::Concurrent => ["n_a1+n_b1", "n_a3+n_b2", "n_a2+n_b1+n_b2"],
    }
}

/// Single-sample values of the three charges (real parts of `α⁺α`, `β⁺β`).
pub fn charge_values(interaction: Interaction, p: &PhaseSpacePoint) -> [f64; 3] {
    let n = |j: usize| (p.ap(j) * p.a(j)).re;
    let nb = |j: usize| (p.bp(j) * p.b(j)).re;
    match interaction {
        Interaction::Cascaded => [n(0) + nb(0), n(2) + nb(1), n(1) + nb(0) + n(2)],
        Interaction::Concurrent => [n(0) + nb(0), n(2) + nb(1), n(1) + nb(0) + nb(1)],
    }
}

/// Drift of each charge away from its starting value.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeReport {
    pub labels: [&'static str; 3],
    pub initial: [f64; 3],
    pub abscissae: Vec<f64>,
    /// `mean(ξ) − initial` with the standard error of `mean(ξ)`.
    pub residuals: Vec<[Estimate; 3]>,
    /// Largest `|residual| / se` over all sample points, per charge.
    pub max_z: [f64; 3],
}

impl ChargeReport {
    /// True when every residual lies within `k` standard errors.
    pub fn flat_within(&self, k: f64) -> bool {
        self.max_z.iter().all(|&z| z <= k)
    }
}

/// Compares every sampled charge mean with its value at the start.
///
/// Only meaningful for travelling-wave kinds; cavity kinds are rejected since
/// drives and losses change the photon numbers.
pub fn conserved_charges(
    spec: &SystemSpec,
    result: &EnsembleResult,
) -> Result<ChargeReport, SdeError> {
    if spec.kind().is_cavity() {
        return Err(SdeError::UnsupportedKind(spec.kind()));
    }
    let initial = charge_values(result.interaction, &result.start);
    let mut max_z = [0.0f64; 3];
    let residuals = result
        .samples
        .iter()
        .map(|s| {
            std::array::from_fn(|k| {
                let q = s.charges[k];
                max_z[k] = max_z[k].max(q.z_score(initial[k]));
                Estimate {
                    mean: q.mean - initial[k],
                    se: q.se,
                }
            })
        })
        .collect();
    Ok(ChargeReport {
        labels: charge_labels(result.interaction),
        initial,
        abscissae: result.samples.iter().map(|s| s.abscissa).collect(),
        residuals,
        max_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemKind;
    use crate::ppsde::{run_ensemble, EnsembleConfig, IntegrationGrid};

    #[test]
    fn zero_coupling_residuals_vanish() {
        let spec =
            SystemSpec::travelling_wave(SystemKind::CascadedTW, 0.0, 0.0, 30.0, 40.0).unwrap();
        let grid = IntegrationGrid::for_spec(&spec, 0.02, 1e-3).unwrap();
        let res = run_ensemble(
            &spec,
            &grid,
            &EnsembleConfig::new(64, 3),
            &grid.even_samples(3),
        )
        .unwrap();
        let report = conserved_charges(&spec, &res).unwrap();
        assert_eq!(report.initial, [900.0, 1600.0, 900.0]);
        assert_eq!(report.max_z, [0.0; 3]);
        assert!(report.residuals.iter().flatten().all(|r| r.mean == 0.0));
    }

    #[test]
    fn charge_values_by_hand() {
        let p = PhaseSpacePoint::classical(
            [num_complex::Complex64::new(1.0, 0.5); 3],
            [num_complex::Complex64::new(3.0, -1.0); 2],
        );
        assert_eq!(
            charge_values(Interaction::Cascaded, &p),
            [1.25 + 10.0, 11.25, 1.25 + 10.0 + 1.25]
        );
        assert_eq!(
            charge_values(Interaction::Concurrent, &p),
            [11.25, 11.25, 21.25]
        );
    }
}
