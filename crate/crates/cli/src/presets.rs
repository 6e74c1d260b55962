//! Figure presets. Each is an ordinary config; the abscissa ranges are our
//! choice where the figures leave them implicit.

use crate::config::{ExperimentConfig, Pairs, Route};
use crate::CliError;

pub struct Preset {
    pub name: &'static str,
    pub route: Route,
    pub description: &'static str,
    pub config: &'static str,
}

pub const PRESETS: [Preset; 8] = [
    Preset {
        name: "fig1",
        route: Route::Analytic,
        description: "cascaded, κ2 = 1.8κ1, Ωt in [0, 2π]",
        config: "kind=CascadedTW coupling1=1 coupling2=1.8 start=0 end=6.283185307179586 points=201 \
                 abscissa=rate_t se_columns=false",
    },
    Preset {
        name: "fig2",
        route: Route::Analytic,
        description: "cascaded, κ1 = 1.2κ2, ζt in [0, 1.5]",
        config: "kind=CascadedTW coupling1=1.2 coupling2=1 start=0 end=1.5 points=151 abscissa=rate_t se_columns=false",
    },
    Preset {
        name: "fig3",
        route: Route::Sde,
        description: "cascaded stochastic, χ1 = χ2 = 1e-2, β(0) = 1e3, ξ in [0, 1.5]",
        config: "kind=CascadedTW chi1=0.01 chi2=0.01 pump1=1000 pump2=1000 end=1.5 step=0.001 samples=31",
    },
    Preset {
        name: "fig4",
        route: Route::Sde,
        description: "cascaded stochastic, χ2 = 2χ1, ξ in [0, 2], with intensities",
        config: "kind=CascadedTW chi1=0.01 chi2=0.02 pump1=1000 pump2=1000 end=2 step=0.001 samples=41 \
                 intensities=true",
    },
    Preset {
        name: "fig5",
        route: Route::Sde,
        description: "concurrent stochastic, χ = 1e-2, β(0) = 1e3, ξ in [0, 0.4]",
        config: "kind=ConcurrentTW chi1=0.01 chi2=0.01 pump1=1000 pump2=1000 end=0.4 step=0.001 samples=11",
    },
    Preset {
        name: "fig6",
        route: Route::CavitySpectrum,
        description: "cascaded cavity, ε = 0.9γκ/χ, ω in [-10, 10]",
        config: "kind=CascadedCavity chi1=0.01 chi2=0.01 eps1=90 eps2=90",
    },
    Preset {
        name: "fig7",
        route: Route::CavitySpectrum,
        description: "concurrent cavity below threshold, ε = 0.9ε_th, ω in [-10, 10]",
        config: "kind=ConcurrentCavity chi1=0.01 chi2=0.01 eps1=45 eps2=45",
    },
    Preset {
        name: "fig8",
        route: Route::CavitySpectrum,
        description: "concurrent cavity above threshold, ε = 2ε_th, ω grid avoiding 0",
        config: "kind=ConcurrentCavity chi1=0.01 chi2=0.01 eps1=100 eps2=100 omega_min=-9.975 omega_max=9.975 \
                 omega_points=400",
    },
];

/// Raw pairs of a named preset, before any command-line overrides.
pub fn preset_pairs(name: &str) -> Result<(Route, Pairs), CliError> {
    let p = PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| CliError::UnknownPreset(name.to_string()))?;
    let mut pairs = Pairs::default();
    for token in p.config.split_whitespace() {
        let (k, v) = token.split_once('=').expect("preset tokens are key=value");
        pairs.set(k, v)?;
    }
    Ok((p.route, pairs))
}

pub fn preset(name: &str) -> Result<ExperimentConfig, CliError> {
    let (route, pairs) = preset_pairs(name)?;
    ExperimentConfig::from_pairs(route, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_validate() {
        for p in &PRESETS {
            let cfg = preset(p.name).unwrap();
            assert_eq!(cfg.route(), p.route);
        }
        assert!(matches!(preset("fig9"), Err(CliError::UnknownPreset(_))));
    }
}
