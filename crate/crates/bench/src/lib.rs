//! Shared fixtures for the benchmarks.

use twinchi2_core::model::{SystemKind, SystemSpec};

/// Travelling-wave system at the reference scale: `χ = 10⁻²`, `β(0) = 10³`.
pub fn travelling_wave(kind: SystemKind) -> SystemSpec {
    SystemSpec::travelling_wave(kind, 0.01, 0.01, 1000.0, 1000.0).expect("valid reference spec")
}

/// Symmetric cavity with unit losses.
pub fn cavity(kind: SystemKind, eps: f64) -> SystemSpec {
    SystemSpec::symmetric_cavity(kind, 0.01, 0.01, eps, eps, 1.0, 1.0).expect("valid reference spec")
}
