//! Shared fixtures for the criterion benchmarks.

use qh_core::densemat::{ComplexMatrix, C64};
use qh_core::oscillator::OscillatorParams;
use qh_core::spinchain::{ClosedSolutionFamily, FamilyKind};
use qh_core::{TimeFunction, TimeGrid};

/// Deterministic dense Hermitian matrix with spread-out spectrum.
pub fn hermitian(dim: usize) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(dim, |i, j| {
        let k = (i * dim + j) as f64;
        C64::new((0.7 * k + 0.3).sin(), (1.3 * k + 0.1).cos())
    });
    a.hermitian_part()
}

/// Single-site chain on the tan family, whose metric stays positive on [0, 1].
pub fn s1_family() -> ClosedSolutionFamily {
    ClosedSolutionFamily::new(FamilyKind::Tan, 1.0)
}

pub fn unit_grid(steps: usize) -> TimeGrid {
    TimeGrid::new(0.0, 1.0, steps).expect("valid grid")
}

/// The bundled oscillator: ω = 1 + 0.2 sin t, α = 0.5i.
pub fn oscillator(dim: usize) -> OscillatorParams {
    OscillatorParams::new(
        TimeFunction::sinusoid(0.2, 1.0, 0.0, 1.0),
        TimeFunction::constant(C64::new(0.0, 0.5)),
        dim,
        C64::new(0.0, 0.0),
    )
}
