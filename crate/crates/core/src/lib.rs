//! Numerical toolkit for non-Hermitian Hamiltonians with time-dependent metrics.
//!
//! The crate solves the time-dependent Dyson relation
//! `h = η H η⁻¹ + i η̇ η⁻¹` and the time-dependent quasi-Hermiticity relation
//! `H† ρ − ρ H = i ρ̇`, builds the unitary evolution `U(t,t') = η⁻¹(t) u(t,t') η(t')`
//! and ships two solvable models: an oscillator with linear terms on a truncated
//! Fock space and the single-site time-dependent Yang–Lee spin chain.
//!
//! ħ = 1 throughout.

pub mod densemat;
pub mod error;
pub mod oscillator;
pub mod propagator;
pub mod quadrature;
pub mod relations;
pub mod spinchain;
pub mod timefn;

pub use densemat::{ComplexMatrix, EigenDecomposition, C64};
pub use error::{Error, Result};
pub use propagator::{TimeGrid, Trajectory};
pub use timefn::TimeFunction;

/// Default tolerance for Hermiticity and positivity gates.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Margin kept between grid points and singular times of tan/sec coefficients.
pub const SINGULARITY_MARGIN: f64 = 1e-2;
