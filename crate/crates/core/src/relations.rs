//! Residuals and constructors for the time-dependent Dyson and quasi-Hermiticity relations.
//!
//! With ħ = 1:
//!
//! ```text
//! Dyson:             h = η H η⁻¹ + i η̇ η⁻¹
//! quasi-Hermiticity: H† ρ − ρ H = i ρ̇,     ρ = η† η
//! observables:       O = η⁻¹ o η
//! ```

use crate::densemat::{hermitian_eigen, inner, ComplexMatrix, C64, I};
use crate::error::{Error, Result};

/// Smallest admissible eigenvalue of `η†η` for inversion.
pub const ETA_INVERSION_FLOOR: f64 = 1e-12;

/// Non-Hermitian Hamiltonian together with a Dyson map and its time derivative.
#[derive(Debug, Clone)]
pub struct OperatorTriple {
    pub hamiltonian: ComplexMatrix,
    pub eta: ComplexMatrix,
    pub eta_dot: ComplexMatrix,
}

impl OperatorTriple {
    pub fn new(hamiltonian: ComplexMatrix, eta: ComplexMatrix, eta_dot: ComplexMatrix) -> Result<Self> {
        let d = hamiltonian.dim();
        for m in [&eta, &eta_dot] {
            if m.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: m.dim() });
            }
        }
        Ok(OperatorTriple { hamiltonian, eta, eta_dot })
    }
}

/// Metric operator and its time derivative.
#[derive(Debug, Clone)]
pub struct MetricPair {
    pub rho: ComplexMatrix,
    pub rho_dot: ComplexMatrix,
}

impl MetricPair {
    /// `ρ = η†η` and `ρ̇ = η̇†η + η†η̇`.
    pub fn from_dyson(eta: &ComplexMatrix, eta_dot: &ComplexMatrix) -> Self {
        let ead = eta.adjoint();
        MetricPair {
            rho: &ead * eta,
            rho_dot: &(&eta_dot.adjoint() * eta) + &(&ead * eta_dot),
        }
    }
}

/// `η⁻¹ = (η†η)⁻¹ η†`, with `η†η` inverted through its eigendecomposition.
pub fn invert_eta(eta: &ComplexMatrix) -> Result<ComplexMatrix> {
    let gram = &eta.adjoint() * eta;
    let tol = 1e-8 * gram.frobenius_norm().max(1.0);
    let eig = hermitian_eigen(&gram, tol)?;
    let min_eigenvalue = eig.min_eigenvalue();
    if min_eigenvalue <= ETA_INVERSION_FLOOR {
        return Err(Error::SingularEta { min_eigenvalue });
    }
    Ok(&eig.map_spectrum(|x| C64::new(1.0 / x, 0.0)) * &eta.adjoint())
}

/// `η H η⁻¹ + i η̇ η⁻¹`.
pub fn hermitian_counterpart(triple: &OperatorTriple) -> Result<ComplexMatrix> {
    let inv = invert_eta(&triple.eta)?;
    Ok(counterpart_with_inverse(triple, &inv))
}

fn counterpart_with_inverse(triple: &OperatorTriple, inv: &ComplexMatrix) -> ComplexMatrix {
    let conj = &(&triple.eta * &triple.hamiltonian) * inv;
    let gauge = (&triple.eta_dot * inv).scale(I);
    &conj + &gauge
}

/// `h − η H η⁻¹ − i η̇ η⁻¹`; vanishes iff the triple satisfies the Dyson relation with `h`.
pub fn dyson_residual(h: &ComplexMatrix, triple: &OperatorTriple) -> Result<ComplexMatrix> {
    if h.dim() != triple.hamiltonian.dim() {
        return Err(Error::DimensionMismatch { expected: triple.hamiltonian.dim(), found: h.dim() });
    }
    Ok(h - &hermitian_counterpart(triple)?)
}

/// `H† ρ − ρ H − i ρ̇`; vanishes iff the pair satisfies the quasi-Hermiticity relation.
pub fn quasi_residual(hamiltonian: &ComplexMatrix, pair: &MetricPair) -> Result<ComplexMatrix> {
    let d = hamiltonian.dim();
    for m in [&pair.rho, &pair.rho_dot] {
        if m.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.dim() });
        }
    }
    let lhs = &(&hamiltonian.adjoint() * &pair.rho) - &(&pair.rho * hamiltonian);
    Ok(&lhs - &pair.rho_dot.scale(I))
}

/// Quasi-Hermiticity residual with `ρ = η†η` substituted.
pub fn quasi_residual_from_dyson(hamiltonian: &ComplexMatrix, eta: &ComplexMatrix, eta_dot: &ComplexMatrix) -> Result<ComplexMatrix> {
    quasi_residual(hamiltonian, &MetricPair::from_dyson(eta, eta_dot))
}

/// `ρ = η†η`.
pub fn metric_of(eta: &ComplexMatrix) -> ComplexMatrix {
    &eta.adjoint() * eta
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapDirection {
    /// `o ↦ η⁻¹ o η` (Hermitian system to non-Hermitian system)
    Forward,
    /// `O ↦ η O η⁻¹`
    Inverse,
}

pub fn observable_map(o: &ComplexMatrix, eta: &ComplexMatrix, direction: MapDirection) -> Result<ComplexMatrix> {
    if o.dim() != eta.dim() {
        return Err(Error::DimensionMismatch { expected: eta.dim(), found: o.dim() });
    }
    let inv = invert_eta(eta)?;
    Ok(match direction {
        MapDirection::Forward => &(&inv * o) * eta,
        MapDirection::Inverse => &(eta * o) * &inv,
    })
}

/// `H̃ = H + i η⁻¹ η̇`, the quasi-Hermitian partner of `h` that does not generate the evolution.
pub fn quasi_hermitian_partner(triple: &OperatorTriple) -> Result<ComplexMatrix> {
    let inv = invert_eta(&triple.eta)?;
    Ok(&triple.hamiltonian + &(&inv * &triple.eta_dot).scale(I))
}

/// `⟨ψ|ρ φ⟩`.
pub fn rho_inner(psi: &[C64], phi: &[C64], rho: &ComplexMatrix) -> Result<C64> {
    if psi.len() != rho.dim() || phi.len() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: psi.len().max(phi.len()) });
    }
    Ok(inner(psi, &rho.mul_vec(phi)))
}
