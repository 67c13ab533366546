//! Non-Hermitian oscillator with linear terms, `H = ω a†a + α a + β a†`, on a truncated
//! Fock space.
//!
//! The Dyson map is `η = exp(γ a + λ a†)`. On the branch `λ = γ*` with `β = −α*` the
//! exponent `γ` obeys `α + ωγ + iγ̇ = 0`, solved in closed form by
//! `γ(t) = e^{iχ(t)} [γ(0) + i ∫₀ᵗ α(s) e^{−iχ(s)} ds]` with `χ = ∫ ω`.
//! The Hermitian counterpart is then diagonal, `h = ω a†a + f`.

use serde::{Deserialize, Serialize};

use crate::densemat::{expm, hermitian_eigen, ComplexMatrix, EigenDecomposition, C64, I, ONE, ZERO};
use crate::error::{Error, Result};
use crate::propagator::{StateVector, TimeGrid, Trajectory};
use crate::quadrature::{check_estimate, cumulative_simpson_fn, cumulative_simpson_samples, derivative_series, simpson};
use crate::timefn::{Scalar, TimeFunction};

/// Tolerance of the solved-family gate `β = −α*`, `Im ω = 0`.
pub const FAMILY_GATE_TOL: f64 = 1e-12;
/// Largest admissible coherent-state mass beyond the truncation.
pub const TAIL_LIMIT: f64 = 1e-12;
pub const MIN_DIM: usize = 8;

/// Interior block size excluded at the truncation edge by default.
pub fn default_buffer(dim: usize) -> usize {
    10.max(dim / 4)
}

/// Annihilation and creation operators on `|0⟩ … |dim−1⟩`.
pub fn fock_operators(dim: usize) -> (ComplexMatrix, ComplexMatrix) {
    let a = ComplexMatrix::from_fn(dim, |i, j| if j == i + 1 { ONE * (j as f64).sqrt() } else { ZERO });
    let ad = a.adjoint();
    (a, ad)
}

/// Truncated Fock space with cached operators and the eigenbasis of `x`.
///
/// `γa + γ*a† = √2 |γ| R† x R` with `R = diag(e^{inφ})`, `φ = arg γ`, so every Dyson map
/// reuses a single diagonalization.
#[derive(Debug, Clone)]
pub struct FockSpace {
    dim: usize,
    a: ComplexMatrix,
    a_dag: ComplexMatrix,
    x_eigen: EigenDecomposition,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParams(format!("Fock dimension {dim} < 2")));
        }
        let (a, a_dag) = fock_operators(dim);
        let x = (&a + &a_dag).scale_real(std::f64::consts::FRAC_1_SQRT_2);
        let x_eigen = hermitian_eigen(&x, 1e-12)?;
        Ok(FockSpace { dim, a, a_dag, x_eigen })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn a_dagger(&self) -> &ComplexMatrix {
        &self.a_dag
    }

    pub fn number(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&(0..self.dim).map(|n| n as f64).collect::<Vec<_>>())
    }

    /// `x = (a† + a)/√2`
    pub fn x(&self) -> ComplexMatrix {
        (&self.a + &self.a_dag).scale_real(std::f64::consts::FRAC_1_SQRT_2)
    }

    /// `p = i(a† − a)/√2`
    pub fn p(&self) -> ComplexMatrix {
        (&self.a_dag - &self.a).scale(I * std::f64::consts::FRAC_1_SQRT_2)
    }

    /// `exp(γa + γ*a†)`.
    pub fn dyson_map(&self, gamma: C64) -> ComplexMatrix {
        let c = std::f64::consts::SQRT_2 * gamma.norm();
        let m = self.x_eigen.map_spectrum(|x| C64::new((c * x).exp(), 0.0));
        let phi = if gamma == ZERO { 0.0 } else { gamma.arg() };
        let phases: Vec<C64> = (0..self.dim).map(|n| C64::from_polar(1.0, n as f64 * phi)).collect();
        ComplexMatrix::from_fn(self.dim, |j, k| phases[j].conj() * m[(j, k)] * phases[k])
    }

    pub fn dyson_map_inverse(&self, gamma: C64) -> ComplexMatrix {
        self.dyson_map(-gamma)
    }
}

/// `exp(γa + γ*a†)` through the general matrix exponential.
pub fn build_eta(gamma: C64, dim: usize) -> Result<ComplexMatrix> {
    if dim < MIN_DIM {
        return Err(Error::InvalidParams(format!("dim {dim} < {MIN_DIM}")));
    }
    let (a, ad) = fock_operators(dim);
    expm(&(&a.scale(gamma) + &ad.scale(gamma.conj())))
}

fn default_gamma0() -> Scalar {
    Scalar(ZERO)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorParams {
    pub omega: TimeFunction,
    pub alpha: TimeFunction,
    /// Defaults to `−α*`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<TimeFunction>,
    pub dim: usize,
    #[serde(default = "default_gamma0")]
    pub gamma0: Scalar,
}

impl OscillatorParams {
    pub fn new(omega: TimeFunction, alpha: TimeFunction, dim: usize, gamma0: C64) -> Self {
        OscillatorParams { omega, alpha, beta: None, dim, gamma0: Scalar(gamma0) }
    }

    pub fn omega(&self, t: f64) -> C64 {
        self.omega.value(t)
    }

    pub fn alpha(&self, t: f64) -> C64 {
        self.alpha.value(t)
    }

    pub fn beta(&self, t: f64) -> C64 {
        match &self.beta {
            Some(b) => b.value(t),
            None => -self.alpha(t).conj(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < MIN_DIM {
            return Err(Error::InvalidParams(format!("dim {} < {MIN_DIM}", self.dim)));
        }
        Ok(())
    }

    /// Checks `β = −α*` and `Im ω = 0` at every node.
    pub fn check_solved_family(&self, grid: &TimeGrid) -> Result<()> {
        self.validate()?;
        for t in grid.nodes() {
            let w = self.omega(t);
            if w.im.abs() > FAMILY_GATE_TOL || !w.re.is_finite() {
                return Err(Error::InvalidParams(format!("omega not real at t = {t}: {w}")));
            }
            let gap = (self.beta(t) + self.alpha(t).conj()).norm();
            if gap > FAMILY_GATE_TOL {
                return Err(Error::InvalidParams(format!("beta != -conj(alpha) at t = {t} (gap {gap:e})")));
            }
        }
        Ok(())
    }

    /// Poles of the coefficient functions inside `[t0, t1]`.
    pub fn singularities(&self, t0: f64, t1: f64) -> Vec<f64> {
        let mut s = self.omega.singularities(t0, t1);
        s.extend(self.alpha.singularities(t0, t1));
        if let Some(b) = &self.beta {
            s.extend(b.singularities(t0, t1));
        }
        s.sort_by(f64::total_cmp);
        s
    }

    pub fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        build_hamiltonian(self.omega(t), self.alpha(t), self.beta(t), self.dim)
    }
}

/// `ω a†a + α a + β a†` in dimension `dim`.
pub fn build_hamiltonian(omega: C64, alpha: C64, beta: C64, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |i, j| {
        if i == j {
            omega * i as f64
        } else if j == i + 1 {
            alpha * (j as f64).sqrt()
        } else if i == j + 1 {
            beta * (i as f64).sqrt()
        } else {
            ZERO
        }
    })
}

/// `γ`, `γ̇` and `χ` on a grid.
#[derive(Debug, Clone)]
pub struct GammaSeries {
    pub grid: TimeGrid,
    pub gamma: Vec<C64>,
    pub gamma_dot: Vec<C64>,
    pub chi: Vec<f64>,
    pub omega: Vec<f64>,
    pub alpha: Vec<C64>,
    pub quad_error: f64,
}

impl GammaSeries {
    /// `f = ω|γ|² + (i/2)(γ̇γ* − γγ̇*)` at node `k`.
    pub fn f(&self, k: usize) -> C64 {
        let (g, gd) = (self.gamma[k], self.gamma_dot[k]);
        C64::new(self.omega[k] * g.norm_sqr(), 0.0) + I * 0.5 * (gd * g.conj() - g * gd.conj())
    }

    pub fn exponents(&self, k: usize) -> DysonExponents {
        DysonExponents::solved_branch(self.gamma[k], self.gamma_dot[k])
    }

    /// Largest `|α + ωγ + iγ̇|` with `γ̇` from finite differences of the `γ` samples.
    pub fn constrain_residual_fd(&self) -> Result<f64> {
        let gd = derivative_series(&self.gamma, self.grid.dt())?;
        Ok((0..self.gamma.len())
            .map(|k| (self.alpha[k] + self.gamma[k] * self.omega[k] + I * gd[k]).norm())
            .fold(0.0, f64::max))
    }
}

/// Closed-form `γ(t)` with composite Simpson quadrature.
pub fn gamma_solve(params: &OscillatorParams, grid: &TimeGrid) -> Result<GammaSeries> {
    grid.validate()?;
    params.check_solved_family(grid)?;
    let nodes = grid.nodes();
    let omega = |s: f64| params.omega(s).re;
    let (chi, chi_err) = cumulative_simpson_fn(omega, &nodes);
    // χ between nodes: anchor at the left node plus a local Simpson pair
    let h = grid.dt();
    let chi_at = |s: f64| {
        let k = (((s - grid.t0) / h).floor() as usize).min(grid.steps - 1);
        let a = nodes[k];
        let m = 0.5 * (a + s);
        chi[k] + simpson(&omega, a, m) + simpson(&omega, m, s)
    };
    let integrand = |s: f64| params.alpha(s) * C64::from_polar(1.0, -chi_at(s));
    let (integral, int_err) = cumulative_simpson_fn(integrand, &nodes);
    let scale = integral.iter().map(|z| z.norm()).fold(0.0, f64::max) + chi.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let quad_error = chi_err + int_err;
    check_estimate(quad_error, scale)?;

    let g0 = params.gamma0.0;
    let omega_v: Vec<f64> = nodes.iter().map(|&t| omega(t)).collect();
    let alpha_v: Vec<C64> = nodes.iter().map(|&t| params.alpha(t)).collect();
    let gamma: Vec<C64> =
        chi.iter().zip(&integral).map(|(&c, &int)| C64::from_polar(1.0, c) * (g0 + I * int)).collect();
    let gamma_dot = gamma.iter().zip(&alpha_v).zip(&omega_v).map(|((&g, &a), &w)| I * (a + g * w)).collect();
    Ok(GammaSeries { grid: *grid, gamma, gamma_dot, chi, omega: omega_v, alpha: alpha_v, quad_error })
}

/// Exponents of `η = exp(γa + λa†)` with their time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DysonExponents {
    pub gamma: C64,
    pub lambda: C64,
    pub gamma_dot: C64,
    pub lambda_dot: C64,
}

impl DysonExponents {
    /// `λ = γ*`
    pub fn solved_branch(gamma: C64, gamma_dot: C64) -> Self {
        DysonExponents { gamma, lambda: gamma.conj(), gamma_dot, lambda_dot: gamma_dot.conj() }
    }

    /// `λ = −γ*`
    pub fn displacement_branch(gamma: C64, gamma_dot: C64) -> Self {
        DysonExponents { gamma, lambda: -gamma.conj(), gamma_dot, lambda_dot: -gamma_dot.conj() }
    }
}

/// Coefficients of `h = ω a†a + u a + v a† + f`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm {
    pub u: C64,
    pub v: C64,
    pub f: C64,
    /// `u − v*`, zero iff the linear part is Hermitian.
    pub const1: C64,
    /// `Im f`
    pub const2: f64,
    pub h: ComplexMatrix,
}

/// The Hermitian-counterpart coefficients for given exponents.
pub fn hermitian_coefficients(omega: C64, alpha: C64, beta: C64, e: &DysonExponents) -> (C64, C64, C64) {
    let u = alpha + omega * e.gamma + I * e.gamma_dot;
    let v = beta - omega * e.lambda + I * e.lambda_dot;
    let f = I * 0.5 * (e.gamma * e.lambda_dot - e.gamma_dot * e.lambda) - omega * e.gamma * e.lambda - alpha * e.lambda
        + beta * e.gamma;
    (u, v, f)
}

pub fn hermitian_form(omega: C64, alpha: C64, beta: C64, e: &DysonExponents, dim: usize) -> HermitianForm {
    let (u, v, f) = hermitian_coefficients(omega, alpha, beta, e);
    let mut h = build_hamiltonian(omega, u, v, dim);
    h += &ComplexMatrix::identity(dim).scale(f);
    HermitianForm { u, v, f, const1: u - v.conj(), const2: f.im, h }
}

/// Shifted quadratures and `H̃ = η⁻¹hη` from their closed forms.
#[derive(Debug, Clone)]
pub struct MappedOperators {
    pub x: ComplexMatrix,
    pub p: ComplexMatrix,
    pub htilde: ComplexMatrix,
}

/// `X = x − i√2 Im γ`, `P = p − i√2 Re γ`,
/// `H̃ = ω(a†a − γa + γ*a†) + (i/2)(γ̇γ* − γγ̇*)`.
pub fn quadratures_and_htilde(space: &FockSpace, gamma: C64, gamma_dot: C64, omega: f64) -> MappedOperators {
    let n = space.dim();
    let id = ComplexMatrix::identity(n);
    let s2 = std::f64::consts::SQRT_2;
    let x = &space.x() - &id.scale(I * (s2 * gamma.im));
    let p = &space.p() - &id.scale(I * (s2 * gamma.re));
    let shift = I * 0.5 * (gamma_dot * gamma.conj() - gamma * gamma_dot.conj());
    let mut htilde = build_hamiltonian(C64::new(omega, 0.0), -omega * gamma, omega * gamma.conj(), n);
    htilde += &id.scale(shift);
    MappedOperators { x, p, htilde }
}

/// `e^{−|θ|²/2} Σ θⁿ/√(n!) |n⟩` truncated to `dim` levels.
pub fn coherent_state(theta: C64, dim: usize) -> StateVector {
    let mut out = Vec::with_capacity(dim);
    let mut c = C64::new((-0.5 * theta.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        out.push(c);
        c = c * theta / ((n + 1) as f64).sqrt();
    }
    out
}

/// Probability mass of the coherent state on levels `≥ dim`.
pub fn coherent_tail(theta: f64, dim: usize) -> f64 {
    let x = theta * theta;
    let ln_term = |n: usize| -x + n as f64 * x.ln() - (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
    if x == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut term = ln_term(dim).exp();
    let mut n = dim;
    while term > 1e-300 && n < dim + 10_000 {
        sum += term;
        n += 1;
        term *= x / n as f64;
        if n as f64 > x && term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// `θ(t) = θ(0) e^{−iχ}` and `φ₀(t) = φ₀(0) − ∫f` sampled on a grid.
#[derive(Debug, Clone)]
pub struct CoherentSolution {
    pub grid: TimeGrid,
    pub theta0: C64,
    pub phi0_init: f64,
    pub chi: Vec<f64>,
    /// `∫₀ᵗ f`
    pub f_integral: Vec<f64>,
}

impl CoherentSolution {
    pub fn from_gamma(series: &GammaSeries, theta0: C64, phi0_init: f64) -> Result<Self> {
        let f: Vec<f64> = (0..series.gamma.len()).map(|k| series.f(k).re).collect();
        let (f_integral, est) = cumulative_simpson_samples(&f, series.grid.dt())?;
        check_estimate(est, f_integral.iter().map(|v| v.abs()).fold(0.0, f64::max))?;
        Ok(CoherentSolution { grid: series.grid, theta0, phi0_init, chi: series.chi.clone(), f_integral })
    }

    pub fn theta(&self, k: usize) -> C64 {
        self.theta0 * C64::from_polar(1.0, -self.chi[k])
    }

    pub fn phase(&self, k: usize) -> f64 {
        self.phi0_init - self.f_integral[k]
    }
}

/// `φ(t) = e^{iφ₀(t)} coherent(θ(t))` at every node.
pub fn ground_solution(sol: &CoherentSolution, dim: usize) -> Result<Trajectory<StateVector>> {
    let tail = coherent_tail(sol.theta0.norm(), dim);
    if tail > TAIL_LIMIT {
        return Err(Error::TruncationTooSmall { tail, dim });
    }
    let values = (0..sol.grid.len())
        .map(|k| {
            let ph = C64::from_polar(1.0, sol.phase(k));
            coherent_state(sol.theta(k), dim).into_iter().map(|c| c * ph).collect()
        })
        .collect();
    Trajectory::new(sol.grid, values)
}

/// `Ψ(t) = η⁻¹(t) φ(t)`.
pub fn mapped_solution(
    space: &FockSpace,
    series: &GammaSeries,
    phi: &Trajectory<StateVector>,
) -> Result<Trajectory<StateVector>> {
    let values = phi.values.iter().zip(&series.gamma).map(|(v, &g)| space.dyson_map_inverse(g).mul_vec(v)).collect();
    Trajectory::new(phi.grid, values)
}
