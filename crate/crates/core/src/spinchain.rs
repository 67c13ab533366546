//! Non-Hermitian Ising chain in an imaginary transverse field,
//! `H_N = −½ Σⱼ (σⱼᶻ + λ σⱼˣσⱼ₊₁ˣ + iκ σⱼˣ)` with periodic boundary.
//!
//! For a single site the metric ansatz `ρ = [[m_a, m_b + i m_g], [m_b − i m_g, m_d]]`
//! reduces the quasi-Hermiticity relation to a second-order ODE for `κ`, with
//! `m_b = κ̇`, `m_a = α₀ + ∫κ̇κ`, `m_d = δ₀ + ∫κ̇κ`, `m_g = γ₀ + ∫κ̇`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::densemat::{posdef_check, ComplexMatrix, C64, I, ONE, ZERO};
use crate::error::{Error, Result};
use crate::propagator::TimeGrid;
use crate::quadrature::{check_estimate, cumulative_simpson_samples, derivative_series};
use crate::timefn::TimeFunction;

pub const MAX_SITES: usize = 10;
/// Default `|κ|` beyond which the ODE integration is declared blown up.
pub const KAPPA_BOUND: f64 = 1e6;

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[[ZERO, ONE], [ONE, ZERO]]).unwrap()
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[[ZERO, -I], [I, ZERO]]).unwrap()
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&[1.0, -1.0])
}

/// `op` acting on `site` (0-based, site 0 is the most significant tensor factor).
pub fn site_operator(op: &ComplexMatrix, site: usize, sites: usize) -> ComplexMatrix {
    (0..sites).fold(ComplexMatrix::identity(1), |acc, j| {
        if j == site {
            acc.kron(op)
        } else {
            acc.kron(&ComplexMatrix::identity(2))
        }
    })
}

/// Chain Hamiltonian at fixed coupling values.
pub fn build_hamiltonian(sites: usize, lambda: C64, kappa: C64) -> Result<ComplexMatrix> {
    if sites == 0 || sites > MAX_SITES {
        return Err(Error::InvalidParams(format!("site count {sites} outside 1..={MAX_SITES}")));
    }
    let dim = 1usize << sites;
    let bit = |j: usize| 1usize << (sites - 1 - j);
    let mut h = ComplexMatrix::zeros(dim);
    for s in 0..dim {
        for j in 0..sites {
            let z = if s & bit(j) == 0 { 1.0 } else { -1.0 };
            h[(s, s)] += -0.5 * z;
            h[(s ^ bit(j), s)] += -0.5 * I * kappa;
            // periodic: σ_{N+1} = σ_1, so a single site pairs with itself
            let pair = bit(j) ^ bit((j + 1) % sites);
            h[(s ^ pair, s)] += -0.5 * lambda;
        }
    }
    Ok(h)
}

/// Single-site Hamiltonian `−½[[1+λ, iκ], [iκ, λ−1]]`.
pub fn h1(lambda: f64, kappa: f64) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        [C64::new(-0.5 * (1.0 + lambda), 0.0), C64::new(0.0, -0.5 * kappa)],
        [C64::new(0.0, -0.5 * kappa), C64::new(-0.5 * (lambda - 1.0), 0.0)],
    ])
    .unwrap()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinChainParams {
    #[serde(rename = "N", alias = "sites")]
    pub sites: usize,
    pub lambda: TimeFunction,
    pub kappa: TimeFunction,
}

impl SpinChainParams {
    pub fn validate(&self) -> Result<()> {
        if self.sites == 0 || self.sites > MAX_SITES {
            return Err(Error::InvalidParams(format!("site count {} outside 1..={MAX_SITES}", self.sites)));
        }
        Ok(())
    }

    pub fn hamiltonian(&self, t: f64) -> Result<ComplexMatrix> {
        build_hamiltonian(self.sites, self.lambda.value(t), self.kappa.value(t))
    }

    pub fn singularities(&self, t0: f64, t1: f64) -> Vec<f64> {
        let mut s = self.lambda.singularities(t0, t1);
        s.extend(self.kappa.singularities(t0, t1));
        s.sort_by(f64::total_cmp);
        s
    }
}

/// Constants of the single-site κ equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaOde {
    pub alpha0: f64,
    pub delta0: f64,
    pub gamma0: f64,
    pub kappa0: f64,
    pub kappadot0: f64,
}

impl KappaOde {
    /// `κ̈ = −κ(1 − (α₀+δ₀)/2 + κ₀²/2) + κ³/2 − γ₀ + κ₀`
    pub fn acceleration(&self, kappa: f64) -> f64 {
        let c = 1.0 - 0.5 * (self.alpha0 + self.delta0) + 0.5 * self.kappa0 * self.kappa0;
        -kappa * c + 0.5 * kappa.powi(3) - self.gamma0 + self.kappa0
    }
}

#[derive(Debug, Clone)]
pub struct KappaSeries {
    pub grid: TimeGrid,
    pub kappa: Vec<f64>,
    pub kappa_dot: Vec<f64>,
}

/// RK4 on the state `(κ, κ̇)`.
pub fn kappa_ode_solve(ode: &KappaOde, grid: &TimeGrid, bound: f64) -> Result<KappaSeries> {
    grid.validate()?;
    let dt = grid.dt();
    let f = |(k, kd): (f64, f64)| (kd, ode.acceleration(k));
    let mut y = (ode.kappa0, ode.kappadot0);
    let mut kappa = vec![y.0];
    let mut kappa_dot = vec![y.1];
    for step in 0..grid.steps {
        let k1 = f(y);
        let k2 = f((y.0 + 0.5 * dt * k1.0, y.1 + 0.5 * dt * k1.1));
        let k3 = f((y.0 + 0.5 * dt * k2.0, y.1 + 0.5 * dt * k2.1));
        let k4 = f((y.0 + dt * k3.0, y.1 + dt * k3.1));
        y.0 += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        y.1 += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if y.0.is_nan() || y.0.abs() > bound {
            return Err(Error::Blowup { t: grid.node(step + 1), value: y.0 });
        }
        kappa.push(y.0);
        kappa_dot.push(y.1);
    }
    Ok(KappaSeries { grid: *grid, kappa, kappa_dot })
}

/// The four real entries of the single-site metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricAnsatzState {
    pub m_a: f64,
    pub m_b: f64,
    pub m_g: f64,
    pub m_d: f64,
}

impl MetricAnsatzState {
    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_rows(&[
            [C64::new(self.m_a, 0.0), C64::new(self.m_b, self.m_g)],
            [C64::new(self.m_b, -self.m_g), C64::new(self.m_d, 0.0)],
        ])
        .unwrap()
    }

    pub fn det(&self) -> f64 {
        self.m_a * self.m_d - self.m_b * self.m_b - self.m_g * self.m_g
    }
}

#[derive(Debug, Clone)]
pub struct MetricEntries {
    pub grid: TimeGrid,
    pub entries: Vec<MetricAnsatzState>,
    /// `β̇ + ∫β − κ∫βκ − (κ/2)(α₀+δ₀) + γ₀` per node.
    pub constraint_residual: Vec<f64>,
    pub quad_error: f64,
}

impl MetricEntries {
    pub fn max_constraint_residual(&self) -> f64 {
        self.constraint_residual.iter().map(|r| r.abs()).fold(0.0, f64::max)
    }
}

/// Metric entries by quadrature of `β = κ̇` and `βκ`.
pub fn metric_entries(
    beta: &[f64],
    kappa: &[f64],
    alpha0: f64,
    delta0: f64,
    gamma0: f64,
    grid: &TimeGrid,
) -> Result<MetricEntries> {
    if beta.len() != grid.len() || kappa.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: beta.len().min(kappa.len()) });
    }
    let dt = grid.dt();
    let bk: Vec<f64> = beta.iter().zip(kappa).map(|(b, k)| b * k).collect();
    let (int_b, e1) = cumulative_simpson_samples(beta, dt)?;
    let (int_bk, e2) = cumulative_simpson_samples(&bk, dt)?;
    let scale = int_b.iter().chain(&int_bk).map(|v| v.abs()).fold(0.0, f64::max);
    let quad_error = e1 + e2;
    check_estimate(quad_error, scale)?;
    let beta_dot = derivative_series(beta, dt)?;
    let entries = (0..grid.len())
        .map(|k| MetricAnsatzState {
            m_a: alpha0 + int_bk[k],
            m_b: beta[k],
            m_g: gamma0 + int_b[k],
            m_d: delta0 + int_bk[k],
        })
        .collect();
    let constraint_residual = (0..grid.len())
        .map(|k| beta_dot[k] + int_b[k] - kappa[k] * int_bk[k] - 0.5 * kappa[k] * (alpha0 + delta0) + gamma0)
        .collect();
    Ok(MetricEntries { grid: *grid, entries, constraint_residual, quad_error })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    /// `κ = 2 tan t`
    #[serde(rename = "s1", alias = "tan")]
    Tan,
    /// `κ = 2 sec t`
    #[serde(rename = "s2", alias = "sec")]
    Sec,
    /// `κ = 2 tanh t`
    #[serde(rename = "s3", alias = "tanh")]
    Tanh,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 3] = [FamilyKind::Tan, FamilyKind::Sec, FamilyKind::Tanh];

    pub fn label(self) -> &'static str {
        match self {
            FamilyKind::Tan => "s1",
            FamilyKind::Sec => "s2",
            FamilyKind::Tanh => "s3",
        }
    }
}

/// One of the three closed solutions of the κ equation with its metric constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedSolutionFamily {
    pub kind: FamilyKind,
    pub delta0: f64,
    pub alpha0: f64,
    pub gamma0: f64,
}

impl ClosedSolutionFamily {
    pub fn new(kind: FamilyKind, delta0: f64) -> Self {
        let (alpha0, gamma0) = match kind {
            FamilyKind::Tan => (6.0 - delta0, 0.0),
            FamilyKind::Sec => (4.0 - delta0, 2.0),
            FamilyKind::Tanh => (-2.0 - delta0, 0.0),
        };
        ClosedSolutionFamily { kind, delta0, alpha0, gamma0 }
    }

    /// Determinant of `ρ(0)` as the family's quadratic in `δ₀`.
    pub fn det0(&self) -> f64 {
        let d = self.delta0;
        match self.kind {
            FamilyKind::Tan => -4.0 + 6.0 * d - d * d,
            FamilyKind::Sec => -4.0 + 4.0 * d - d * d,
            FamilyKind::Tanh => -4.0 - 2.0 * d - d * d,
        }
    }

    pub fn kappa(&self, t: f64) -> f64 {
        match self.kind {
            FamilyKind::Tan => 2.0 * t.tan(),
            FamilyKind::Sec => 2.0 / t.cos(),
            FamilyKind::Tanh => 2.0 * t.tanh(),
        }
    }

    pub fn kappa_dot(&self, t: f64) -> f64 {
        match self.kind {
            FamilyKind::Tan => 2.0 * (1.0 + t.tan().powi(2)),
            FamilyKind::Sec => 2.0 * t.tan() / t.cos(),
            FamilyKind::Tanh => 2.0 / t.cosh().powi(2),
        }
    }

    pub fn kappa_ddot(&self, t: f64) -> f64 {
        match self.kind {
            FamilyKind::Tan => 4.0 * t.tan() / t.cos().powi(2),
            FamilyKind::Sec => {
                let s = 1.0 / t.cos();
                2.0 * s * (2.0 * s * s - 1.0)
            }
            FamilyKind::Tanh => -4.0 * t.tanh() / t.cosh().powi(2),
        }
    }

    pub fn kappa_function(&self) -> TimeFunction {
        match self.kind {
            FamilyKind::Tan => TimeFunction::TanScaled { scale: 2.0, freq: 1.0 },
            FamilyKind::Sec => TimeFunction::SecScaled { scale: 2.0, freq: 1.0 },
            FamilyKind::Tanh => TimeFunction::TanhScaled { scale: 2.0, freq: 1.0 },
        }
    }

    pub fn ode(&self) -> KappaOde {
        KappaOde {
            alpha0: self.alpha0,
            delta0: self.delta0,
            gamma0: self.gamma0,
            kappa0: self.kappa(0.0),
            kappadot0: self.kappa_dot(0.0),
        }
    }

    /// Closed-form metric entries at `t`.
    pub fn entries(&self, t: f64) -> MetricAnsatzState {
        let (k, k0) = (self.kappa(t), self.kappa(0.0));
        let shift = 0.5 * (k * k - k0 * k0);
        MetricAnsatzState {
            m_a: self.alpha0 + shift,
            m_b: self.kappa_dot(t),
            m_g: self.gamma0 + k - k0,
            m_d: self.delta0 + shift,
        }
    }

    pub fn entries_dot(&self, t: f64) -> MetricAnsatzState {
        let (k, kd) = (self.kappa(t), self.kappa_dot(t));
        MetricAnsatzState { m_a: k * kd, m_b: self.kappa_ddot(t), m_g: kd, m_d: k * kd }
    }

    pub fn rho(&self, t: f64) -> ComplexMatrix {
        self.entries(t).matrix()
    }

    pub fn rho_dot(&self, t: f64) -> ComplexMatrix {
        self.entries_dot(t).matrix()
    }

    /// `m_a m_d − m_b² − m_g²` at `t = 0`.
    pub fn det0_direct(&self) -> f64 {
        self.entries(0.0).det()
    }

    pub fn singularities(&self, t0: f64, t1: f64) -> Vec<f64> {
        self.kappa_function().singularities(t0, t1)
    }
}

/// Distance from `t` to the nearest odd multiple of `π/2`.
pub fn distance_to_pole(t: f64) -> f64 {
    let k = ((t - FRAC_PI_2) / std::f64::consts::PI).round();
    (t - (FRAC_PI_2 + k * std::f64::consts::PI)).abs()
}

/// Closed-form single-site metric, Dyson map and Hermitian counterpart for `κ = 2 tan t`,
/// `δ₀ = 1`.
#[derive(Debug, Clone)]
pub struct ExplicitTriple {
    pub rho: ComplexMatrix,
    pub rho_dot: ComplexMatrix,
    pub eta: ComplexMatrix,
    pub eta_dot: ComplexMatrix,
    pub h: ComplexMatrix,
    pub hamiltonian: ComplexMatrix,
}

pub fn explicit_triple(t: f64, lambda: f64, margin: f64) -> Result<ExplicitTriple> {
    if distance_to_pole(t) < margin {
        return Err(Error::SingularityTooClose { t });
    }
    let tau = t.tan();
    // sec² through tan keeps det ρ = 1 exact up to rounding of the entries
    let s = 1.0 + tau * tau;
    let c = |re: f64, im: f64| C64::new(re, im);
    let rho = ComplexMatrix::from_rows(&[
        [c(5.0 + 2.0 * tau * tau, 0.0), c(2.0 * s, 2.0 * tau)],
        [c(2.0 * s, -2.0 * tau), c(1.0 + 2.0 * tau * tau, 0.0)],
    ])?;
    let rho_dot = ComplexMatrix::from_rows(&[
        [c(4.0 * tau * s, 0.0), c(4.0 * s * tau, 2.0 * s)],
        [c(4.0 * s * tau, -2.0 * s), c(4.0 * tau * s, 0.0)],
    ])?;
    let m = ComplexMatrix::from_rows(&[[c(2.0 + s, 0.0), c(s, tau)], [c(s, -tau), c(s, 0.0)]])?;
    let m_dot = ComplexMatrix::from_rows(&[
        [c(2.0 * s * tau, 0.0), c(2.0 * s * tau, s)],
        [c(2.0 * s * tau, -s), c(2.0 * s * tau, 0.0)],
    ])?;
    let norm = (s + 1.0).powf(-0.5);
    let norm_dot = -s * tau * (s + 1.0).powf(-1.5);
    let eta = m.scale_real(norm);
    let eta_dot = &m.scale_real(norm_dot) + &m_dot.scale_real(norm);
    let (c2, s2) = ((2.0 * t).cos(), (2.0 * t).sin());
    let pre = 1.0 / (3.0 + c2);
    let h = ComplexMatrix::from_rows(&[
        [c(-0.5 * (1.0 + 3.0 * lambda + (3.0 + lambda) * c2) * pre, 0.0), c(0.0, -s2 * pre)],
        [c(0.0, s2 * pre), c(0.5 * (1.0 - 3.0 * lambda + (3.0 - lambda) * c2) * pre, 0.0)],
    ])?;
    Ok(ExplicitTriple { rho, rho_dot, eta, eta_dot, h, hamiltonian: h1(lambda, 2.0 * tau) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowRow {
    pub delta0: f64,
    pub det0: f64,
    pub min_eigenvalue: f64,
    pub admissible: bool,
}

/// Positivity of `ρ(0)` for each `δ₀`.
pub fn positivity_window(kind: FamilyKind, delta0s: &[f64]) -> Result<Vec<WindowRow>> {
    delta0s
        .iter()
        .map(|&d| {
            let fam = ClosedSolutionFamily::new(kind, d);
            let rho0 = fam.rho(0.0);
            let rep = posdef_check(&rho0, 0.0)?;
            Ok(WindowRow {
                delta0: d,
                det0: fam.det0_direct(),
                min_eigenvalue: rep.min_eigenvalue,
                admissible: rep.positive,
            })
        })
        .collect()
}

/// Open `δ₀` interval of positive metrics, if any.
pub fn admissible_interval(kind: FamilyKind) -> Option<(f64, f64)> {
    match kind {
        FamilyKind::Tan => Some((3.0 - 5f64.sqrt(), 3.0 + 5f64.sqrt())),
        FamilyKind::Sec | FamilyKind::Tanh => None,
    }
}
