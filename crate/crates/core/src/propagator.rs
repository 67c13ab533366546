//! Time evolution on uniform grids.
//!
//! - `evolve_hermitian`: time-ordered propagator `u(t, t0)` of a Hermitian generator as a
//!   product of midpoint exponentials `exp(−i dt h(t_mid))`.
//! - `evolve_metric`: the quasi-Hermiticity relation as the initial value problem
//!   `ρ̇ = −i (H† ρ − ρ H)`, integrated with classical RK4 and re-symmetrized each step.
//! - `map_evolution`: `U(t, t0) = η⁻¹(t) u(t, t0) η(t0)`.

use serde::{Deserialize, Serialize};

use crate::densemat::{expm, hermiticity_defect, inner, posdef_check, ComplexMatrix, C64, I};
use crate::error::{Error, Result};
use crate::quadrature::central_difference;
use crate::relations::invert_eta;

pub type StateVector = Vec<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        let g = TimeGrid { t0, t1, steps };
        g.validate()?;
        Ok(g)
    }

    /// Grid whose step is as close as possible to `dt`.
    pub fn with_step(t0: f64, t1: f64, dt: f64) -> Result<Self> {
        if dt.is_nan() || dt <= 0.0 {
            return Err(Error::InvalidGrid(format!("step {dt} must be positive")));
        }
        let steps = ((t1 - t0) / dt).round().max(1.0) as usize;
        Self::new(t0, t1, steps)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0.is_finite() && self.t1.is_finite()) {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if self.t1.is_nan() || self.t0.is_nan() || self.t1 <= self.t0 {
            return Err(Error::InvalidGrid(format!("t1 = {} must exceed t0 = {}", self.t1, self.t0)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidGrid("steps must be positive".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t1
        } else {
            self.t0 + k as f64 * self.dt()
        }
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.node(k)).collect()
    }

    /// Index of the node at `t`, if `t` lies on the grid to within `1e−9 · dt`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = (t - self.t0) / self.dt();
        let k = x.round();
        ((x - k).abs() <= 1e-9 && k >= 0.0 && k <= self.steps as f64).then_some(k as usize)
    }

    /// Fails if any singular time lies within `margin` of `[t0, t1]`.
    pub fn ensure_clear_of(&self, singularities: &[f64], margin: f64) -> Result<()> {
        match singularities
            .iter()
            .find(|&&s| s >= self.t0 - margin && s <= self.t1 + margin)
        {
            Some(&t) => Err(Error::SingularityOnGrid { t }),
            None => Ok(()),
        }
    }
}

/// One value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub grid: TimeGrid,
    pub values: Vec<T>,
}

impl<T> Trajectory<T> {
    pub fn new(grid: TimeGrid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        Ok(Trajectory { grid, values })
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.nodes()
    }

    pub fn last(&self) -> &T {
        self.values.last().expect("trajectory has at least two nodes")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &T)> {
        self.values.iter().enumerate().map(|(k, v)| (self.grid.node(k), v))
    }
}

fn eval_finite(f: &impl Fn(f64) -> Result<ComplexMatrix>, t: f64) -> Result<ComplexMatrix> {
    let m = f(t)?;
    if !m.is_finite() {
        return Err(Error::SingularityOnGrid { t });
    }
    Ok(m)
}

/// Result of [`evolve_hermitian`].
#[derive(Debug, Clone)]
pub struct HermitianEvolution {
    /// `u(t_k, t0)` at every node.
    pub propagators: Trajectory<ComplexMatrix>,
    /// `exp(−i dt h(t_mid))` for every interval.
    pub steps: Vec<ComplexMatrix>,
    /// `‖u†u − I‖_F` at every node.
    pub unitarity_defects: Vec<f64>,
    pub max_unitarity_defect: f64,
    /// `C` in `max defect = C · dt² · (t1 − t0)`.
    pub defect_constant: f64,
}

impl HermitianEvolution {
    /// `u(t_k, t_j)` as the ordered product of the step exponentials.
    pub fn propagator_between(&self, j: usize, k: usize) -> ComplexMatrix {
        assert!(j <= k && k < self.propagators.values.len());
        let dim = self.steps.first().map_or(1, |s| s.dim());
        self.steps[j..k].iter().fold(ComplexMatrix::identity(dim), |acc, s| s * &acc)
    }
}

pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    (&(&u.adjoint() * u) - &ComplexMatrix::identity(u.dim())).frobenius_norm()
}

/// Time-ordered propagator of a Hermitian generator with the midpoint exponential rule.
pub fn evolve_hermitian(
    h_of_t: impl Fn(f64) -> Result<ComplexMatrix>,
    grid: &TimeGrid,
    tol: f64,
) -> Result<HermitianEvolution> {
    grid.validate()?;
    let dt = grid.dt();
    let h0 = eval_finite(&h_of_t, grid.t0)?;
    let dim = h0.dim();
    let mut u = ComplexMatrix::identity(dim);
    let mut values = Vec::with_capacity(grid.len());
    let mut steps = Vec::with_capacity(grid.steps);
    let mut defects = Vec::with_capacity(grid.len());
    values.push(u.clone());
    defects.push(0.0);
    for k in 0..grid.steps {
        let t_mid = grid.node(k) + 0.5 * dt;
        let h = eval_finite(&h_of_t, t_mid)?;
        let defect = hermiticity_defect(&h);
        if defect > tol {
            return Err(Error::NotHermitian { defect, tol });
        }
        let step = expm(&h.hermitian_part().scale(C64::new(0.0, -dt)))?;
        u = &step * &u;
        defects.push(unitarity_defect(&u));
        values.push(u.clone());
        steps.push(step);
    }
    let max_unitarity_defect = defects.iter().cloned().fold(0.0, f64::max);
    let span = grid.t1 - grid.t0;
    Ok(HermitianEvolution {
        propagators: Trajectory::new(*grid, values)?,
        steps,
        unitarity_defects: defects,
        max_unitarity_defect,
        defect_constant: max_unitarity_defect / (dt * dt * span),
    })
}

/// Result of [`evolve_metric`].
#[derive(Debug, Clone)]
pub struct MetricEvolution {
    pub rho: Trajectory<ComplexMatrix>,
    /// Largest Hermiticity defect removed by the post-step symmetrization.
    pub max_symmetrization_drift: f64,
    pub min_eigenvalues: Vec<f64>,
}

fn metric_rhs(h: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let c = &(&h.adjoint() * rho) - &(rho * h);
    c.scale(-I)
}

/// RK4 integration of `i ρ̇ = H† ρ − ρ H` from `rho0`, stopping as soon as `ρ` stops being positive definite.
pub fn evolve_metric(
    hamiltonian_of_t: impl Fn(f64) -> Result<ComplexMatrix>,
    rho0: &ComplexMatrix,
    grid: &TimeGrid,
    tol: f64,
) -> Result<MetricEvolution> {
    integrate_metric(hamiltonian_of_t, rho0, grid, Some(tol))
}

/// Same integrator without the positivity gate, for Hermitian solutions that are indefinite.
///
/// `min_eigenvalues` is still recorded at every node.
pub fn evolve_indefinite_metric(
    hamiltonian_of_t: impl Fn(f64) -> Result<ComplexMatrix>,
    rho0: &ComplexMatrix,
    grid: &TimeGrid,
) -> Result<MetricEvolution> {
    integrate_metric(hamiltonian_of_t, rho0, grid, None)
}

fn integrate_metric(
    hamiltonian_of_t: impl Fn(f64) -> Result<ComplexMatrix>,
    rho0: &ComplexMatrix,
    grid: &TimeGrid,
    gate: Option<f64>,
) -> Result<MetricEvolution> {
    grid.validate()?;
    let eig_tol = |m: &ComplexMatrix| gate.unwrap_or(0.0).max(1e-8 * m.frobenius_norm());
    let start = posdef_check(rho0, gate.unwrap_or(eig_tol(rho0)))?;
    if gate.is_some() && !start.positive {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: start.min_eigenvalue });
    }
    let dt = grid.dt();
    let mut rho = rho0.hermitian_part();
    let mut values = Vec::with_capacity(grid.len());
    let mut min_eigenvalues = Vec::with_capacity(grid.len());
    let mut drift: f64 = 0.0;
    values.push(rho.clone());
    min_eigenvalues.push(start.min_eigenvalue);
    for k in 0..grid.steps {
        let t = grid.node(k);
        let h_a = eval_finite(&hamiltonian_of_t, t)?;
        let h_m = eval_finite(&hamiltonian_of_t, t + 0.5 * dt)?;
        let h_b = eval_finite(&hamiltonian_of_t, t + dt)?;
        let k1 = metric_rhs(&h_a, &rho);
        let k2 = metric_rhs(&h_m, &(&rho + &k1.scale_real(0.5 * dt)));
        let k3 = metric_rhs(&h_m, &(&rho + &k2.scale_real(0.5 * dt)));
        let k4 = metric_rhs(&h_b, &(&rho + &k3.scale_real(dt)));
        let mut incr = k1;
        incr += &k2.scale_real(2.0);
        incr += &k3.scale_real(2.0);
        incr += &k4;
        let next = &rho + &incr.scale_real(dt / 6.0);
        drift = drift.max(hermiticity_defect(&next));
        rho = next.hermitian_part();
        if !rho.is_finite() {
            return Err(Error::Blowup { t: grid.node(k + 1), value: f64::INFINITY });
        }
        let check = posdef_check(&rho, eig_tol(&rho))?;
        if gate.is_some() && !check.positive {
            return Err(Error::PositivityLost { t: grid.node(k + 1), min_eigenvalue: check.min_eigenvalue });
        }
        min_eigenvalues.push(check.min_eigenvalue);
        values.push(rho.clone());
    }
    Ok(MetricEvolution {
        rho: Trajectory::new(*grid, values)?,
        max_symmetrization_drift: drift,
        min_eigenvalues,
    })
}

/// `U(t, t0) = η⁻¹(t) u(t, t0) η(t0)` at every node.
pub fn map_evolution(
    u: &Trajectory<ComplexMatrix>,
    eta_of_t: impl Fn(f64) -> Result<ComplexMatrix>,
) -> Result<Trajectory<ComplexMatrix>> {
    let eta0 = eval_finite(&eta_of_t, u.grid.t0)?;
    let mut out = Vec::with_capacity(u.values.len());
    for (t, uk) in u.iter() {
        let inv = invert_eta(&eval_finite(&eta_of_t, t)?)?;
        out.push(&(&inv * uk) * &eta0);
    }
    Trajectory::new(u.grid, out)
}

/// Applies a propagator trajectory to an initial state.
pub fn propagate_state(u: &Trajectory<ComplexMatrix>, psi0: &[C64]) -> Result<Trajectory<StateVector>> {
    let values = u.values.iter().map(|m| m.mul_vec(psi0)).collect();
    Trajectory::new(u.grid, values)
}

/// Classical RK4 for `ψ̇ = −i H ψ`, no metric involved.
pub fn evolve_state_rk4(
    hamiltonian_of_t: impl Fn(f64) -> Result<ComplexMatrix>,
    psi0: &[C64],
    grid: &TimeGrid,
) -> Result<Trajectory<StateVector>> {
    grid.validate()?;
    let dt = grid.dt();
    let rhs = |h: &ComplexMatrix, v: &[C64]| -> StateVector { h.mul_vec(v).into_iter().map(|z| -I * z).collect() };
    let axpy = |x: &[C64], a: f64, y: &[C64]| -> StateVector { x.iter().zip(y).map(|(p, q)| p + q * a).collect() };
    let mut psi = psi0.to_vec();
    let mut values = vec![psi.clone()];
    for k in 0..grid.steps {
        let t = grid.node(k);
        let h_a = eval_finite(&hamiltonian_of_t, t)?;
        let h_m = eval_finite(&hamiltonian_of_t, t + 0.5 * dt)?;
        let h_b = eval_finite(&hamiltonian_of_t, t + dt)?;
        let k1 = rhs(&h_a, &psi);
        let k2 = rhs(&h_m, &axpy(&psi, 0.5 * dt, &k1));
        let k3 = rhs(&h_m, &axpy(&psi, 0.5 * dt, &k2));
        let k4 = rhs(&h_b, &axpy(&psi, dt, &k3));
        for i in 0..psi.len() {
            psi[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
        values.push(psi.clone());
    }
    Trajectory::new(*grid, values)
}

/// `‖H(t)Ψ(t) − i Ψ̇(t)‖₂` at interior nodes, `Ψ̇` by fourth-order central differences.
///
/// The two nodes at each end are excluded.
pub fn tdse_residual(
    states: &Trajectory<StateVector>,
    hamiltonian_of_t: impl Fn(f64) -> Result<ComplexMatrix>,
) -> Result<Vec<(f64, f64)>> {
    let n = states.values.len();
    if n < 5 {
        return Err(Error::GridTooShort { nodes: n, required: 5 });
    }
    let dt = states.grid.dt();
    let dim = states.values[0].len();
    let mut out = Vec::with_capacity(n - 4);
    let mut column = vec![C64::new(0.0, 0.0); 5];
    for k in 2..n - 2 {
        let t = states.grid.node(k);
        let h = eval_finite(&hamiltonian_of_t, t)?;
        if h.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: h.dim() });
        }
        let h_psi = h.mul_vec(&states.values[k]);
        let mut sq = 0.0;
        for (i, hp) in h_psi.iter().enumerate() {
            for (j, c) in column.iter_mut().enumerate() {
                *c = states.values[k - 2 + j][i];
            }
            let deriv = central_difference(&column, 2, dt);
            sq += (hp - I * deriv).norm_sqr();
        }
        out.push((t, sq.sqrt()));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ConservationSeries {
    /// `⟨Ψ(t)|ρ(t)Ψ(t)⟩` per node.
    pub values: Vec<f64>,
    pub max_drift: f64,
}

pub fn conservation_series(
    states: &Trajectory<StateVector>,
    rho_of_t: impl Fn(f64) -> Result<ComplexMatrix>,
) -> Result<ConservationSeries> {
    let mut values = Vec::with_capacity(states.values.len());
    for (t, psi) in states.iter() {
        let rho = eval_finite(&rho_of_t, t)?;
        if rho.dim() != psi.len() {
            return Err(Error::DimensionMismatch { expected: psi.len(), found: rho.dim() });
        }
        values.push(inner(psi, &rho.mul_vec(psi)).re);
    }
    let v0 = values[0];
    let max_drift = values.iter().map(|v| (v - v0).abs()).fold(0.0, f64::max);
    Ok(ConservationSeries { values, max_drift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densemat::{ONE, ZERO};

    fn constant(m: ComplexMatrix) -> impl Fn(f64) -> Result<ComplexMatrix> {
        move |_| Ok(m.clone())
    }

    #[test]
    fn grid_basics() {
        let g = TimeGrid::new(0.0, 1.0, 4).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.node(4), 1.0);
        assert!((g.dt() - 0.25).abs() < 1e-16);
        assert!(TimeGrid::new(1.0, 0.0, 4).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        assert_eq!(TimeGrid::with_step(0.0, 1.0, 1e-3).unwrap().steps, 1000);
        let pole = std::f64::consts::FRAC_PI_2;
        assert!(matches!(
            TimeGrid::new(0.0, 2.0, 10).unwrap().ensure_clear_of(&[pole], 1e-2),
            Err(Error::SingularityOnGrid { .. })
        ));
        assert!(TimeGrid::new(0.0, 1.5, 10).unwrap().ensure_clear_of(&[pole], 1e-2).is_ok());
        assert!(TimeGrid::new(0.0, 1.565, 10).unwrap().ensure_clear_of(&[pole], 1e-2).is_err());
    }

    #[test]
    fn constant_diagonal_generator_is_exact() {
        let t1 = 0.8;
        let grid = TimeGrid::new(0.0, t1, 50).unwrap();
        let evo = evolve_hermitian(constant(ComplexMatrix::from_real_diag(&[1.0, -1.0])), &grid, 1e-10).unwrap();
        let want = ComplexMatrix::from_diag(&[C64::new(0.0, -t1).exp(), C64::new(0.0, t1).exp()]);
        assert!(evo.propagators.last().max_abs_diff(&want) < 1e-13);
        assert_eq!(evo.propagators.values[0], ComplexMatrix::identity(2));
    }

    #[test]
    fn composition_at_shared_nodes() {
        let h = |t: f64| {
            ComplexMatrix::from_rows(&[[ONE * t.cos(), C64::new(0.3, t)], [C64::new(0.3, -t), -ONE]])
        };
        let grid = TimeGrid::new(0.0, 1.0, 40).unwrap();
        let evo = evolve_hermitian(h, &grid, 1e-10).unwrap();
        let u = &evo.propagators.values;
        let composed = &evo.propagator_between(15, 40) * &u[15];
        assert!(composed.max_abs_diff(&u[40]) < 1e-13);
        assert!(evo.max_unitarity_defect < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian_generator() {
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let h = ComplexMatrix::from_rows(&[[ONE, I], [I, ZERO]]).unwrap();
        assert!(matches!(evolve_hermitian(constant(h), &grid, 1e-10), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn nonfinite_generator_is_a_singularity() {
        let grid = TimeGrid::new(1.0, 2.0, 10).unwrap();
        let h = |t: f64| Ok(ComplexMatrix::from_real_diag(&[(t).tan() * 0.0 + 1.0 / (t - 1.45), 0.0]));
        assert!(matches!(evolve_hermitian(h, &grid, 1e-10), Err(Error::SingularityOnGrid { .. })));
    }

    #[test]
    fn metric_constant_under_hermitian_generator() {
        let grid = TimeGrid::new(0.0, 2.0, 200).unwrap();
        let h = |t: f64| ComplexMatrix::from_rows(&[[ONE, C64::new(t, 0.2)], [C64::new(t, -0.2), ONE * 0.5]]);
        let evo = evolve_metric(h, &ComplexMatrix::identity(2), &grid, 1e-10).unwrap();
        assert!(evo.rho.last().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn positivity_loss_is_reported() {
        // H = diag(0, 2i) gives ρ₂₂(t) = e^{−4t}
        let grid = TimeGrid::new(0.0, 10.0, 1000).unwrap();
        let h = constant(ComplexMatrix::from_diag(&[ZERO, I * 2.0]));
        let err = evolve_metric(h, &ComplexMatrix::identity(2), &grid, 1e-10).unwrap_err();
        assert!(matches!(err, Error::PositivityLost { .. }), "{err:?}");
    }

    #[test]
    fn indefinite_metric_is_integrated_without_gate() {
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let h = constant(ComplexMatrix::from_diag(&[ZERO, I * 0.5]));
        let rho0 = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        assert!(matches!(evolve_metric(&h, &rho0, &grid, 1e-10), Err(Error::NotPositiveDefinite { .. })));
        let evo = evolve_indefinite_metric(&h, &rho0, &grid).unwrap();
        // ρ₂₂(t) = −e^{−t}
        assert!((evo.rho.last()[(1, 1)].re + (-1f64).exp()).abs() < 1e-10);
        assert!(evo.min_eigenvalues.iter().all(|&m| m < -0.3));
    }

    #[test]
    fn tdse_residual_of_exact_eigen_evolution() {
        let e = 0.7;
        let grid = TimeGrid::new(0.0, 1.0, 1000).unwrap();
        let states: Vec<StateVector> =
            grid.nodes().iter().map(|&t| vec![C64::new(0.0, -e * t).exp(), ZERO]).collect();
        let traj = Trajectory::new(grid, states).unwrap();
        let h = constant(ComplexMatrix::from_real_diag(&[e, -0.3]));
        let res = tdse_residual(&traj, &h).unwrap();
        assert_eq!(res.len(), 997);
        assert!(res.iter().all(|&(_, r)| r < 1e-8));

        // the wrong-sign phase is no solution
        let states: Vec<StateVector> =
            grid.nodes().iter().map(|&t| vec![C64::new(0.0, e * t).exp(), ZERO]).collect();
        let wrong = Trajectory::new(grid, states).unwrap();
        let res = tdse_residual(&wrong, &h).unwrap();
        assert!(res.iter().all(|&(_, r)| r >= 0.1 * e));

        let short = Trajectory::new(TimeGrid::new(0.0, 1.0, 3).unwrap(), vec![vec![ONE]; 4]).unwrap();
        assert!(matches!(tdse_residual(&short, &h), Err(Error::GridTooShort { .. })));
    }

    #[test]
    fn conservation_with_identity_metric() {
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let h = |t: f64| ComplexMatrix::from_rows(&[[ONE * t, C64::new(0.1, 0.4)], [C64::new(0.1, -0.4), -ONE]]);
        let evo = evolve_hermitian(h, &grid, 1e-10).unwrap();
        let psi = propagate_state(&evo.propagators, &[C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let cons = conservation_series(&psi, constant(ComplexMatrix::identity(2))).unwrap();
        assert!(cons.max_drift <= 1e-10);
    }

    #[test]
    fn map_with_identity_eta_is_identity_map() {
        let grid = TimeGrid::new(0.0, 1.0, 20).unwrap();
        let h = |t: f64| ComplexMatrix::from_rows(&[[ONE * t, ONE], [ONE, -ONE]]);
        let evo = evolve_hermitian(h, &grid, 1e-10).unwrap();
        let mapped = map_evolution(&evo.propagators, constant(ComplexMatrix::identity(2))).unwrap();
        for (a, b) in mapped.values.iter().zip(&evo.propagators.values) {
            assert!(a.max_abs_diff(b) < 1e-15);
        }
    }
}
