//! Model pipelines: build, solve, propagate, then evaluate the selected checks.

use std::f64::consts::SQRT_2;

use qh_core::densemat::{eigenvalues_general, hermiticity_defect, posdef_check, ComplexMatrix, C64, I, ONE};
use qh_core::oscillator::{
    gamma_solve, ground_solution, hermitian_form, mapped_solution, quadratures_and_htilde, CoherentSolution,
    FockSpace, GammaSeries, HermitianForm,
};
use qh_core::propagator::{
    conservation_series, evolve_hermitian, evolve_indefinite_metric, evolve_metric, map_evolution,
    propagate_state, tdse_residual, MetricEvolution, StateVector,
};
use qh_core::quadrature::cumulative_simpson_samples;
use qh_core::relations::{dyson_residual, quasi_residual, MetricPair, OperatorTriple};
use qh_core::spinchain::{explicit_triple, kappa_ode_solve, ClosedSolutionFamily, KAPPA_BOUND};
use qh_core::{Error, Result, TimeGrid, Trajectory, DEFAULT_TOL, SINGULARITY_MARGIN};

use crate::checks::CheckName;
use crate::config::{ModelConfig, OscillatorConfig, Scenario, SpinChainConfig};
use crate::error::{CliError, CliResult};
use crate::output::{matrix_columns, Table};
use crate::report::{CheckOutcome, ResidualReport};

/// Step counts of the two coarse runs behind `rk4_order`.
pub const RK4_ORDER_STEPS: (usize, usize) = (200, 400);
/// Identity checks sample at most this many nodes (plus the last one).
pub const IDENTITY_SAMPLES: usize = 100;
/// Spectrum checks sample at most this many nodes (plus the last one).
pub const SPECTRUM_SAMPLES: usize = 10;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: ResidualReport,
    pub tables: Vec<Table>,
}

/// Runs every selected check of `scenario`.
///
/// Numerical breakdowns inside a check become `breakdown` verdicts; any other
/// model error aborts the run.
pub fn run_scenario(scenario: &Scenario) -> CliResult<RunOutput> {
    let mut ctx = Recorder { scenario, outcomes: Vec::new() };
    let tables = match &scenario.model {
        ModelConfig::SpinChain(c) => spinchain(&mut ctx, c),
        ModelConfig::Oscillator(c) => oscillator(&mut ctx, c),
    }
    .map_err(|e| CliError::model(&scenario.name, e))?;
    let report = ResidualReport::new(scenario, ctx.outcomes);
    Ok(RunOutput { report, tables })
}

struct Recorder<'a> {
    scenario: &'a Scenario,
    outcomes: Vec<CheckOutcome>,
}

impl Recorder<'_> {
    fn wants(&self, c: CheckName) -> bool {
        self.scenario.checks.contains(&c)
    }

    fn record(&mut self, c: CheckName, value: Result<f64>) -> Result<()> {
        let tol = self.scenario.tolerance(c);
        match value {
            Ok(v) => self.outcomes.push(CheckOutcome::judge(c, v, tol)),
            Err(e) if e.is_numerical_breakdown() => self.outcomes.push(CheckOutcome::breakdown(c, tol, &e)),
            Err(e) => return Err(e),
        }
        Ok(())
    }

    /// Records `c` if selected, in the order the scenario lists it.
    fn check(&mut self, c: CheckName, f: impl FnOnce() -> Result<f64>) -> Result<()> {
        if self.wants(c) {
            self.record(c, f())?;
        }
        Ok(())
    }

    fn sort(&mut self) {
        let order = &self.scenario.checks;
        self.outcomes.sort_by_key(|o| order.iter().position(|&c| c == o.name));
    }
}

fn max(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn sample_indices(grid: &TimeGrid, samples: usize) -> Vec<usize> {
    let stride = (grid.steps / samples).max(1);
    let mut out: Vec<usize> = (0..grid.len()).step_by(stride).collect();
    if out.last() != Some(&grid.steps) {
        out.push(grid.steps);
    }
    out
}

// ---------------------------------------------------------------- spin chain

fn integrate(c: &SpinChainConfig, rho0: &ComplexMatrix, grid: &TimeGrid) -> Result<MetricEvolution> {
    if posdef_check(rho0, 0.0)?.positive {
        evolve_metric(|t| c.hamiltonian(t), rho0, grid, 0.0)
    } else {
        evolve_indefinite_metric(|t| c.hamiltonian(t), rho0, grid)
    }
}

fn metric_table(c: &SpinChainConfig, evo: &MetricEvolution) -> Table {
    let dim = c.dim();
    let mut cols = vec!["t".to_string()];
    cols.extend(matrix_columns("rho", dim));
    cols.extend(["det_rho", "min_eig_rho", "kappa_re", "kappa_im"].map(String::from));
    let mut table = Table::new("metric", cols);
    for (k, (t, rho)) in evo.rho.iter().enumerate() {
        let mut row = vec![t];
        row.extend(rho.as_slice().iter().flat_map(|z| [z.re, z.im]));
        let kappa = c.kappa(t);
        row.extend([rho.determinant().re, evo.min_eigenvalues[k], kappa.re, kappa.im]);
        table.push(row);
    }
    table
}

/// `max |det ρ(t) − det ρ(t0) e^{−2∫ Im tr H}|`, relative to `max(1, |expected|)`.
fn det_drift(c: &SpinChainConfig, evo: &MetricEvolution) -> Result<f64> {
    let grid = evo.rho.grid;
    let im_trace = grid.nodes().into_iter().map(|t| Ok(c.hamiltonian(t)?.trace().im)).collect::<Result<Vec<f64>>>()?;
    let (integral, _) = cumulative_simpson_samples(&im_trace, grid.dt())?;
    let det0 = evo.rho.values[0].determinant().re;
    Ok(max(evo.rho.values.iter().zip(&integral).map(|(rho, i)| {
        let want = det0 * (-2.0 * i).exp();
        (rho.determinant().re - want).abs() / want.abs().max(1.0)
    })))
}

fn closed_min_eigenvalue(fam: &ClosedSolutionFamily, grid: &TimeGrid) -> Result<f64> {
    let mut least = f64::INFINITY;
    for t in grid.nodes() {
        least = least.min(posdef_check(&fam.rho(t), 0.0)?.min_eigenvalue);
    }
    Ok(least)
}

fn spinchain(ctx: &mut Recorder, c: &SpinChainConfig) -> Result<Vec<Table>> {
    use CheckName::*;
    let grid = ctx.scenario.grid;
    let fam = c.family();
    let mut tables = Vec::new();

    let needs_numeric = ctx.wants(DetRhoDrift)
        || ctx.wants(MetricVsClosed)
        || (fam.is_none() && (ctx.wants(Positivity) || ctx.wants(Indefiniteness)));
    let numeric = if needs_numeric { Some(integrate(c, &c.rho0(grid.t0), &grid)) } else { None };
    if let Some(Ok(evo)) = &numeric {
        tables.push(metric_table(c, evo));
    }
    let numeric = || numeric.as_ref().expect("metric evolution was requested").as_ref().map_err(Clone::clone);

    let min_eig = || match &fam {
        Some(f) => closed_min_eigenvalue(f, &grid),
        None => Ok(numeric()?.min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)),
    };
    ctx.check(Positivity, || Ok((-min_eig()?).max(0.0)))?;
    ctx.check(Indefiniteness, || Ok(min_eig()?.max(0.0)))?;
    ctx.check(DetRhoDrift, || det_drift(c, numeric()?))?;

    if let Some(f) = fam {
        ctx.check(MetricVsClosed, || {
            Ok(max(numeric()?.rho.iter().map(|(t, rho)| rho.max_abs_diff(&f.rho(t)))))
        })?;
        ctx.check(KappaOde, || {
            if grid.t0 != 0.0 {
                return Err(Error::InvalidParams("kappa_ode integrates from t0 = 0".into()));
            }
            let sol = kappa_ode_solve(&f.ode(), &grid, KAPPA_BOUND)?;
            Ok(max(grid.nodes().iter().zip(&sol.kappa).map(|(&t, k)| (k - f.kappa(t)).abs())))
        })?;
        ctx.check(QuasiResidual, || {
            let mut worst = 0.0f64;
            for t in grid.nodes() {
                let pair = MetricPair { rho: f.rho(t), rho_dot: f.rho_dot(t) };
                let r = quasi_residual(&c.hamiltonian(t)?, &pair)?.frobenius_norm();
                worst = worst.max(r / pair.rho.frobenius_norm().max(1.0));
            }
            Ok(worst)
        })?;
        ctx.check(Rk4Order, || {
            let error_at = |steps| -> Result<f64> {
                let g = TimeGrid::new(grid.t0, grid.t1, steps)?;
                let evo = integrate(c, &f.rho(grid.t0), &g)?;
                Ok(evo.rho.last().max_abs_diff(&f.rho(grid.t1)))
            };
            let ratio = error_at(RK4_ORDER_STEPS.0)? / error_at(RK4_ORDER_STEPS.1)?;
            Ok((ratio - 16.0).abs())
        })?;
    }

    if c.has_explicit_triple() {
        let triple = |t: f64| explicit_triple(t, c.lambda_real(t), SINGULARITY_MARGIN);
        ctx.check(ExplicitTriple, || {
            let mut worst = 0.0f64;
            for t in grid.nodes() {
                let x = triple(t)?;
                worst = worst.max((&x.eta * &x.eta).max_abs_diff(&x.rho));
                let ot = OperatorTriple::new(x.hamiltonian.clone(), x.eta.clone(), x.eta_dot.clone())?;
                worst = worst.max(dyson_residual(&x.h, &ot)?.frobenius_norm());
                let pair = MetricPair { rho: x.rho.clone(), rho_dot: x.rho_dot.clone() };
                worst = worst.max(quasi_residual(&x.hamiltonian, &pair)?.frobenius_norm());
                worst = worst.max((x.rho.determinant() - ONE).norm());
            }
            Ok(worst)
        })?;
        if ctx.wants(Unitarity) || ctx.wants(Conservation) {
            let evo = evolve_hermitian(|t| Ok(triple(t)?.h), &grid, DEFAULT_TOL);
            let evo = evo.as_ref().map_err(Clone::clone);
            ctx.check(Unitarity, || Ok(evo.clone()?.max_unitarity_defect))?;
            let mut series = None;
            ctx.check(Conservation, || {
                let evo = evo.clone()?;
                let big_u = map_evolution(&evo.propagators, |t| Ok(triple(t)?.eta))?;
                let psi = propagate_state(&big_u, &c.psi0())?;
                let cons = conservation_series(&psi, |t| Ok(triple(t)?.rho))?;
                let drift = cons.max_drift;
                series = Some((cons.values, evo.unitarity_defects.clone()));
                Ok(drift)
            })?;
            if let Some((prob, defects)) = series {
                let mut table = Table::new("conservation", ["t", "prob_rho", "unitarity_defect"].map(String::from).to_vec());
                for (k, t) in grid.nodes().into_iter().enumerate() {
                    table.push(vec![t, prob[k], defects[k]]);
                }
                tables.push(table);
            }
        }
    }
    ctx.sort();
    Ok(tables)
}

// ---------------------------------------------------------------- oscillator

struct Coherent {
    phi: Trajectory<StateVector>,
    psi: Trajectory<StateVector>,
}

fn coherent(c: &OscillatorConfig, series: &GammaSeries, dim: usize) -> Result<Coherent> {
    let sol = CoherentSolution::from_gamma(series, c.theta0.0, c.phi0)?;
    let phi = ground_solution(&sol, dim)?;
    let psi = mapped_solution(&FockSpace::new(dim)?, series, &phi)?;
    Ok(Coherent { phi, psi })
}

/// The diagonal Hermitian generator `ω(t) n + f(t)` at grid nodes.
fn diagonal_h(series: &GammaSeries, dim: usize) -> impl Fn(f64) -> Result<ComplexMatrix> + '_ {
    move |t| {
        let k = series.grid.index_of(t).ok_or_else(|| Error::InvalidParams(format!("t = {t} is not a grid node")))?;
        let f = series.f(k);
        Ok(ComplexMatrix::from_diag(&(0..dim).map(|n| f + series.omega[k] * n as f64).collect::<Vec<_>>()))
    }
}

fn psi_residuals(c: &OscillatorConfig, co: &Coherent, dim: usize) -> Result<Vec<(f64, f64)>> {
    let mut p = c.params();
    p.dim = dim;
    tdse_residual(&co.psi, |t| Ok(p.hamiltonian(t)))
}

fn oscillator(ctx: &mut Recorder, c: &OscillatorConfig) -> Result<Vec<Table>> {
    use CheckName::*;
    let grid = ctx.scenario.grid;
    let p = c.params();
    let dim = c.dim;
    let blk = dim - c.buffer();
    let series = gamma_solve(&p, &grid)?;
    let mut tables = Vec::new();

    let cols = ["t", "gamma_re", "gamma_im", "gamma_dot_re", "gamma_dot_im", "f_re", "f_im", "chi"];
    let mut gamma_table = Table::new("gamma", cols.map(String::from).to_vec());
    for (k, t) in grid.nodes().into_iter().enumerate() {
        let (g, gd, f) = (series.gamma[k], series.gamma_dot[k], series.f(k));
        gamma_table.push(vec![t, g.re, g.im, gd.re, gd.im, f.re, f.im, series.chi[k]]);
    }
    tables.push(gamma_table);

    let form_at = |k: usize| -> HermitianForm {
        let t = grid.node(k);
        hermitian_form(p.omega(t), p.alpha(t), p.beta(t), &series.exponents(k), dim)
    };

    ctx.check(ConstrainResidual, || series.constrain_residual_fd())?;
    if ctx.wants(HermiticityH) || ctx.wants(OffdiagH) || ctx.wants(ImF) {
        let (mut herm, mut off, mut imf) = (0.0f64, 0.0f64, 0.0f64);
        for k in 0..grid.len() {
            let form = form_at(k);
            herm = herm.max(hermiticity_defect(&form.h));
            off = off.max(form.h.off_diagonal_norm());
            imf = imf.max(form.f.im.abs());
        }
        ctx.check(HermiticityH, || Ok(herm))?;
        ctx.check(OffdiagH, || Ok(off))?;
        ctx.check(ImF, || Ok(imf))?;
    }

    if [TdsePhi, TdsePsi, TruncationGain, Conservation].iter().any(|&x| ctx.wants(x)) {
        let co = coherent(c, &series, dim);
        let phi_res = co.as_ref().map_err(Clone::clone).and_then(|co| tdse_residual(&co.phi, diagonal_h(&series, dim)));
        let psi_res = co.as_ref().map_err(Clone::clone).and_then(|co| psi_residuals(c, co, dim));
        let worst = |r: &Result<Vec<(f64, f64)>>| -> Result<f64> { Ok(max(r.clone()?.into_iter().map(|x| x.1))) };
        ctx.check(TdsePhi, || worst(&phi_res))?;
        ctx.check(TdsePsi, || worst(&psi_res))?;
        ctx.check(TruncationGain, || {
            let wide = coherent(c, &series, 2 * dim)?;
            let r_wide = max(psi_residuals(c, &wide, 2 * dim)?.into_iter().map(|r| r.1));
            Ok(r_wide / worst(&psi_res)?)
        })?;
        if let (Ok(phi_res), Ok(psi_res)) = (&phi_res, &psi_res) {
            let mut table = Table::new("residuals", ["t", "tdse_phi", "tdse_psi"].map(String::from).to_vec());
            for (a, b) in phi_res.iter().zip(psi_res) {
                table.push(vec![a.0, a.1, b.1]);
            }
            tables.push(table);
        }
        let space = FockSpace::new(dim)?;
        let mut prob = None;
        ctx.check(Conservation, || {
            let co = co.as_ref().map_err(Clone::clone)?;
            let cons = conservation_series(&co.psi, |t| {
                let k = grid.index_of(t).expect("trajectory lives on the grid");
                let eta = space.dyson_map(series.gamma[k]);
                Ok(&eta.adjoint() * &eta)
            })?;
            let drift = cons.max_drift;
            prob = Some(cons.values);
            Ok(drift)
        })?;
        if let Some(prob) = prob {
            let mut table = Table::new("conservation", ["t", "prob_rho"].map(String::from).to_vec());
            for (t, v) in grid.nodes().into_iter().zip(prob) {
                table.push(vec![t, v]);
            }
            tables.push(table);
        }
    }

    if [QuadratureIdentity, HtildeIdentity, HtildeSpectrum].iter().any(|&x| ctx.wants(x)) {
        let space = FockSpace::new(dim)?;
        let x_op = space.x();
        let p_op = space.p();
        let id = ComplexMatrix::identity(dim);
        ctx.check(QuadratureIdentity, || {
            let mut worst = 0.0f64;
            for k in sample_indices(&grid, IDENTITY_SAMPLES) {
                let g = series.gamma[k];
                let (eta, inv) = (space.dyson_map(g), space.dyson_map_inverse(g));
                // X = x − i√2 Im γ, P = p − i√2 Re γ
                let want_x = &x_op - &id.scale(I * (SQRT_2 * g.im));
                let want_p = &p_op - &id.scale(I * (SQRT_2 * g.re));
                worst = worst.max((&(&(&inv * &x_op) * &eta) - &want_x).block(blk).frobenius_norm());
                worst = worst.max((&(&(&inv * &p_op) * &eta) - &want_p).block(blk).frobenius_norm());
            }
            Ok(worst)
        })?;
        ctx.check(HtildeIdentity, || {
            let mut worst = 0.0f64;
            for k in sample_indices(&grid, IDENTITY_SAMPLES) {
                let g = series.gamma[k];
                let m = quadratures_and_htilde(&space, g, series.gamma_dot[k], series.omega[k]);
                let mapped = &(&space.dyson_map_inverse(g) * &form_at(k).h) * &space.dyson_map(g);
                worst = worst.max((&mapped - &m.htilde).block(blk).frobenius_norm());
            }
            Ok(worst)
        })?;
        ctx.check(HtildeSpectrum, || {
            let mut worst = 0.0f64;
            for k in sample_indices(&grid, SPECTRUM_SAMPLES) {
                let m = quadratures_and_htilde(&space, series.gamma[k], series.gamma_dot[k], series.omega[k]);
                let spectrum = eigenvalues_general(&m.htilde)?;
                let f = series.f(k);
                let w = series.omega[k];
                worst = worst.max(max((0..blk).map(|n| (spectrum[n] - (f + C64::new(w * n as f64, 0.0))).norm())));
            }
            Ok(worst)
        })?;
    }
    ctx.sort();
    Ok(tables)
}
