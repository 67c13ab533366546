//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero on any failure.
//!
//! Every tolerance is pinned here; none is read from the environment.

use std::f64::consts::SQRT_2;
use std::time::Instant;

use qh_core::densemat::{eigenvalues_general, hermiticity_defect, ComplexMatrix, C64, I, ONE, ZERO};
use qh_core::oscillator::{
    gamma_solve, ground_solution, hermitian_coefficients, hermitian_form, mapped_solution,
    quadratures_and_htilde, CoherentSolution, DysonExponents, FockSpace, OscillatorParams,
};
use qh_core::propagator::{
    conservation_series, evolve_hermitian, evolve_metric, evolve_state_rk4, map_evolution,
    propagate_state, tdse_residual, TimeGrid, Trajectory,
};
use qh_core::relations::{dyson_residual, quasi_residual, MetricPair, OperatorTriple};
use qh_core::spinchain::{
    explicit_triple, h1, kappa_ode_solve, positivity_window, ClosedSolutionFamily, FamilyKind, KAPPA_BOUND,
};
use qh_core::{Result, TimeFunction, SINGULARITY_MARGIN};

#[derive(Clone, Copy)]
enum Bound {
    AtMost,
    AtLeast,
}

struct Check {
    label: String,
    value: f64,
    tol: f64,
    bound: Bound,
}

impl Check {
    fn le(label: &str, value: f64, tol: f64) -> Self {
        Check { label: label.into(), value, tol, bound: Bound::AtMost }
    }

    fn ge(label: &str, value: f64, tol: f64) -> Self {
        Check { label: label.into(), value, tol, bound: Bound::AtLeast }
    }

    fn flag(label: &str, ok: bool) -> Self {
        Check::le(label, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.value <= self.tol,
            Bound::AtLeast => self.value >= self.tol,
        }
    }

    fn render(&self) -> String {
        let op = match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        format!("{} {:.3e} {op} {:e}", self.label, self.value, self.tol)
    }
}

fn max(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn c1_explicit_triple() -> Result<Vec<Check>> {
    let (mut sq, mut dys, mut quasi, mut det) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..100 {
        let t = -1.4 + 2.8 * (k as f64 + 0.5) / 100.0;
        for lambda in [1.0, t.sin()] {
            let x = explicit_triple(t, lambda, SINGULARITY_MARGIN)?;
            sq = sq.max((&x.eta * &x.eta).max_abs_diff(&x.rho));
            let triple = OperatorTriple::new(x.hamiltonian.clone(), x.eta.clone(), x.eta_dot.clone())?;
            dys = dys.max(dyson_residual(&x.h, &triple)?.frobenius_norm());
            let pair = MetricPair { rho: x.rho.clone(), rho_dot: x.rho_dot.clone() };
            quasi = quasi.max(quasi_residual(&x.hamiltonian, &pair)?.frobenius_norm());
            det = det.max((x.rho.determinant() - ONE).norm());
        }
    }
    Ok(vec![
        Check::le("|eta^2-rho|", sq, 1e-12),
        Check::le("dyson", dys, 1e-10),
        Check::le("quasi", quasi, 1e-10),
        Check::le("|det rho-1|", det, 1e-12),
    ])
}

fn c2_kappa_ode() -> Result<Vec<Check>> {
    let s1 = ClosedSolutionFamily::new(FamilyKind::Tan, 1.0);
    let sol = kappa_ode_solve(&s1.ode(), &TimeGrid::new(0.0, 1.0, 10_000)?, KAPPA_BOUND)?;
    let e1 = (sol.kappa.last().unwrap() - 2.0 * 1f64.tan()).abs();
    let s3 = ClosedSolutionFamily::new(FamilyKind::Tanh, 1.0);
    let sol = kappa_ode_solve(&s3.ode(), &TimeGrid::new(0.0, 2.0, 20_000)?, KAPPA_BOUND)?;
    let e3 = (sol.kappa.last().unwrap() - 2.0 * 2f64.tanh()).abs();
    Ok(vec![Check::le("s1@t=1", e1, 1e-6), Check::le("s3@t=2", e3, 1e-6)])
}

fn c3_positivity_window() -> Result<Vec<Check>> {
    let step = 0.01;
    let deltas: Vec<f64> = (0..=2000).map(|k| -10.0 + step * k as f64).collect();
    let tan = positivity_window(FamilyKind::Tan, &deltas)?;
    let admitted: Vec<f64> = tan.iter().filter(|r| r.admissible).map(|r| r.delta0).collect();
    let (lo, hi) = (3.0 - 5f64.sqrt(), 3.0 + 5f64.sqrt());
    let first = admitted.first().copied().unwrap_or(f64::NAN);
    let last = admitted.last().copied().unwrap_or(f64::NAN);
    let contiguous = admitted.len() == ((last - first) / step).round() as usize + 1;
    let others = positivity_window(FamilyKind::Sec, &deltas)?
        .into_iter()
        .chain(positivity_window(FamilyKind::Tanh, &deltas)?)
        .filter(|r| r.admissible)
        .count();
    Ok(vec![
        Check::le("|lower-(3-sqrt5)|", (first - lo).abs(), step),
        Check::le("|upper-(3+sqrt5)|", (hi - last).abs(), step),
        Check::flag("contiguous", contiguous && first > lo && last < hi),
        Check::le("sec/tanh admitted", others as f64, 0.0),
    ])
}

fn s1_metric_error(steps: usize) -> Result<(f64, Trajectory<ComplexMatrix>)> {
    let fam = ClosedSolutionFamily::new(FamilyKind::Tan, 1.0);
    let grid = TimeGrid::new(0.0, 1.0, steps)?;
    let evo = evolve_metric(|t| Ok(h1(1.0, fam.kappa(t))), &fam.rho(0.0), &grid, 1e-10)?;
    let err = evo.rho.last().max_abs_diff(&fam.rho(1.0));
    Ok((err, evo.rho))
}

fn c4_metric_ode() -> Result<Vec<Check>> {
    let (err, traj) = s1_metric_error(1000)?;
    let det_drift = max(traj.values.iter().map(|r| (r.determinant() - ONE).norm()));
    let e_coarse = s1_metric_error(200)?.0;
    let e_fine = s1_metric_error(400)?.0;
    let ratio = e_coarse / e_fine;
    Ok(vec![
        Check::le("|rho(1)-closed|", err, 1e-6),
        Check::ge("ratio dt 5e-3/2.5e-3", ratio, 14.0),
        Check::le("ratio", ratio, 18.0),
        Check::le("det drift", det_drift, 1e-8),
    ])
}

fn c5_mapped_evolution() -> Result<Vec<Check>> {
    let grid = TimeGrid::new(0.0, 1.0, 1000)?;
    let triple_at = |t: f64| explicit_triple(t, 1.0, SINGULARITY_MARGIN);
    let evo = evolve_hermitian(|t| Ok(triple_at(t)?.h), &grid, 1e-10)?;
    let big_u = map_evolution(&evo.propagators, |t| Ok(triple_at(t)?.eta))?;
    let psi0 = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
    let psi = propagate_state(&big_u, &psi0)?;
    let cons = conservation_series(&psi, |t| Ok(triple_at(t)?.rho))?;
    let rho0 = triple_at(0.0)?.rho;
    let mut metric_unitarity = 0.0f64;
    for (t, u) in big_u.iter() {
        let lhs = &(&u.adjoint() * &triple_at(t)?.rho) * u;
        metric_unitarity = metric_unitarity.max(lhs.max_abs_diff(&rho0));
    }
    let fam = ClosedSolutionFamily::new(FamilyKind::Tan, 1.0);
    let direct = evolve_state_rk4(|t| Ok(h1(1.0, fam.kappa(t))), &psi0, &grid)?;
    let control = conservation_series(&direct, |_| Ok(ComplexMatrix::identity(2)))?;
    Ok(vec![
        Check::le("unitarity defect", evo.max_unitarity_defect, 1e-8),
        Check::le("<psi|rho psi> drift", cons.max_drift, 1e-8),
        Check::le("U^+ rho U - rho0", metric_unitarity, 1e-7),
        Check::ge("control drift (rho=I)", control.max_drift, 1e-2),
    ])
}

fn oscillator_params(dim: usize) -> OscillatorParams {
    OscillatorParams::new(
        TimeFunction::sinusoid(0.2, 1.0, 0.0, 1.0),
        TimeFunction::constant(C64::new(0.0, 0.5)),
        dim,
        ZERO,
    )
}

fn c6_oscillator_family() -> Result<Vec<Check>> {
    let p = oscillator_params(40);
    let grid = TimeGrid::new(0.0, 1.0, 1000)?;
    let s = gamma_solve(&p, &grid)?;
    let (mut herm, mut off, mut imf) = (0.0f64, 0.0f64, 0.0f64);
    for (k, t) in grid.nodes().into_iter().enumerate() {
        let form = hermitian_form(p.omega(t), p.alpha(t), p.beta(t), &s.exponents(k), p.dim);
        herm = herm.max(hermiticity_defect(&form.h));
        off = off.max(form.h.off_diagonal_norm());
        imf = imf.max(form.f.im.abs());
    }
    Ok(vec![
        Check::le("constrain residual (fd)", s.constrain_residual_fd()?, 1e-8),
        Check::le("herm defect h", herm, 1e-10),
        Check::le("offdiag h", off, 1e-10),
        Check::le("|Im f|", imf, 1e-12),
    ])
}

/// Largest interior TDSE residuals of `φ` against `h` and of `Ψ = η⁻¹φ` against `H`.
fn coherent_residuals(dim: usize, theta0: f64) -> Result<(f64, f64)> {
    let p = oscillator_params(dim);
    let grid = TimeGrid::new(0.0, 1.0, 1000)?;
    let s = gamma_solve(&p, &grid)?;
    let sol = CoherentSolution::from_gamma(&s, C64::new(theta0, 0.0), 0.0)?;
    let phi = ground_solution(&sol, dim)?;
    let h_at = |t: f64| {
        let k = grid.index_of(t).expect("node time");
        let f = s.f(k);
        let diag: Vec<C64> = (0..dim).map(|n| f + s.omega[k] * n as f64).collect();
        Ok(ComplexMatrix::from_diag(&diag))
    };
    let r_phi = max(tdse_residual(&phi, h_at)?.into_iter().map(|(_, r)| r));
    let space = FockSpace::new(dim)?;
    let psi = mapped_solution(&space, &s, &phi)?;
    let r_psi = max(tdse_residual(&psi, |t| Ok(p.hamiltonian(t)))?.into_iter().map(|(_, r)| r));
    Ok((r_phi, r_psi))
}

const COHERENT_THETA0: f64 = 2.6;

fn c7_coherent() -> Result<Vec<Check>> {
    let (r_phi, r40) = coherent_residuals(40, COHERENT_THETA0)?;
    let (_, r80) = coherent_residuals(80, COHERENT_THETA0)?;
    Ok(vec![
        Check::le("phi vs h", r_phi, 1e-6),
        Check::le("Psi vs H dim40", r40, 1e-5),
        Check::ge("dim40/dim80", r40 / r80, 10.0),
    ])
}

fn c8_operator_identities() -> Result<Vec<Check>> {
    let (dim, buffer) = (40, 10);
    let blk = dim - buffer;
    let p = oscillator_params(dim);
    let t = 0.5;
    let (w, alpha) = (p.omega(t).re, p.alpha(t));
    let gamma = C64::new(0.3, 0.1);
    let gamma_dot = I * (alpha + gamma * w);
    let space = FockSpace::new(dim)?;
    let eta = space.dyson_map(gamma);
    let inv = space.dyson_map_inverse(gamma);
    let mapped = quadratures_and_htilde(&space, gamma, gamma_dot, w);
    let x_err = (&(&(&inv * &space.x()) * &eta) - &mapped.x).block(blk).frobenius_norm();

    let e = DysonExponents::solved_branch(gamma, gamma_dot);
    let form = hermitian_form(C64::new(w, 0.0), alpha, -alpha.conj(), &e, dim);
    let h_err = (&(&(&inv * &form.h) * &eta) - &mapped.htilde).block(blk).frobenius_norm();

    let spectrum = eigenvalues_general(&mapped.htilde)?;
    let spec_err = max((0..blk).map(|n| (spectrum[n] - (form.f + w * n as f64)).norm()));
    Ok(vec![
        Check::le("eta^-1 x eta - X", x_err, 1e-8),
        Check::le("eta^-1 h eta - Htilde", h_err, 1e-8),
        Check::le("eig Htilde vs h", spec_err, 1e-7),
    ])
}

fn c9_displacement_branch() -> Result<Vec<Check>> {
    let mut state = 0x9E3779B97F4A7C15u64;
    let mut rnd = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
    };
    let (mut worst, mut herm) = (0.0f64, 0.0f64);
    let mut least_gap = f64::INFINITY;
    for _ in 0..1000 {
        let w = C64::new(rnd(), 0.0);
        let (a, b) = (C64::new(rnd(), rnd()), C64::new(rnd(), rnd()));
        let e = DysonExponents::displacement_branch(C64::new(rnd(), rnd()), C64::new(rnd(), rnd()));
        let (u, v, _) = hermitian_coefficients(w, a, b, &e);
        // const1 = u − v* reduces to α − β*, independent of γ, γ̇ and ω
        worst = worst.max(((u - v.conj()) - (a - b.conj())).norm());
        least_gap = least_gap.min((u - v.conj()).norm() / (a - b.conj()).norm());
        // forcing const1 = 0 leaves only β = α*, a Hermitian H
        let h = qh_core::oscillator::build_hamiltonian(w, a, a.conj(), 8);
        herm = herm.max(hermiticity_defect(&h));
    }
    Ok(vec![
        Check::le("|const1-(alpha-beta*)|", worst, 1e-12),
        Check::ge("const1/(alpha-beta*)", least_gap, 1.0 - 1e-12),
        Check::le("herm defect at const1=0", herm, 0.0),
    ])
}

fn trajectory_identity_check() -> Result<Vec<Check>> {
    // informational companion to C8: the whole scenario trajectory needs a wider buffer
    let (dim, buffer) = (40, 14);
    let p = oscillator_params(dim);
    let grid = TimeGrid::new(0.0, 1.0, 100)?;
    let s = gamma_solve(&p, &grid)?;
    let space = FockSpace::new(dim)?;
    let mut worst = 0.0f64;
    for k in 0..grid.len() {
        let g = s.gamma[k];
        let m = quadratures_and_htilde(&space, g, s.gamma_dot[k], s.omega[k]);
        let x = &(&space.dyson_map_inverse(g) * &space.x()) * &space.dyson_map(g);
        let want = &space.x() - &ComplexMatrix::identity(dim).scale(I * (SQRT_2 * g.im));
        worst = worst.max((&x - &want).block(dim - buffer).frobenius_norm());
        worst = worst.max((&m.x - &want).frobenius_norm());
    }
    Ok(vec![Check::le("eta^-1 x eta - X over t in [0,1], buffer 14", worst, 1e-8)])
}

type Criterion = (&'static str, &'static str, f64, fn() -> Result<Vec<Check>>);

fn main() {
    let criteria: [Criterion; 10] = [
        ("C1", "spin-chain explicit triple", 1.0, c1_explicit_triple),
        ("C2", "closed kappa solutions", 1.0, c2_kappa_ode),
        ("C3", "positivity window", 1.0, c3_positivity_window),
        ("C4", "metric ODE vs closed form", 1.0, c4_metric_ode),
        ("C5", "unitary mapped evolution", 5.0, c5_mapped_evolution),
        ("C6", "oscillator solved family", 5.0, c6_oscillator_family),
        ("C7", "coherent solution", 30.0, c7_coherent),
        ("C8", "operator identities", 5.0, c8_operator_identities),
        ("C9", "displacement-branch obstruction", 1.0, c9_displacement_branch),
        ("C8b", "trajectory-wide quadrature identity", 5.0, trajectory_identity_check),
    ];
    let mut failures = 0;
    for (id, title, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok(mut checks) => {
                checks.push(Check::le("runtime[s]", secs, budget));
                let ok = checks.iter().all(Check::passed);
                let detail = checks
                    .iter()
                    .map(|c| if c.passed() { c.render() } else { format!("**{}**", c.render()) })
                    .collect::<Vec<_>>()
                    .join("; ");
                (ok, detail)
            }
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!("{} {id:<3} {title}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
