use super::{hermiticity_defect, ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Sweep cap for the cyclic Jacobi iteration.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// `m = basis · diag(eigenvalues) · basis†` with eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub basis: ComplexMatrix,
}

impl EigenDecomposition {
    /// `basis · diag(f(λ)) · basis†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.basis.dim();
        let fl: Vec<C64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| self.basis[(i, k)] * fl[k] * self.basis[(j, k)].conj()).sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|x| C64::new(x, 0.0))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |a, &x| a.max(x.abs()))
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `m[p][q]` and then applies the
/// real symmetric Jacobi rotation that annihilates it. Sweeps continue until the
/// off-diagonal Frobenius norm drops to rounding level relative to `‖m‖_F`.
///
/// Eigenvalues come out ascending; every eigenvector is rephased so that its first
/// component of non-negligible size is real and positive, which makes the output
/// reproducible for identical inputs.
pub fn hermitian_eigen(m: &ComplexMatrix, tol: f64) -> Result<EigenDecomposition> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let defect = hermiticity_defect(m);
    if defect > tol {
        return Err(Error::NotHermitian { defect, tol });
    }
    let n = m.dim();
    let mut a = m.hermitian_part();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    let target = f64::EPSILON * scale * n as f64;

    let mut sweeps = 0;
    loop {
        let off = a.off_diagonal_norm();
        if off <= target {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut basis = ComplexMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        let phase = leading_phase(&v, k);
        for i in 0..n {
            basis[(i, col)] = v[(i, k)] * phase;
        }
    }
    Ok(EigenDecomposition { eigenvalues, basis })
}

/// One Jacobi rotation annihilating `a[p][q]`, accumulated into `v`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // tiny pivots relative to the diagonal cannot move the eigenvalues
    if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = apq / r; // e^{iφ}
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on the (p, q) plane
    let pc = phase.conj();
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = pc * (-s);
    let g_qq = pc * c;

    let n = a.dim();
    // A ← A G
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    // A ← G† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    // V ← V G
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// Unit phase that makes the first significant component of column `k` real-positive.
fn leading_phase(v: &ComplexMatrix, k: usize) -> C64 {
    let n = v.dim();
    let col_max = (0..n).map(|i| v[(i, k)].norm()).fold(0.0, f64::max);
    for i in 0..n {
        let z = v[(i, k)];
        if z.norm() > 1e-8 * col_max {
            return z.conj() / z.norm();
        }
    }
    ONE
}

/// Eigenvalues of a general complex matrix (Hessenberg reduction + shifted QR).
///
/// Returned sorted by real part, then imaginary part.
pub fn eigenvalues_general(m: &ComplexMatrix) -> Result<Vec<C64>> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.dim();
    let mut h = m.clone();
    hessenberg(&mut h);

    let max_iter = 60 * n.max(1);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        // locate the start of the unreduced block ending at `hi`
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if sub <= f64::EPSILON * diag.max(f64::MIN_POSITIVE) {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_iter {
            return Err(Error::NoConvergence { sweeps: total, off_norm: h[(hi, hi - 1)].norm() });
        }
        let shift = if iter % 11 == 10 {
            // exceptional shift to break cycles
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_step(&mut h, lo, hi, shift);
    }
    let mut ev: Vec<C64> = (0..n).map(|i| h[(i, i)]).collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Single explicit shifted QR step on the active block `lo..=hi` of a Hessenberg matrix.
fn qr_step(h: &mut ComplexMatrix, lo: usize, hi: usize, shift: C64) {
    for k in lo..=hi {
        h[(k, k)] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let x = h[(k, k)];
        let y = h[(k + 1, k)];
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (x / r, y / r) };
        // rows k, k+1 ← [[c̄, s̄], [−s, c]] · rows
        for j in k..=hi {
            let hk = h[(k, j)];
            let hk1 = h[(k + 1, j)];
            h[(k, j)] = c.conj() * hk + s.conj() * hk1;
            h[(k + 1, j)] = -s * hk + c * hk1;
        }
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        let top = (k + 2).min(hi);
        for i in lo..=top {
            let hik = h[(i, k)];
            let hik1 = h[(i, k + 1)];
            h[(i, k)] = hik * c + hik1 * s;
            h[(i, k + 1)] = -hik * s.conj() + hik1 * c.conj();
        }
    }
    for k in lo..=hi {
        h[(k, k)] += shift;
    }
}

/// In-place reduction to upper Hessenberg form by Householder reflections.
fn hessenberg(h: &mut ComplexMatrix) {
    let n = h.dim();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H ← (I − 2vv†) H on rows k+1..n
        for j in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)]).sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= *vi * dot * 2.0;
            }
        }
        // H ← H (I − 2vv†) on columns k+1..n
        for i in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(j, vj)| h[(i, k + 1 + j)] * vj).sum();
            for (j, vj) in v.iter().enumerate() {
                h[(i, k + 1 + j)] -= dot * vj.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densemat::I;

    fn herm_from_seed(n: usize, seed: u64) -> ComplexMatrix {
        // small LCG, enough for deterministic fixtures
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let m = ComplexMatrix::from_fn(n, |_, _| C64::new(next(), next()));
        (&m + &m.adjoint()).scale_real(0.5)
    }

    #[test]
    fn diagonal_input() {
        let e = hermitian_eigen(&ComplexMatrix::from_real_diag(&[1.0, 2.0]), 1e-10).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0]);
        assert_eq!(e.basis, ComplexMatrix::identity(2));
    }

    #[test]
    fn pauli_x() {
        let x = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let e = hermitian_eigen(&x, 1e-10).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn characteristic_polynomial_roots() {
        // λ² − 6λ + 1 = 0
        let m = ComplexMatrix::from_real_rows(&[[5.0, 2.0], [2.0, 1.0]]).unwrap();
        let e = hermitian_eigen(&m, 1e-10).unwrap();
        let r = 2.0 * 2.0f64.sqrt();
        assert!((e.eigenvalues[0] - (3.0 - r)).abs() < 1e-14);
        assert!((e.eigenvalues[1] - (3.0 + r)).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[[ZERO, I], [I, ZERO]]).unwrap();
        assert!(matches!(hermitian_eigen(&m, 1e-10), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn deterministic_and_phase_fixed() {
        let m = herm_from_seed(12, 7);
        let a = hermitian_eigen(&m, 1e-10).unwrap();
        let b = hermitian_eigen(&m.clone(), 1e-10).unwrap();
        assert_eq!(a, b);
        for k in 0..12 {
            let first = (0..12).map(|i| a.basis[(i, k)]).find(|z| z.norm() > 1e-8).unwrap();
            assert!(first.im.abs() < 1e-14 && first.re > 0.0);
        }
    }

    #[test]
    fn random_reconstruction() {
        for (n, seed) in [(3, 1), (17, 2), (40, 3)] {
            let m = herm_from_seed(n, seed);
            let e = hermitian_eigen(&m, 1e-10).unwrap();
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let err = (&e.reconstruct() - &m).frobenius_norm();
            assert!(err <= 1e-12 * m.frobenius_norm(), "n={n}: {err}");
        }
    }

    #[test]
    fn general_eigenvalues_match_hermitian() {
        let m = herm_from_seed(9, 11);
        let e = hermitian_eigen(&m, 1e-10).unwrap();
        let g = eigenvalues_general(&m).unwrap();
        for (a, b) in e.eigenvalues.iter().zip(&g) {
            assert!((b - a).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn general_eigenvalues_of_non_normal_matrices() {
        // upper triangular: eigenvalues on the diagonal
        let t = ComplexMatrix::from_fn(5, |i, j| {
            if i == j {
                C64::new(i as f64, -(i as f64))
            } else if j > i {
                C64::new(1.0 + i as f64, 0.5)
            } else {
                ZERO
            }
        });
        let g = eigenvalues_general(&t).unwrap();
        for (k, z) in g.iter().enumerate() {
            assert!((z - C64::new(k as f64, -(k as f64))).norm() < 1e-12);
        }
        // rotation generator [[0,1],[−1,0]] has ±i
        let r = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        let g = eigenvalues_general(&r).unwrap();
        assert!((g[0].im.abs() - 1.0).abs() < 1e-14 && g[0].re.abs() < 1e-14);
        assert!((g[0] + g[1]).norm() < 1e-14);
    }

    #[test]
    fn general_eigenvalues_similarity_invariant() {
        let d: Vec<C64> = (0..8).map(|k| C64::new(k as f64 * 0.7 - 2.0, 0.3 * k as f64)).collect();
        let s = &ComplexMatrix::identity(8) + &herm_from_seed(8, 5).scale(C64::new(0.2, 0.1));
        let a = &(&s * &ComplexMatrix::from_diag(&d)) * &s.inverse().unwrap();
        let g = eigenvalues_general(&a).unwrap();
        let mut want = d.clone();
        want.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (x, y) in g.iter().zip(&want) {
            assert!((x - y).norm() < 1e-10, "{x} vs {y}");
        }
    }
}
