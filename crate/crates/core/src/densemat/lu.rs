use super::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

fn factor(m: &ComplexMatrix) -> Lu {
    let n = m.dim();
    let mut lu = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut singular = false;
    let scale = m.max_abs();
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= f64::EPSILON * scale * 1e-3 || pmax == 0.0 {
            singular = true;
            continue;
        }
        if piv != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            perm.swap(k, piv);
            sign = -sign;
        }
        let d = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / d;
            lu[(i, k)] = f;
            if f == ZERO {
                continue;
            }
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= f * u;
            }
        }
    }
    Lu { lu, perm, sign, singular }
}

pub(super) fn determinant(m: &ComplexMatrix) -> C64 {
    if m.dim() == 2 {
        return m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    }
    let f = factor(m);
    if f.singular {
        return ZERO;
    }
    (0..m.dim()).fold(C64::new(f.sign, 0.0), |acc, i| acc * f.lu[(i, i)])
}

pub(super) fn solve(m: &ComplexMatrix, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.dim() != rhs.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: rhs.dim() });
    }
    let f = factor(m);
    if f.singular {
        return Err(Error::Singular);
    }
    let n = m.dim();
    let mut x = ComplexMatrix::zeros(n);
    for col in 0..n {
        let mut y: Vec<C64> = (0..n).map(|i| rhs[(f.perm[i], col)]).collect();
        for i in 0..n {
            let s: C64 = (0..i).map(|k| f.lu[(i, k)] * y[k]).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let s: C64 = (i + 1..n).map(|k| f.lu[(i, k)] * y[k]).sum();
            y[i] = (y[i] - s) / f.lu[(i, i)];
        }
        for i in 0..n {
            x[(i, col)] = y[i];
        }
    }
    if !x.is_finite() {
        return Err(Error::Singular);
    }
    Ok(x)
}

pub(super) fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve(m, &ComplexMatrix::identity(m.dim()))
}
