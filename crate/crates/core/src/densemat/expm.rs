use super::{anti_hermiticity_defect, hermitian_eigen, hermiticity_defect, ComplexMatrix, C64, I};
use crate::error::{Error, Result};

/// Largest admissible norm of the exponent (spectral radius for normal inputs,
/// 1-norm otherwise). `e^700` is still representable in `f64`.
pub const EXPM_NORM_LIMIT: f64 = 700.0;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential.
///
/// Hermitian and anti-Hermitian inputs go through the Jacobi eigendecomposition, which
/// keeps `exp(−i·dt·h)` unitary to rounding. Everything else uses scaling and squaring
/// with the degree-13 diagonal Padé approximant.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let norm = m.frobenius_norm();
    let n = m.dim();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let structural_tol = 8.0 * f64::EPSILON * norm * n as f64;

    if hermiticity_defect(m) <= structural_tol {
        let eig = hermitian_eigen(m, structural_tol.max(f64::MIN_POSITIVE))?;
        check_limit(eig.max_abs_eigenvalue())?;
        return Ok(eig.map_spectrum(|x| C64::new(x.exp(), 0.0)));
    }
    if anti_hermiticity_defect(m) <= structural_tol {
        // m = iK with K Hermitian
        let k = m.scale(-I);
        let eig = hermitian_eigen(&k, structural_tol.max(f64::MIN_POSITIVE))?;
        check_limit(eig.max_abs_eigenvalue())?;
        return Ok(eig.map_spectrum(|x| C64::new(0.0, x).exp()));
    }
    pade_scaling_squaring(m)
}

fn check_limit(norm: f64) -> Result<()> {
    if norm > EXPM_NORM_LIMIT {
        Err(Error::Overflow { norm, limit: EXPM_NORM_LIMIT })
    } else {
        Ok(())
    }
}

fn pade_scaling_squaring(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.dim();
    let norm1 = m.norm_one();
    check_limit(norm1)?;
    let s = if norm1 > THETA13 { (norm1 / THETA13).log2().ceil() as i32 } else { 0 };
    let a = m.scale_real(0.5f64.powi(s));
    let id = ComplexMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;

    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> ComplexMatrix {
        let mut r = a6.scale_real(c6);
        r += &a4.scale_real(c4);
        r += &a2.scale_real(c2);
        r += &id.scale_real(c0);
        r
    };
    let u_inner = &(&a6 * &lin(b[13], b[11], b[9], 0.0)) + &lin(b[7], b[5], b[3], b[1]);
    let u = &a * &u_inner;
    let v = &(&a6 * &lin(b[12], b[10], b[8], 0.0)) + &lin(b[6], b[4], b[2], b[0]);

    let mut r = (&v - &u).solve(&(&v + &u))?;
    for _ in 0..s {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(Error::Overflow { norm: norm1, limit: EXPM_NORM_LIMIT });
    }
    Ok(r)
}
