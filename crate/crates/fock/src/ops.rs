//! Truncated single-mode operators.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{FockError, Result};

pub type CMatrix = DMatrix<Complex64>;

fn check(d: usize) -> Result<()> {
    if d < 2 {
        return Err(FockError::Truncation(d));
    }
    Ok(())
}

/// Annihilation operator `a|k> = sqrt(k)|k-1>` on levels `0..d`.
pub fn annihilation(d: usize) -> Result<CMatrix> {
    check(d)?;
    let mut a = CMatrix::zeros(d, d);
    for k in 1..d {
        a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    Ok(a)
}

pub fn creation(d: usize) -> Result<CMatrix> {
    Ok(annihilation(d)?.adjoint())
}

pub fn number(d: usize) -> Result<CMatrix> {
    check(d)?;
    Ok(CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |k, _| {
        Complex64::new(k as f64, 0.0)
    })))
}

/// `(q, p)` with `q = a + a^dag` and `p = -i (a - a^dag)`.
pub fn quadrature_ops(d: usize) -> Result<(CMatrix, CMatrix)> {
    let a = annihilation(d)?;
    let ad = a.adjoint();
    let q = &a + &ad;
    let p = (&a - &ad) * Complex64::new(0.0, -1.0);
    Ok((q, p))
}

/// Kronecker product with the first factor as the most significant index.
pub fn kron(x: &CMatrix, y: &CMatrix) -> CMatrix {
    x.kronecker(y)
}
