//! Phase-space conventions and the numerical predicates shared by the engine.
//!
//! Coordinates are ordered `z = (q_1, ..., q_n, p_1, ..., p_n)` and quadratures
//! are measured in units with `hbar = 2`, so the vacuum covariance is the
//! identity and a covariance `gamma` is physical iff `gamma + i*sigma >= 0`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Value of hbar in quadrature units: `[q, p] = 2i`.
pub const HBAR: f64 = 2.0;

/// Default tolerance for the linear-algebra predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tolerance on symplectic eigenvalues when checking physicality.
pub const PHYSICALITY_TOL: f64 = 1e-6;

/// Index of the position quadrature of `mode`.
#[inline]
pub fn q_index(mode: usize) -> usize {
    mode
}

/// Index of the momentum quadrature of `mode` in an `n`-mode phase space.
#[inline]
pub fn p_index(n: usize, mode: usize) -> usize {
    n + mode
}

/// Number of modes of a phase space of dimension `dim`.
pub fn modes_of(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "phase-space dimension must be even and positive, got {dim}"
        )));
    }
    Ok(dim / 2)
}

/// The symplectic form `[[0, I_n], [-I_n, 0]]`.
pub fn sigma(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidDimension("mode count must be at least 1".into()));
    }
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        s[(i, n + i)] = 1.0;
        s[(n + i, i)] = -1.0;
    }
    Ok(s)
}

fn check_square(rows: usize, cols: usize) -> Result<()> {
    if rows != cols {
        return Err(Error::InvalidDimension(format!(
            "expected a square matrix, got {rows}x{cols}"
        )));
    }
    Ok(())
}

/// Max-abs entry of `A^T sigma A - sigma`.
pub fn symplectic_deviation(a: &DMatrix<f64>) -> Result<f64> {
    check_square(a.nrows(), a.ncols())?;
    let n = modes_of(a.nrows())?;
    let s = sigma(n)?;
    let d = a.transpose() * &s * a - s;
    Ok(d.amax())
}

pub fn is_symplectic(a: &DMatrix<f64>, tol: f64) -> Result<bool> {
    Ok(symplectic_deviation(a)? <= tol)
}

/// Largest absolute difference between `m` and its transpose.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// `(m + m^T) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Smallest eigenvalue of the Hermitian part `(H + H^dag) / 2`.
pub fn min_hermitian_eigenvalue(h: &DMatrix<Complex64>) -> Result<f64> {
    check_square(h.nrows(), h.ncols())?;
    if h.nrows() == 0 {
        return Err(Error::InvalidDimension("empty matrix".into()));
    }
    let herm = (h + h.adjoint()).map(|z| z * 0.5);
    let eig = SymmetricEigen::new(herm);
    Ok(eig.eigenvalues.min())
}

pub fn is_hermitian_psd(h: &DMatrix<Complex64>, tol: f64) -> Result<bool> {
    Ok(min_hermitian_eigenvalue(h)? >= -tol)
}

/// Symplectic eigenvalues of `gamma`, i.e. the moduli of the eigenvalues of
/// `i sigma gamma`, one per `+-` pair, in descending order.
pub fn symplectic_spectrum(gamma: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_square(gamma.nrows(), gamma.ncols())?;
    let n = modes_of(gamma.nrows())?;
    let scale = gamma.amax().max(1.0);
    let asym = asymmetry(gamma);
    if asym > DEFAULT_TOL * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let g = symmetrize(gamma);
    let s = sigma(n)?;

    let mut moduli: Vec<f64> = match g.clone().cholesky() {
        // gamma = L L^T, so sigma gamma is similar to the antisymmetric
        // K = L^T sigma L, whose eigenvalues +-i nu give nu^2 as the doubly
        // degenerate eigenvalues of K^T K.
        Some(chol) => {
            let l = chol.l();
            let k = l.transpose() * &s * &l;
            let ktk = symmetrize(&(k.transpose() * &k));
            ktk.symmetric_eigenvalues()
                .iter()
                .map(|v| v.max(0.0).sqrt())
                .collect()
        }
        // Not positive definite: fall back to the general eigenproblem.
        None => (s * &g)
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .collect(),
    };
    moduli.sort_by(|a, b| b.total_cmp(a));
    Ok(moduli.into_iter().step_by(2).take(n).collect())
}

/// Smallest symplectic eigenvalue, or `-inf` when `gamma` is not positive
/// definite (such a covariance can never be physical).
pub fn min_symplectic_eigenvalue(gamma: &DMatrix<f64>) -> Result<f64> {
    if symmetrize(gamma).cholesky().is_none() {
        return Ok(f64::NEG_INFINITY);
    }
    let nu = symplectic_spectrum(gamma)?;
    Ok(nu.last().copied().unwrap_or(f64::NEG_INFINITY))
}

/// Checks `gamma + i sigma >= 0` through its symplectic spectrum.
pub fn check_physical(gamma: &DMatrix<f64>, tol: f64) -> Result<()> {
    let nu = min_symplectic_eigenvalue(gamma)?;
    if nu < 1.0 - tol {
        return Err(Error::Unphysical {
            min_symplectic_eigenvalue: nu,
        });
    }
    Ok(())
}

/// Embeds a real matrix into the complex field.
pub fn complexify(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `i * m` for a real matrix `m`.
pub fn times_i(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(0.0, x))
}
