//! Gaussian states: means vector and covariance matrix.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{self, p_index, q_index, DEFAULT_TOL, PHYSICALITY_TOL};

/// Number of real parameters the engine tracks for an `n`-mode state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceCount {
    pub modes: usize,
    /// `2n` means.
    pub means: usize,
    /// `n(2n + 1)` independent entries of the symmetric covariance.
    pub covariance: usize,
}

impl ResourceCount {
    pub fn for_modes(n: usize) -> Self {
        ResourceCount {
            modes: n,
            means: 2 * n,
            covariance: n * (2 * n + 1),
        }
    }

    /// `2n^2 + 3n`.
    pub fn total(&self) -> usize {
        self.means + self.covariance
    }
}

/// An `n`-mode Gaussian state in `(q_1..q_n, p_1..p_n)` ordering, hbar = 2.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n: usize,
    xi: DVector<f64>,
    gamma: DMatrix<f64>,
}

impl GaussianState {
    /// Builds a state, symmetrizing `gamma` and rejecting unphysical input.
    pub fn new(xi: DVector<f64>, gamma: DMatrix<f64>) -> Result<Self> {
        let state = Self::from_moments(xi, gamma)?;
        state.check_physical(PHYSICALITY_TOL)?;
        Ok(state)
    }

    /// Like [`GaussianState::new`] but skips the physicality check. Shapes
    /// and symmetry are still enforced.
    pub fn from_moments(xi: DVector<f64>, gamma: DMatrix<f64>) -> Result<Self> {
        if gamma.nrows() != gamma.ncols() {
            return Err(Error::InvalidDimension(format!(
                "covariance must be square, got {}x{}",
                gamma.nrows(),
                gamma.ncols()
            )));
        }
        let n = match gamma.nrows() {
            0 => 0,
            dim => phase_space::modes_of(dim)?,
        };
        if xi.len() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                found: xi.len(),
            });
        }
        let asym = phase_space::asymmetry(&gamma);
        if asym > DEFAULT_TOL * gamma.amax().max(1.0) {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        if xi.iter().chain(gamma.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidDimension("non-finite moment".into()));
        }
        Ok(GaussianState {
            n,
            xi,
            gamma: phase_space::symmetrize(&gamma),
        })
    }

    pub(crate) fn moments_mut(&mut self) -> (&mut DVector<f64>, &mut DMatrix<f64>) {
        (&mut self.xi, &mut self.gamma)
    }

    pub(crate) fn from_trusted(xi: DVector<f64>, gamma: DMatrix<f64>) -> Self {
        let n = xi.len() / 2;
        GaussianState {
            n,
            xi,
            gamma: phase_space::symmetrize(&gamma),
        }
    }

    /// The state with no modes left, e.g. after measuring every mode.
    pub fn empty() -> Self {
        GaussianState {
            n: 0,
            xi: DVector::zeros(0),
            gamma: DMatrix::zeros(0, 0),
        }
    }

    pub fn vacuum(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("mode count must be at least 1".into()));
        }
        Ok(Self::from_trusted(
            DVector::zeros(2 * n),
            DMatrix::identity(2 * n, 2 * n),
        ))
    }

    /// Displaced vacuum with means `xi`.
    pub fn coherent(n: usize, xi: &[f64]) -> Result<Self> {
        let vac = Self::vacuum(n)?;
        if xi.len() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                found: xi.len(),
            });
        }
        Ok(Self::from_trusted(DVector::from_column_slice(xi), vac.gamma))
    }

    /// Single-mode squeezed vacuum, `gamma = diag(e^{-2r}, e^{2r})`.
    pub fn squeezed_vacuum(r: f64) -> Result<Self> {
        finite("r", r)?;
        Ok(Self::from_trusted(
            DVector::zeros(2),
            DMatrix::from_diagonal(&nalgebra::dvector![(-2.0 * r).exp(), (2.0 * r).exp()]),
        ))
    }

    /// Single-mode thermal state with mean photon number `n_bar`.
    pub fn thermal(n_bar: f64) -> Result<Self> {
        finite("n_bar", n_bar)?;
        if n_bar < 0.0 {
            return Err(Error::InvalidParameter {
                name: "n_bar",
                value: n_bar,
                reason: "mean photon number must be nonnegative",
            });
        }
        Ok(Self::from_trusted(
            DVector::zeros(2),
            DMatrix::from_diagonal_element(2, 2, 2.0 * n_bar + 1.0),
        ))
    }

    /// Two-mode squeezed vacuum. Position quadratures correlate, momentum
    /// quadratures anti-correlate for `r > 0`.
    pub fn epr(r: f64) -> Result<Self> {
        finite("r", r)?;
        let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        #[rustfmt::skip]
        let gamma = DMatrix::from_row_slice(4, 4, &[
            ch,  sh,  0.0, 0.0,
            sh,  ch,  0.0, 0.0,
            0.0, 0.0, ch,  -sh,
            0.0, 0.0, -sh, ch,
        ]);
        Ok(Self::from_trusted(DVector::zeros(4), gamma))
    }

    /// Tensor product `self (x) other`; the modes of `other` are appended.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (n1, n2) = (self.n, other.n);
        let n = n1 + n2;
        // position in the combined phase space of each index of a factor
        let place = |offset: usize, nf: usize, i: usize| {
            if i < nf {
                offset + i
            } else {
                n + offset + (i - nf)
            }
        };
        let mut xi = DVector::zeros(2 * n);
        let mut gamma = DMatrix::zeros(2 * n, 2 * n);
        for (offset, f) in [(0, self), (n1, other)] {
            for i in 0..2 * f.n {
                let pi = place(offset, f.n, i);
                xi[pi] = f.xi[i];
                for j in 0..2 * f.n {
                    gamma[(pi, place(offset, f.n, j))] = f.gamma[(i, j)];
                }
            }
        }
        GaussianState { n, xi, gamma }
    }

    /// Appends `k` vacuum modes after the existing ones.
    pub fn attach_vacuum(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidDimension("must attach at least one mode".into()));
        }
        Ok(self.tensor(&Self::vacuum(k)?))
    }

    /// Reduced state on `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::InvalidDimension("partial trace must keep at least one mode".into()));
        }
        for (i, &m) in keep.iter().enumerate() {
            self.check_mode(m)?;
            if keep[..i].contains(&m) {
                return Err(Error::InvalidDimension(format!("mode {m} listed twice")));
            }
        }
        let idx = self.quadrature_indices(keep);
        Ok(Self::from_trusted(
            self.xi.select_rows(&idx),
            self.gamma.select_rows(&idx).select_columns(&idx),
        ))
    }

    /// Phase-space indices of `modes`: all their q's, then all their p's.
    pub(crate) fn quadrature_indices(&self, modes: &[usize]) -> Vec<usize> {
        modes
            .iter()
            .map(|&m| q_index(m))
            .chain(modes.iter().map(|&m| p_index(self.n, m)))
            .collect()
    }

    /// Wigner function `pi^{-n} det(gamma)^{-1/2} exp(-(x - xi) gamma^{-1} (x - xi)^T)`.
    pub fn wigner(&self, point: &[f64]) -> Result<f64> {
        if point.len() != 2 * self.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                found: point.len(),
            });
        }
        let smallest = SymmetricEigen::new(self.gamma.clone()).eigenvalues.min();
        let chol = match self.gamma.clone().cholesky() {
            Some(c) if smallest > DEFAULT_TOL => c,
            _ => return Err(Error::SingularCovariance { eigenvalue: smallest }),
        };
        let d = DVector::from_column_slice(point) - &self.xi;
        let det_sqrt: f64 = chol.l().diagonal().iter().product();
        let quad = d.dot(&chol.solve(&d));
        Ok((-quad).exp() / (PI.powi(self.n as i32) * det_sqrt))
    }

    pub fn symplectic_spectrum(&self) -> Vec<f64> {
        if self.n == 0 {
            return Vec::new();
        }
        phase_space::symplectic_spectrum(&self.gamma).expect("covariance is symmetric by construction")
    }

    pub fn check_physical(&self, tol: f64) -> Result<()> {
        if self.n == 0 {
            return Ok(());
        }
        phase_space::check_physical(&self.gamma, tol)
    }

    pub fn resource_count(&self) -> ResourceCount {
        ResourceCount::for_modes(self.n)
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn means(&self) -> &DVector<f64> {
        &self.xi
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n {
            return Err(Error::ModeOutOfRange {
                mode,
                modes: self.n,
            });
        }
        Ok(())
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            value: v,
            reason: "must be finite",
        });
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    n: usize,
    xi: Vec<f64>,
    gamma: Vec<Vec<f64>>,
}

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::InvalidDimension("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

impl Serialize for GaussianState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateRepr {
            n: self.n,
            xi: self.xi.iter().copied().collect(),
            gamma: matrix_to_rows(&self.gamma),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GaussianState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = StateRepr::deserialize(d)?;
        let gamma = rows_to_matrix(&repr.gamma).map_err(D::Error::custom)?;
        let state = GaussianState::new(DVector::from_vec(repr.xi), gamma).map_err(D::Error::custom)?;
        if state.n != repr.n {
            return Err(D::Error::custom(format!(
                "n = {} does not match a {}-mode covariance",
                repr.n, state.n
            )));
        }
        Ok(state)
    }
}
