//! Gaussian semigroup elements `T(alpha, A, G)`.
//!
//! A map acts on the means as `xi -> xi A + alpha` (row-vector convention)
//! and on the covariance as `gamma -> A^T gamma A + G`. It is completely
//! positive iff `G + i sigma - i A^T sigma A >= 0`.
//!
//! [`compose`]`(first, second)` means "apply `first`, then `second`".

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{self, p_index, q_index, DEFAULT_TOL, PHYSICALITY_TOL};
use crate::state::{matrix_to_rows, rows_to_matrix, GaussianState};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMap {
    n: usize,
    alpha: DVector<f64>,
    a: DMatrix<f64>,
    g: DMatrix<f64>,
}

/// Outcome of the complete-positivity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpReport {
    pub valid: bool,
    /// Smallest eigenvalue of `G + i sigma - i A^T sigma A`.
    pub min_eigenvalue: f64,
}

impl GaussianMap {
    /// Builds a map from its displacement, linear part and noise matrix.
    /// `g` is symmetrized; it must already be symmetric to within rounding.
    pub fn new(alpha: DVector<f64>, a: DMatrix<f64>, g: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidDimension(format!(
                "linear part must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = phase_space::modes_of(a.nrows())?;
        if g.shape() != a.shape() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: g.nrows().max(g.ncols()),
            });
        }
        if alpha.len() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                found: alpha.len(),
            });
        }
        if alpha.iter().chain(a.iter()).chain(g.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidDimension("non-finite map entry".into()));
        }
        let asym = phase_space::asymmetry(&g);
        if asym > DEFAULT_TOL * g.amax().max(1.0) {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        Ok(GaussianMap {
            n,
            alpha,
            a,
            g: phase_space::symmetrize(&g),
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("mode count must be at least 1".into()));
        }
        Ok(Self::trusted(
            DVector::zeros(2 * n),
            DMatrix::identity(2 * n, 2 * n),
            DMatrix::zeros(2 * n, 2 * n),
        ))
    }

    fn trusted(alpha: DVector<f64>, a: DMatrix<f64>, g: DMatrix<f64>) -> Self {
        GaussianMap {
            n: alpha.len() / 2,
            alpha,
            a,
            g,
        }
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn a_matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn g_matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    // ----- constructors -----

    /// Phase-space translation by `alpha` (length `2k` for `k` modes).
    pub fn displacement(alpha: &[f64]) -> Result<Self> {
        let n = phase_space::modes_of(alpha.len())?;
        let mut m = Self::identity(n)?;
        m.alpha = DVector::from_column_slice(alpha);
        finite_entries(&m.alpha)?;
        Ok(m)
    }

    /// Unitary Gaussian map with symplectic linear part `a`.
    pub fn symplectic(a: DMatrix<f64>) -> Result<Self> {
        let dev = phase_space::symplectic_deviation(&a)?;
        if dev > DEFAULT_TOL * a.amax().max(1.0).powi(2) {
            return Err(Error::NotSymplectic { deviation: dev });
        }
        let dim = a.nrows();
        Self::new(DVector::zeros(dim), a, DMatrix::zeros(dim, dim))
    }

    /// `C(alpha, A) = X(alpha) M(A)`: symplectic `a` followed by the translation.
    pub fn clifford(alpha: &[f64], a: DMatrix<f64>) -> Result<Self> {
        let mut m = Self::symplectic(a)?;
        if alpha.len() != 2 * m.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * m.n,
                found: alpha.len(),
            });
        }
        m.alpha = DVector::from_column_slice(alpha);
        finite_entries(&m.alpha)?;
        Ok(m)
    }

    /// Single-mode rotation `(q, p) -> (q cos t + p sin t, -q sin t + p cos t)`.
    pub fn phase_shift(theta: f64) -> Result<Self> {
        check_finite("theta", theta)?;
        let (s, c) = theta.sin_cos();
        Ok(Self::local_unitary(DMatrix::from_row_slice(2, 2, &[c, -s, s, c])))
    }

    /// Single-mode squeezer, `A = diag(e^{-r}, e^{r})`.
    pub fn squeeze(r: f64) -> Result<Self> {
        check_finite("r", r)?;
        Ok(Self::local_unitary(DMatrix::from_diagonal(&nalgebra::dvector![
            (-r).exp(),
            r.exp()
        ])))
    }

    /// Two-mode rotation applied identically to `(q_0, q_1)` and `(p_0, p_1)`:
    /// `q_0 -> q_0 cos t + q_1 sin t`, `q_1 -> -q_0 sin t + q_1 cos t`.
    pub fn beamsplitter(theta: f64) -> Result<Self> {
        check_finite("theta", theta)?;
        let (s, c) = theta.sin_cos();
        #[rustfmt::skip]
        let a = DMatrix::from_row_slice(4, 4, &[
            c,   -s,  0.0, 0.0,
            s,   c,   0.0, 0.0,
            0.0, 0.0, c,   -s,
            0.0, 0.0, s,   c,
        ]);
        Ok(Self::local_unitary(a))
    }

    /// Two-mode squeezer; maps the two-mode vacuum to [`GaussianState::epr`]`(r)`.
    pub fn two_mode_squeeze(r: f64) -> Result<Self> {
        check_finite("r", r)?;
        let (ch, sh) = (r.cosh(), r.sinh());
        #[rustfmt::skip]
        let a = DMatrix::from_row_slice(4, 4, &[
            ch,  sh,  0.0, 0.0,
            sh,  ch,  0.0, 0.0,
            0.0, 0.0, ch,  -sh,
            0.0, 0.0, -sh, ch,
        ]);
        Ok(Self::local_unitary(a))
    }

    /// Pure loss with transmissivity `eta`: `A = sqrt(eta) I`, `G = (1 - eta) I`.
    pub fn loss(eta: f64) -> Result<Self> {
        check_finite("eta", eta)?;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: eta,
                reason: "transmissivity must lie in (0, 1]",
            });
        }
        Ok(Self::trusted(
            DVector::zeros(2),
            DMatrix::from_diagonal_element(2, 2, eta.sqrt()),
            DMatrix::from_diagonal_element(2, 2, 1.0 - eta),
        ))
    }

    /// Phase-insensitive amplifier with gain `g >= 1` and minimal added noise.
    pub fn amplifier(gain: f64) -> Result<Self> {
        check_finite("g", gain)?;
        if gain < 1.0 {
            return Err(Error::InvalidParameter {
                name: "g",
                value: gain,
                reason: "gain must be at least 1",
            });
        }
        Ok(Self::trusted(
            DVector::zeros(2),
            DMatrix::from_diagonal_element(2, 2, gain.sqrt()),
            DMatrix::from_diagonal_element(2, 2, gain - 1.0),
        ))
    }

    /// Classical additive Gaussian noise, `G = 2 n_noise I`.
    pub fn thermal_noise(n_noise: f64) -> Result<Self> {
        check_finite("n_noise", n_noise)?;
        if n_noise < 0.0 {
            return Err(Error::InvalidParameter {
                name: "n_noise",
                value: n_noise,
                reason: "noise photon number must be nonnegative",
            });
        }
        Ok(Self::trusted(
            DVector::zeros(2),
            DMatrix::identity(2, 2),
            DMatrix::from_diagonal_element(2, 2, 2.0 * n_noise),
        ))
    }

    fn local_unitary(a: DMatrix<f64>) -> Self {
        let dim = a.nrows();
        Self::trusted(DVector::zeros(dim), a, DMatrix::zeros(dim, dim))
    }

    /// Embeds this `k`-mode map on `targets` of an `n`-mode system, acting as
    /// the identity on all other modes. `targets[i]` receives local mode `i`.
    pub fn embed(&self, targets: &[usize], n: usize) -> Result<Self> {
        let idx = target_indices(targets, self.n, n)?;
        let mut out = Self::identity(n)?;
        for (li, &gi) in idx.iter().enumerate() {
            out.alpha[gi] = self.alpha[li];
            for (lj, &gj) in idx.iter().enumerate() {
                out.a[(gi, gj)] = self.a[(li, lj)];
                out.g[(gi, gj)] = self.g[(li, lj)];
            }
        }
        Ok(out)
    }

    // ----- algebra -----

    /// `G + i sigma - i A^T sigma A`.
    pub fn cp_matrix(&self) -> DMatrix<Complex64> {
        let s = phase_space::sigma(self.n).expect("n >= 1");
        let at_s_a = self.a.transpose() * &s * &self.a;
        let k = s - at_s_a;
        DMatrix::from_fn(2 * self.n, 2 * self.n, |i, j| {
            Complex64::new(self.g[(i, j)], k[(i, j)])
        })
    }

    /// Complete-positivity check; the report always carries the minimum eigenvalue.
    pub fn validate_cp(&self, tol: f64) -> CpReport {
        let min_eigenvalue =
            phase_space::min_hermitian_eigenvalue(&self.cp_matrix()).expect("square by construction");
        CpReport {
            valid: min_eigenvalue >= -tol,
            min_eigenvalue,
        }
    }

    /// Second moments of the noise operators minus `i sigma`: `G - i A^T sigma A`.
    pub fn noise_second_moments(&self) -> DMatrix<Complex64> {
        let s = phase_space::sigma(self.n).expect("n >= 1");
        let at_s_a = self.a.transpose() * s * &self.a;
        DMatrix::from_fn(2 * self.n, 2 * self.n, |i, j| {
            Complex64::new(self.g[(i, j)], -at_s_a[(i, j)])
        })
    }

    /// True iff `G = 0` and `A` is symplectic, both to within `tol`.
    pub fn is_clifford(&self, tol: f64) -> bool {
        self.g.amax() <= tol && phase_space::is_symplectic(&self.a, tol).expect("even square")
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &GaussianMap) -> Result<GaussianMap> {
        compose(self, next)
    }

    fn require_cp(&self) -> Result<()> {
        let report = self.validate_cp(DEFAULT_TOL);
        if !report.valid {
            return Err(Error::NotCompletelyPositive {
                min_eigenvalue: report.min_eigenvalue,
            });
        }
        Ok(())
    }

    /// Applies the map to every mode of `state`. Refuses maps that are not
    /// completely positive and reports an unphysical output as an error.
    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        self.require_cp()?;
        let out = self.apply_unchecked(state)?;
        out.check_physical(PHYSICALITY_TOL)?;
        Ok(out)
    }

    /// Applies the map without the complete-positivity or physicality checks.
    ///
    /// Unsafe in the physical sense: a non-CP map can produce a covariance
    /// that violates the uncertainty principle. Exists to study such maps.
    pub fn apply_unchecked(&self, state: &GaussianState) -> Result<GaussianState> {
        if state.modes() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: state.modes(),
            });
        }
        let xi = self.a.tr_mul(state.means()) + &self.alpha;
        let gamma = self.a.transpose() * state.covariance() * &self.a + &self.g;
        Ok(GaussianState::from_trusted(xi, gamma))
    }

    /// Applies this `k`-mode map to `targets` of a larger state, touching only
    /// the affected rows and columns (`O(n k)` work instead of `O(n^3)`).
    ///
    /// The map must be CP; the full-state physicality check is left to the
    /// caller since it costs `O(n^3)`.
    pub fn apply_on(&self, state: &GaussianState, targets: &[usize]) -> Result<GaussianState> {
        let mut out = state.clone();
        self.apply_on_mut(&mut out, targets)?;
        Ok(out)
    }

    /// In-place [`GaussianMap::apply_on`]; touches only the `O(n k)` affected entries.
    pub fn apply_on_mut(&self, state: &mut GaussianState, targets: &[usize]) -> Result<()> {
        self.require_cp()?;
        let n = state.modes();
        let idx = target_indices(targets, self.n, n)?;
        let (xi, gamma) = state.moments_mut();

        let local_xi = self.a.tr_mul(&xi.select_rows(&idx)) + &self.alpha;
        for (li, &gi) in idx.iter().enumerate() {
            xi[gi] = local_xi[li];
        }

        let cols = gamma.select_columns(&idx) * &self.a;
        let block = self.a.tr_mul(&cols.select_rows(&idx)) + &self.g;
        for (lj, &gj) in idx.iter().enumerate() {
            for i in 0..2 * n {
                gamma[(i, gj)] = cols[(i, lj)];
                gamma[(gj, i)] = cols[(i, lj)];
            }
        }
        for (li, &gi) in idx.iter().enumerate() {
            for (lj, &gj) in idx.iter().enumerate() {
                gamma[(gi, gj)] = 0.5 * (block[(li, lj)] + block[(lj, li)]);
            }
        }
        Ok(())
    }
}

/// Composition "first, then second":
/// `A = A1 A2`, `alpha = alpha1 A2 + alpha2`, `G = A2^T G1 A2 + G2`.
pub fn compose(first: &GaussianMap, second: &GaussianMap) -> Result<GaussianMap> {
    if first.n != second.n {
        return Err(Error::DimensionMismatch {
            expected: first.n,
            found: second.n,
        });
    }
    let a = &first.a * &second.a;
    let alpha = second.a.tr_mul(&first.alpha) + &second.alpha;
    let g = second.a.transpose() * &first.g * &second.a + &second.g;
    Ok(GaussianMap::trusted(alpha, a, phase_space::symmetrize(&g)))
}

/// Phase-space indices in the big system of the local quadratures of a
/// `k`-mode map placed on `targets`.
fn target_indices(targets: &[usize], k: usize, n: usize) -> Result<Vec<usize>> {
    if targets.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: targets.len(),
        });
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(Error::ModeOutOfRange { mode: t, modes: n });
        }
        if targets[..i].contains(&t) {
            return Err(Error::InvalidDimension(format!("target mode {t} listed twice")));
        }
    }
    Ok(targets
        .iter()
        .map(|&t| q_index(t))
        .chain(targets.iter().map(|&t| p_index(n, t)))
        .collect())
}

fn check_finite(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            value: v,
            reason: "must be finite",
        });
    }
    Ok(())
}

fn finite_entries(v: &DVector<f64>) -> Result<()> {
    match v.iter().find(|x| !x.is_finite()) {
        Some(&x) => Err(Error::InvalidParameter {
            name: "alpha",
            value: x,
            reason: "must be finite",
        }),
        None => Ok(()),
    }
}

#[derive(Serialize, Deserialize)]
struct MapRepr {
    n: usize,
    alpha: Vec<f64>,
    a: Vec<Vec<f64>>,
    g: Vec<Vec<f64>>,
}

impl Serialize for GaussianMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MapRepr {
            n: self.n,
            alpha: self.alpha.iter().copied().collect(),
            a: matrix_to_rows(&self.a),
            g: matrix_to_rows(&self.g),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GaussianMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = MapRepr::deserialize(d)?;
        let a = rows_to_matrix(&repr.a).map_err(D::Error::custom)?;
        let g = rows_to_matrix(&repr.g).map_err(D::Error::custom)?;
        let m = GaussianMap::new(DVector::from_vec(repr.alpha), a, g).map_err(D::Error::custom)?;
        if m.n != repr.n {
            return Err(D::Error::custom(format!(
                "n = {} does not match a {}-mode map",
                repr.n, m.n
            )));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{is_hermitian_psd, sigma, symplectic_spectrum, times_i};
    use proptest::prelude::*;

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        (a - b).amax() <= tol
    }

    fn maps_close(a: &GaussianMap, b: &GaussianMap, tol: f64) -> bool {
        a.n == b.n
            && (&a.alpha - &b.alpha).amax() <= tol
            && close(&a.a, &b.a, tol)
            && close(&a.g, &b.g, tol)
    }

    #[test]
    fn cp_examples() {
        let sq = GaussianMap::squeeze(0.7).unwrap().embed(&[1], 2).unwrap();
        let r = sq.validate_cp(DEFAULT_TOL);
        assert!(r.valid);
        assert!(r.min_eigenvalue.abs() <= 1e-12, "{}", r.min_eigenvalue);

        let eta: f64 = 0.5;
        let r = GaussianMap::loss(eta).unwrap().validate_cp(DEFAULT_TOL);
        assert!(r.valid && r.min_eigenvalue.abs() < 1e-12);

        // amplifier with the noise stripped off: G + i sigma - i A^T sigma A = i(1-g) sigma
        let g: f64 = 2.0;
        let bad = GaussianMap::new(
            DVector::zeros(2),
            DMatrix::from_diagonal_element(2, 2, g.sqrt()),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        let r = bad.validate_cp(DEFAULT_TOL);
        assert!(!r.valid);
        assert!((r.min_eigenvalue + (g - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn constructors_reject_bad_dimensions() {
        assert!(GaussianMap::new(DVector::zeros(2), DMatrix::identity(2, 2), DMatrix::zeros(4, 4)).is_err());
        assert!(GaussianMap::new(DVector::zeros(3), DMatrix::identity(2, 2), DMatrix::zeros(2, 2)).is_err());
        assert!(GaussianMap::new(DVector::zeros(3), DMatrix::identity(3, 3), DMatrix::zeros(3, 3)).is_err());
        let m = GaussianMap::identity(2).unwrap();
        assert!(m.apply(&GaussianState::vacuum(1).unwrap()).is_err());
        assert!(compose(&m, &GaussianMap::identity(1).unwrap()).is_err());
    }

    #[test]
    fn apply_examples() {
        let s = GaussianState::epr(0.3).unwrap();
        assert_eq!(GaussianMap::identity(2).unwrap().apply(&s).unwrap(), s);

        let vac = GaussianState::vacuum(1).unwrap();
        let out = GaussianMap::loss(0.5).unwrap().apply(&vac).unwrap();
        assert!(close(out.covariance(), vac.covariance(), 1e-15));

        let out = GaussianMap::displacement(&[2.0, 0.0]).unwrap().apply(&vac).unwrap();
        assert_eq!(out, GaussianState::coherent(1, &[2.0, 0.0]).unwrap());
    }

    #[test]
    fn apply_refuses_non_cp_maps_unless_forced() {
        let amp_no_noise = GaussianMap::new(
            DVector::zeros(2),
            DMatrix::from_diagonal_element(2, 2, 2.0f64.sqrt()),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        let vac = GaussianState::vacuum(1).unwrap();
        assert!(matches!(
            amp_no_noise.apply(&vac),
            Err(Error::NotCompletelyPositive { .. })
        ));
        // Forced: the contraction A = I / sqrt(2) with G = 0 shrinks vacuum below the uncertainty bound.
        let shrink = GaussianMap::new(
            DVector::zeros(2),
            DMatrix::from_diagonal_element(2, 2, 0.5f64.sqrt()),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        let out = shrink.apply_unchecked(&vac).unwrap();
        assert!(out.check_physical(PHYSICALITY_TOL).is_err());
    }

    #[test]
    fn parameter_zero_is_identity() {
        let id1 = GaussianMap::identity(1).unwrap();
        let id2 = GaussianMap::identity(2).unwrap();
        for m in [
            GaussianMap::phase_shift(0.0).unwrap(),
            GaussianMap::squeeze(0.0).unwrap(),
            GaussianMap::loss(1.0).unwrap(),
            GaussianMap::amplifier(1.0).unwrap(),
            GaussianMap::thermal_noise(0.0).unwrap(),
            GaussianMap::displacement(&[0.0, 0.0]).unwrap(),
        ] {
            assert!(maps_close(&m, &id1, 0.0), "{m:?}");
        }
        for m in [
            GaussianMap::beamsplitter(0.0).unwrap(),
            GaussianMap::two_mode_squeeze(0.0).unwrap(),
        ] {
            assert!(maps_close(&m, &id2, 0.0), "{m:?}");
        }
    }

    #[test]
    fn constructor_ranges() {
        assert!(GaussianMap::loss(0.0).is_err());
        assert!(GaussianMap::loss(1.2).is_err());
        assert!(GaussianMap::amplifier(0.9).is_err());
        assert!(GaussianMap::thermal_noise(-1.0).is_err());
        assert!(GaussianMap::squeeze(f64::NAN).is_err());
        assert!(GaussianMap::symplectic(DMatrix::from_diagonal_element(2, 2, 2.0)).is_err());
    }

    #[test]
    fn every_constructor_is_cp() {
        let maps = [
            GaussianMap::phase_shift(0.9).unwrap(),
            GaussianMap::squeeze(-0.4).unwrap(),
            GaussianMap::beamsplitter(0.3).unwrap(),
            GaussianMap::two_mode_squeeze(0.5).unwrap(),
            GaussianMap::loss(0.3).unwrap(),
            GaussianMap::amplifier(1.5).unwrap(),
            GaussianMap::thermal_noise(0.5).unwrap(),
            GaussianMap::displacement(&[1.0, 2.0]).unwrap(),
        ];
        for m in maps {
            assert!(m.validate_cp(DEFAULT_TOL).valid, "{m:?}");
        }
        // amplifier saturates the bound: min eigenvalue 0
        let r = GaussianMap::amplifier(1.5).unwrap().validate_cp(DEFAULT_TOL);
        assert!(r.min_eigenvalue.abs() < 1e-12);
    }

    #[test]
    fn two_mode_squeeze_prepares_epr() {
        let out = GaussianMap::two_mode_squeeze(0.4)
            .unwrap()
            .apply(&GaussianState::vacuum(2).unwrap())
            .unwrap();
        assert!(close(out.covariance(), GaussianState::epr(0.4).unwrap().covariance(), 1e-14));
    }

    #[test]
    fn squeeze_prepares_squeezed_vacuum() {
        let out = GaussianMap::squeeze(0.5)
            .unwrap()
            .apply(&GaussianState::vacuum(1).unwrap())
            .unwrap();
        assert!(close(
            out.covariance(),
            GaussianState::squeezed_vacuum(0.5).unwrap().covariance(),
            1e-15
        ));
    }

    #[test]
    fn phase_shift_sign_convention() {
        let t = 0.3f64;
        let out = GaussianMap::phase_shift(t)
            .unwrap()
            .apply(&GaussianState::coherent(1, &[1.0, 0.0]).unwrap())
            .unwrap();
        // q -> q cos t + p sin t, p -> -q sin t + p cos t
        assert!((out.means()[0] - t.cos()).abs() < 1e-15);
        assert!((out.means()[1] + t.sin()).abs() < 1e-15);
    }

    #[test]
    fn is_clifford_examples() {
        assert!(GaussianMap::displacement(&[1.0, -1.0]).unwrap().is_clifford(1e-12));
        assert!(GaussianMap::squeeze(0.8).unwrap().is_clifford(1e-12));
        assert!(!GaussianMap::loss(0.9).unwrap().is_clifford(1e-12));
    }

    #[test]
    fn noise_second_moments_examples() {
        let s = sigma(1).unwrap();
        let m = GaussianMap::squeeze(0.3).unwrap();
        let expected = times_i(&s).map(|z| -z);
        assert!((m.noise_second_moments() - expected).camax() < 1e-14);

        let eta = 0.7;
        let l = GaussianMap::loss(eta).unwrap().noise_second_moments();
        let expected = DMatrix::from_fn(2, 2, |i, j| {
            Complex64::new(if i == j { 1.0 - eta } else { 0.0 }, -eta * s[(i, j)])
        });
        assert!((l - expected).camax() < 1e-14);
    }

    #[test]
    fn compose_examples() {
        let m = GaussianMap::squeeze(0.2)
            .unwrap()
            .then(&GaussianMap::displacement(&[0.3, 0.1]).unwrap())
            .unwrap();
        let id = GaussianMap::identity(1).unwrap();
        assert!(maps_close(&compose(&m, &id).unwrap(), &m, 0.0));
        assert!(maps_close(&compose(&id, &m).unwrap(), &m, 0.0));

        let (e1, e2) = (0.7, 0.4);
        let both = compose(&GaussianMap::loss(e1).unwrap(), &GaussianMap::loss(e2).unwrap()).unwrap();
        assert!(maps_close(&both, &GaussianMap::loss(e1 * e2).unwrap(), 1e-15));
    }

    #[test]
    fn compose_order_is_first_then_second() {
        let d = GaussianMap::displacement(&[1.0, 0.0]).unwrap();
        let s = GaussianMap::squeeze(1.0).unwrap();
        let vac = GaussianState::vacuum(1).unwrap();
        // displace then squeeze: mean q = e^{-1}
        let out = compose(&d, &s).unwrap().apply(&vac).unwrap();
        assert!((out.means()[0] - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn embed_places_blocks() {
        let bs = GaussianMap::beamsplitter(0.4).unwrap().embed(&[2, 0], 3).unwrap();
        let (s, c) = 0.4f64.sin_cos();
        // local mode 0 -> global 2, local 1 -> global 0
        assert_eq!(bs.a_matrix()[(2, 2)], c);
        assert_eq!(bs.a_matrix()[(0, 2)], s);
        assert_eq!(bs.a_matrix()[(2, 0)], -s);
        assert_eq!(bs.a_matrix()[(1, 1)], 1.0);
        assert_eq!(bs.a_matrix()[(5, 5)], c);
        assert!(GaussianMap::squeeze(0.1).unwrap().embed(&[3], 3).is_err());
        assert!(GaussianMap::beamsplitter(0.1).unwrap().embed(&[1, 1], 3).is_err());
    }

    #[test]
    fn json_shape() {
        let m = GaussianMap::loss(0.25).unwrap();
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["n"], 1);
        assert_eq!(v["a"], serde_json::json!([[0.5, 0.0], [0.0, 0.5]]));
        assert_eq!(v["g"], serde_json::json!([[0.75, 0.0], [0.0, 0.75]]));
        let back: GaussianMap = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }

    // ----- property tests -----

    fn arb_local() -> impl Strategy<Value = (GaussianMap, Vec<usize>)> {
        prop_oneof![
            (-3.0f64..3.0, 0usize..3).prop_map(|(t, m)| (GaussianMap::phase_shift(t).unwrap(), vec![m])),
            (-0.8f64..0.8, 0usize..3).prop_map(|(r, m)| (GaussianMap::squeeze(r).unwrap(), vec![m])),
            (0.05f64..1.0, 0usize..3).prop_map(|(e, m)| (GaussianMap::loss(e).unwrap(), vec![m])),
            (1.0f64..2.0, 0usize..3).prop_map(|(g, m)| (GaussianMap::amplifier(g).unwrap(), vec![m])),
            (0.0f64..1.0, 0usize..3).prop_map(|(x, m)| (GaussianMap::thermal_noise(x).unwrap(), vec![m])),
            (-2.0f64..2.0, -2.0f64..2.0, 0usize..3)
                .prop_map(|(q, p, m)| (GaussianMap::displacement(&[q, p]).unwrap(), vec![m])),
            (-3.0f64..3.0, 0usize..3, 1usize..3)
                .prop_map(|(t, j, o)| (GaussianMap::beamsplitter(t).unwrap(), vec![j, (j + o) % 3])),
            (-0.6f64..0.6, 0usize..3, 1usize..3)
                .prop_map(|(r, j, o)| (GaussianMap::two_mode_squeeze(r).unwrap(), vec![j, (j + o) % 3])),
        ]
    }

    fn arb_state() -> impl Strategy<Value = GaussianState> {
        (prop::collection::vec(arb_local(), 0..6), prop::collection::vec(-1.0f64..1.0, 6)).prop_map(
            |(ops, xi)| {
                let mut s = GaussianState::coherent(3, &xi).unwrap();
                for (m, t) in ops {
                    s = m.embed(&t, 3).unwrap().apply(&s).unwrap();
                }
                s
            },
        )
    }

    proptest! {
        #[test]
        fn local_application_matches_embedded(state in arb_state(), (m, t) in arb_local()) {
            let full = m.embed(&t, 3).unwrap().apply(&state).unwrap();
            let local = m.apply_on(&state, &t).unwrap();
            prop_assert!((full.means() - local.means()).amax() < 1e-12);
            prop_assert!(close(full.covariance(), local.covariance(), 1e-12));
        }

        #[test]
        fn clifford_maps_preserve_spectrum(state in arb_state(), t in -3.0f64..3.0, r in -0.6f64..0.6) {
            let m = GaussianMap::beamsplitter(t).unwrap().embed(&[0, 2], 3).unwrap()
                .then(&GaussianMap::squeeze(r).unwrap().embed(&[1], 3).unwrap()).unwrap()
                .then(&GaussianMap::two_mode_squeeze(r).unwrap().embed(&[1, 0], 3).unwrap()).unwrap();
            prop_assert!(m.is_clifford(1e-8));
            let before = state.symplectic_spectrum();
            let after = m.apply(&state).unwrap().symplectic_spectrum();
            for (x, y) in before.iter().zip(&after) {
                prop_assert!((x - y).abs() < 1e-8, "{:?} vs {:?}", before, after);
            }
        }

        #[test]
        fn loss_fixes_vacuum(eta in 1e-6f64..=1.0) {
            let vac = GaussianState::vacuum(1).unwrap();
            let out = GaussianMap::loss(eta).unwrap().apply(&vac).unwrap();
            prop_assert!(close(out.covariance(), vac.covariance(), 1e-15));
        }

        #[test]
        fn means_map_is_affine(
            (m, t) in arb_local(),
            x1 in prop::collection::vec(-1.0f64..1.0, 6),
            x2 in prop::collection::vec(-1.0f64..1.0, 6),
        ) {
            let m = m.embed(&t, 3).unwrap();
            let sum: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
            let f = |x: &[f64]| m.apply(&GaussianState::coherent(3, x).unwrap()).unwrap().means().clone();
            let lhs = f(&sum);
            let rhs = f(&x1) + f(&x2) - m.alpha();
            prop_assert!((lhs - rhs).amax() < 1e-12);
        }

        #[test]
        fn noise_moments_reproduce_cp_check(
            entries in prop::collection::vec(-1.5f64..1.5, 4),
            g in prop::collection::vec(-1.0f64..1.0, 3),
            shift in 0.0f64..2.0,
        ) {
            let a = DMatrix::from_row_slice(2, 2, &entries);
            let gm = DMatrix::from_row_slice(2, 2, &[g[0] + shift, g[1], g[1], g[2] + shift]);
            let m = GaussianMap::new(DVector::zeros(2), a, gm).unwrap();
            let tol = 1e-9;
            let h = m.noise_second_moments() + times_i(&sigma(1).unwrap());
            prop_assume!((m.validate_cp(tol).min_eigenvalue + tol).abs() > 1e-10);
            prop_assert_eq!(is_hermitian_psd(&h, tol).unwrap(), m.validate_cp(tol).valid);
        }
    }

    #[test]
    fn clifford_composition_closed() {
        let a = GaussianMap::clifford(&[0.1, 0.2, 0.3, 0.4], GaussianMap::beamsplitter(0.7).unwrap().a_matrix().clone())
            .unwrap();
        let b = GaussianMap::two_mode_squeeze(0.3).unwrap();
        assert!(compose(&a, &b).unwrap().is_clifford(1e-8));
        let nu = symplectic_spectrum(&b.a_matrix().tr_mul(b.a_matrix())).unwrap();
        assert!(nu.iter().all(|v| (v - 1.0).abs() < 1e-9));
    }
}
