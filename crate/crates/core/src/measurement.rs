//! Homodyne and heterodyne measurements with Gaussian conditioning, outcome
//! sampling, outcome-discarding reduction, and feedforward.
//!
//! Measurements are destructive: the measured mode is removed and the
//! remaining modes are renumbered downward.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::GaussianMap;
use crate::phase_space::{p_index, q_index, PHYSICALITY_TOL};
use crate::state::GaussianState;

/// Floor below which a measured variance is treated as degenerate.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Seeded, splittable source of Gaussian variates.
///
/// Trajectory `i` of a run with seed `s` draws from ChaCha20 stream `i + 1`
/// of key `s`, so trajectories are reproducible independently of each other.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha20Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent source for trajectory `index` of a run seeded with `seed`.
    pub fn for_trajectory(seed: u64, index: u64) -> Self {
        Self::with_stream(seed, index.wrapping_add(1))
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RandomSource { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub label: String,
    pub value: f64,
}

/// Labeled outcomes of one trajectory, in execution order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasurementRecord {
    entries: Vec<RecordEntry>,
}

impl MeasurementRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, label: impl Into<String>, value: f64) -> Result<()> {
        let label = label.into();
        if self.get(&label).is_some() {
            return Err(Error::DuplicateLabel(label));
        }
        self.entries.push(RecordEntry { label, value });
        Ok(())
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.label == label).map(|e| e.value)
    }

    pub fn entries(&self) -> &[RecordEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Linear functional reading `q cos(theta) + p sin(theta)` of `mode`.
fn quadrature_row(n: usize, mode: usize, theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    let mut row = DMatrix::zeros(1, 2 * n);
    row[(0, q_index(mode))] = c;
    row[(0, p_index(n, mode))] = s;
    row
}

fn both_quadratures(n: usize, mode: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2, 2 * n);
    m[(0, q_index(mode))] = 1.0;
    m[(1, p_index(n, mode))] = 1.0;
    m
}

/// Outcome distribution of reading `readout` with added noise `noise`:
/// returns `(mean, covariance, cross-covariance with every quadrature)`.
fn readout_moments(
    state: &GaussianState,
    readout: &DMatrix<f64>,
    noise: &DMatrix<f64>,
) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
    let mean = readout * state.means();
    let cross = state.covariance() * readout.transpose();
    let cov = readout * &cross + noise;
    (mean, cov, cross)
}

/// Conditions on `outcome` and removes `mode`.
fn condition(
    state: &GaussianState,
    mode: usize,
    readout: &DMatrix<f64>,
    noise: &DMatrix<f64>,
    outcome: &DVector<f64>,
) -> Result<GaussianState> {
    let (mean, cov, cross) = readout_moments(state, readout, noise);
    let inv = invert_readout_cov(&cov)?;
    let gain = &cross * &inv;
    let xi = state.means() + &gain * (outcome - mean);
    let gamma = state.covariance() - &gain * cross.transpose();

    let n = state.modes();
    let keep: Vec<usize> = (0..n).filter(|&m| m != mode).collect();
    let idx: Vec<usize> = keep
        .iter()
        .map(|&m| q_index(m))
        .chain(keep.iter().map(|&m| p_index(n, m)))
        .collect();
    let reduced = GaussianState::from_trusted(
        xi.select_rows(&idx),
        gamma.select_rows(&idx).select_columns(&idx),
    );
    reduced.check_physical(PHYSICALITY_TOL)?;
    Ok(reduced)
}

fn invert_readout_cov(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if cov.nrows() == 1 {
        let v = cov[(0, 0)];
        if !(v > VARIANCE_FLOOR) {
            return Err(Error::DegenerateQuadrature { variance: v });
        }
        return Ok(DMatrix::from_element(1, 1, 1.0 / v));
    }
    let min = nalgebra::SymmetricEigen::new(cov.clone()).eigenvalues.min();
    if !(min > VARIANCE_FLOOR) {
        return Err(Error::DegenerateQuadrature { variance: min });
    }
    cov.clone()
        .try_inverse()
        .ok_or(Error::DegenerateQuadrature { variance: min })
}

/// Mean and variance of the homodyne outcome for `q cos(theta) + p sin(theta)`.
pub fn homodyne_statistics(state: &GaussianState, mode: usize, theta: f64) -> Result<(f64, f64)> {
    state.check_mode(mode)?;
    let row = quadrature_row(state.modes(), mode, theta);
    let (mean, cov, _) = readout_moments(state, &row, &DMatrix::zeros(1, 1));
    Ok((mean[0], cov[(0, 0)]))
}

/// Measures `q cos(theta) + p sin(theta)` on `mode`; returns the sampled
/// outcome and the conditional state of the remaining modes.
pub fn homodyne(
    state: &GaussianState,
    mode: usize,
    theta: f64,
    rng: &mut RandomSource,
) -> Result<(f64, GaussianState)> {
    let (mean, var) = homodyne_statistics(state, mode, theta)?;
    if !(var > VARIANCE_FLOOR) {
        return Err(Error::DegenerateQuadrature { variance: var });
    }
    let outcome = mean + var.sqrt() * rng.standard_normal();
    let reduced = homodyne_project(state, mode, theta, outcome)?;
    Ok((outcome, reduced))
}

/// Homodyne conditioning on a supplied outcome.
pub fn homodyne_project(
    state: &GaussianState,
    mode: usize,
    theta: f64,
    outcome: f64,
) -> Result<GaussianState> {
    state.check_mode(mode)?;
    if !theta.is_finite() || !outcome.is_finite() {
        return Err(Error::InvalidParameter {
            name: "homodyne",
            value: if theta.is_finite() { outcome } else { theta },
            reason: "angle and outcome must be finite",
        });
    }
    let row = quadrature_row(state.modes(), mode, theta);
    condition(
        state,
        mode,
        &row,
        &DMatrix::zeros(1, 1),
        &DVector::from_element(1, outcome),
    )
}

/// Joint `(q, p)` measurement with one added unit of vacuum noise.
pub fn heterodyne(
    state: &GaussianState,
    mode: usize,
    rng: &mut RandomSource,
) -> Result<([f64; 2], GaussianState)> {
    state.check_mode(mode)?;
    let readout = both_quadratures(state.modes(), mode);
    let (mean, cov, _) = readout_moments(state, &readout, &DMatrix::identity(2, 2));
    let chol = cov
        .clone()
        .cholesky()
        .ok_or(Error::DegenerateQuadrature { variance: cov.min() })?;
    let z = DVector::from_vec(vec![rng.standard_normal(), rng.standard_normal()]);
    let outcome = mean + chol.l() * z;
    let reduced = heterodyne_project(state, mode, [outcome[0], outcome[1]])?;
    Ok(([outcome[0], outcome[1]], reduced))
}

/// Heterodyne conditioning on a supplied `(q, p)` outcome.
pub fn heterodyne_project(state: &GaussianState, mode: usize, outcome: [f64; 2]) -> Result<GaussianState> {
    state.check_mode(mode)?;
    let readout = both_quadratures(state.modes(), mode);
    condition(
        state,
        mode,
        &readout,
        &DMatrix::identity(2, 2),
        &DVector::from_row_slice(&outcome),
    )
}

/// Measures `mode` and forgets the outcome: the reduced state on the other modes.
pub fn discard_measurement(state: &GaussianState, mode: usize) -> Result<GaussianState> {
    state.check_mode(mode)?;
    let keep: Vec<usize> = (0..state.modes()).filter(|&m| m != mode).collect();
    if keep.is_empty() {
        return Ok(GaussianState::empty());
    }
    state.partial_trace(&keep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    Q,
    P,
}

/// Displacement of `target` along `quadrature` by `gain` times a recorded outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feedforward {
    pub gain: f64,
    pub source: String,
    pub target: usize,
    pub quadrature: Quadrature,
}

impl Feedforward {
    /// The single-mode displacement selected by the record.
    pub fn displacement(&self, record: &MeasurementRecord) -> Result<GaussianMap> {
        let outcome = record
            .get(&self.source)
            .ok_or_else(|| Error::UnknownLabel(self.source.clone()))?;
        let shift = self.gain * outcome;
        match self.quadrature {
            Quadrature::Q => GaussianMap::displacement(&[shift, 0.0]),
            Quadrature::P => GaussianMap::displacement(&[0.0, shift]),
        }
    }

    pub fn apply(&self, state: &GaussianState, record: &MeasurementRecord) -> Result<GaussianState> {
        self.displacement(record)?.apply_on(state, &[self.target])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{complexify, is_hermitian_psd};
    use proptest::prelude::*;

    #[test]
    fn homodyne_on_product_state_leaves_other_mode() {
        let s = GaussianState::vacuum(2).unwrap();
        let mut rng = RandomSource::new(7);
        let (_, reduced) = homodyne(&s, 1, 0.4, &mut rng).unwrap();
        assert_eq!(reduced, GaussianState::vacuum(1).unwrap());
    }

    #[test]
    fn homodyne_epr_conditional_variance() {
        let e = GaussianState::epr(0.4).unwrap();
        for m in [-1.3, 0.0, 0.7] {
            let red = homodyne_project(&e, 1, 0.0, m).unwrap();
            assert!((red.covariance()[(0, 0)] - 1.0 / 0.8f64.cosh()).abs() < 1e-12);
            assert!((red.covariance()[(1, 1)] - 0.8f64.cosh()).abs() < 1e-12);
            assert!((red.means()[0] - m * 0.8f64.tanh()).abs() < 1e-12);
        }
    }

    #[test]
    fn homodyne_forced_at_mean_keeps_means() {
        let s = GaussianMap::beamsplitter(0.5)
            .unwrap()
            .apply(&GaussianState::coherent(2, &[1.0, -0.5, 0.3, 0.2]).unwrap())
            .unwrap();
        let (mean, _) = homodyne_statistics(&s, 0, 0.9).unwrap();
        let red = homodyne_project(&s, 0, 0.9, mean).unwrap();
        assert!((red.means()[0] - s.means()[1]).abs() < 1e-12);
        assert!((red.means()[1] - s.means()[3]).abs() < 1e-12);
    }

    #[test]
    fn homodyne_single_mode_leaves_empty_state() {
        let mut rng = RandomSource::new(1);
        let (_, red) = homodyne(&GaussianState::vacuum(1).unwrap(), 0, 0.0, &mut rng).unwrap();
        assert_eq!(red.modes(), 0);
    }

    #[test]
    fn homodyne_rejects_degenerate_quadrature() {
        let s = GaussianState::from_moments(
            DVector::zeros(2),
            DMatrix::from_diagonal(&nalgebra::dvector![0.0, 1e6]),
        )
        .unwrap();
        assert!(matches!(
            homodyne_project(&s, 0, 0.0, 0.0),
            Err(Error::DegenerateQuadrature { .. })
        ));
        assert!(homodyne_project(&s, 3, 0.0, 0.0).is_err());
    }

    #[test]
    fn squeezed_homodyne_statistics() {
        let s = GaussianState::squeezed_vacuum(0.5).unwrap();
        let mut rng = RandomSource::new(2024);
        let shots = 100_000;
        let xs: Vec<f64> = (0..shots).map(|_| homodyne(&s, 0, 0.0, &mut rng).unwrap().0).collect();
        let mean = xs.iter().sum::<f64>() / shots as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (shots - 1) as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var / (-1.0f64).exp() - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn heterodyne_vacuum_statistics() {
        let v = GaussianState::vacuum(1).unwrap();
        let mut rng = RandomSource::new(99);
        let shots = 100_000;
        let pts: Vec<[f64; 2]> = (0..shots).map(|_| heterodyne(&v, 0, &mut rng).unwrap().0).collect();
        let mq = pts.iter().map(|p| p[0]).sum::<f64>() / shots as f64;
        let mp = pts.iter().map(|p| p[1]).sum::<f64>() / shots as f64;
        let cov = |a: usize, b: usize, ma: f64, mb: f64| {
            pts.iter().map(|p| (p[a] - ma) * (p[b] - mb)).sum::<f64>() / (shots - 1) as f64
        };
        assert!((cov(0, 0, mq, mq) / 2.0 - 1.0).abs() < 0.03);
        assert!((cov(1, 1, mp, mp) / 2.0 - 1.0).abs() < 0.03);
        assert!(cov(0, 1, mq, mp).abs() < 0.03 * 2.0);
    }

    #[test]
    fn heterodyne_epr_conditional_covariance() {
        let r = 0.35f64;
        let e = GaussianState::epr(r).unwrap();
        let red = heterodyne_project(&e, 1, [0.4, -0.2]).unwrap();
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let expected = c - s * s / (c + 1.0);
        let want = DMatrix::from_diagonal_element(2, 2, expected);
        assert!((red.covariance() - want).amax() < 1e-12);
    }

    #[test]
    fn heterodyne_product_state_untouched() {
        let t = GaussianState::thermal(0.7).unwrap();
        let s = GaussianState::squeezed_vacuum(0.3).unwrap().tensor(&t);
        let mut rng = RandomSource::new(3);
        let (_, red) = heterodyne(&s, 0, &mut rng).unwrap();
        assert!((red.covariance() - t.covariance()).amax() < 1e-15);
    }

    #[test]
    fn discard_examples() {
        assert_eq!(
            discard_measurement(&GaussianState::vacuum(2).unwrap(), 1).unwrap(),
            GaussianState::vacuum(1).unwrap()
        );
        let e = GaussianState::epr(0.4).unwrap();
        assert_eq!(discard_measurement(&e, 1).unwrap(), e.partial_trace(&[0]).unwrap());
        assert_eq!(discard_measurement(&GaussianState::vacuum(1).unwrap(), 0).unwrap().modes(), 0);
    }

    #[test]
    fn discard_is_average_of_conditional_states() {
        // law of total covariance: E[cov | m] + cov(E[mean | m]) = marginal
        let e = GaussianState::epr(0.4).unwrap();
        let mut rng = RandomSource::new(11);
        let shots = 10_000;
        let mut mean = DVector::<f64>::zeros(2);
        let mut second = DMatrix::<f64>::zeros(2, 2);
        for _ in 0..shots {
            let (_, red) = homodyne(&e, 1, 0.0, &mut rng).unwrap();
            mean += red.means();
            second += red.covariance() + red.means() * red.means().transpose();
        }
        mean /= shots as f64;
        second /= shots as f64;
        let total = second - &mean * mean.transpose();
        let target = discard_measurement(&e, 1).unwrap();
        for i in 0..2 {
            let rel = (total[(i, i)] - target.covariance()[(i, i)]).abs() / target.covariance()[(i, i)];
            assert!(rel < 0.05, "{total} vs {}", target.covariance());
        }
        // conditional means average to the marginal mean (0) within 3 standard errors
        let se = (target.covariance()[(0, 0)] / shots as f64).sqrt();
        assert!(mean[0].abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn feedforward_examples() {
        let mut rec = MeasurementRecord::new();
        rec.push("m", 1.7).unwrap();
        let s = GaussianState::epr(0.3).unwrap();
        let zero = Feedforward { gain: 0.0, source: "m".into(), target: 0, quadrature: Quadrature::Q };
        assert_eq!(zero.apply(&s, &rec).unwrap(), s);

        let ff = Feedforward { gain: 0.5, source: "m".into(), target: 1, quadrature: Quadrature::P };
        let twice = ff.apply(&ff.apply(&s, &rec).unwrap(), &rec).unwrap();
        assert!((twice.means()[3] - 2.0 * 0.5 * 1.7).abs() < 1e-15);

        let missing = Feedforward { source: "nope".into(), ..ff };
        assert!(matches!(missing.apply(&s, &rec), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn record_rejects_duplicates() {
        let mut rec = MeasurementRecord::new();
        rec.push("a", 1.0).unwrap();
        assert!(matches!(rec.push("a", 2.0), Err(Error::DuplicateLabel(_))));
        let json = serde_json::to_string(&rec).unwrap();
        assert_eq!(json, r#"[{"label":"a","value":1.0}]"#);
    }

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RandomSource::for_trajectory(5, 3);
        let mut b = RandomSource::for_trajectory(5, 3);
        let mut c = RandomSource::for_trajectory(5, 4);
        let xa: Vec<u64> = (0..10).map(|_| a.standard_normal().to_bits()).collect();
        let xb: Vec<u64> = (0..10).map(|_| b.standard_normal().to_bits()).collect();
        let xc: Vec<u64> = (0..10).map(|_| c.standard_normal().to_bits()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    proptest! {
        #[test]
        fn feedforward_nulls_conditional_mean(r in 0.05f64..1.0, m in -4.0f64..4.0) {
            let e = GaussianState::epr(r).unwrap();
            let red = homodyne_project(&e, 1, 0.0, m).unwrap();
            let mut rec = MeasurementRecord::new();
            rec.push("x", m).unwrap();
            let ff = Feedforward { gain: -(2.0 * r).tanh(), source: "x".into(), target: 0, quadrature: Quadrature::Q };
            let out = ff.apply(&red, &rec).unwrap();
            prop_assert!(out.means()[0].abs() < 1e-12);
        }

        #[test]
        fn conditioning_never_increases_uncertainty(
            r in -0.8f64..0.8, t in -3.0f64..3.0, theta in -3.0f64..3.0, nbar in 0.0f64..2.0, outcome in -3.0f64..3.0,
        ) {
            let s = GaussianState::thermal(nbar).unwrap().tensor(&GaussianState::squeezed_vacuum(r).unwrap());
            let s = GaussianMap::beamsplitter(t).unwrap().apply(&s).unwrap();
            let before = s.partial_trace(&[0]).unwrap();
            let after = homodyne_project(&s, 1, theta, outcome).unwrap();
            prop_assert!(after.check_physical(1e-9).is_ok());
            let diff = complexify(&(before.covariance() - after.covariance()));
            prop_assert!(is_hermitian_psd(&diff, 1e-9).unwrap());

            let het = heterodyne_project(&s, 1, [outcome, -outcome]).unwrap();
            prop_assert!(het.check_physical(1e-9).is_ok());
            let diff = complexify(&(before.covariance() - het.covariance()));
            prop_assert!(is_hermitian_psd(&diff, 1e-9).unwrap());
        }

        #[test]
        fn sampled_homodyne_matches_projection(seed in any::<u64>(), theta in -3.0f64..3.0) {
            let s = GaussianMap::two_mode_squeeze(0.4).unwrap().apply(&GaussianState::coherent(2, &[0.3, -0.2, 1.0, 0.1]).unwrap()).unwrap();
            let mut rng = RandomSource::new(seed);
            let (m, red) = homodyne(&s, 0, theta, &mut rng).unwrap();
            prop_assert_eq!(red, homodyne_project(&s, 0, theta, m).unwrap());
        }
    }
}
