//! Side-by-side comparison of a truncated state with a Gaussian one.

use gaussim::GaussianState;
use serde::Serialize;

use crate::error::{FockError, Result};
use crate::state::{FockState, Moments};
use crate::TRUNCATION_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// The truncation is too small for the state, so the numbers mean nothing.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub means_deviation: f64,
    pub covariance_deviation: f64,
    pub top_population: f64,
    pub imaginary_residual: f64,
    pub trace_deficit: f64,
    pub verdict: Verdict,
}

/// Largest absolute entrywise deviation between two moment sets.
pub fn moment_deviation(
    xi: &[f64],
    gamma: &[Vec<f64>],
    state: &GaussianState,
) -> Result<(f64, f64)> {
    let dim = state.means().len();
    if xi.len() != dim || gamma.len() != dim || gamma.iter().any(|row| row.len() != dim) {
        return Err(FockError::Parameter(format!(
            "moment shapes do not match a {dim}-dimensional phase space"
        )));
    }
    let dm = xi
        .iter()
        .zip(state.means().iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let mut dg: f64 = 0.0;
    for (i, row) in gamma.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            dg = dg.max((v - state.covariance()[(i, j)]).abs());
        }
    }
    Ok((dm, dg))
}

pub fn compare_moments(
    moments: &Moments,
    top_population: f64,
    state: &GaussianState,
    tol: f64,
) -> Result<ComparisonReport> {
    let gamma: Vec<Vec<f64>> = moments
        .gamma
        .row_iter()
        .map(|r| r.iter().copied().collect())
        .collect();
    let (dm, dg) = moment_deviation(moments.xi.as_slice(), &gamma, state)?;
    let verdict = if top_population > TRUNCATION_TOL {
        Verdict::Inconclusive
    } else if dm <= tol && dg <= tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ComparisonReport {
        means_deviation: dm,
        covariance_deviation: dg,
        top_population,
        imaginary_residual: moments.imaginary_residual,
        trace_deficit: 1.0 - moments.trace,
        verdict,
    })
}

pub fn compare(fock: &FockState, state: &GaussianState, tol: f64) -> Result<ComparisonReport> {
    if fock.modes() != state.modes() {
        return Err(FockError::Parameter(format!(
            "{} Fock mode(s) against {} Gaussian mode(s)",
            fock.modes(),
            state.modes()
        )));
    }
    compare_moments(&fock.moments()?, fock.top_population(), state, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Generator;

    #[test]
    fn squeezed_vacuum_agrees() {
        let mut f = FockState::vacuum(1, 60).unwrap();
        f.apply(Generator::Squeeze { mode: 0, r: 0.5 }).unwrap();
        let g = GaussianState::squeezed_vacuum(0.5).unwrap();
        let rep = compare(&f, &g, 1e-9).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
    }

    #[test]
    fn small_truncation_is_inconclusive() {
        let mut f = FockState::vacuum(1, 7).unwrap();
        f.apply(Generator::Squeeze { mode: 0, r: 1.0 }).unwrap();
        let g = GaussianState::squeezed_vacuum(1.0).unwrap();
        assert_eq!(compare(&f, &g, 1e-6).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn wrong_state_fails() {
        let f = FockState::vacuum(1, 10).unwrap();
        let g = GaussianState::thermal(0.1).unwrap();
        assert_eq!(compare(&f, &g, 1e-6).unwrap().verdict, Verdict::Fail);
    }
}
