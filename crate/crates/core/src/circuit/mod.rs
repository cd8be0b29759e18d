//! Line-oriented circuit language: program representation, parser, renderer,
//! static validation and trajectory execution.

mod execute;
mod parse;
mod render;
mod validate;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::maps::GaussianMap;
use crate::measurement::Feedforward;
use crate::state::GaussianState;

pub use execute::{execute, sample, LabelSummary, LogEntry, OutputValue, SampleResult, SimulationResult};
pub use parse::{parse, parse_spanned, ParseError};
pub use render::render;
pub use validate::{validate, Diagnostic, DiagnosticKind};

/// Largest squeezing magnitude accepted by the validator. Beyond this the
/// covariance spans more than 17 decades and conditioning loses all precision.
pub const MAX_SQUEEZING: f64 = 10.0;

/// Largest register accepted by the validator (a 2000 x 2000 covariance).
pub const MAX_MODES: usize = 1000;

/// Largest magnitude accepted for any other numeric parameter.
pub const MAX_PARAMETER: f64 = 1e6;

/// A parsed program: a mode count and an instruction list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub modes: usize,
    pub instructions: Vec<Instruction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Instruction {
    /// Replaces the register with a freshly prepared state on the current modes.
    Prepare(Preparation),
    Gate(Gate),
    /// An explicit `(alpha, A, G)` on `modes`, or on every mode when empty.
    RawMap { modes: Vec<usize>, map: GaussianMap },
    Homodyne { mode: usize, theta: f64, label: String },
    /// Records `<label>.q` and `<label>.p`.
    Heterodyne { mode: usize, label: String },
    Discard { mode: usize },
    Feedforward(Feedforward),
    Output(Output),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Preparation {
    Vacuum,
    Coherent { xi: Vec<f64> },
    /// Every mode squeezed by `r`.
    Squeezed { r: f64 },
    /// Every mode thermal with mean photon number `n_bar`.
    Thermal { n_bar: f64 },
    /// Two-mode squeezed vacuum; needs exactly two modes.
    Epr { r: f64 },
}

impl Preparation {
    pub fn keyword(&self) -> &'static str {
        match self {
            Preparation::Vacuum => "vacuum",
            Preparation::Coherent { .. } => "coherent",
            Preparation::Squeezed { .. } => "squeezed",
            Preparation::Thermal { .. } => "thermal",
            Preparation::Epr { .. } => "epr",
        }
    }

    /// The prepared state on `n` modes.
    pub fn build(&self, n: usize) -> Result<GaussianState> {
        let product = |one: GaussianState| {
            let mut s = one.clone();
            for _ in 1..n {
                s = s.tensor(&one);
            }
            s
        };
        match self {
            Preparation::Vacuum => GaussianState::vacuum(n),
            Preparation::Coherent { xi } => GaussianState::coherent(n, xi),
            Preparation::Squeezed { r } => Ok(product(GaussianState::squeezed_vacuum(*r)?)),
            Preparation::Thermal { n_bar } => Ok(product(GaussianState::thermal(*n_bar)?)),
            Preparation::Epr { r } => {
                if n != 2 {
                    return Err(crate::Error::DimensionMismatch { expected: 2, found: n });
                }
                GaussianState::epr(*r)
            }
        }
    }
}

/// The standard gate and channel library, addressed by mode index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    Displacement { mode: usize, q: f64, p: f64 },
    PhaseShift { mode: usize, theta: f64 },
    Squeeze { mode: usize, r: f64 },
    Beamsplitter { modes: [usize; 2], theta: f64 },
    TwoModeSqueeze { modes: [usize; 2], r: f64 },
    Loss { mode: usize, eta: f64 },
    Amplifier { mode: usize, g: f64 },
    ThermalNoise { mode: usize, n_noise: f64 },
}

impl Gate {
    pub fn keyword(&self) -> &'static str {
        match self {
            Gate::Displacement { .. } => "disp",
            Gate::PhaseShift { .. } => "phase",
            Gate::Squeeze { .. } => "squeeze",
            Gate::Beamsplitter { .. } => "bs",
            Gate::TwoModeSqueeze { .. } => "tms",
            Gate::Loss { .. } => "loss",
            Gate::Amplifier { .. } => "amp",
            Gate::ThermalNoise { .. } => "noise",
        }
    }

    pub fn modes(&self) -> Vec<usize> {
        match *self {
            Gate::Displacement { mode, .. }
            | Gate::PhaseShift { mode, .. }
            | Gate::Squeeze { mode, .. }
            | Gate::Loss { mode, .. }
            | Gate::Amplifier { mode, .. }
            | Gate::ThermalNoise { mode, .. } => vec![mode],
            Gate::Beamsplitter { modes, .. } | Gate::TwoModeSqueeze { modes, .. } => modes.to_vec(),
        }
    }

    /// The gate as a map on its own modes (local ordering follows [`Gate::modes`]).
    pub fn local_map(&self) -> Result<GaussianMap> {
        match *self {
            Gate::Displacement { q, p, .. } => GaussianMap::displacement(&[q, p]),
            Gate::PhaseShift { theta, .. } => GaussianMap::phase_shift(theta),
            Gate::Squeeze { r, .. } => GaussianMap::squeeze(r),
            Gate::Beamsplitter { theta, .. } => GaussianMap::beamsplitter(theta),
            Gate::TwoModeSqueeze { r, .. } => GaussianMap::two_mode_squeeze(r),
            Gate::Loss { eta, .. } => GaussianMap::loss(eta),
            Gate::Amplifier { g, .. } => GaussianMap::amplifier(g),
            Gate::ThermalNoise { n_noise, .. } => GaussianMap::thermal_noise(n_noise),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "what", rename_all = "snake_case")]
pub enum Output {
    State,
    Wigner { point: Vec<f64> },
}
