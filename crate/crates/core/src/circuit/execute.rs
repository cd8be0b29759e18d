use rayon::prelude::*;
use serde::Serialize;

use super::{validate, Circuit, Instruction, Output};
use crate::error::{Error, Result};
use crate::measurement::{self, MeasurementRecord, RandomSource};
use crate::phase_space::PHYSICALITY_TOL;
use crate::state::{GaussianState, ResourceCount};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogEntry {
    pub index: usize,
    pub resource_count: ResourceCount,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "what", rename_all = "snake_case")]
pub enum OutputValue {
    State { index: usize, state: GaussianState },
    Wigner { index: usize, point: Vec<f64>, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub final_state: GaussianState,
    pub record: MeasurementRecord,
    /// One entry per instruction: the resource count after it ran.
    pub log: Vec<LogEntry>,
    pub outputs: Vec<OutputValue>,
}

/// Runs one trajectory. Fails if the circuit does not validate.
pub fn execute(c: &Circuit, rng: &mut RandomSource) -> Result<SimulationResult> {
    ensure_valid(c)?;
    run(c, rng)
}

fn ensure_valid(c: &Circuit) -> Result<()> {
    let diags = validate(c);
    if let Some(d) = diags.first() {
        return Err(Error::Invalid(format!(
            "instruction {}: {} ({} diagnostic(s))",
            d.index,
            d.message,
            diags.len()
        )));
    }
    Ok(())
}

fn run(c: &Circuit, rng: &mut RandomSource) -> Result<SimulationResult> {
    let mut state = GaussianState::vacuum(c.modes)?;
    let mut record = MeasurementRecord::new();
    let mut log = Vec::with_capacity(c.instructions.len());
    let mut outputs = Vec::new();

    for (index, instr) in c.instructions.iter().enumerate() {
        let wrap = |source: Error| Error::Instruction {
            index,
            source: Box::new(source),
        };
        state = step(&state, instr, index, &mut record, &mut outputs, rng).map_err(wrap)?;
        state.check_physical(PHYSICALITY_TOL).map_err(wrap)?;
        log.push(LogEntry {
            index,
            resource_count: state.resource_count(),
        });
    }
    Ok(SimulationResult {
        final_state: state,
        record,
        log,
        outputs,
    })
}

fn step(
    state: &GaussianState,
    instr: &Instruction,
    index: usize,
    record: &mut MeasurementRecord,
    outputs: &mut Vec<OutputValue>,
    rng: &mut RandomSource,
) -> Result<GaussianState> {
    match instr {
        Instruction::Prepare(p) => p.build(state.modes()),
        Instruction::Gate(g) => g.local_map()?.apply_on(state, &g.modes()),
        Instruction::RawMap { modes, map } => {
            if modes.is_empty() {
                map.apply(state)
            } else {
                map.apply_on(state, modes)
            }
        }
        Instruction::Homodyne { mode, theta, label } => {
            let (outcome, reduced) = measurement::homodyne(state, *mode, *theta, rng)?;
            record.push(label.clone(), outcome)?;
            Ok(reduced)
        }
        Instruction::Heterodyne { mode, label } => {
            let ([q, p], reduced) = measurement::heterodyne(state, *mode, rng)?;
            record.push(format!("{label}.q"), q)?;
            record.push(format!("{label}.p"), p)?;
            Ok(reduced)
        }
        Instruction::Discard { mode } => measurement::discard_measurement(state, *mode),
        Instruction::Feedforward(ff) => ff.apply(state, record),
        Instruction::Output(Output::State) => {
            outputs.push(OutputValue::State {
                index,
                state: state.clone(),
            });
            Ok(state.clone())
        }
        Instruction::Output(Output::Wigner { point }) => {
            let value = state.wigner(point)?;
            outputs.push(OutputValue::Wigner {
                index,
                point: point.clone(),
                value,
            });
            Ok(state.clone())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelSummary {
    pub label: String,
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance (zero for a single shot).
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleResult {
    pub seed: u64,
    pub shots: usize,
    pub records: Vec<MeasurementRecord>,
    pub summary: Vec<LabelSummary>,
}

/// Runs `shots` independent trajectories; trajectory `i` uses
/// [`RandomSource::for_trajectory`]`(seed, i)`. Trajectories run in parallel
/// and the result is identical to running them sequentially.
pub fn sample(c: &Circuit, shots: usize, seed: u64) -> Result<SampleResult> {
    if shots == 0 {
        return Err(Error::InvalidParameter {
            name: "shots",
            value: 0.0,
            reason: "must be positive",
        });
    }
    ensure_valid(c)?;
    let records = (0..shots as u64)
        .into_par_iter()
        .map(|i| run(c, &mut RandomSource::for_trajectory(seed, i)).map(|r| r.record))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&records);
    Ok(SampleResult {
        seed,
        shots,
        records,
        summary,
    })
}

fn summarize(records: &[MeasurementRecord]) -> Vec<LabelSummary> {
    let Some(first) = records.first() else {
        return Vec::new();
    };
    first
        .entries()
        .iter()
        .map(|e| {
            let values: Vec<f64> = records.iter().filter_map(|r| r.get(&e.label)).collect();
            let count = values.len();
            let mean = values.iter().sum::<f64>() / count as f64;
            let variance = if count > 1 {
                values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
            } else {
                0.0
            };
            LabelSummary {
                label: e.label.clone(),
                count,
                mean,
                variance,
            }
        })
        .collect()
}
