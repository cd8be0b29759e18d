//! Regression corpus: circuit files paired with oracle-derived moments.
//!
//! An entry `NAME` is the pair `NAME.circ` (circuit source) and `NAME.json`
//! holding `{"truncation": d, "xi": [...], "gamma": [[...]]}`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use gaussim::circuit::{execute, parse};
use gaussim::{Circuit, RandomSource};
use serde::{Deserialize, Serialize};

use crate::circuit::simulate;
use crate::compare::{compare, moment_deviation, ComparisonReport, Verdict};
use crate::error::{FockError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Expected {
    pub truncation: usize,
    pub xi: Vec<f64>,
    pub gamma: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub source: String,
    pub circuit: Circuit,
    pub expected: Expected,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryReport {
    pub name: String,
    pub modes: usize,
    pub truncation: usize,
    /// Engine against a fresh oracle run.
    pub oracle: ComparisonReport,
    /// Engine against the stored expectation.
    pub stored_means_deviation: f64,
    pub stored_covariance_deviation: f64,
    pub seconds: f64,
    pub passed: bool,
}

/// Oracle moments of `circuit` at truncation `d`, refusing inconclusive runs.
pub fn expected_for(circuit: &Circuit, d: usize) -> Result<Expected> {
    let state = simulate(circuit, d)?;
    let top = state.top_population();
    if top > crate::TRUNCATION_TOL {
        return Err(FockError::Corpus(format!(
            "truncation {d} too small: top-level population {top:e}"
        )));
    }
    let m = state.moments()?;
    Ok(Expected {
        truncation: d,
        xi: m.xi.iter().copied().collect(),
        gamma: m.gamma.row_iter().map(|r| r.iter().copied().collect()).collect(),
    })
}

pub fn load_entry(circ: &Path) -> Result<CorpusEntry> {
    let name = circ
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| FockError::Corpus(format!("bad file name {}", circ.display())))?
        .to_string();
    let source = std::fs::read_to_string(circ)?;
    let circuit = parse(&source).map_err(|e| FockError::Corpus(format!("{name}: {e}")))?;
    let json = std::fs::read_to_string(circ.with_extension("json"))?;
    let expected: Expected =
        serde_json::from_str(&json).map_err(|e| FockError::Corpus(format!("{name}: {e}")))?;
    Ok(CorpusEntry { name, source, circuit, expected })
}

/// Every `*.circ` entry in `dir`, sorted by name.
pub fn load(dir: &Path) -> Result<Vec<CorpusEntry>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "circ"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_entry(p)).collect()
}

/// Runs the engine and the oracle on one entry.
pub fn check(entry: &CorpusEntry, tol: f64) -> Result<EntryReport> {
    let start = Instant::now();
    let engine = execute(&entry.circuit, &mut RandomSource::new(0))?.final_state;
    let fock = simulate(&entry.circuit, entry.expected.truncation)?;
    let oracle = compare(&fock, &engine, tol)?;
    let (dm, dg) = moment_deviation(&entry.expected.xi, &entry.expected.gamma, &engine)?;
    let passed = oracle.verdict == Verdict::Pass && dm <= tol && dg <= tol;
    Ok(EntryReport {
        name: entry.name.clone(),
        modes: entry.circuit.modes,
        truncation: entry.expected.truncation,
        oracle,
        stored_means_deviation: dm,
        stored_covariance_deviation: dg,
        seconds: start.elapsed().as_secs_f64(),
        passed,
    })
}
