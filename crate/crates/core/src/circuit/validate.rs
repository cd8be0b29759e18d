use std::collections::HashSet;

use serde::Serialize;

use super::{Circuit, Gate, Instruction, Output, Preparation, MAX_MODES, MAX_PARAMETER, MAX_SQUEEZING};
use crate::phase_space::DEFAULT_TOL;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiagnosticKind {
    /// A mode index is not below the mode count in effect at that instruction.
    ModeRange { mode: usize, modes: usize },
    /// A parameter lies outside its valid range.
    Parameter,
    /// A map fails the complete-positivity condition.
    NotCompletelyPositive { min_eigenvalue: f64 },
    /// A feedforward reads a label that no earlier measurement produced.
    UnresolvedLabel,
    DuplicateLabel,
    /// Shapes that do not fit the register (wrong vector lengths, empty register).
    Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub index: usize,
    #[serde(flatten)]
    pub kind: DiagnosticKind,
    pub message: String,
}

struct Checker {
    out: Vec<Diagnostic>,
    index: usize,
}

impl Checker {
    fn push(&mut self, kind: DiagnosticKind, message: String) {
        self.out.push(Diagnostic {
            index: self.index,
            kind,
            message,
        });
    }

    fn range(&mut self, name: &str, v: f64, ok: bool, expected: &str) {
        if !ok {
            self.push(
                DiagnosticKind::Parameter,
                format!("{name} = {v} out of range (expected {expected})"),
            );
        }
    }

    fn squeezing(&mut self, v: f64) {
        self.range("r", v, v.abs() <= MAX_SQUEEZING, &format!("|r| <= {MAX_SQUEEZING}"));
    }

    fn bounded(&mut self, name: &str, v: f64) {
        self.range(name, v, v.abs() <= MAX_PARAMETER, &format!("|{name}| <= {MAX_PARAMETER:e}"));
    }

    fn modes(&mut self, modes: &[usize], n: usize) -> bool {
        let mut ok = true;
        for (i, &m) in modes.iter().enumerate() {
            if m >= n {
                ok = false;
                let hint = if n == 0 { " (no modes left)" } else { "" };
                self.push(
                    DiagnosticKind::ModeRange { mode: m, modes: n },
                    format!("mode {m} out of range: {n} mode(s) at this point{hint}"),
                );
            } else if modes[..i].contains(&m) {
                ok = false;
                self.push(DiagnosticKind::Shape, format!("mode {m} used twice"));
            }
        }
        ok
    }
}

/// Static checks: parameter ranges, complete positivity of every map, mode
/// indices against the shrinking register, and feedforward label resolution.
/// An empty list means the circuit can be executed.
pub fn validate(c: &Circuit) -> Vec<Diagnostic> {
    let mut ck = Checker {
        out: Vec::new(),
        index: 0,
    };
    let mut n = c.modes;
    if n == 0 {
        ck.push(DiagnosticKind::Shape, "circuit must declare at least one mode".into());
    } else if n > MAX_MODES {
        ck.push(DiagnosticKind::Shape, format!("at most {MAX_MODES} modes are supported"));
    }
    // Names taken by a measurement, and the record keys a feedforward may read.
    // A heterodyne reserves its bare label but only records `.q` and `.p`.
    let mut labels: HashSet<String> = HashSet::new();
    let mut readable: HashSet<String> = HashSet::new();

    for (index, instr) in c.instructions.iter().enumerate() {
        ck.index = index;
        match instr {
            Instruction::Prepare(p) => {
                if n == 0 {
                    ck.push(DiagnosticKind::Shape, "cannot prepare a state with no modes left".into());
                    continue;
                }
                match p {
                    Preparation::Vacuum => {}
                    Preparation::Coherent { xi } => {
                        if xi.len() != 2 * n {
                            ck.push(
                                DiagnosticKind::Shape,
                                format!("coherent means have length {}, expected {}", xi.len(), 2 * n),
                            );
                        }
                        for &x in xi {
                            ck.bounded("xi", x);
                        }
                    }
                    Preparation::Squeezed { r } => ck.squeezing(*r),
                    Preparation::Thermal { n_bar } => {
                        ck.range("nbar", *n_bar, (0.0..=MAX_PARAMETER).contains(n_bar), "0 <= nbar <= 1e6")
                    }
                    Preparation::Epr { r } => {
                        ck.squeezing(*r);
                        if n != 2 {
                            ck.push(DiagnosticKind::Shape, format!("epr needs exactly 2 modes, register has {n}"));
                        }
                    }
                }
            }
            Instruction::Gate(g) => {
                ck.modes(&g.modes(), n);
                match *g {
                    Gate::Displacement { q, p, .. } => {
                        ck.bounded("q", q);
                        ck.bounded("p", p);
                    }
                    Gate::PhaseShift { theta, .. } | Gate::Beamsplitter { theta, .. } => ck.bounded("theta", theta),
                    Gate::Squeeze { r, .. } | Gate::TwoModeSqueeze { r, .. } => ck.squeezing(r),
                    Gate::Loss { eta, .. } => ck.range("eta", eta, eta > 0.0 && eta <= 1.0, "0 < eta <= 1"),
                    Gate::Amplifier { g, .. } => ck.range("g", g, (1.0..=MAX_PARAMETER).contains(&g), "1 <= g <= 1e6"),
                    Gate::ThermalNoise { n_noise, .. } => {
                        ck.range("n", n_noise, (0.0..=MAX_PARAMETER).contains(&n_noise), "0 <= n <= 1e6")
                    }
                }
            }
            Instruction::RawMap { modes, map } => {
                let width = if modes.is_empty() { n } else { modes.len() };
                if map.modes() != width {
                    ck.push(
                        DiagnosticKind::Shape,
                        format!("map acts on {} mode(s) but targets {width}", map.modes()),
                    );
                }
                ck.modes(modes, n);
                if modes.is_empty() && n == 0 {
                    ck.push(DiagnosticKind::Shape, "map applied with no modes left".into());
                }
                let report = map.validate_cp(DEFAULT_TOL);
                if !report.valid {
                    ck.push(
                        DiagnosticKind::NotCompletelyPositive {
                            min_eigenvalue: report.min_eigenvalue,
                        },
                        format!(
                            "map violates complete positivity: minimum eigenvalue of G + i sigma - i A^T sigma A is {:.6e}",
                            report.min_eigenvalue
                        ),
                    );
                }
                let mags = map.alpha().iter().chain(map.a_matrix().iter()).chain(map.g_matrix().iter());
                if mags.into_iter().any(|x| x.abs() > MAX_PARAMETER) {
                    ck.push(DiagnosticKind::Parameter, format!("map entries must not exceed {MAX_PARAMETER:e} in magnitude"));
                }
            }
            Instruction::Homodyne { mode, theta, label } => {
                ck.bounded("theta", *theta);
                if ck.modes(&[*mode], n) {
                    n -= 1;
                }
                if !labels.insert(label.clone()) {
                    ck.push(DiagnosticKind::DuplicateLabel, format!("label {label:?} already recorded"));
                }
                readable.insert(label.clone());
            }
            Instruction::Heterodyne { mode, label } => {
                if ck.modes(&[*mode], n) {
                    n -= 1;
                }
                for l in [format!("{label}.q"), format!("{label}.p"), label.clone()] {
                    if !labels.insert(l.clone()) {
                        ck.push(DiagnosticKind::DuplicateLabel, format!("label {l:?} already recorded"));
                    }
                }
                readable.insert(format!("{label}.q"));
                readable.insert(format!("{label}.p"));
            }
            Instruction::Discard { mode } => {
                if ck.modes(&[*mode], n) {
                    n -= 1;
                }
            }
            Instruction::Feedforward(ff) => {
                ck.modes(&[ff.target], n);
                ck.bounded("gain", ff.gain);
                if !readable.contains(&ff.source) {
                    ck.push(
                        DiagnosticKind::UnresolvedLabel,
                        format!("feedforward reads {:?}, which no earlier measurement records", ff.source),
                    );
                }
            }
            Instruction::Output(Output::State) => {}
            Instruction::Output(Output::Wigner { point }) => {
                if n == 0 {
                    ck.push(DiagnosticKind::Shape, "wigner output with no modes left".into());
                } else if point.len() != 2 * n {
                    ck.push(
                        DiagnosticKind::Shape,
                        format!("wigner point has length {}, expected {}", point.len(), 2 * n),
                    );
                }
            }
        }
    }
    ck.out
}
