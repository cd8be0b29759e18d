//! Runs the deterministic part of the circuit language in Fock space.

use gaussim::circuit::{Gate, Preparation};
use gaussim::{Circuit, Instruction};

use crate::error::{FockError, Result};
use crate::state::{FockState, Generator};

fn prepare(prep: &Preparation, n: usize, d: usize) -> Result<FockState> {
    match prep {
        Preparation::Vacuum => FockState::vacuum(n, d),
        Preparation::Coherent { xi } => {
            if xi.len() != 2 * n {
                return Err(FockError::Parameter(format!(
                    "coherent means of length {} for {n} mode(s)",
                    xi.len()
                )));
            }
            let mut s = FockState::vacuum(n, d)?;
            for m in 0..n {
                s.apply(Generator::Displacement { mode: m, q: xi[m], p: xi[n + m] })?;
            }
            Ok(s)
        }
        Preparation::Squeezed { r } => {
            let mut s = FockState::vacuum(n, d)?;
            for m in 0..n {
                s.apply(Generator::Squeeze { mode: m, r: *r })?;
            }
            Ok(s)
        }
        Preparation::Thermal { n_bar } => FockState::thermal(n, d, *n_bar),
        Preparation::Epr { r } => {
            if n != 2 {
                return Err(FockError::Parameter(format!("epr needs 2 modes, have {n}")));
            }
            let mut s = FockState::vacuum(2, d)?;
            s.apply(Generator::TwoModeSqueeze { modes: [0, 1], r: *r })?;
            Ok(s)
        }
    }
}

pub fn apply_gate(state: &mut FockState, gate: &Gate) -> Result<()> {
    match *gate {
        Gate::Displacement { mode, q, p } => state.apply(Generator::Displacement { mode, q, p }),
        Gate::PhaseShift { mode, theta } => state.apply(Generator::PhaseShift { mode, theta }),
        Gate::Squeeze { mode, r } => state.apply(Generator::Squeeze { mode, r }),
        Gate::Beamsplitter { modes, theta } => state.apply(Generator::Beamsplitter { modes, theta }),
        Gate::TwoModeSqueeze { modes, r } => state.apply(Generator::TwoModeSqueeze { modes, r }),
        Gate::Loss { mode, eta } => state.loss(mode, eta),
        Gate::Amplifier { mode, g } => state.amplifier(mode, g),
        Gate::ThermalNoise { mode, n_noise } => state.thermal_noise(mode, n_noise),
    }
}

/// Final state of a measurement-free circuit with every mode truncated to `d`.
///
/// Raw maps and measurements have no Fock counterpart here and are rejected.
pub fn simulate(circuit: &Circuit, d: usize) -> Result<FockState> {
    let mut state = FockState::vacuum(circuit.modes, d)?;
    for (index, inst) in circuit.instructions.iter().enumerate() {
        match inst {
            Instruction::Prepare(prep) => state = prepare(prep, state.modes(), d)?,
            Instruction::Gate(gate) => apply_gate(&mut state, gate)?,
            Instruction::Discard { mode } => state.discard(*mode)?,
            Instruction::Output(_) => {}
            Instruction::RawMap { .. }
            | Instruction::Homodyne { .. }
            | Instruction::Heterodyne { .. }
            | Instruction::Feedforward(_) => {
                return Err(FockError::Unsupported(format!("instruction {index}")));
            }
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaussim::circuit::parse;

    #[test]
    fn rejects_measurements() {
        let c = parse("modes 1\nhomodyne 0 theta=0 -> m\n").unwrap();
        assert!(matches!(simulate(&c, 5), Err(FockError::Unsupported(_))));
    }

    #[test]
    fn coherent_layout() {
        let c = parse("modes 2\ninit coherent xi=[1.0, 0.0, 0.0, -0.5]\n").unwrap();
        let m = simulate(&c, 20).unwrap().moments().unwrap();
        let want = [1.0, 0.0, 0.0, -0.5];
        for (a, b) in m.xi.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
