use std::fmt::Write;

use super::{Circuit, Gate, Instruction, Output, Preparation};
use crate::measurement::Quadrature;
use crate::state::matrix_to_rows;

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("finite numbers serialize")
}

/// Renders a circuit in the line language; `parse(&render(c)) == c`.
pub fn render(c: &Circuit) -> String {
    let mut out = format!("modes {}\n", c.modes);
    for instr in &c.instructions {
        // `{:?}` prints the shortest decimal that round-trips an f64.
        let line = match instr {
            Instruction::Prepare(p) => match p {
                Preparation::Vacuum => "init vacuum".to_string(),
                Preparation::Coherent { xi } => format!("init coherent xi={}", json(xi)),
                Preparation::Squeezed { r } => format!("init squeezed r={r:?}"),
                Preparation::Thermal { n_bar } => format!("init thermal nbar={n_bar:?}"),
                Preparation::Epr { r } => format!("init epr r={r:?}"),
            },
            Instruction::Gate(g) => {
                let kw = g.keyword();
                match *g {
                    Gate::Displacement { mode, q, p } => format!("{kw} {mode} q={q:?} p={p:?}"),
                    Gate::PhaseShift { mode, theta } => format!("{kw} {mode} theta={theta:?}"),
                    Gate::Squeeze { mode, r } => format!("{kw} {mode} r={r:?}"),
                    Gate::Beamsplitter { modes: [j, k], theta } => format!("{kw} {j} {k} theta={theta:?}"),
                    Gate::TwoModeSqueeze { modes: [j, k], r } => format!("{kw} {j} {k} r={r:?}"),
                    Gate::Loss { mode, eta } => format!("{kw} {mode} eta={eta:?}"),
                    Gate::Amplifier { mode, g } => format!("{kw} {mode} g={g:?}"),
                    Gate::ThermalNoise { mode, n_noise } => format!("{kw} {mode} n={n_noise:?}"),
                }
            }
            Instruction::RawMap { modes, map } => {
                let mut s = "map".to_string();
                for m in modes {
                    write!(s, " {m}").unwrap();
                }
                let alpha: Vec<f64> = map.alpha().iter().copied().collect();
                write!(
                    s,
                    " alpha={} a={} g={}",
                    json(&alpha),
                    json(&matrix_to_rows(map.a_matrix())),
                    json(&matrix_to_rows(map.g_matrix()))
                )
                .unwrap();
                s
            }
            Instruction::Homodyne { mode, theta, label } => format!("homodyne {mode} theta={theta:?} -> {label}"),
            Instruction::Heterodyne { mode, label } => format!("heterodyne {mode} -> {label}"),
            Instruction::Discard { mode } => format!("discard {mode}"),
            Instruction::Feedforward(ff) => format!(
                "feedforward gain={:?} from={} to={} {}",
                ff.gain,
                ff.source,
                ff.target,
                match ff.quadrature {
                    Quadrature::Q => "q",
                    Quadrature::P => "p",
                }
            ),
            Instruction::Output(Output::State) => "output state".to_string(),
            Instruction::Output(Output::Wigner { point }) => {
                let mut s = "output wigner".to_string();
                for x in point {
                    write!(s, " {x:?}").unwrap();
                }
                s
            }
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}
