//! Regenerates the regression corpus from the Fock-space oracle.
//!
//! Usage: `cargo run --release -p gaussim-fock --example build_corpus [DIR]`

use std::path::PathBuf;

use gaussim::circuit::parse;
use gaussim_fock::corpus::{check, expected_for, load_entry};
use gaussim_fock::circuit::simulate;

const ENTRIES: &[(&str, &str)] = &[
    ("01_vacuum", "modes 1\n"),
    ("02_coherent", "modes 1\ninit coherent xi=[1.2, -0.7]\n"),
    ("03_squeezed", "modes 1\ninit squeezed r=0.5\n"),
    ("04_thermal", "modes 1\ninit thermal nbar=0.3\n"),
    ("05_displace_rotate", "modes 1\ndisp 0 q=1.0 p=0.5\nphase 0 theta=0.7\n"),
    (
        "06_squeeze_displace_rotate",
        "modes 1\nsqueeze 0 r=0.4\ndisp 0 q=0.8 p=-0.3\nphase 0 theta=1.1\n",
    ),
    ("07_lossy_coherent", "modes 1\ninit coherent xi=[1.5, 0.5]\nloss 0 eta=0.6\n"),
    ("08_lossy_squeezed", "modes 1\nsqueeze 0 r=0.6\nloss 0 eta=0.7\n"),
    ("09_amplified_coherent", "modes 1\ndisp 0 q=0.6\namp 0 g=1.3\n"),
    ("10_noisy_squeezed", "modes 1\nsqueeze 0 r=0.3\nnoise 0 n=0.2\n"),
    ("11_squeezed_thermal", "modes 1\ninit thermal nbar=0.2\nsqueeze 0 r=0.3\n"),
    ("12_epr", "modes 2\ninit epr r=0.4\n"),
    ("13_split_coherent", "modes 2\ndisp 0 q=1.0\nbs 0 1 theta=0.6\n"),
    (
        "14_balanced_squeezers",
        "modes 2\nsqueeze 0 r=0.4\nsqueeze 1 r=-0.4\nbs 0 1 theta=0.785398\n",
    ),
    ("15_lossy_tms", "modes 2\ntms 0 1 r=0.3\nloss 1 eta=0.8\n"),
    (
        "16_tms_rotate_displace",
        "modes 2\ntms 0 1 r=0.25\nphase 1 theta=0.4\ndisp 0 q=0.3 p=0.2\n",
    ),
    ("17_epr_marginal", "modes 2\ninit epr r=0.4\ndiscard 1\n"),
    ("18_thermal_split_amp", "modes 2\ninit thermal nbar=0.15\nbs 0 1 theta=0.3\namp 1 g=1.1\n"),
    (
        "19_three_mode_chain",
        "modes 3\ndisp 0 q=0.5\nsqueeze 1 r=0.15\nbs 0 1 theta=0.5\nbs 1 2 theta=0.9\nphase 2 theta=0.3\n",
    ),
    ("20_three_mode_tms", "modes 3\ntms 0 1 r=0.2\nbs 1 2 theta=0.7\nsqueeze 2 r=0.1\n"),
    (
        "21_three_mode_loss",
        "modes 3\ndisp 0 q=0.5 p=0.2\nbs 0 2 theta=0.4\nloss 2 eta=0.9\n",
    ),
    ("22_three_mode_discard", "modes 3\ntms 0 2 r=0.15\nbs 0 1 theta=0.3\ndiscard 1\n"),
    (
        "23_three_mode_noise",
        "modes 3\nsqueeze 1 r=0.05\nnoise 1 n=0.01\nbs 1 2 theta=0.5\n",
    ),
    (
        "24_reversed_beamsplitter",
        "modes 2\ndisp 1 q=0.4 p=-0.9\nsqueeze 0 r=0.2\nbs 1 0 theta=1.2\n",
    ),
];

/// Top-level population and step-to-step drift accepted for a stored entry.
const MARGIN: f64 = 1e-14;
const DRIFT: f64 = 1e-11;

/// `d` is accepted when the top levels are empty and two more levels change
/// no moment by more than `DRIFT`.
fn converged(circuit: &gaussim::Circuit, d: usize) -> bool {
    let (Ok(a), Ok(b)) = (simulate(circuit, d), simulate(circuit, d + 2)) else {
        return false;
    };
    if a.top_population() > MARGIN {
        return false;
    }
    let (Ok(ma), Ok(mb)) = (a.moments(), b.moments()) else {
        return false;
    };
    (ma.xi - mb.xi).amax() < DRIFT && (ma.gamma - mb.gamma).amax() < DRIFT
}

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus"));
    std::fs::create_dir_all(&dir).expect("create corpus directory");
    for (name, source) in ENTRIES {
        let circuit = parse(source).unwrap_or_else(|e| panic!("{name}: {e}"));
        let d = (6..=60)
            .find(|&d| converged(&circuit, d))
            .unwrap_or_else(|| panic!("{name}: no feasible truncation"));
        let expected = expected_for(&circuit, d).expect("oracle run");
        let circ_path = dir.join(format!("{name}.circ"));
        std::fs::write(&circ_path, source).expect("write circuit");
        let json = serde_json::to_string_pretty(&expected).expect("serialize");
        std::fs::write(dir.join(format!("{name}.json")), json + "\n").expect("write moments");
        let report = check(&load_entry(&circ_path).expect("reload"), 1e-6).expect("check");
        println!(
            "{name}: d={d} dmean={:.1e} dcov={:.1e} pass={}",
            report.oracle.means_deviation, report.oracle.covariance_deviation, report.passed
        );
    }
}
