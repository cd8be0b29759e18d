use std::path::Path;

use gaussim::circuit::{execute, parse, render, Circuit, Gate, Instruction};
use gaussim::measurement::{heterodyne_project, homodyne_project, homodyne_statistics};
use gaussim::{GaussianState, RandomSource};
use gaussim_fock::circuit::simulate;
use gaussim_fock::{compare, corpus, FockState, Generator, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn corpus_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus"))
}

#[test]
fn corpus_entries_agree_with_engine() {
    let entries = corpus::load(corpus_dir()).unwrap();
    assert!(entries.len() >= 20);
    for e in &entries {
        let report = corpus::check(e, 1e-6).unwrap();
        assert!(report.passed, "{}: {:?}", e.name, report);
    }
}

#[test]
fn corpus_covers_every_gate_and_mode_count() {
    let entries = corpus::load(corpus_dir()).unwrap();
    let mut keywords = std::collections::BTreeSet::new();
    let mut modes = std::collections::BTreeSet::new();
    for e in &entries {
        modes.insert(e.circuit.modes);
        for inst in &e.circuit.instructions {
            if let Instruction::Gate(g) = inst {
                keywords.insert(g.keyword());
            }
        }
        // Corpus circuits survive a render/parse round trip.
        assert_eq!(parse(&render(&e.circuit)).unwrap(), e.circuit);
    }
    for kw in ["disp", "phase", "squeeze", "bs", "tms", "loss", "amp", "noise"] {
        assert!(keywords.contains(kw), "no corpus entry uses {kw}");
    }
    assert_eq!(modes.into_iter().collect::<Vec<_>>(), vec![1, 2, 3]);
}

/// A random measurement-free circuit with parameters small enough for `d`.
fn random_circuit(rng: &mut ChaCha20Rng, n: usize) -> Circuit {
    let mut instructions = Vec::new();
    for _ in 0..rng.random_range(1..6) {
        let j = rng.random_range(0..n);
        let k = (j + rng.random_range(1..n.max(2))) % n;
        let gate = match rng.random_range(0..if n > 1 { 8 } else { 6 }) {
            0 => Gate::Displacement { mode: j, q: rng.random_range(-0.6..0.6), p: rng.random_range(-0.6..0.6) },
            1 => Gate::PhaseShift { mode: j, theta: rng.random_range(-3.0..3.0) },
            2 => Gate::Squeeze { mode: j, r: rng.random_range(-0.2..0.2) },
            3 => Gate::Loss { mode: j, eta: rng.random_range(0.5..1.0) },
            4 => Gate::Amplifier { mode: j, g: rng.random_range(1.0..1.2) },
            5 => Gate::ThermalNoise { mode: j, n_noise: rng.random_range(0.0..0.1) },
            6 => Gate::Beamsplitter { modes: [j, k], theta: rng.random_range(-3.0..3.0) },
            _ => Gate::TwoModeSqueeze { modes: [j, k], r: rng.random_range(-0.15..0.15) },
        };
        instructions.push(Instruction::Gate(gate));
    }
    Circuit { modes: n, instructions }
}

#[test]
fn random_circuits_agree() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let mut conclusive = 0;
    for i in 0..40 {
        let n = 1 + i % 2;
        let d = if n == 1 { 40 } else { 22 };
        let c = random_circuit(&mut rng, n);
        let engine = execute(&c, &mut RandomSource::new(0)).unwrap().final_state;
        let fock = simulate(&c, d).unwrap();
        let report = compare(&fock, &engine, 1e-6).unwrap();
        assert_ne!(report.verdict, Verdict::Fail, "{}\n{report:?}", render(&c));
        if report.verdict == Verdict::Pass {
            conclusive += 1;
        }
    }
    assert!(conclusive >= 35, "only {conclusive} conclusive comparisons");
}

fn gaussian_density(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

#[test]
fn homodyne_conditioning_matches_projection() {
    let r = 0.4;
    let d = 30;
    let state = GaussianState::epr(r).unwrap();
    let mut fock = FockState::vacuum(2, d).unwrap();
    fock.apply(Generator::TwoModeSqueeze { modes: [0, 1], r }).unwrap();
    for (theta, x) in [(0.0, 0.7), (0.0, -1.3), (std::f64::consts::FRAC_PI_2, 0.4), (0.6, 2.0)] {
        let (mean, var) = homodyne_statistics(&state, 0, theta).unwrap();
        let conditioned = homodyne_project(&state, 0, theta, x).unwrap();
        let (density, projected) = fock.project_quadrature(0, theta, x).unwrap();
        assert!((density - gaussian_density(x, mean, var)).abs() < 1e-9, "density at {x}");
        let report = compare(&projected, &conditioned, 1e-8).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "theta={theta} x={x}: {report:?}");
    }
}

#[test]
fn heterodyne_conditioning_matches_projection() {
    let d = 24;
    let c = parse("modes 2\ntms 0 1 r=0.3\ndisp 0 q=0.4 p=-0.2\nloss 1 eta=0.8\n").unwrap();
    let state = execute(&c, &mut RandomSource::new(0)).unwrap().final_state;
    let fock = simulate(&c, d).unwrap();
    for outcome in [[0.5, 0.1], [-1.0, 0.8]] {
        let conditioned = heterodyne_project(&state, 1, outcome).unwrap();
        let (density, projected) = fock.project_coherent(1, outcome[0], outcome[1]).unwrap();
        let report = compare(&projected, &conditioned, 1e-8).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{outcome:?}: {report:?}");
        // Outcome density: Gaussian with the mode's covariance plus the identity.
        let g = state.covariance();
        let (a, b, cc) = (g[(1, 1)] + 1.0, g[(1, 3)], g[(3, 3)] + 1.0);
        let det = a * cc - b * b;
        let (dq, dp) = (outcome[0] - state.means()[1], outcome[1] - state.means()[3]);
        let quad = (cc * dq * dq - 2.0 * b * dq * dp + a * dp * dp) / det;
        let want = (-quad / 2.0).exp() / (2.0 * std::f64::consts::PI * det.sqrt());
        assert!((density - want).abs() < 1e-9, "{density} vs {want}");
    }
}
