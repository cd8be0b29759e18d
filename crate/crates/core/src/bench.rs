//! Scaling benchmark: random Clifford and noise maps on `n` modes.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::Result;
use crate::maps::GaussianMap;
use crate::phase_space::PHYSICALITY_TOL;
use crate::state::{GaussianState, ResourceCount};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchRow {
    pub modes: usize,
    pub ops: usize,
    pub seconds: f64,
    pub resource_count: usize,
    pub means: usize,
    pub covariance_entries: usize,
}

/// `ops` random gates and channels with their target modes.
pub fn random_ops(n: usize, ops: usize, seed: u64) -> Vec<(GaussianMap, Vec<usize>)> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let kinds = if n >= 2 { 8 } else { 6 };
    (0..ops)
        .map(|_| {
            let j = rng.random_range(0..n);
            let pair = |rng: &mut ChaCha20Rng| {
                let k = (j + rng.random_range(1..n)) % n;
                vec![j, k]
            };
            match rng.random_range(0..kinds) {
                0 => (GaussianMap::phase_shift(rng.random_range(-3.2..3.2)).unwrap(), vec![j]),
                1 => (GaussianMap::squeeze(rng.random_range(-0.05..0.05)).unwrap(), vec![j]),
                2 => (
                    GaussianMap::displacement(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).unwrap(),
                    vec![j],
                ),
                3 => (GaussianMap::loss(rng.random_range(0.95..=1.0)).unwrap(), vec![j]),
                4 => (GaussianMap::amplifier(rng.random_range(1.0..1.05)).unwrap(), vec![j]),
                5 => (GaussianMap::thermal_noise(rng.random_range(0.0..0.05)).unwrap(), vec![j]),
                6 => {
                    let t = pair(&mut rng);
                    (GaussianMap::beamsplitter(rng.random_range(-3.2..3.2)).unwrap(), t)
                }
                _ => {
                    let t = pair(&mut rng);
                    (GaussianMap::two_mode_squeeze(rng.random_range(-0.05..0.05)).unwrap(), t)
                }
            }
        })
        .collect()
}

/// Times `ops` random maps on an `n`-mode vacuum plus a final physicality check.
pub fn run(n: usize, ops: usize, seed: u64) -> Result<BenchRow> {
    let maps = random_ops(n, ops, seed);
    let start = Instant::now();
    let mut state = GaussianState::vacuum(n)?;
    for (m, targets) in &maps {
        m.apply_on_mut(&mut state, targets)?;
    }
    state.check_physical(PHYSICALITY_TOL)?;
    let seconds = start.elapsed().as_secs_f64();
    let rc: ResourceCount = state.resource_count();
    Ok(BenchRow {
        modes: n,
        ops,
        seconds,
        resource_count: rc.total(),
        means: rc.means,
        covariance_entries: rc.covariance,
    })
}

/// Mode counts `max, max/2, max/4, ...` down to 10 (or 1), ascending.
pub fn sweep_sizes(max_modes: usize) -> Vec<usize> {
    let floor = max_modes.clamp(1, 10);
    let mut sizes = Vec::new();
    let mut n = max_modes;
    while n >= floor && n > 0 {
        sizes.push(n);
        n /= 2;
    }
    sizes.reverse();
    sizes
}

pub fn sweep(max_modes: usize, ops: usize, seed: u64) -> Result<Vec<BenchRow>> {
    sweep_sizes(max_modes).into_iter().map(|n| run(n, ops, seed)).collect()
}
