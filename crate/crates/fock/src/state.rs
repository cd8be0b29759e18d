//! Truncated multimode states and the operations the oracle supports.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{FockError, Result};
use crate::layout::Layout;
use crate::linalg::expm_antihermitian;
use crate::ops::{self, CMatrix};
use crate::{MAX_DIM, MAX_MIXED_DIM};

type C = Complex64;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

#[derive(Debug, Clone)]
enum Repr {
    Pure(DVector<C>),
    Mixed(DMatrix<C>),
}

/// An `n`-mode state with each mode truncated to `d` levels.
#[derive(Debug, Clone)]
pub struct FockState {
    n: usize,
    d: usize,
    repr: Repr,
}

/// Quadratic (or linear) Hamiltonian gates, in the engine's parametrization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    Displacement { mode: usize, q: f64, p: f64 },
    PhaseShift { mode: usize, theta: f64 },
    Squeeze { mode: usize, r: f64 },
    Beamsplitter { modes: [usize; 2], theta: f64 },
    TwoModeSqueeze { modes: [usize; 2], r: f64 },
}

impl Generator {
    pub fn modes(&self) -> Vec<usize> {
        match *self {
            Generator::Displacement { mode, .. }
            | Generator::PhaseShift { mode, .. }
            | Generator::Squeeze { mode, .. } => vec![mode],
            Generator::Beamsplitter { modes, .. } | Generator::TwoModeSqueeze { modes, .. } => {
                modes.to_vec()
            }
        }
    }

    /// Anti-Hermitian `g` on the gate's own modes, with `U = exp(g)`.
    pub fn local_generator(&self, d: usize) -> Result<CMatrix> {
        let a = ops::annihilation(d)?;
        let ad = a.adjoint();
        Ok(match *self {
            Generator::Displacement { q, p, .. } => {
                let beta = C::new(q / 2.0, p / 2.0);
                &ad * beta - &a * beta.conj()
            }
            Generator::PhaseShift { theta, .. } => ops::number(d)? * C::new(0.0, -theta),
            Generator::Squeeze { r, .. } => (&a * &a - &ad * &ad) * c(r / 2.0),
            Generator::Beamsplitter { theta, .. } => two_mode(d, |j, k| {
                // theta (a_j^dag a_k - a_j a_k^dag)
                let mut out = Vec::new();
                if k > 0 && j + 1 < d {
                    out.push((j + 1, k - 1, theta * ((k * (j + 1)) as f64).sqrt()));
                }
                if j > 0 && k + 1 < d {
                    out.push((j - 1, k + 1, -theta * ((j * (k + 1)) as f64).sqrt()));
                }
                out
            }),
            Generator::TwoModeSqueeze { r, .. } => two_mode(d, |j, k| {
                // r (a_j^dag a_k^dag - a_j a_k)
                let mut out = Vec::new();
                if j + 1 < d && k + 1 < d {
                    out.push((j + 1, k + 1, r * (((j + 1) * (k + 1)) as f64).sqrt()));
                }
                if j > 0 && k > 0 {
                    out.push((j - 1, k - 1, -r * ((j * k) as f64).sqrt()));
                }
                out
            }),
        })
    }

    pub fn unitary(&self, d: usize) -> Result<CMatrix> {
        Ok(expm_antihermitian(&self.local_generator(d)?))
    }
}

/// Two-mode operator from its action on `|j, k>`, listed as `(j', k', amplitude)`.
fn two_mode(d: usize, action: impl Fn(usize, usize) -> Vec<(usize, usize, f64)>) -> CMatrix {
    let mut g = CMatrix::zeros(d * d, d * d);
    for j in 0..d {
        for k in 0..d {
            for (jp, kp, amp) in action(j, k) {
                g[(jp * d + kp, j * d + k)] += c(amp);
            }
        }
    }
    g
}

/// First and second quadrature moments of a truncated state.
#[derive(Debug, Clone)]
pub struct Moments {
    pub xi: DVector<f64>,
    pub gamma: DMatrix<f64>,
    /// Largest deviation of `Im <z_i z_j>` from the commutator; nonzero only
    /// through truncation.
    pub imaginary_residual: f64,
    pub trace: f64,
}

fn dimension(n: usize, d: usize) -> Result<usize> {
    if d < 2 {
        return Err(FockError::Truncation(d));
    }
    let dim = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if dim > MAX_DIM as u128 {
        return Err(FockError::TooLarge { dim: dim.min(usize::MAX as u128) as usize, limit: MAX_DIM });
    }
    Ok(dim as usize)
}

/// Position-eigenstate overlaps `<q = x | k>` for `k < d`, with `q = a + a^dag`.
pub fn position_wavefunctions(x: f64, d: usize) -> Vec<f64> {
    // Normalized Hermite functions in u = x / sqrt 2, rescaled for q.
    let u = x / 2f64.sqrt();
    let mut psi = vec![0.0; d];
    psi[0] = std::f64::consts::PI.powf(-0.25) * (-u * u / 2.0).exp();
    if d > 1 {
        psi[1] = 2f64.sqrt() * u * psi[0];
    }
    for k in 1..d.saturating_sub(1) {
        let kf = k as f64;
        psi[k + 1] = (2.0 / (kf + 1.0)).sqrt() * u * psi[k] - (kf / (kf + 1.0)).sqrt() * psi[k - 1];
    }
    let scale = 2f64.powf(-0.25);
    psi.iter().map(|v| v * scale).collect()
}

impl FockState {
    pub fn vacuum(n: usize, d: usize) -> Result<FockState> {
        let dim = dimension(n, d)?;
        let mut v = DVector::zeros(dim);
        v[0] = c(1.0);
        Ok(FockState { n, d, repr: Repr::Pure(v) })
    }

    /// Product of thermal states with the same mean photon number, cut at
    /// level `d - 1` without renormalizing.
    pub fn thermal(n: usize, d: usize, n_bar: f64) -> Result<FockState> {
        if !(n_bar >= 0.0) || !n_bar.is_finite() {
            return Err(FockError::Parameter(format!("thermal occupation {n_bar}")));
        }
        let dim = dimension(n, d)?;
        if dim > MAX_MIXED_DIM {
            return Err(FockError::TooLarge { dim, limit: MAX_MIXED_DIM });
        }
        let single: Vec<f64> = (0..d)
            .map(|k| (n_bar / (1.0 + n_bar)).powi(k as i32) / (1.0 + n_bar))
            .collect();
        let diag = DVector::from_fn(dim, |idx, _| {
            let mut t = idx;
            let mut p = 1.0;
            for _ in 0..n {
                p *= single[t % d];
                t /= d;
            }
            c(p)
        });
        Ok(FockState { n, d, repr: Repr::Mixed(DMatrix::from_diagonal(&diag)) })
    }

    pub fn from_vector(n: usize, d: usize, v: DVector<C>) -> Result<FockState> {
        let dim = dimension(n, d)?;
        if v.len() != dim {
            return Err(FockError::Parameter(format!("vector of length {} for dimension {dim}", v.len())));
        }
        Ok(FockState { n, d, repr: Repr::Pure(v) })
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn truncation(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    pub fn vector(&self) -> Option<&DVector<C>> {
        match &self.repr {
            Repr::Pure(v) => Some(v),
            Repr::Mixed(_) => None,
        }
    }

    pub fn density_matrix(&self) -> Result<DMatrix<C>> {
        match &self.repr {
            Repr::Pure(v) => {
                if v.len() > MAX_MIXED_DIM {
                    return Err(FockError::TooLarge { dim: v.len(), limit: MAX_MIXED_DIM });
                }
                Ok(v * v.adjoint())
            }
            Repr::Mixed(rho) => Ok(rho.clone()),
        }
    }

    fn make_mixed(&mut self) -> Result<()> {
        if let Repr::Pure(_) = self.repr {
            self.repr = Repr::Mixed(self.density_matrix()?);
        }
        Ok(())
    }

    fn check_modes(&self, targets: &[usize]) -> Result<()> {
        for (i, &m) in targets.iter().enumerate() {
            if m >= self.n {
                return Err(FockError::ModeOutOfRange { mode: m, modes: self.n });
            }
            if targets[..i].contains(&m) {
                return Err(FockError::Parameter(format!("mode {m} repeated")));
            }
        }
        Ok(())
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            Repr::Pure(v) => v.norm_squared(),
            Repr::Mixed(rho) => rho.trace().re,
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Pure(v) => v.iter().map(|x| x.norm_sqr()).collect(),
            Repr::Mixed(rho) => rho.diagonal().iter().map(|x| x.re).collect(),
        }
    }

    /// Photon-number distribution of one mode.
    pub fn marginal_populations(&self, mode: usize) -> Result<Vec<f64>> {
        self.check_modes(&[mode])?;
        let mut pops = vec![0.0; self.d];
        let stride = self.d.pow((self.n - 1 - mode) as u32);
        for (idx, p) in self.diagonal().into_iter().enumerate() {
            pops[(idx / stride) % self.d] += p;
        }
        Ok(pops)
    }

    /// Largest population of the two highest retained levels over all modes.
    ///
    /// Two levels, because squeezing alone only ever fills every other level.
    pub fn top_population(&self) -> f64 {
        let d = self.d;
        (0..self.n)
            .map(|m| {
                self.marginal_populations(m)
                    .map(|p| p[d - 1] + p[d - 2])
                    .unwrap_or(0.0)
            })
            .fold(0.0, f64::max)
    }

    /// Applies `op`, acting on `targets` in the given order, as `op rho op^dag`.
    pub fn apply_operator(&mut self, op: &CMatrix, targets: &[usize]) -> Result<()> {
        self.check_modes(targets)?;
        let layout = Layout::new(self.n, self.d, targets);
        if op.nrows() != layout.local || op.ncols() != layout.local {
            return Err(FockError::Parameter("operator shape does not match targets".into()));
        }
        match &mut self.repr {
            Repr::Pure(v) => layout.apply_vec(op, v.as_mut_slice()),
            Repr::Mixed(rho) => {
                layout.apply_left(op, rho);
                let mut m = rho.adjoint();
                layout.apply_left(op, &mut m);
                *rho = m;
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, gate: Generator) -> Result<()> {
        let u = gate.unitary(self.d)?;
        self.apply_operator(&u, &gate.modes())
    }

    /// `sum_k K_k rho K_k^dag` on one mode.
    pub fn apply_channel(&mut self, kraus: &[CMatrix], mode: usize) -> Result<()> {
        self.check_modes(&[mode])?;
        self.make_mixed()?;
        let layout = Layout::new(self.n, self.d, &[mode]);
        let Repr::Mixed(rho) = &self.repr else { unreachable!() };
        let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
        for k in kraus {
            let mut m = rho.clone();
            layout.apply_left(k, &mut m);
            let mut m = m.adjoint();
            layout.apply_left(k, &mut m);
            out += m;
        }
        self.repr = Repr::Mixed(out);
        Ok(())
    }

    /// Pure loss with transmissivity `eta`, via a beamsplitter with a vacuum ancilla.
    pub fn loss(&mut self, mode: usize, eta: f64) -> Result<()> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(FockError::Parameter(format!("transmissivity {eta}")));
        }
        let theta = eta.sqrt().acos();
        let u = Generator::Beamsplitter { modes: [0, 1], theta }.unitary(self.d)?;
        let kraus = dilation_kraus(&u, self.d);
        self.apply_channel(&kraus, mode)
    }

    /// Phase-insensitive amplification with gain `g`, via two-mode squeezing
    /// with a vacuum ancilla.
    pub fn amplifier(&mut self, mode: usize, g: f64) -> Result<()> {
        if !(g >= 1.0) || !g.is_finite() {
            return Err(FockError::Parameter(format!("gain {g}")));
        }
        let r = g.sqrt().acosh();
        let u = Generator::TwoModeSqueeze { modes: [0, 1], r }.unitary(self.d)?;
        let kraus = dilation_kraus(&u, self.d);
        self.apply_channel(&kraus, mode)
    }

    /// Additive noise of `n` photons: loss `1/(1+n)` followed by gain `1+n`.
    pub fn thermal_noise(&mut self, mode: usize, n: f64) -> Result<()> {
        if !(n >= 0.0) || !n.is_finite() {
            return Err(FockError::Parameter(format!("noise {n}")));
        }
        self.loss(mode, 1.0 / (1.0 + n))?;
        self.amplifier(mode, 1.0 + n)
    }

    /// Partial trace over one mode.
    pub fn discard(&mut self, mode: usize) -> Result<()> {
        self.check_modes(&[mode])?;
        let layout = Layout::new(self.n, self.d, &[mode]);
        let rest = layout.rest;
        if rest > MAX_MIXED_DIM {
            return Err(FockError::TooLarge { dim: rest, limit: MAX_MIXED_DIM });
        }
        let mut out = DMatrix::zeros(rest, rest);
        match &self.repr {
            Repr::Pure(v) => {
                for r in 0..rest {
                    for rp in 0..rest {
                        out[(r, rp)] = (0..layout.local)
                            .map(|l| v[layout.index(r, l)] * v[layout.index(rp, l)].conj())
                            .sum();
                    }
                }
            }
            Repr::Mixed(rho) => {
                for r in 0..rest {
                    for rp in 0..rest {
                        out[(r, rp)] = (0..layout.local)
                            .map(|l| rho[(layout.index(r, l), layout.index(rp, l))])
                            .sum();
                    }
                }
            }
        }
        self.n -= 1;
        self.repr = Repr::Mixed(out);
        Ok(())
    }

    /// Projects `mode` onto the eigenstate `q cos(theta) + p sin(theta) = x`
    /// and removes it. Returns the outcome density and the normalized
    /// conditional state.
    pub fn project_quadrature(&self, mode: usize, theta: f64, x: f64) -> Result<(f64, FockState)> {
        self.check_modes(&[mode])?;
        let mut rotated = self.clone();
        // exp(-i theta n) maps q onto q cos(theta) + p sin(theta) in the Heisenberg picture.
        rotated.apply(Generator::PhaseShift { mode, theta })?;
        let bra: Vec<C> = position_wavefunctions(x, self.d).into_iter().map(c).collect();
        rotated.project(mode, &bra)
    }

    /// Projects `mode` onto the coherent state with means `(q, p)`, the
    /// heterodyne outcome. The density is per unit `dq dp`.
    pub fn project_coherent(&self, mode: usize, q: f64, p: f64) -> Result<(f64, FockState)> {
        self.check_modes(&[mode])?;
        // <beta|k> = exp(-|beta|^2 / 2) conj(beta)^k / sqrt(k!)
        let beta = C::new(q / 2.0, p / 2.0);
        let mut bra = vec![c((-beta.norm_sqr() / 2.0).exp()); self.d];
        for k in 1..self.d {
            bra[k] = bra[k - 1] * beta.conj() / c((k as f64).sqrt());
        }
        let (weight, state) = self.project(mode, &bra)?;
        Ok((weight / (4.0 * std::f64::consts::PI), state))
    }

    /// `<bra| rho |bra>` on one mode: the unnormalized weight and the
    /// normalized state of the other modes.
    fn project(&self, mode: usize, bra: &[C]) -> Result<(f64, FockState)> {
        let layout = Layout::new(self.n, self.d, &[mode]);
        let rest = layout.rest;
        let trace = self.trace();
        let repr = match &self.repr {
            Repr::Pure(v) => Repr::Pure(DVector::from_fn(rest, |r, _| {
                (0..layout.local).map(|l| bra[l] * v[layout.index(r, l)]).sum()
            })),
            Repr::Mixed(rho) => Repr::Mixed(DMatrix::from_fn(rest, rest, |r, rp| {
                let mut acc = c(0.0);
                for l in 0..layout.local {
                    for lp in 0..layout.local {
                        acc += bra[l] * rho[(layout.index(r, l), layout.index(rp, lp))] * bra[lp].conj();
                    }
                }
                acc
            })),
        };
        let mut out = FockState { n: self.n - 1, d: self.d, repr };
        let norm = out.trace();
        if !(norm > 0.0) {
            return Err(FockError::Parameter("outcome has zero probability".into()));
        }
        match &mut out.repr {
            Repr::Pure(v) => *v /= c(norm.sqrt()),
            Repr::Mixed(rho) => *rho /= c(norm),
        }
        Ok((norm / trace, out))
    }

    /// Quadrature means and covariance, normalized by the trace.
    pub fn moments(&self) -> Result<Moments> {
        let n = self.n;
        let (q, p) = ops::quadrature_ops(self.d)?;
        let layouts: Vec<Layout> = (0..n).map(|m| Layout::new(n, self.d, &[m])).collect();
        let quad = |i: usize| -> (&Layout, &CMatrix) {
            if i < n {
                (&layouts[i], &q)
            } else {
                (&layouts[i - n], &p)
            }
        };
        let trace = self.trace();
        let dim2 = 2 * n;
        let mut second = DMatrix::<C>::zeros(dim2, dim2);
        let mut xi = DVector::zeros(dim2);
        match &self.repr {
            Repr::Pure(v) => {
                let phis: Vec<DVector<C>> = (0..dim2)
                    .map(|i| {
                        let (layout, op) = quad(i);
                        let mut w = v.clone();
                        layout.apply_vec(op, w.as_mut_slice());
                        w
                    })
                    .collect();
                for i in 0..dim2 {
                    xi[i] = v.dotc(&phis[i]).re / trace;
                    for j in 0..dim2 {
                        second[(i, j)] = phis[i].dotc(&phis[j]) / c(trace);
                    }
                }
            }
            Repr::Mixed(rho) => {
                for j in 0..dim2 {
                    let (layout_j, op_j) = quad(j);
                    let mut m = rho.clone();
                    layout_j.apply_left(op_j, &mut m);
                    xi[j] = m.trace().re / trace;
                    for i in 0..dim2 {
                        let (layout_i, op_i) = quad(i);
                        second[(i, j)] = layout_i.trace_left(op_i, &m) / c(trace);
                    }
                }
            }
        }
        let mut gamma = DMatrix::zeros(dim2, dim2);
        let mut residual: f64 = 0.0;
        for i in 0..dim2 {
            for j in 0..dim2 {
                let s = 0.5 * (second[(i, j)].re + second[(j, i)].re);
                gamma[(i, j)] = s - xi[i] * xi[j];
                let commutator = if j == i + n && i < n {
                    1.0
                } else if i == j + n && j < n {
                    -1.0
                } else {
                    0.0
                };
                residual = residual.max((second[(i, j)].im - commutator).abs());
            }
        }
        Ok(Moments { xi, gamma, imaginary_residual: residual, trace })
    }
}

/// Kraus operators `K_m = <m| U |0>` of a two-mode unitary on (system, ancilla).
fn dilation_kraus(u: &CMatrix, d: usize) -> Vec<CMatrix> {
    (0..d)
        .map(|m| CMatrix::from_fn(d, d, |out, inp| u[(out * d + m, inp * d)]))
        .collect()
}
