//! Index bookkeeping for operators acting on a subset of modes.
//!
//! Basis index of `|k_0 .. k_{n-1}>` is `sum k_i d^(n-1-i)`, mode 0 most
//! significant. A [`Layout`] splits every global index into a local index on
//! the target modes (in the given order) and a "rest" index on the others.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub(crate) struct Layout {
    /// `groups[r * local + l]` is the global index with rest `r`, local `l`.
    groups: Vec<usize>,
    pub local: usize,
    pub rest: usize,
}

impl Layout {
    pub fn new(n: usize, d: usize, targets: &[usize]) -> Layout {
        let k = targets.len();
        let local = d.pow(k as u32);
        let total = d.pow(n as u32);
        let rest = total / local;
        let others: Vec<usize> = (0..n).filter(|m| !targets.contains(m)).collect();
        let mut groups = vec![0; total];
        let mut digits = vec![0usize; n];
        for idx in 0..total {
            let mut t = idx;
            for m in (0..n).rev() {
                digits[m] = t % d;
                t /= d;
            }
            let l = targets.iter().fold(0, |acc, &m| acc * d + digits[m]);
            let r = others.iter().fold(0, |acc, &m| acc * d + digits[m]);
            groups[r * local + l] = idx;
        }
        Layout { groups, local, rest }
    }

    #[inline]
    pub fn index(&self, r: usize, l: usize) -> usize {
        self.groups[r * self.local + l]
    }

    /// `op` applied to a single column vector in place.
    pub fn apply_vec(&self, op: &DMatrix<Complex64>, v: &mut [Complex64]) {
        self.apply_sparse(&sparse_rows(op), v);
    }

    fn apply_sparse(&self, rows: &[Vec<(usize, Complex64)>], v: &mut [Complex64]) {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.local];
        for r in 0..self.rest {
            for (l, b) in buf.iter_mut().enumerate() {
                *b = v[self.index(r, l)];
            }
            for (i, row) in rows.iter().enumerate() {
                v[self.index(r, i)] = row.iter().map(|&(j, x)| x * buf[j]).sum();
            }
        }
    }

    /// `op * m` where `op` acts on the target modes of the row index.
    pub fn apply_left(&self, op: &DMatrix<Complex64>, m: &mut DMatrix<Complex64>) {
        let rows = sparse_rows(op);
        for mut col in m.column_iter_mut() {
            self.apply_sparse(&rows, col.as_mut_slice());
        }
    }

    /// `sum_a (op m)[a, a]` without forming the product.
    pub fn trace_left(&self, op: &DMatrix<Complex64>, m: &DMatrix<Complex64>) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..self.rest {
            for l in 0..self.local {
                let a = self.index(r, l);
                for lp in 0..self.local {
                    let x = op[(l, lp)];
                    if x.re != 0.0 || x.im != 0.0 {
                        acc += x * m[(self.index(r, lp), a)];
                    }
                }
            }
        }
        acc
    }
}

/// Nonzero entries of each row.
fn sparse_rows(op: &DMatrix<Complex64>) -> Vec<Vec<(usize, Complex64)>> {
    (0..op.nrows())
        .map(|i| {
            (0..op.ncols())
                .filter_map(|j| {
                    let x = op[(i, j)];
                    (x.re != 0.0 || x.im != 0.0).then_some((j, x))
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops;

    #[test]
    fn local_matches_kron() {
        // n = 3, d = 3, operator on modes [2, 0] versus the explicit kron.
        let d = 3;
        let a = ops::annihilation(d).unwrap();
        let (q, _) = ops::quadrature_ops(d).unwrap();
        let id = DMatrix::<Complex64>::identity(d, d);
        let op = ops::kron(&a, &q); // local order: mode 2 then mode 0
        let full = ops::kron(&ops::kron(&q, &id), &a);
        let layout = Layout::new(3, d, &[2, 0]);
        let mut m = DMatrix::from_fn(27, 27, |i, j| Complex64::new(i as f64 - j as f64, (i * j) as f64 * 0.01));
        let want = &full * &m;
        layout.apply_left(&op, &mut m);
        assert!((m - want).map(|x| x.norm()).max() < 1e-12);
    }
}
