//! Exact exponentials of truncated quadratic generators.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// `exp(g)` for an anti-Hermitian `g`.
///
/// The matrix is first split into the connected components of its sparsity
/// graph (photon-number conserving gates are block diagonal), then each block
/// is exponentiated through the Hermitian eigendecomposition of `i g`.
pub fn expm_antihermitian(g: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let dim = g.nrows();
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..dim {
        for j in 0..i {
            if g[(i, j)].norm() > 0.0 || g[(j, i)].norm() > 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut blocks: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..dim {
        let root = find(&mut parent, i);
        blocks.entry(root).or_default().push(i);
    }

    let i_unit = Complex64::new(0.0, 1.0);
    let mut u = DMatrix::zeros(dim, dim);
    for idx in blocks.values() {
        let k = idx.len();
        let h = DMatrix::from_fn(k, k, |a, b| i_unit * g[(idx[a], idx[b])]);
        // Remove rounding asymmetry before the Hermitian solver sees it.
        let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l)));
        let block = &eig.eigenvectors * phases * eig.eigenvectors.adjoint();
        for a in 0..k {
            for b in 0..k {
                u[(idx[a], idx[b])] = block[(a, b)];
            }
        }
    }
    u
}
