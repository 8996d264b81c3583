use nalgebra::{DMatrix, SymmetricEigen};

use super::{EigenPairs, Scalar};

/// `k` lowest eigenpairs of a dense Hermitian matrix (Householder
/// tridiagonalisation + implicit QL). Ties keep the solver's order, which is
/// deterministic for a given input.
pub fn lowest_dense<T: Scalar>(m: DMatrix<T>, k: usize, vectors: bool) -> EigenPairs<T> {
    let k = k.min(m.nrows());
    if !vectors {
        let vals = m.symmetric_eigenvalues();
        let mut v: Vec<f64> = vals.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v.truncate(k);
        return EigenPairs {
            values: v,
            vectors: None,
            iterations: 0,
        };
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order.truncate(k);
    EigenPairs {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: Some(
            order
                .iter()
                .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
                .collect(),
        ),
        iterations: 0,
    }
}
