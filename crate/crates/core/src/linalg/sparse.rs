use nalgebra::DMatrix;
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::Scalar;

/// Square operator acting on dense vectors.
pub trait LinearOperator<T>: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
}

/// Hermitian matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHermitian<T: Scalar> {
    csr: CsrMatrix<T>,
}

impl<T: Scalar> SparseHermitian<T> {
    /// Assemble from triplets; duplicates are summed, exact zeros dropped.
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Self {
        let mut coo = CooMatrix::new(dim, dim);
        for (i, j, v) in triplets {
            if v != T::zero() {
                coo.push(i, j, v);
            }
        }
        Self {
            csr: CsrMatrix::from(&coo),
        }
    }

    pub fn csr(&self) -> &CsrMatrix<T> {
        &self.csr
    }

    pub fn nnz(&self) -> usize {
        self.csr.nnz()
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.csr.nrows(), self.csr.ncols());
        for (i, j, v) in self.csr.triplet_iter() {
            m[(i, j)] += *v;
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.csr
            .get_entry(i, j)
            .map(|e| e.into_value())
            .unwrap_or_else(T::zero)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.csr
            .values()
            .iter()
            .fold(0.0, |a, v| a.max(v.modulus()))
    }

    /// `max |H_ij - conj(H_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.csr
            .triplet_iter()
            .map(|(i, j, v)| (*v - self.get(j, i).conjugate()).modulus())
            .fold(0.0, f64::max)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.csr.triplet_iter().map(|(i, j, v)| (i, j, *v))
    }
}

impl<T: Scalar> LinearOperator<T> for SparseHermitian<T> {
    fn dim(&self) -> usize {
        self.csr.nrows()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let offsets = self.csr.row_offsets();
        let cols = self.csr.col_indices();
        let vals = self.csr.values();
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for p in offsets[i]..offsets[i + 1] {
                acc += vals[p] * x[cols[p]];
            }
            *yi = acc;
        }
    }
}

impl<T: Scalar> LinearOperator<T> for DMatrix<T> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self
                .row(i)
                .iter()
                .zip(x)
                .fold(T::zero(), |a, (m, v)| a + *m * *v);
        }
    }
}
