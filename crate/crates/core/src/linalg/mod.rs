//! Eigen-solvers shared by the charge-basis and giant-spin modules.

pub mod dense;
pub mod lanczos;
pub mod sparse;
pub mod tridiag;

use nalgebra::ComplexField;

/// Real or complex field element with `f64` real part.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Send + Sync + 'static {}

impl<T> Scalar for T where T: ComplexField<RealField = f64> + Copy + Send + Sync + 'static {}

/// Eigenvalues in ascending order with optional eigenvectors (same order).
#[derive(Debug, Clone)]
pub struct EigenPairs<T> {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<Vec<T>>>,
    /// Operator applications spent (0 for dense solves).
    pub iterations: usize,
}

pub(crate) fn dotc<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.conjugate() * *y)
}

pub(crate) fn norm<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt()
}

pub(crate) fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

pub(crate) fn scale<T: Scalar>(alpha: f64, x: &mut [T]) {
    let a = T::from_real(alpha);
    for xi in x.iter_mut() {
        *xi *= a;
    }
}

/// `⟨x|A|x⟩` real part for a Hermitian operator.
pub fn expectation<T: Scalar, A: sparse::LinearOperator<T> + ?Sized>(op: &A, x: &[T]) -> f64 {
    let mut y = vec![T::zero(); x.len()];
    op.apply(x, &mut y);
    dotc(x, &y).real()
}
