//! Truncated Cooper-pair-number Hamiltonian of the interferometer array and
//! its low-lying spectrum.
//!
//! Basis states are charge vectors `(n_1, …, n_N)` with `|n_i| ≤ n_max`,
//! indexed in mixed radix with loop 0 varying fastest. The offset charge stays
//! in the kinetic term; `e^{±imφ_i}` shifts `n_i` by `±m`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::CircuitSpec;
use crate::error::{Error, Result};
use crate::interferometer::{loop_potential_with, HarmonicPotential};
use crate::linalg::dense::lowest_dense;
use crate::linalg::lanczos::{self, LanczosOptions};
use crate::linalg::sparse::{LinearOperator, SparseHermitian};
use crate::linalg::EigenPairs;

pub const DEFAULT_DIM_CEILING: usize = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truncation {
    /// Per-island cutoff: `n_i ∈ {-n_max, …, n_max}`.
    pub n_max: usize,
    /// Eigenvalue shift (GHz) accepted between successive refinements.
    pub convergence_tol: f64,
    pub dim_ceiling: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            n_max: 12,
            convergence_tol: 1e-6,
            dim_ceiling: DEFAULT_DIM_CEILING,
        }
    }
}

impl Truncation {
    pub fn new(n_max: usize) -> Self {
        Self {
            n_max,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 2 {
            return Err(Error::InvalidArgument(format!(
                "n_max must be >= 2 (got {})",
                self.n_max
            )));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::InvalidArgument("convergence_tol must be > 0".into()));
        }
        Ok(())
    }

    /// `(2 n_max + 1)^n_loops`, or `None` on overflow.
    pub fn dimension(n_max: usize, n_loops: usize) -> Option<usize> {
        (2 * n_max + 1).checked_pow(n_loops as u32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChargeMatrix {
    /// No sine terms: the Hamiltonian is real symmetric.
    Real(SparseHermitian<f64>),
    Complex(SparseHermitian<Complex64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargeOperator {
    n_loops: usize,
    n_max: usize,
    dim: usize,
    matrix: ChargeMatrix,
}

impl ChargeOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_loops(&self) -> usize {
        self.n_loops
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn matrix(&self) -> &ChargeMatrix {
        &self.matrix
    }

    pub fn is_real(&self) -> bool {
        matches!(self.matrix, ChargeMatrix::Real(_))
    }

    /// Charge vector of basis state `index`.
    pub fn charges(&self, index: usize) -> Vec<i64> {
        decode(index, self.n_loops, self.n_max)
    }

    pub fn index_of(&self, charges: &[i64]) -> Option<usize> {
        let radix = 2 * self.n_max as i64 + 1;
        if charges.len() != self.n_loops {
            return None;
        }
        let mut idx = 0i64;
        for &n in charges.iter().rev() {
            if n.unsigned_abs() as usize > self.n_max {
                return None;
            }
            idx = idx * radix + (n + self.n_max as i64);
        }
        Some(idx as usize)
    }

    /// `Π_i (-1)^{n_i}` of a basis state.
    pub fn parity(&self, index: usize) -> f64 {
        let total: i64 = self.charges(index).iter().sum();
        if total.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        match &self.matrix {
            ChargeMatrix::Real(m) => Complex64::new(m.get(i, j), 0.0),
            ChargeMatrix::Complex(m) => m.get(i, j),
        }
    }

    pub fn nnz(&self) -> usize {
        match &self.matrix {
            ChargeMatrix::Real(m) => m.nnz(),
            ChargeMatrix::Complex(m) => m.nnz(),
        }
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn entries(&self) -> Vec<(usize, usize, Complex64)> {
        match &self.matrix {
            ChargeMatrix::Real(m) => m
                .triplets()
                .map(|(i, j, v)| (i, j, Complex64::new(v, 0.0)))
                .collect(),
            ChargeMatrix::Complex(m) => m.triplets().collect(),
        }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        match &self.matrix {
            ChargeMatrix::Real(m) => m.hermiticity_defect(),
            ChargeMatrix::Complex(m) => m.hermiticity_defect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match &self.matrix {
            ChargeMatrix::Real(m) => m.max_abs(),
            ChargeMatrix::Complex(m) => m.max_abs(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match &self.matrix {
            ChargeMatrix::Real(m) => m.to_dense().map(|x| Complex64::new(x, 0.0)),
            ChargeMatrix::Complex(m) => m.to_dense(),
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        match &self.matrix {
            ChargeMatrix::Complex(m) => m.apply(x, &mut y),
            ChargeMatrix::Real(m) => {
                let re: Vec<f64> = x.iter().map(|z| z.re).collect();
                let im: Vec<f64> = x.iter().map(|z| z.im).collect();
                let mut yr = vec![0.0; self.dim];
                let mut yi = vec![0.0; self.dim];
                m.apply(&re, &mut yr);
                m.apply(&im, &mut yi);
                for (k, y) in y.iter_mut().enumerate() {
                    *y = Complex64::new(yr[k], yi[k]);
                }
            }
        }
        y
    }

    /// `⟨ψ|Π(-1)^{n_i}|ψ⟩ / ⟨ψ|ψ⟩`.
    pub fn parity_of(&self, state: &[Complex64]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, c) in state.iter().enumerate() {
            let w = c.norm_sqr();
            num += self.parity(i) * w;
            den += w;
        }
        num / den
    }
}

fn decode(mut index: usize, n_loops: usize, n_max: usize) -> Vec<i64> {
    let radix = 2 * n_max + 1;
    (0..n_loops)
        .map(|_| {
            let d = index % radix;
            index /= radix;
            d as i64 - n_max as i64
        })
        .collect()
}

/// `H = Σ_ij 4 E_C^(ij) (n_i - n_g^i)(n_j - n_g^j) + Σ_i V_i(φ_i)` with each
/// `V_i` in harmonic form.
pub fn build_hamiltonian(spec: &CircuitSpec, trunc: &Truncation) -> Result<ChargeOperator> {
    spec.validate()?;
    trunc.validate()?;
    let n_loops = spec.n_loops();
    let dim = Truncation::dimension(trunc.n_max, n_loops).unwrap_or(usize::MAX);
    if dim > trunc.dim_ceiling {
        return Err(Error::DimensionOverflow {
            dim,
            ceiling: trunc.dim_ceiling,
        });
    }
    let ec = spec.charging_matrix()?.ec;
    let pots: Vec<HarmonicPotential> = spec
        .loops
        .iter()
        .map(|lp| loop_potential_with(lp, &spec.flux_model))
        .collect();
    let ng: Vec<f64> = spec.loops.iter().map(|lp| lp.offset_charge).collect();
    let real = pots.iter().all(|p| p.b1 == 0.0 && p.b2 == 0.0);

    let n_max = trunc.n_max as i64;
    let radix = 2 * trunc.n_max + 1;
    let strides: Vec<usize> = (0..n_loops).map(|l| radix.pow(l as u32)).collect();

    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::with_capacity(dim * (1 + 4 * n_loops));
    let mut x = vec![0.0; n_loops];
    for idx in 0..dim {
        let charges = decode(idx, n_loops, trunc.n_max);
        for (xi, (&n, g)) in x.iter_mut().zip(charges.iter().zip(&ng)) {
            *xi = n as f64 - g;
        }
        let mut kinetic = 0.0;
        for i in 0..n_loops {
            for j in 0..n_loops {
                kinetic += 4.0 * ec[(i, j)] * x[i] * x[j];
            }
        }
        triplets.push((idx, idx, Complex64::new(kinetic, 0.0)));
        for (l, pot) in pots.iter().enumerate() {
            for (m, a, b) in [(1i64, pot.a1, pot.b1), (2, pot.a2, pot.b2)] {
                if (a == 0.0 && b == 0.0) || charges[l] + m > n_max {
                    continue;
                }
                let up = idx + m as usize * strides[l];
                // ⟨n+m| a cos mφ + b sin mφ |n⟩ = a/2 - i b/2
                let v = Complex64::new(0.5 * a, -0.5 * b);
                triplets.push((up, idx, v));
                triplets.push((idx, up, v.conj()));
            }
        }
    }
    let matrix = if real {
        ChargeMatrix::Real(SparseHermitian::from_triplets(
            dim,
            triplets.into_iter().map(|(i, j, v)| (i, j, v.re)),
        ))
    } else {
        ChargeMatrix::Complex(SparseHermitian::from_triplets(dim, triplets))
    };
    Ok(ChargeOperator {
        n_loops,
        n_max: trunc.n_max,
        dim,
        matrix,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Lowest eigenvalues in GHz, ascending.
    pub energies: Vec<f64>,
    /// `energies[1] - energies[0]`.
    pub e01: f64,
    pub converged: bool,
    pub n_max_used: usize,
    /// Eigenvectors in the charge basis, same order as `energies`, when retained.
    pub eigenvectors: Option<Vec<Vec<Complex64>>>,
}

impl SpectrumResult {
    fn from_pairs<T: Copy + Into<Complex64>>(pairs: EigenPairs<T>, n_max: usize) -> Self {
        let e01 = (pairs.values[1] - pairs.values[0]).max(0.0);
        Self {
            e01,
            converged: true,
            n_max_used: n_max,
            eigenvectors: pairs.vectors.map(|vs| {
                vs.into_iter()
                    .map(|v| v.into_iter().map(Into::into).collect())
                    .collect()
            }),
            energies: pairs.values,
        }
    }

    /// `E_i - E_0`.
    pub fn gap(&self, i: usize) -> f64 {
        self.energies[i] - self.energies[0]
    }
}

/// Eigen-solver selection: dense below `dense_limit`, Krylov above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagonalizer {
    pub dense_limit: usize,
    pub keep_vectors: bool,
    pub lanczos: LanczosOptions,
}

impl Default for Diagonalizer {
    fn default() -> Self {
        Self {
            dense_limit: 1024,
            keep_vectors: false,
            lanczos: LanczosOptions::default(),
        }
    }
}

impl Diagonalizer {
    pub fn with_vectors(mut self, keep: bool) -> Self {
        self.keep_vectors = keep;
        self
    }

    pub fn with_dense_limit(mut self, limit: usize) -> Self {
        self.dense_limit = limit;
        self
    }

    pub fn lowest(&self, op: &ChargeOperator, k: usize) -> Result<SpectrumResult> {
        if k < 2 || k >= op.dim() {
            return Err(Error::InvalidArgument(format!(
                "need 2 <= k < dim (k = {k}, dim = {})",
                op.dim()
            )));
        }
        let dense = op.dim() <= self.dense_limit;
        let r = match &op.matrix {
            ChargeMatrix::Real(m) => {
                let pairs = if dense {
                    lowest_dense(m.to_dense(), k, self.keep_vectors)
                } else {
                    self.krylov(m, k)?
                };
                SpectrumResult::from_pairs(pairs, op.n_max)
            }
            ChargeMatrix::Complex(m) => {
                let pairs = if dense {
                    lowest_dense(m.to_dense(), k, self.keep_vectors)
                } else {
                    self.krylov(m, k)?
                };
                SpectrumResult::from_pairs(pairs, op.n_max)
            }
        };
        Ok(r)
    }

    fn krylov<T: crate::linalg::Scalar>(
        &self,
        m: &SparseHermitian<T>,
        k: usize,
    ) -> Result<EigenPairs<T>> {
        let mut pairs = lanczos::lowest(m, k, &self.lanczos)?;
        if !self.keep_vectors {
            pairs.vectors = None;
        }
        Ok(pairs)
    }

    /// Double `n_max` until every one of the `k` lowest levels moves by less
    /// than `convergence_tol`, or the next refinement would exceed the
    /// dimension ceiling (then `converged = false`).
    pub fn converged_spectrum(
        &self,
        spec: &CircuitSpec,
        trunc: &Truncation,
        k: usize,
    ) -> Result<SpectrumResult> {
        let mut t = *trunc;
        let mut prev = self.lowest(&build_hamiltonian(spec, &t)?, k)?;
        loop {
            let next = t.n_max * 2;
            let fits =
                Truncation::dimension(next, spec.n_loops()).is_some_and(|d| d <= t.dim_ceiling);
            if !fits {
                prev.converged = false;
                return Ok(prev);
            }
            t.n_max = next;
            let cur = self.lowest(&build_hamiltonian(spec, &t)?, k)?;
            let shift = cur
                .energies
                .iter()
                .zip(&prev.energies)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if shift < t.convergence_tol {
                return Ok(cur);
            }
            prev = cur;
        }
    }
}

/// `k` lowest eigenvalues with the default solver settings.
pub fn lowest_eigenvalues(op: &ChargeOperator, k: usize) -> Result<SpectrumResult> {
    Diagonalizer::default().lowest(op, k)
}

pub fn converged_spectrum(
    spec: &CircuitSpec,
    trunc: &Truncation,
    k: usize,
) -> Result<SpectrumResult> {
    Diagonalizer::default().converged_spectrum(spec, trunc, k)
}

/// Cooper-pair parity `⟨Π(-1)^{n_i}⟩` of eigenstate `state_index`.
pub fn parity_expectation(
    op: &ChargeOperator,
    spectrum: &SpectrumResult,
    state_index: usize,
) -> Result<f64> {
    let vecs = spectrum
        .eigenvectors
        .as_ref()
        .ok_or(Error::MissingEigenvectors)?;
    let v = vecs.get(state_index).ok_or(Error::IndexOutOfRange {
        index: state_index,
        len: vecs.len(),
    })?;
    if v.len() != op.dim() {
        return Err(Error::InvalidArgument(format!(
            "eigenvector length {} does not match operator dimension {}",
            v.len(),
            op.dim()
        )));
    }
    Ok(op.parity_of(v))
}
