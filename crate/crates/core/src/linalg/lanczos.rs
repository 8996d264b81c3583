//! Thick-restart Lanczos with full reorthogonalisation and locking.
//!
//! A single Krylov sequence sees only one direction of an exactly degenerate
//! eigenspace, and none of a symmetry sector orthogonal to its start vector.
//! Converged pairs are therefore locked and the iteration is rerun in their
//! orthogonal complement until the lowest eigenvalue of the complement lies
//! above the `k`-th locked one.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::LinearOperator;
use super::{axpy, dotc, norm, scale, EigenPairs, Scalar};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Residual tolerance relative to the spectral scale estimate.
    pub tol: f64,
    /// Largest Krylov basis held at once (further capped by `memory_budget`).
    pub max_basis: usize,
    pub max_restarts: usize,
    /// Bytes available for the Krylov basis.
    pub memory_budget: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_basis: 160,
            max_restarts: 400,
            memory_budget: 512 << 20,
            seed: 0x5eed_2e01,
        }
    }
}

struct RitzRun<T> {
    values: Vec<f64>,
    vectors: Vec<Vec<T>>,
    scale: f64,
}

/// `k` lowest eigenpairs of a Hermitian operator.
pub fn lowest<T: Scalar, A: LinearOperator<T> + ?Sized>(
    op: &A,
    k: usize,
    opts: &LanczosOptions,
) -> Result<EigenPairs<T>> {
    let n = op.dim();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "need 0 < k < dim for the Krylov solver (k = {k}, dim = {n})"
        )));
    }
    let mut locked_vals: Vec<f64> = Vec::new();
    let mut locked: Vec<Vec<T>> = Vec::new();
    let mut iterations = 0usize;
    let mut round = 0u64;
    loop {
        let verifying = locked.len() >= k;
        let want = if verifying { 1 } else { k - locked.len() };
        if locked.len() + want > n {
            break;
        }
        let run = run_restarted(op, &locked, want, opts, round, &mut iterations)?;
        round += 1;
        if verifying {
            let mut sorted = locked_vals.clone();
            sorted.sort_by(f64::total_cmp);
            let kth = sorted[k - 1];
            let slack = opts.tol * run.scale * 10.0;
            if run.values.is_empty() || run.values[0] >= kth - slack {
                break;
            }
        }
        for (v, x) in run.values.into_iter().zip(run.vectors).take(want) {
            locked_vals.push(v);
            locked.push(x);
        }
    }
    let mut order: Vec<usize> = (0..locked_vals.len()).collect();
    order.sort_by(|&a, &b| locked_vals[a].total_cmp(&locked_vals[b]));
    order.truncate(k);
    Ok(EigenPairs {
        values: order.iter().map(|&i| locked_vals[i]).collect(),
        vectors: Some(order.iter().map(|&i| locked[i].clone()).collect()),
        iterations,
    })
}

fn project_out<T: Scalar>(basis: &[Vec<T>], w: &mut [T]) {
    for b in basis {
        let c = dotc(b, w);
        axpy(-c, b, w);
    }
}

fn start_vector<T: Scalar>(n: usize, seed: u64, locked: &[Vec<T>]) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut v: Vec<T> = (0..n)
            .map(|_| T::from_real(rng.random_range(-1.0..1.0)))
            .collect();
        project_out(locked, &mut v);
        project_out(locked, &mut v);
        let nv = norm(&v);
        if nv > 1e-8 {
            scale(1.0 / nv, &mut v);
            return v;
        }
    }
}

/// Converge the `want` lowest eigenpairs of the operator restricted to the
/// orthogonal complement of `locked`.
fn run_restarted<T: Scalar, A: LinearOperator<T> + ?Sized>(
    op: &A,
    locked: &[Vec<T>],
    want: usize,
    opts: &LanczosOptions,
    round: u64,
    iterations: &mut usize,
) -> Result<RitzRun<T>> {
    let n = op.dim();
    let free = n - locked.len();
    let by_memory = opts.memory_budget / (n * std::mem::size_of::<T>()).max(1);
    let m_max = opts.max_basis.min(by_memory).max(want + 8).min(free);
    let keep = (want + want.max(8))
        .min(m_max.saturating_sub(1))
        .max(want.min(m_max));

    let mut basis: Vec<Vec<T>> = vec![start_vector(n, opts.seed.wrapping_add(round), locked)];
    let mut proj = DMatrix::<f64>::zeros(m_max, m_max);
    let mut spectral_scale = 0.0_f64;
    let mut w = vec![T::zero(); n];
    let mut last_residual = f64::INFINITY;

    for _restart in 0..=opts.max_restarts {
        let mut beta;
        // expand the basis
        loop {
            let j = basis.len() - 1;
            op.apply(&basis[j], &mut w);
            *iterations += 1;
            spectral_scale = spectral_scale.max(norm(&w));
            project_out(locked, &mut w);
            let mut coeffs = vec![T::zero(); j + 1];
            for _pass in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let c = dotc(b, &w);
                    coeffs[i] += c;
                    axpy(-c, b, &mut w);
                }
            }
            project_out(locked, &mut w);
            for (i, c) in coeffs.iter().enumerate() {
                proj[(i, j)] = c.real();
                proj[(j, i)] = c.real();
            }
            beta = norm(&w);
            let invariant = beta <= 1e-14 * spectral_scale.max(f64::MIN_POSITIVE);
            if invariant || basis.len() == m_max {
                break;
            }
            let mut v = w.clone();
            scale(1.0 / beta, &mut v);
            basis.push(v);
            if j + 1 < m_max {
                proj[(j + 1, j)] = beta;
                proj[(j, j + 1)] = beta;
            }
        }

        let m = basis.len();
        let t = proj.view((0, 0), (m, m)).into_owned();
        let eig = t.symmetric_eigen();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        spectral_scale = theta.iter().fold(spectral_scale, |a, x| a.max(x.abs()));
        let invariant = beta <= 1e-14 * spectral_scale.max(f64::MIN_POSITIVE);
        let resid: Vec<f64> = order
            .iter()
            .map(|&i| {
                if invariant {
                    0.0
                } else {
                    beta * eig.eigenvectors[(m - 1, i)].abs()
                }
            })
            .collect();
        let target = want.min(m);
        let tol = opts.tol * spectral_scale.max(f64::MIN_POSITIVE);
        last_residual = resid[..target].iter().fold(0.0, |a: f64, &r| a.max(r));
        let ritz = |idx: usize| -> Vec<T> {
            let col = order[idx];
            let mut y = vec![T::zero(); n];
            for (l, b) in basis.iter().enumerate() {
                axpy(T::from_real(eig.eigenvectors[(l, col)]), b, &mut y);
            }
            let ny = norm(&y);
            scale(1.0 / ny, &mut y);
            y
        };

        if last_residual <= tol || invariant {
            return Ok(RitzRun {
                values: theta[..target].to_vec(),
                vectors: (0..target).map(ritz).collect(),
                scale: spectral_scale,
            });
        }

        // thick restart: keep the lowest Ritz vectors plus the residual direction
        let p = keep.min(m - 1).max(1);
        let mut new_basis: Vec<Vec<T>> = (0..p).map(ritz).collect();
        proj.fill(0.0);
        for i in 0..p {
            proj[(i, i)] = theta[i];
            let c = beta * eig.eigenvectors[(m - 1, order[i])];
            proj[(i, p)] = c;
            proj[(p, i)] = c;
        }
        let mut f = w.clone();
        scale(1.0 / beta, &mut f);
        // Ritz vectors are orthogonal to f in exact arithmetic; enforce it.
        project_out(&new_basis, &mut f);
        let nf = norm(&f);
        scale(1.0 / nf, &mut f);
        new_basis.push(f);
        basis = new_basis;
    }
    Err(Error::NoConvergence {
        iterations: *iterations,
        residual: last_residual,
    })
}
