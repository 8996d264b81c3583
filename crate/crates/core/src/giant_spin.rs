//! Collective giant-spin (Lipkin-Meshkov-Glick) model of the array,
//! `H = -2(ε S_z - 2t S_x) - (4J/N) S_x²`, in the maximal-spin sector.
//!
//! Basis index `k = 0..=N` counts down spins, `S_z = N/2 - k`, so the ladder
//! amplitude between `k - 1` and `k` is `sqrt(k (N - k + 1))`, an exact
//! integer under the root. `S_x²` couples `k` to `k ± 2` only: at `t = 0` the
//! matrix splits into two tridiagonal blocks of fixed `k` parity (the
//! spin-flip symmetry `Π σz`), which are solved by bisection.

use nalgebra::DMatrix;
use nalgebra_sparse::CsrMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dense::lowest_dense;
use crate::linalg::lanczos::{self, LanczosOptions};
use crate::linalg::sparse::SparseHermitian;
use crate::linalg::tridiag::SymTridiagonal;
use crate::par::{map_indexed, Execution};

/// Largest dimension solved densely when `t ≠ 0`.
const DENSE_LIMIT: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LMGProblem {
    pub n: usize,
    pub t: f64,
    pub j: f64,
    pub epsilon: f64,
}

impl LMGProblem {
    pub fn new(n: usize, t: f64, j: f64, epsilon: f64) -> Self {
        Self { n, t, j, epsilon }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("lmg.n must be >= 1".into()));
        }
        if !(self.j >= 0.0) || !self.j.is_finite() {
            return Err(Error::InvalidArgument(
                "lmg.j must be finite and >= 0".into(),
            ));
        }
        if !self.t.is_finite() || !self.epsilon.is_finite() {
            return Err(Error::InvalidArgument(
                "lmg.t and lmg.epsilon must be finite".into(),
            ));
        }
        Ok(())
    }

    fn spin(&self) -> f64 {
        0.5 * self.n as f64
    }

    /// `sqrt(k (N - k + 1))`, the `S_+` amplitude from `k` to `k - 1`.
    fn ladder(&self, k: usize) -> f64 {
        ((k * (self.n - k + 1)) as f64).sqrt()
    }

    fn diag(&self, k: usize) -> f64 {
        let n = self.n as f64;
        let kf = k as f64;
        let sz = 0.5 * n - kf;
        let sx2 = 0.25 * n + 0.5 * kf * (n - kf);
        -2.0 * self.epsilon * sz - 4.0 * self.j / n * sx2
    }

    /// Element between `k - 1` and `k` (from `4t S_x`).
    fn off1(&self, k: usize) -> f64 {
        2.0 * self.t * self.ladder(k)
    }

    /// Element between `k - 2` and `k` (from `-(4J/N) S_x²`).
    fn off2(&self, k: usize) -> f64 {
        -self.j / self.n as f64 * self.ladder(k) * self.ladder(k - 1)
    }

    fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(5 * (self.n + 1));
        for k in 0..=self.n {
            out.push((k, k, self.diag(k)));
            if k >= 1 && self.t != 0.0 {
                let v = self.off1(k);
                out.push((k - 1, k, v));
                out.push((k, k - 1, v));
            }
            if k >= 2 && self.j != 0.0 {
                let v = self.off2(k);
                out.push((k - 2, k, v));
                out.push((k, k - 2, v));
            }
        }
        out
    }

    /// Hamiltonian in the `S = N/2` block.
    pub fn matrix(&self) -> SparseHermitian<f64> {
        SparseHermitian::from_triplets(self.n + 1, self.triplets())
    }

    /// Block of basis states with `k ≡ parity (mod 2)`; valid only at `t = 0`.
    fn parity_block(&self, parity: usize) -> Option<SymTridiagonal> {
        let ks: Vec<usize> = (parity..=self.n).step_by(2).collect();
        if ks.is_empty() {
            return None;
        }
        let diag = ks.iter().map(|&k| self.diag(k)).collect();
        let off = ks[1..].iter().map(|&k| self.off2(k)).collect();
        Some(SymTridiagonal::new(diag, off).expect("block lengths are consistent"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LMGResult {
    pub energies: Vec<f64>,
    pub gap_e10: f64,
    /// `⟨S_z⟩/S` in the ground state.
    pub sz_mean: f64,
    pub sx_mean: f64,
    pub sy_mean: f64,
}

struct Solved {
    energies: Vec<f64>,
    /// Ground and first excited state (real amplitudes).
    states: Vec<Vec<f64>>,
}

fn solve(p: &LMGProblem, k: usize) -> Result<Solved> {
    let dim = p.n + 1;
    if p.t == 0.0 {
        // (value, block parity)
        let mut all: Vec<(f64, usize)> = Vec::new();
        let blocks: Vec<Option<SymTridiagonal>> = (0..2).map(|par| p.parity_block(par)).collect();
        for (par, b) in blocks.iter().enumerate() {
            if let Some(b) = b {
                all.extend(b.lowest(k).into_iter().map(|v| (v, par)));
            }
        }
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.truncate(k);
        let states = all
            .iter()
            .take(2)
            .map(|&(v, par)| {
                let block = blocks[par].as_ref().expect("value came from this block");
                let local = block.eigenvector(v);
                let mut full = vec![0.0; dim];
                for (i, x) in local.into_iter().enumerate() {
                    full[par + 2 * i] = x;
                }
                full
            })
            .collect();
        return Ok(Solved {
            energies: all.into_iter().map(|a| a.0).collect(),
            states,
        });
    }
    let m = p.matrix();
    let pairs = if dim <= DENSE_LIMIT || k >= dim {
        lowest_dense(m.to_dense(), k, true)
    } else {
        lanczos::lowest(&m, k, &LanczosOptions::default())?
    };
    let states = pairs
        .vectors
        .unwrap_or_default()
        .into_iter()
        .take(2)
        .collect();
    Ok(Solved {
        energies: pairs.values,
        states,
    })
}

/// `(⟨S_x⟩, ⟨S_y⟩, ⟨S_z⟩)` of a real normalized state.
fn spin_expectations(p: &LMGProblem, v: &[f64]) -> (f64, f64, f64) {
    let mut sx = 0.0;
    let mut sz = 0.0;
    for (k, &a) in v.iter().enumerate() {
        sz += a * a * (p.spin() - k as f64);
        if k >= 1 {
            sx += a * v[k - 1] * p.ladder(k);
        }
    }
    // ⟨S_y⟩ is the imaginary part of ⟨S_+⟩, zero for real amplitudes
    (sx, 0.0, sz)
}

/// Lowest `k` levels, the `E_1 - E_0` gap and ground-state spin expectations.
pub fn lmg_spectrum(p: &LMGProblem, k: usize) -> Result<LMGResult> {
    p.validate()?;
    if k < 2 || k > p.n + 1 {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= k <= N + 1 (k = {k}, N = {})",
            p.n
        )));
    }
    let s = solve(p, k)?;
    let (sx, sy, sz) = spin_expectations(p, &s.states[0]);
    let spin = p.spin();
    Ok(LMGResult {
        gap_e10: (s.energies[1] - s.energies[0]).max(0.0),
        energies: s.energies,
        sz_mean: sz / spin,
        sx_mean: sx / spin,
        sy_mean: sy / spin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// `‖[H, S²]‖_F / ‖H‖_F`.
    pub s2_commutator: f64,
    pub s2_conserved: bool,
    /// `‖[H, Π σz]‖_F / ‖H‖_F`.
    pub spin_flip_commutator: f64,
    /// Largest `|⟨S_x⟩|`, `|⟨S_y⟩|` over the two lowest states.
    pub sx_max: f64,
    pub sy_max: f64,
    pub spin_flip_symmetric: bool,
}

fn csr(n: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> CsrMatrix<f64> {
    SparseHermitian::from_triplets(n, entries).csr().clone()
}

fn frobenius(m: &CsrMatrix<f64>) -> f64 {
    m.values().iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Checks total-spin conservation and the `Π σz` spin-flip symmetry.
pub fn check_symmetries(p: &LMGProblem) -> Result<SymmetryReport> {
    p.validate()?;
    let dim = p.n + 1;
    let h = p.matrix().csr().clone();
    let h_norm = frobenius(&h).max(f64::MIN_POSITIVE);

    // S² assembled from ladder operators
    let ladder = |sign: f64| {
        csr(
            dim,
            (1..dim).flat_map(|k| {
                let a = 0.5 * p.ladder(k);
                [(k - 1, k, a), (k, k - 1, sign * a)]
            }),
        )
    };
    let sx = ladder(1.0);
    // S_y = -i A / 2 with A = S_+ - S_-, so S_y² = -A²/4; `ladder(-1)` is A/2
    let half_a = ladder(-1.0);
    let sz = csr(dim, (0..dim).map(|k| (k, k, p.spin() - k as f64)));
    let s2 = &(&(&sx * &sx) - &(&half_a * &half_a)) + &(&sz * &sz);
    let comm = &(&h * &s2) - &(&s2 * &h);
    let s2_commutator = frobenius(&comm) / h_norm;

    let flip = csr(
        dim,
        (0..dim).map(|k| (k, k, if k % 2 == 0 { 1.0 } else { -1.0 })),
    );
    let fcomm = &(&h * &flip) - &(&flip * &h);
    let spin_flip_commutator = frobenius(&fcomm) / h_norm;

    let (mut sx_max, mut sy_max) = (0.0f64, 0.0f64);
    if dim >= 2 {
        let s = solve(p, 2)?;
        for v in &s.states {
            let (x, y, _) = spin_expectations(p, v);
            sx_max = sx_max.max(x.abs());
            sy_max = sy_max.max(y.abs());
        }
    }
    let tol = 1e-10;
    Ok(SymmetryReport {
        s2_commutator,
        s2_conserved: s2_commutator < tol,
        spin_flip_commutator,
        sx_max,
        sy_max,
        spin_flip_symmetric: p.t == 0.0
            && spin_flip_commutator < tol
            && sx_max < 1e-9
            && sy_max < 1e-9,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldMinimum {
    /// Numerical minimizer of the variational energy.
    pub theta0: f64,
    /// `arccos(ε/2J)`, clamped to `[0, π]`.
    pub theta0_large_n: f64,
    /// `arccos(εN / (2J(N-1)))`, clamped, the stationary point at finite `N`.
    pub theta0_finite_n: f64,
    pub chi0: f64,
    /// True when `χ = 0` and `χ = π` give distinct, degenerate states.
    pub chi_degenerate: bool,
    /// `-εN cos θ0 - J(N-1) sin²θ0`.
    pub energy: f64,
    /// Exact coherent-state expectation of `H`, `energy - J`.
    pub energy_expectation: f64,
}

/// Variational energy of a spin coherent state at `t = 0`.
pub fn variational_energy(p: &LMGProblem, theta: f64, chi: f64) -> f64 {
    let n = p.n as f64;
    -p.epsilon * n * theta.cos() - p.j * (n - 1.0) * (theta.sin() * chi.cos()).powi(2)
}

fn clamped_acos(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).acos()
}

/// Minimize the variational energy over `θ ∈ [0, π]` at `χ = 0` (`χ = π` is
/// equivalent): a 10⁴-interval grid, golden-section refinement, then a
/// derivative-sign bisection polish.
pub fn mean_field_minimum(p: &LMGProblem) -> Result<MeanFieldMinimum> {
    p.validate()?;
    let f = |th: f64| variational_energy(p, th, 0.0);
    const GRID: usize = 10_000;
    let h = std::f64::consts::PI / GRID as f64;
    let theta_at = |i: usize| {
        if i == GRID {
            std::f64::consts::PI
        } else {
            i as f64 * h
        }
    };
    let best = (0..=GRID)
        .min_by(|&a, &b| f(theta_at(a)).total_cmp(&f(theta_at(b))))
        .expect("non-empty grid");
    let (mut a, mut b) = (
        theta_at(best.saturating_sub(1)),
        theta_at((best + 1).min(GRID)),
    );
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    while b - a > 1e-10 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    let mut theta0 = 0.5 * (a + b);
    // Energy differences near a flat minimum drown in rounding below ~1e-8
    // rad; polish on the sign of the analytic derivative instead.
    let n = p.n as f64;
    let slope = |th: f64| p.epsilon * n * th.sin() - p.j * (n - 1.0) * (2.0 * th).sin();
    let (mut lo, mut hi) = (
        (theta0 - 1e-6).max(0.0),
        (theta0 + 1e-6).min(std::f64::consts::PI),
    );
    if slope(lo) < 0.0 && slope(hi) > 0.0 {
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        theta0 = 0.5 * (lo + hi);
    }
    for edge in [0.0, std::f64::consts::PI] {
        if f(edge) <= f(theta0) {
            theta0 = edge;
            break;
        }
    }
    let (large_n, finite) = if p.j > 0.0 {
        (
            clamped_acos(p.epsilon / (2.0 * p.j)),
            if p.n > 1 {
                clamped_acos(p.epsilon * n / (2.0 * p.j * (n - 1.0)))
            } else {
                clamped_acos(p.epsilon.signum())
            },
        )
    } else {
        let edge = if p.epsilon >= 0.0 {
            0.0
        } else {
            std::f64::consts::PI
        };
        (edge, edge)
    };
    let energy = f(theta0);
    Ok(MeanFieldMinimum {
        theta0,
        theta0_large_n: large_n,
        theta0_finite_n: finite,
        chi0: 0.0,
        chi_degenerate: theta0.sin().abs() > 1e-12 && p.j > 0.0 && p.n > 1,
        energy,
        energy_expectation: energy - p.j,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub epsilon: f64,
    pub eps_over_2j: f64,
    pub gap_e10: f64,
    pub gap_over_4j: f64,
    pub sz_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionScan {
    pub rows: Vec<ScanRow>,
    /// First `ε` whose gap reaches `threshold · 4J`.
    pub estimate_epsilon: Option<f64>,
    pub estimate_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Gap threshold as a fraction of `4J`.
    pub threshold: f64,
    pub t: f64,
    pub execution: Execution,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            threshold: 0.05,
            t: 0.0,
            execution: Execution::default(),
        }
    }
}

pub fn transition_scan(n: usize, j: f64, eps_grid: &[f64]) -> Result<TransitionScan> {
    transition_scan_with(n, j, eps_grid, &ScanOptions::default())
}

/// Gap and magnetization over an ascending grid of `ε` (GHz).
pub fn transition_scan_with(
    n: usize,
    j: f64,
    eps_grid: &[f64],
    opts: &ScanOptions,
) -> Result<TransitionScan> {
    if eps_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(
            "eps_grid must be strictly ascending".into(),
        ));
    }
    if !(opts.threshold >= 0.0) {
        return Err(Error::InvalidArgument("gap threshold must be >= 0".into()));
    }
    LMGProblem::new(n, opts.t, j, 0.0).validate()?;
    let results = map_indexed(opts.execution, eps_grid.len(), |i| {
        lmg_spectrum(&LMGProblem::new(n, opts.t, j, eps_grid[i]), 2)
    });
    let mut rows = Vec::with_capacity(eps_grid.len());
    for (r, &eps) in results.into_iter().zip(eps_grid) {
        let r = r?;
        rows.push(ScanRow {
            epsilon: eps,
            eps_over_2j: eps / (2.0 * j),
            gap_e10: r.gap_e10,
            gap_over_4j: r.gap_e10 / (4.0 * j),
            sz_mean: r.sz_mean,
        });
    }
    let hit = rows.iter().find(|r| r.gap_e10 >= opts.threshold * 4.0 * j);
    Ok(TransitionScan {
        estimate_epsilon: hit.map(|r| r.epsilon),
        estimate_ratio: hit.map(|r| r.eps_over_2j),
        rows,
    })
}

/// Dense matrix of the `S = N/2` block (for small `N`).
pub fn dense_matrix(p: &LMGProblem) -> DMatrix<f64> {
    p.matrix().to_dense()
}
