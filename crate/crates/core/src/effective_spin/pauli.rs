//! Explicit few-spin Hamiltonians as sums of Pauli strings.
//!
//! Site `i` is bit `i` of the computational-basis index; bit 0 is spin up
//! (`σz = +1`).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trig::{cos_pi, sin_pi};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    pub ops: Vec<Pauli>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliHamiltonian {
    pub n_spins: usize,
    pub terms: Vec<PauliTerm>,
}

/// Largest register handled by the dense and matrix-free routines.
pub const MAX_SPINS: usize = 20;

impl PauliHamiltonian {
    pub fn new(n_spins: usize) -> Result<Self> {
        if n_spins == 0 || n_spins > MAX_SPINS {
            return Err(Error::InvalidArgument(format!(
                "n_spins must lie in 1..={MAX_SPINS} (got {n_spins})"
            )));
        }
        Ok(Self {
            n_spins,
            terms: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    /// Append `coeff · ⊗ ops[site]` for the given `(site, op)` pairs; all other
    /// sites carry the identity. Zero coefficients are dropped.
    pub fn add(&mut self, coeff: f64, sites: &[(usize, Pauli)]) {
        if coeff == 0.0 {
            return;
        }
        let mut ops = vec![Pauli::I; self.n_spins];
        for &(s, p) in sites {
            ops[s] = p;
        }
        self.terms.push(PauliTerm { coeff, ops });
    }

    /// `y = H x` without forming the matrix.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        for term in &self.terms {
            let mut flip = 0usize;
            let mut ymask = 0usize;
            let mut zmask = 0usize;
            for (s, p) in term.ops.iter().enumerate() {
                match p {
                    Pauli::I => {}
                    Pauli::X => flip |= 1 << s,
                    Pauli::Y => {
                        flip |= 1 << s;
                        ymask |= 1 << s;
                    }
                    Pauli::Z => zmask |= 1 << s,
                }
            }
            let ny = ymask.count_ones();
            // Y = i X Z, so Y|b⟩ = i (-1)^b |b̄⟩
            let base = Complex64::i().powu(ny) * term.coeff;
            for (b, &xb) in x.iter().enumerate() {
                if xb == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let sign = (((b & zmask).count_ones() + (b & ymask).count_ones()) & 1) as i32;
                let v = if sign == 1 { -base } else { base };
                y[b ^ flip] += v * xb;
            }
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        let mut e = vec![Complex64::new(0.0, 0.0); d];
        for col in 0..d {
            e[col] = Complex64::new(1.0, 0.0);
            for (row, v) in self.apply(&e).into_iter().enumerate() {
                m[(row, col)] = v;
            }
            e[col] = Complex64::new(0.0, 0.0);
        }
        m
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .to_dense()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Matrix of `H` in the maximal-spin (Dicke) sector, ordered by the number
    /// of down spins `k = 0..=n`, i.e. `S_z = n/2 - k`.
    pub fn dicke_block(&self) -> DMatrix<Complex64> {
        let states: Vec<Vec<Complex64>> = (0..=self.n_spins)
            .map(|k| dicke_state(self.n_spins, k))
            .collect();
        let images: Vec<Vec<Complex64>> = states.iter().map(|s| self.apply(s)).collect();
        let n = states.len();
        DMatrix::from_fn(n, n, |i, j| {
            states[i]
                .iter()
                .zip(&images[j])
                .map(|(a, b)| a.conj() * b)
                .sum()
        })
    }
}

/// Normalized symmetric state with `k` down spins among `n`.
pub fn dicke_state(n: usize, k: usize) -> Vec<Complex64> {
    let d = 1usize << n;
    let count = (0..d).filter(|b| b.count_ones() as usize == k).count();
    let amp = Complex64::new(1.0 / (count as f64).sqrt(), 0.0);
    (0..d)
        .map(|b| {
            if b.count_ones() as usize == k {
                amp
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect()
}

/// Components of `σ̃x = cos(π n_g) σx + sin(π n_g) σy`.
fn rotated_x(ng: f64) -> [(f64, Pauli); 2] {
    [(cos_pi(ng), Pauli::X), (sin_pi(ng), Pauli::Y)]
}

/// `H = 2t Σ_i cos(π n_g^i) σ̃x^i − (2J/N) Σ_{i<j} cos(π[n_g^i − n_g^j]) σ̃x^i σ̃x^j − Σ_i ε_i σz^i`.
pub fn build_spin_hamiltonian(
    n: usize,
    t: f64,
    j: f64,
    eps: &[f64],
    offset_charges: &[f64],
) -> Result<PauliHamiltonian> {
    if eps.len() != n || offset_charges.len() != n {
        return Err(Error::InvalidArgument(format!(
            "expected {n} fields and offset charges, got {} and {}",
            eps.len(),
            offset_charges.len()
        )));
    }
    let mut h = PauliHamiltonian::new(n)?;
    for (i, &ng) in offset_charges.iter().enumerate() {
        let c = 2.0 * t * cos_pi(ng);
        for (w, p) in rotated_x(ng) {
            h.add(c * w, &[(i, p)]);
        }
    }
    let pair = -2.0 * j / n as f64;
    for a in 0..n {
        for b in a + 1..n {
            let c = pair * cos_pi(offset_charges[a] - offset_charges[b]);
            for (wa, pa) in rotated_x(offset_charges[a]) {
                for (wb, pb) in rotated_x(offset_charges[b]) {
                    h.add(c * wa * wb, &[(a, pa), (b, pb)]);
                }
            }
        }
    }
    for (i, &e) in eps.iter().enumerate() {
        h.add(-e, &[(i, Pauli::Z)]);
    }
    Ok(h)
}

/// Add the imbalance term `(t_in − t_out) σx^i` and the flux-detuning field
/// `−ε_i σz^i` on each site.
pub fn inject_error_terms(
    h: &PauliHamiltonian,
    imbalance: &[f64],
    flux_detuning: &[f64],
) -> Result<PauliHamiltonian> {
    if imbalance.len() != h.n_spins || flux_detuning.len() != h.n_spins {
        return Err(Error::InvalidArgument(format!(
            "expected {} error amplitudes per channel, got {} and {}",
            h.n_spins,
            imbalance.len(),
            flux_detuning.len()
        )));
    }
    let mut out = h.clone();
    for i in 0..h.n_spins {
        out.add(imbalance[i], &[(i, Pauli::X)]);
        out.add(-flux_detuning[i], &[(i, Pauli::Z)]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn single_pauli_matrices() {
        let mut h = PauliHamiltonian::new(1).unwrap();
        h.add(1.0, &[(0, Pauli::Y)]);
        let m = h.to_dense();
        assert_eq!(m[(1, 0)], Complex64::new(0.0, 1.0));
        assert_eq!(m[(0, 1)], Complex64::new(0.0, -1.0));
        let mut z = PauliHamiltonian::new(1).unwrap();
        z.add(1.0, &[(0, Pauli::Z)]);
        let m = z.to_dense();
        assert_eq!(m[(0, 0)].re, 1.0);
        assert_eq!(m[(1, 1)].re, -1.0);
    }

    #[test]
    fn two_spin_ladder() {
        let (t, j) = (-0.05, 0.5);
        let h = build_spin_hamiltonian(2, t, j, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        let mut want = vec![4.0 * t - j, j, j, -4.0 * t - j];
        want.sort_by(f64::total_cmp);
        assert!(
            close(&h.eigenvalues(), &want, 1e-12),
            "{:?}",
            h.eigenvalues()
        );
    }

    #[test]
    fn half_offset_charge_silences_single_loop() {
        let h = build_spin_hamiltonian(1, -0.3, 1.0, &[0.0], &[0.5]).unwrap();
        assert!(h.to_dense().iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn rotated_hamiltonian_is_hermitian_with_rotated_spectrum() {
        let h =
            build_spin_hamiltonian(3, -0.1, 0.7, &[0.01, 0.02, 0.0], &[0.1, 0.3, 0.45]).unwrap();
        let m = h.to_dense();
        assert!((&m - m.adjoint()).iter().all(|z| z.norm() < 1e-14));
        // a single rotated site has eigenvalues ±2t cos(π n_g)
        let one = build_spin_hamiltonian(1, -0.1, 0.0, &[0.0], &[0.3]).unwrap();
        let c = 0.2 * cos_pi(0.3);
        assert!(close(&one.eigenvalues(), &[-c, c], 1e-14));
    }

    #[test]
    fn error_terms() {
        let h = build_spin_hamiltonian(2, 0.0, 0.5, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(inject_error_terms(&h, &[0.0, 0.0], &[0.0, 0.0]).unwrap(), h);
        assert!(inject_error_terms(&h, &[0.0], &[0.0, 0.0]).is_err());

        let d = 1e-3;
        let split = inject_error_terms(&h, &[d, d], &[0.0, 0.0])
            .unwrap()
            .eigenvalues();
        assert!(((split[1] - split[0]) - 4.0 * d).abs() < 1e-12);

        // ferro states are σx-polarized; σz only mixes them at second order
        let eps = 1e-3;
        let z = inject_error_terms(&h, &[0.0, 0.0], &[eps, eps])
            .unwrap()
            .eigenvalues();
        assert!(z[1] - z[0] < 10.0 * eps * eps);
    }

    #[test]
    fn dicke_states_are_normalized() {
        for k in 0..=4 {
            let a = dicke_state(4, k);
            let n: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
    }
}
