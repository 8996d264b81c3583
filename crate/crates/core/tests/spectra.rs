use jjarray::linalg::dense::lowest_dense;
use jjarray::linalg::lanczos::{self, LanczosOptions};
use jjarray::linalg::sparse::SparseHermitian;
use jjarray::units::capacitance_for_charging_energy;
use jjarray::{
    build_hamiltonian, converged_spectrum, parity_expectation, CircuitSpec, Diagonalizer,
    InterferometerLoop, JunctionArm, Truncation,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `E_01(n_g = 0)` for E_C = 0.2 GHz, E_J,2 = 10 GHz from an independent dense
/// build at n_max = 30 (value frozen from that oracle).
const E01_AT_ZERO: f64 = 0.003_323_464_698_906_9;

fn single_loop(ec: f64, ej2: f64, ng: f64) -> CircuitSpec {
    let lp = InterferometerLoop::cos2phi(ej2).with_offset_charge(ng);
    CircuitSpec::uniform(1, lp, 0.0, capacitance_for_charging_energy(ec))
}

/// `4E_C (n - n_g)² - (E_J,2 / 2)(|n⟩⟨n+2| + h.c.)`, written out by hand.
fn brute_force_cos2phi(ec: f64, ej2: f64, ng: f64, n_max: i64) -> Vec<f64> {
    let dim = (2 * n_max + 1) as usize;
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        let (ni, nj) = (i as i64 - n_max, j as i64 - n_max);
        if i == j {
            4.0 * ec * (ni as f64 - ng).powi(2)
        } else if (ni - nj).abs() == 2 {
            -ej2 / 2.0
        } else {
            0.0
        }
    });
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn single_loop_ground_doublet_matches_dense_oracle() {
    let oracle = brute_force_cos2phi(0.2, 10.0, 0.0, 30);
    assert!((oracle[1] - oracle[0] - E01_AT_ZERO).abs() < 1e-12);
    let r = converged_spectrum(&single_loop(0.2, 10.0, 0.0), &Truncation::default(), 4).unwrap();
    assert!(r.converged);
    assert!((r.e01 - E01_AT_ZERO).abs() < 1e-9, "{}", r.e01);
    for (a, b) in r.energies.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn single_loop_degenerate_at_half_charge() {
    let r = converged_spectrum(&single_loop(0.2, 10.0, 0.5), &Truncation::default(), 4).unwrap();
    assert!(r.e01 < 1e-8, "{}", r.e01);
}

#[test]
fn parity_of_cos2phi_doublet() {
    let spec = single_loop(0.2, 10.0, 0.0);
    let op = build_hamiltonian(&spec, &Truncation::new(16)).unwrap();
    let r = Diagonalizer::default()
        .with_vectors(true)
        .lowest(&op, 4)
        .unwrap();
    let p0 = parity_expectation(&op, &r, 0).unwrap();
    let p1 = parity_expectation(&op, &r, 1).unwrap();
    assert!((p0.abs() - 1.0).abs() < 1e-9 && (p1.abs() - 1.0).abs() < 1e-9);
    assert!(p0 * p1 < 0.0);
    // the ground state is even
    assert!(p0 > 0.0);
}

#[test]
fn unbalanced_arms_mix_parity() {
    let lp = InterferometerLoop::cos2phi(10.0)
        .with_arms(JunctionArm::new(0.5, 5.0), JunctionArm::new(0.0, 5.0));
    let spec = CircuitSpec::uniform(1, lp, 0.0, capacitance_for_charging_energy(0.2));
    let op = build_hamiltonian(&spec, &Truncation::new(16)).unwrap();
    let r = Diagonalizer::default()
        .with_vectors(true)
        .lowest(&op, 2)
        .unwrap();
    for i in 0..2 {
        let p = parity_expectation(&op, &r, i).unwrap();
        assert!(p.abs() < 1.0 - 1e-6, "state {i}: {p}");
    }
}

#[test]
fn krylov_agrees_with_dense_on_random_hermitian() {
    let n = 500;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut trip = Vec::new();
    for i in 0..n {
        trip.push((i, i, Complex64::new(rng.random_range(-5.0..5.0), 0.0)));
        for _ in 0..6 {
            let j = rng.random_range(0..n);
            if j != i {
                let v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                trip.push((i, j, v));
                trip.push((j, i, v.conj()));
            }
        }
    }
    let m = SparseHermitian::from_triplets(n, trip);
    assert!(m.hermiticity_defect() < 1e-14);
    let dense = lowest_dense(m.to_dense(), 6, false).values;
    let krylov = lanczos::lowest(&m, 6, &LanczosOptions::default())
        .unwrap()
        .values;
    for (a, b) in dense.iter().zip(&krylov) {
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn dense_and_krylov_paths_agree_on_two_loops() {
    let lp = InterferometerLoop::cos2phi(10.0).with_offset_charge(0.2);
    let spec = CircuitSpec::uniform(2, lp, 200.0, 10.0);
    let op = build_hamiltonian(&spec, &Truncation::new(10)).unwrap();
    let dense = Diagonalizer::default()
        .with_dense_limit(usize::MAX)
        .lowest(&op, 6)
        .unwrap();
    let krylov = Diagonalizer::default()
        .with_dense_limit(0)
        .lowest(&op, 6)
        .unwrap();
    for (a, b) in dense.energies.iter().zip(&krylov.energies) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn protected_pair_forms_isolated_doublet() {
    let lp = InterferometerLoop::cos2phi(10.0);
    let spec = CircuitSpec::uniform(2, lp, 200.0, 10.0);
    let r = converged_spectrum(&spec, &Truncation::default(), 4).unwrap();
    assert!(r.converged);
    assert!(r.gap(1) < 0.05 * r.gap(2), "{:?}", r.energies);
}

#[test]
fn transmon_regime_converges_quickly() {
    // conventional cos φ element (balanced arms at zero flux), E_J / E_C = 50;
    // only the ground level is that well localized in charge at n_max = 8
    let arm = JunctionArm::new(5.0, 0.0);
    let lp = InterferometerLoop::cos2phi(0.0)
        .with_arms(arm, arm)
        .with_flux(0.0)
        .with_offset_charge(0.3);
    let spec = CircuitSpec::uniform(1, lp, 0.0, capacitance_for_charging_energy(0.2));
    let d = Diagonalizer::default();
    let lo = d
        .lowest(&build_hamiltonian(&spec, &Truncation::new(8)).unwrap(), 4)
        .unwrap();
    let hi = d
        .lowest(&build_hamiltonian(&spec, &Truncation::new(16)).unwrap(), 4)
        .unwrap();
    assert!((lo.energies[0] - hi.energies[0]).abs() < 1e-10);
    for (a, b) in lo.energies.iter().zip(&hi.energies) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn free_rotor_limit_reports_non_convergence() {
    // E_C → 0: the charge spread outgrows every basis under the ceiling
    let lp = InterferometerLoop::cos2phi(10.0);
    let spec = CircuitSpec::uniform(1, lp, 0.0, 1e15);
    let t = Truncation {
        dim_ceiling: 1 << 12,
        ..Truncation::default()
    };
    let r = converged_spectrum(&spec, &t, 4).unwrap();
    assert!(!r.converged);
    assert!(r.n_max_used <= 2047);
}

#[test]
fn pure_cos2phi_matrix_is_parity_block_diagonal() {
    let op = build_hamiltonian(&single_loop(0.2, 10.0, 0.0), &Truncation::new(12)).unwrap();
    for (i, j, v) in op.entries() {
        if op.parity(i) != op.parity(j) {
            assert_eq!(v, Complex64::new(0.0, 0.0));
        }
    }
}
