//! One PASS/FAIL line per acceptance criterion, each at its stated tolerance.
//! Runs without the libtest harness so every criterion is evaluated and
//! reported even when an earlier one fails; the exit status is non-zero if
//! any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use jjarray::effective_spin::{
    band_structure, build_spin_hamiltonian, extract_two_loop, half_zone_axis, two_loop_bands,
};
use jjarray::giant_spin::{dense_matrix, lmg_spectrum, transition_scan, LMGProblem};
use jjarray::units::capacitance_for_charging_energy;
use jjarray::{
    build_hamiltonian, closed_form_inverse, converged_spectrum, parity_expectation, CircuitSpec,
    Diagonalizer, FluxErrorModel, InterferometerLoop, JunctionArm, Truncation,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn max_abs(m: &nalgebra::DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn c1_capacitance() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let lp = InterferometerLoop::cos2phi(10.0);
    for n in 1..=8 {
        for _ in 0..1000 {
            let cb = rng.random_range(0.0..1000.0);
            let cs = rng.random_range(0.5..100.0);
            let num = CircuitSpec::uniform(n, lp, cb, cs)
                .charging_matrix()
                .unwrap()
                .inv_cap;
            let closed = closed_form_inverse(n, cb, cs).unwrap();
            worst = worst.max(max_abs(&(&num - &closed)) / max_abs(&closed));
        }
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-10 && t < Duration::from_secs(1),
        format!("max relative deviation {worst:.2e} over 8000 circuits (< 1e-10), {t:.2?} (< 1 s)"),
    )
}

fn single_qubit(ng: f64) -> CircuitSpec {
    let lp = InterferometerLoop::cos2phi(10.0).with_offset_charge(ng);
    CircuitSpec::uniform(1, lp, 0.0, capacitance_for_charging_energy(0.2))
}

fn c2_single_qubit() -> Outcome {
    let start = Instant::now();
    let trunc = Truncation::default();
    let e01 = |ng: f64| {
        converged_spectrum(&single_qubit(ng), &trunc, 2)
            .unwrap()
            .e01
    };
    let at_zero = e01(0.0);
    let at_half = e01(0.5);
    let worst = (0..=50)
        .map(|i| {
            let ng = i as f64 * 0.01;
            (e01(ng) / at_zero - (std::f64::consts::PI * ng).cos().abs()).abs()
        })
        .fold(0.0f64, f64::max);
    let t = start.elapsed();
    outcome(
        at_half < 1e-8 && worst < 0.03 && t < Duration::from_secs(5),
        format!(
            "E01(0.5) = {at_half:.2e} GHz (< 1e-8); max |E01/E01(0) - |cos pi ng|| = {worst:.4} (< 0.03); {t:.2?} (< 5 s)"
        ),
    )
}

fn c3_parity() -> Outcome {
    let mut worst_parity = 0.0f64;
    let mut cross = 0usize;
    let mut opposite = true;
    let specs = [
        single_qubit(0.0),
        single_qubit(0.2),
        CircuitSpec::uniform(2, InterferometerLoop::cos2phi(10.0), 200.0, 10.0),
    ];
    for spec in &specs {
        let op = build_hamiltonian(spec, &Truncation::new(12)).unwrap();
        cross += op
            .entries()
            .iter()
            .filter(|(i, j, v)| op.parity(*i) != op.parity(*j) && *v != Complex64::new(0.0, 0.0))
            .count();
        let r = Diagonalizer::default()
            .with_vectors(true)
            .lowest(&op, 2)
            .unwrap();
        let p0 = parity_expectation(&op, &r, 0).unwrap();
        let p1 = parity_expectation(&op, &r, 1).unwrap();
        worst_parity = worst_parity
            .max((p0.abs() - 1.0).abs())
            .max((p1.abs() - 1.0).abs());
        // a single cos 2φ element splits into even and odd ground states; the
        // two-loop ferro doublet shares one global parity
        if spec.n_loops() == 1 {
            opposite &= p0 * p1 < 0.0;
        }
    }
    outcome(
        worst_parity < 1e-9 && cross == 0 && opposite,
        format!(
            "max ||<P>| - 1| = {worst_parity:.1e} (< 1e-9), single-loop doublet of opposite parity: {opposite}, non-zero cross-parity entries: {cross}"
        ),
    )
}

fn c4_two_loop_fit() -> Outcome {
    let start = Instant::now();
    let axis = half_zone_axis(9).unwrap();
    let (tp, tplus, tminus) = (-0.031, 0.012, -0.47);
    let synth = extract_two_loop(&two_loop_bands(tp, tplus, tminus, [axis.clone(), axis])).unwrap();
    let synth_err = (synth.t - tp)
        .abs()
        .max((synth.t_plus - tplus).abs())
        .max((synth.t_minus - tminus).abs());

    let spec = CircuitSpec::uniform(2, InterferometerLoop::cos2phi(10.0), 200.0, 10.0);
    let bands = band_structure(&spec, 9, 4).unwrap();
    let fit = extract_two_loop(&bands).unwrap();
    let t = start.elapsed();
    let ok = synth_err < 1e-10
        && fit.j > 0.0
        && fit.t_plus.abs() < 0.1 * fit.t_minus.abs()
        && fit.residual_rms < 0.05 * fit.bandwidth
        && bands.converged.iter().all(|&c| c)
        && t < Duration::from_secs(600);
    outcome(
        ok,
        format!(
            "synthetic error {synth_err:.1e} (< 1e-10); full model t_par = {:.3e}, t+ = {:.3e}, t- = {:.4e}, J = {:.4e} GHz, rms/bandwidth = {:.4} (< 0.05); {t:.1?} (< 10 min)",
            fit.t, fit.t_plus, fit.t_minus, fit.j, fit.residual_rms / fit.bandwidth
        ),
    )
}

/// Arrays with C_B = 100 / 200 / 350 fF for N = 1 / 2 / 3 and C_S = 10 fF; the
/// first harmonic is linearized at 250 GHz per flux quantum.
fn detuned_array(n: usize, dflux: f64, imbalance: f64) -> CircuitSpec {
    let c_big = [100.0, 200.0, 350.0][n - 1];
    let lp = InterferometerLoop::cos2phi(10.0)
        .with_arms(JunctionArm::new(imbalance, 5.0), JunctionArm::new(0.0, 5.0))
        .with_flux(0.5 + dflux);
    CircuitSpec::uniform(n, lp, c_big, 10.0)
        .with_flux_model(FluxErrorModel::Linearized { slope: Some(250.0) })
}

fn array_e01(n: usize, dflux: f64, imbalance: f64) -> (f64, bool) {
    let trunc = Truncation::new([12, 10, 8][n - 1]);
    let r = converged_spectrum(&detuned_array(n, dflux, imbalance), &trunc, 2).unwrap();
    (r.e01, r.converged)
}

fn c5_window() -> Outcome {
    let e: Vec<(f64, bool)> = (1..=3).map(|n| array_e01(n, 0.01, 0.0)).collect();
    let ordered = e[1].0 < e[0].0 && e[2].0 < e[1].0;
    let plateau = e[2].0 < 0.1 * e[0].0;
    let converged = e.iter().all(|x| x.1);
    outcome(
        ordered && plateau && converged,
        format!(
            "E01 at 0.01 flux quanta: N=1 {:.4}, N=2 {:.4}, N=3 {:.4} GHz; ordering {}; N=3/N=1 = {:.3} (plateau needs < 0.1)",
            e[0].0,
            e[1].0,
            e[2].0,
            if ordered { "holds" } else { "violated" },
            e[2].0 / e[0].0
        ),
    )
}

fn c6_imbalance() -> Outcome {
    let (balanced, c1) = array_e01(2, 0.0, 0.0);
    let (unbalanced, c2) = array_e01(2, 0.0, 2.0);
    let ratio = unbalanced / balanced;
    outcome(
        ratio >= 10.0 && c1 && c2,
        format!("N=2 E01 balanced {balanced:.4e}, with 2 GHz imbalance {unbalanced:.4e} GHz; ratio {ratio:.1} (>= 10)"),
    )
}

fn c7_lmg_limits() -> Outcome {
    let closed = lmg_spectrum(&LMGProblem::new(1000, 0.0, 1.0, 0.0), 2)
        .unwrap()
        .gap_e10;
    let eps = 0.37;
    let zeeman = lmg_spectrum(&LMGProblem::new(1000, 0.0, 0.0, eps), 2)
        .unwrap()
        .gap_e10;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cross = 0.0f64;
    for n in 1..=12 {
        let (t, j, e) = (
            rng.random_range(-0.3..0.3),
            rng.random_range(0.1..1.0),
            rng.random_range(-1.0..1.0),
        );
        let h = build_spin_hamiltonian(n, t, j, &vec![e; n], &vec![0.0; n]).unwrap();
        let mut a: Vec<f64> = h
            .dicke_block()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        let mut b: Vec<f64> = dense_matrix(&LMGProblem::new(n, t, j, e))
            .symmetric_eigenvalues()
            .iter()
            .map(|x| x + j)
            .collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        cross = a
            .iter()
            .zip(&b)
            .fold(cross, |m, (x, y)| m.max((x - y).abs()));
    }
    // "exactly" is read at floating-point resolution of the O(N J) spectrum
    outcome(
        closed.abs() < 1e-12 && (zeeman - 2.0 * eps).abs() < 1e-12 && cross < 1e-10,
        format!(
            "gap(t=0, eps=0) = {closed:.1e}; |gap(J=0) - 2 eps| = {:.1e}; cross-module max deviation {cross:.1e} GHz (< 1e-10)",
            (zeeman - 2.0 * eps).abs()
        ),
    )
}

fn c8_transition() -> Outcome {
    let start = Instant::now();
    let j = 1.0;
    let grid: Vec<f64> = (0..=300).map(|i| 2.0 * j * (i as f64 * 0.005)).collect();
    let scans: Vec<_> = [50, 200, 2000]
        .into_iter()
        .map(|n| transition_scan(n, j, &grid).unwrap())
        .collect();
    let est: Vec<f64> = scans
        .iter()
        .map(|s| s.estimate_ratio.unwrap_or(f64::NAN))
        .collect();
    let monotone = est[0] < est[1] && est[1] < est[2] && est[2] <= 1.05;
    let within = (est[2] - 1.0).abs() <= 0.05;
    let tracking = scans[2]
        .rows
        .iter()
        .filter(|r| r.eps_over_2j >= 0.1 && r.eps_over_2j <= 0.9)
        .map(|r| (r.sz_mean - r.eps_over_2j).abs() / r.eps_over_2j)
        .fold(0.0f64, f64::max);
    let t = start.elapsed();
    outcome(
        within && monotone && tracking <= 0.05 && t < Duration::from_secs(120),
        format!(
            "estimates N=50/200/2000: {:.3}/{:.3}/{:.3} (N=2000 within 5% of 1, increasing); max relative <Sz>/S deviation for 0.1 <= eps/2J <= 0.9: {tracking:.4} (<= 0.05); {t:.2?} (< 2 min)",
            est[0], est[1], est[2]
        ),
    )
}

fn c9_charge_map() -> Outcome {
    let base = CircuitSpec::uniform(2, InterferometerLoop::cos2phi(10.0), 200.0, 10.0);
    let trunc = Truncation::default();
    let solve = |a: f64, b: f64| {
        let mut s = base.clone();
        s.loops[0].offset_charge = a;
        s.loops[1].offset_charge = b;
        converged_spectrum(&s, &trunc, 3).unwrap()
    };
    let axis = [-0.5, -0.25, 0.0, 0.25, 0.5];
    let mut map = Vec::new();
    for &a in &axis {
        for &b in &axis {
            map.push(((a, b), solve(a, b)));
        }
    }
    let at = |a: f64, b: f64| &map.iter().find(|((x, y), _)| *x == a && *y == b).unwrap().1;
    let mut even = 0.0f64;
    for ((a, b), r) in &map {
        even = even.max((r.e01 - at(-a, -b).e01).abs());
    }
    let mut periodic = 0.0f64;
    for &(a, b) in &[(0.25, 0.0), (0.0, -0.25), (0.25, 0.5), (-0.5, 0.25)] {
        let r = at(a, b).e01;
        periodic = periodic
            .max((solve(a + 1.0, b).e01 - r).abs())
            .max((solve(a, b + 1.0).e01 - r).abs());
    }
    let (best, gap0) = map
        .iter()
        .map(|(p, r)| (*p, r.gap(2)))
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();
    let origin = at(0.0, 0.0).gap(2);
    outcome(
        even < 1e-9 && periodic < 1e-6 && best == (0.0, 0.0),
        format!(
            "max |E01(ng) - E01(-ng)| = {even:.1e} (< 1e-9); max period-1 deviation {periodic:.1e} GHz (< 1e-6, truncation-limited); E2-E0 largest at {best:?} ({gap0:.4} GHz; origin {origin:.4})"
        ),
    )
}

fn c10_cli(dir: &Path) -> Outcome {
    let config = r#"{
  "mode": "sweep-charge",
  "circuit": { "n_loops": 1, "loop": { "arm1": { "ej2": 5 }, "arm2": { "ej2": 5 } }, "ec": 0.2 },
  "levels": 4,
  "flags": { "keep_eigenvectors": true },
  "sweep": [ { "name": "ng", "paths": ["loops[0].offset_charge"], "start": 0, "stop": 1, "points": 41 } ],
  "output": "first"
}"#;
    fs::write(dir.join("c.json"), config).unwrap();
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_jjarray"))
            .current_dir(dir)
            .args(args)
            .status()
            .unwrap()
            .success()
    };
    let mut ok = run(&["run", "c.json"]) && run(&["run", "c.json", "--out", "second"]);
    let first = fs::read(dir.join("first.csv")).unwrap_or_default();
    let identical = ok && first == fs::read(dir.join("second.csv")).unwrap_or_default();
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("first.meta.json")).unwrap_or_default())
            .unwrap_or_default();
    fs::write(dir.join("m.json"), meta["config"].to_string()).unwrap();
    ok &= run(&["run", "m.json", "--out", "third"]);
    let round_trip = ok
        && first == fs::read(dir.join("third.csv")).unwrap_or_default()
        && fs::read(dir.join("first.gp")).ok().map(|g| g.len())
            == fs::read(dir.join("third.gp")).ok().map(|g| g.len());
    outcome(
        identical && round_trip,
        format!(
            "repeat run byte-identical: {identical}; rerun from meta.json config reproduces CSV: {round_trip} ({} bytes)",
            first.len()
        ),
    )
}

fn main() {
    // `cargo test -- --list` and filters: nothing to enumerate
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let tmp = tempfile::TempDir::new().unwrap();
    let criteria: Vec<Criterion> = vec![
        ("capacitance closed form", Box::new(c1_capacitance)),
        ("single-qubit degeneracy", Box::new(c2_single_qubit)),
        ("parity protection", Box::new(c3_parity)),
        ("two-loop spin-model extraction", Box::new(c4_two_loop_fit)),
        ("protection-window broadening", Box::new(c5_window)),
        ("unbalanced-junction destruction", Box::new(c6_imbalance)),
        ("collective-spin exact limits", Box::new(c7_lmg_limits)),
        ("phase transition", Box::new(c8_transition)),
        ("offset-charge maps", Box::new(c9_charge_map)),
        ("command-line determinism", Box::new(|| c10_cli(tmp.path()))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
