//! Spectral extraction of hopping parameters.
//!
//! Hoppings are Fourier components of the bands over the offset-charge zone,
//! so the spin-model parameters follow from a least-squares fit of model
//! eigenvalues to band energies, without constructing localized orbitals.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::bands::BandGrid;
use crate::error::{Error, Result};
use crate::trig::cos_pi;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinModelFit {
    /// Single-loop hop, or the parallel hop of the two-loop model. Always ≤ 0.
    pub t: f64,
    pub t_plus: f64,
    pub t_minus: f64,
    /// `J = -t_minus`.
    pub j: f64,
    /// Longitudinal fields. For one loop, half of `E_01` at `n_g = 1/2` (the
    /// grid minimum if that point is absent); empty for two loops.
    pub epsilon: Vec<f64>,
    pub residual_rms: f64,
    /// Largest spread of the fitted model levels over the grid.
    pub bandwidth: f64,
    /// Grid points entering the fit.
    pub points_used: usize,
}

fn find_point(grid: &BandGrid, target: &[f64]) -> Option<usize> {
    (0..grid.len()).find(|&i| {
        grid.point(i)
            .iter()
            .zip(target)
            .all(|(a, b)| (a - b).abs() < 1e-12)
    })
}

/// `E_01(n_g) = |4t cos(π n_g)|` fit of a single-loop band grid.
pub fn extract_single_loop(bands: &BandGrid) -> Result<SpinModelFit> {
    if bands.n_axes() != 1 || bands.n_bands() < 2 {
        return Err(Error::InvalidArgument(
            "single-loop extraction needs a one-axis grid with at least 2 bands".into(),
        ));
    }
    let origin = find_point(bands, &[0.0])
        .ok_or_else(|| Error::InvalidArgument("band grid must contain n_g = 0".into()))?;
    let e01 = |i: usize| bands.energies[i][1] - bands.energies[i][0];
    let e0 = e01(origin);
    if e0 < 1e-10 {
        return Err(Error::FitDegenerate(format!(
            "E01(n_g = 0) = {e0:e} GHz is too small to fix the hop"
        )));
    }
    let t = -e0 / 4.0;
    let n = bands.len();
    let ss: f64 = (0..n)
        .map(|i| (e01(i) - (4.0 * t * cos_pi(bands.point(i)[0])).abs()).powi(2))
        .sum();
    let floor = match find_point(bands, &[0.5]) {
        Some(i) => e01(i),
        None => (0..n).map(e01).fold(f64::INFINITY, f64::min),
    };
    Ok(SpinModelFit {
        t,
        t_plus: 0.0,
        t_minus: 0.0,
        j: 0.0,
        epsilon: vec![0.5 * floor],
        residual_rms: (ss / n as f64).sqrt(),
        bandwidth: e0,
        points_used: n,
    })
}

/// Spin labels of the two-loop model, in a fixed order.
const LABELS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];

/// Feature row of level `(s1, s2)` against `(t_par, t_plus, t_minus)`.
fn features(ng: &[f64], s1: f64, s2: f64) -> [f64; 3] {
    let c1 = cos_pi(ng[0]);
    let c2 = cos_pi(ng[1]);
    let cp = cos_pi(ng[0] + ng[1]);
    let cm = cos_pi(ng[0] - ng[1]);
    [
        2.0 * (c1 * s1 + c2 * s2),
        2.0 * cp * s1 * s2,
        2.0 * cm * s1 * s2,
    ]
}

/// Model levels `E(s1, s2) = 2t_∥(c1 s1 + c2 s2) + (2t₊c₊ + 2t₋c₋) s1 s2`,
/// in `LABELS` order.
pub fn two_loop_levels(params: [f64; 3], ng: &[f64]) -> [f64; 4] {
    LABELS.map(|(s1, s2)| {
        let f = features(ng, s1, s2);
        f[0] * params[0] + f[1] * params[1] + f[2] * params[2]
    })
}

/// Label permutation that sorts the model levels ascending (stable).
fn sorted_labels(levels: &[f64; 4]) -> [usize; 4] {
    let mut idx = [0, 1, 2, 3];
    idx.sort_by(|&a, &b| levels[a].total_cmp(&levels[b]));
    idx
}

/// True if two levels tie (relative to `scale`) while belonging to distinct
/// feature rows, so sorted-order labelling is ambiguous there.
fn ambiguous(params: [f64; 3], ng: &[f64], scale: f64) -> bool {
    let lv = two_loop_levels(params, ng);
    for a in 0..4 {
        for b in a + 1..4 {
            if (lv[a] - lv[b]).abs() <= 1e-9 * scale {
                let (fa, fb) = (
                    features(ng, LABELS[a].0, LABELS[a].1),
                    features(ng, LABELS[b].0, LABELS[b].1),
                );
                if fa.iter().zip(&fb).any(|(x, y)| (x - y).abs() > 1e-12) {
                    return true;
                }
            }
        }
    }
    false
}

struct LsqOutcome {
    params: [f64; 3],
    rms: f64,
    used: usize,
}

/// One labelling pass: assign sorted data to sorted model labels, then solve
/// the linear least-squares problem.
fn lsq_pass(points: &[(Vec<f64>, [f64; 4])], guess: [f64; 3], scale: f64) -> Result<LsqOutcome> {
    let mut rows: Vec<[f64; 3]> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut used = 0;
    for (ng, data) in points {
        if ambiguous(guess, ng, scale) {
            continue;
        }
        used += 1;
        let order = sorted_labels(&two_loop_levels(guess, ng));
        for (rank, &label) in order.iter().enumerate() {
            let (s1, s2) = LABELS[label];
            rows.push(features(ng, s1, s2));
            rhs.push(data[rank]);
        }
    }
    if rows.len() < 3 {
        return Err(Error::FitDegenerate(
            "too few unambiguous grid points for the two-loop fit".into(),
        ));
    }
    let a = DMatrix::from_fn(rows.len(), 3, |i, j| rows[i][j]);
    let b = DVector::from_vec(rhs);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin <= 1e-10 * smax {
        return Err(Error::FitDegenerate(format!(
            "design matrix is rank deficient (singular values {:?})",
            svd.singular_values.as_slice()
        )));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::FitDegenerate(e.to_string()))?;
    let r = &a * &x - &b;
    Ok(LsqOutcome {
        params: [x[0], x[1], x[2]],
        rms: (r.norm_squared() / r.len() as f64).sqrt(),
        used,
    })
}

/// Fit `(t_∥, t₊, t₋)` of the two-loop spin model to the four lowest bands.
///
/// Each point's levels are shifted to zero mean (the model is traceless).
/// Labels are assigned by sorted order under the current parameters and the
/// assignment is iterated to a fixed point from several starting guesses,
/// keeping the lowest residual.
pub fn extract_two_loop(bands: &BandGrid) -> Result<SpinModelFit> {
    if bands.n_axes() != 2 || bands.n_bands() < 4 {
        return Err(Error::InvalidArgument(
            "two-loop extraction needs a two-axis grid with at least 4 bands".into(),
        ));
    }
    let points: Vec<(Vec<f64>, [f64; 4])> = (0..bands.len())
        .map(|i| {
            let e = &bands.energies[i];
            let mean = (e[0] + e[1] + e[2] + e[3]) / 4.0;
            (
                bands.point(i),
                [e[0] - mean, e[1] - mean, e[2] - mean, e[3] - mean],
            )
        })
        .collect();
    let spread = points.iter().map(|(_, d)| d[3] - d[0]).fold(0.0, f64::max);
    if !(spread > 0.0) {
        return Err(Error::FitDegenerate("bands carry no spread".into()));
    }
    let w = spread / 8.0;
    let guesses = [
        [-w, 0.0, 0.0],
        [-w / 50.0, 0.0, -w],
        [-w / 50.0, 0.0, w],
        [-w / 50.0, -w, 0.0],
        [-w / 50.0, w, 0.0],
        [-w / 2.0, 0.0, -w / 2.0],
        [-w / 2.0, 0.0, w / 2.0],
    ];
    let mut best: Option<LsqOutcome> = None;
    let mut last_err = None;
    for g in guesses {
        let mut guess = g;
        let mut outcome = None;
        for _ in 0..50 {
            match lsq_pass(&points, guess, spread) {
                Ok(o) => {
                    let same = o
                        .params
                        .iter()
                        .zip(&guess)
                        .all(|(a, b)| (a - b).abs() <= 1e-13 * spread);
                    guess = o.params;
                    outcome = Some(o);
                    if same {
                        break;
                    }
                }
                Err(e) => {
                    last_err = Some(e);
                    outcome = None;
                    break;
                }
            }
        }
        if let Some(o) = outcome {
            if best.as_ref().is_none_or(|b| o.rms < b.rms) {
                best = Some(o);
            }
        }
    }
    let best = best.ok_or_else(|| last_err.unwrap_or(Error::FitDegenerate("no fit".into())))?;
    // (s1, s2) → (-s1, -s2) flips only the sign of t_∥
    let [tp, tplus, tminus] = best.params;
    let params = [-tp.abs(), tplus, tminus];
    let bandwidth = points
        .iter()
        .map(|(ng, _)| {
            let lv = two_loop_levels(params, ng);
            let hi = lv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = lv.iter().copied().fold(f64::INFINITY, f64::min);
            hi - lo
        })
        .fold(0.0, f64::max);
    Ok(SpinModelFit {
        t: params[0],
        t_plus: params[1],
        t_minus: params[2],
        j: -params[2],
        epsilon: Vec::new(),
        residual_rms: best.rms,
        bandwidth,
        points_used: best.used,
    })
}

/// Bands of the single-loop model `2t cos(π n_g) σ̃x - ε σz`.
pub fn single_loop_bands(t: f64, epsilon: f64, axis: Vec<f64>) -> BandGrid {
    let energies = axis
        .iter()
        .map(|&ng| {
            let e = (4.0 * t * t * cos_pi(ng).powi(2) + epsilon * epsilon).sqrt();
            vec![-e, e]
        })
        .collect();
    BandGrid::new(vec![axis], energies).expect("consistent by construction")
}

/// Sorted levels of the two-loop model on the grid spanned by `axes`.
pub fn two_loop_bands(t_par: f64, t_plus: f64, t_minus: f64, axes: [Vec<f64>; 2]) -> BandGrid {
    let axes = axes.to_vec();
    let n: usize = axes.iter().map(Vec::len).product();
    let energies = (0..n)
        .map(|i| {
            let ng = super::bands::grid_point(&axes, i);
            let mut lv = two_loop_levels([t_par, t_plus, t_minus], &ng).to_vec();
            lv.sort_by(f64::total_cmp);
            lv
        })
        .collect();
    BandGrid::new(axes, energies).expect("consistent by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective_spin::bands::half_zone_axis;

    #[test]
    fn single_loop_self_consistency() {
        let g = single_loop_bands(-0.02, 0.0, half_zone_axis(21).unwrap());
        let f = extract_single_loop(&g).unwrap();
        assert!((f.t + 0.02).abs() < 1e-15);
        assert!(f.residual_rms < 1e-12);
        assert!(f.epsilon[0].abs() < 1e-15);
    }

    #[test]
    fn longitudinal_field_shows_as_floor_and_residual() {
        let g = single_loop_bands(-0.02, 0.004, half_zone_axis(21).unwrap());
        let f = extract_single_loop(&g).unwrap();
        assert!((f.epsilon[0] - 0.004).abs() < 1e-12);
        assert!(f.residual_rms > 1e-3);
    }

    #[test]
    fn single_loop_rejects_gapless_origin() {
        let g = single_loop_bands(0.0, 0.0, half_zone_axis(5).unwrap());
        assert!(matches!(
            extract_single_loop(&g),
            Err(Error::FitDegenerate(_))
        ));
    }

    #[test]
    fn two_loop_recovers_protected_parameters() {
        let ax = half_zone_axis(9).unwrap();
        let g = two_loop_bands(-0.05, 0.0, -0.5, [ax.clone(), ax]);
        let f = extract_two_loop(&g).unwrap();
        assert!((f.t + 0.05).abs() < 1e-10, "{f:?}");
        assert!((f.t_minus + 0.5).abs() < 1e-10);
        assert!(f.t_plus.abs() < 1e-10);
        assert!((f.j - 0.5).abs() < 1e-10);
        assert!(f.residual_rms < 1e-12);
    }

    #[test]
    fn two_loop_recovers_unprotected_parameters() {
        let ax = half_zone_axis(9).unwrap();
        let g = two_loop_bands(-0.3, 0.01, 0.02, [ax.clone(), ax]);
        let f = extract_two_loop(&g).unwrap();
        assert!((f.t + 0.3).abs() < 1e-10, "{f:?}");
        assert!((f.t_plus - 0.01).abs() < 1e-10);
        assert!((f.t_minus - 0.02).abs() < 1e-10);
    }

    #[test]
    fn two_loop_rank_deficient_grid() {
        let g = two_loop_bands(-0.05, 0.0, -0.5, [vec![0.5], vec![0.5]]);
        assert!(matches!(extract_two_loop(&g), Err(Error::FitDegenerate(_))));
    }
}
