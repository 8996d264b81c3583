//! Band structures over the offset-charge zone.

use serde::{Deserialize, Serialize};

use crate::charge_basis::{Diagonalizer, Truncation};
use crate::circuit::CircuitSpec;
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};

/// Energies on a Cartesian grid of offset charges, one axis per loop.
///
/// Points are enumerated in mixed radix with axis 0 varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandGrid {
    pub axes: Vec<Vec<f64>>,
    /// `energies[point][band]`, ascending per point.
    pub energies: Vec<Vec<f64>>,
    pub converged: Vec<bool>,
}

impl BandGrid {
    pub fn new(axes: Vec<Vec<f64>>, energies: Vec<Vec<f64>>) -> Result<Self> {
        let expected: usize = axes.iter().map(Vec::len).product();
        if axes.is_empty() || energies.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "band grid expects {expected} points, got {}",
                energies.len()
            )));
        }
        let width = energies.first().map_or(0, Vec::len);
        if width == 0 || energies.iter().any(|e| e.len() != width) {
            return Err(Error::InvalidArgument(
                "every grid point needs the same, non-zero number of bands".into(),
            ));
        }
        let converged = vec![true; energies.len()];
        Ok(Self {
            axes,
            energies,
            converged,
        })
    }

    pub fn n_axes(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn n_bands(&self) -> usize {
        self.energies.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Offset charges at grid point `index`.
    pub fn point(&self, index: usize) -> Vec<f64> {
        grid_point(&self.axes, index)
    }
}

pub(crate) fn grid_point(axes: &[Vec<f64>], mut index: usize) -> Vec<f64> {
    axes.iter()
        .map(|ax| {
            let v = ax[index % ax.len()];
            index /= ax.len();
            v
        })
        .collect()
}

/// `points` equally spaced offset charges on `[0, 1/2]`, endpoints included.
/// The half-zone suffices because bands are even and 1-periodic in each
/// offset charge.
pub fn half_zone_axis(points: usize) -> Result<Vec<f64>> {
    if points < 5 || points.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "grid_points must be odd and >= 5 (got {points})"
        )));
    }
    let step = 0.5 / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                0.5
            } else {
                i as f64 * step
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BandOptions {
    pub truncation: Truncation,
    pub diagonalizer: Diagonalizer,
    pub execution: Execution,
}

/// Lowest `bands` levels on a `grid_points`-per-axis half-zone grid.
pub fn band_structure(spec: &CircuitSpec, grid_points: usize, bands: usize) -> Result<BandGrid> {
    let axis = half_zone_axis(grid_points)?;
    let axes = vec![axis; spec.n_loops()];
    band_structure_on(spec, axes, bands, &BandOptions::default())
}

/// Converged spectrum at every point of an explicit offset-charge grid. The
/// offset charges of `spec` are overwritten point by point.
pub fn band_structure_on(
    spec: &CircuitSpec,
    axes: Vec<Vec<f64>>,
    bands: usize,
    opts: &BandOptions,
) -> Result<BandGrid> {
    if axes.len() != spec.n_loops() || axes.iter().any(Vec::is_empty) {
        return Err(Error::InvalidArgument(format!(
            "need one non-empty offset-charge axis per loop ({} loops, {} axes)",
            spec.n_loops(),
            axes.len()
        )));
    }
    let n_points: usize = axes.iter().map(Vec::len).product();
    let results = map_indexed(opts.execution, n_points, |idx| {
        let mut s = spec.clone();
        for (lp, ng) in s.loops.iter_mut().zip(grid_point(&axes, idx)) {
            lp.offset_charge = ng;
        }
        opts.diagonalizer
            .converged_spectrum(&s, &opts.truncation, bands)
            .map_err(|e| Error::GridPoint {
                index: idx,
                source: Box::new(e),
            })
    });
    let mut energies = Vec::with_capacity(n_points);
    let mut converged = Vec::with_capacity(n_points);
    for r in results {
        let r = r?;
        energies.push(r.energies);
        converged.push(r.converged);
    }
    Ok(BandGrid {
        axes,
        energies,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{InterferometerLoop, JunctionArm};
    use crate::units::capacitance_for_charging_energy;

    #[test]
    fn half_zone_axis_hits_both_ends() {
        let ax = half_zone_axis(9).unwrap();
        assert_eq!(ax[0], 0.0);
        assert_eq!(ax[8], 0.5);
        assert_eq!(ax[4], 0.25);
        assert!(half_zone_axis(4).is_err());
        assert!(half_zone_axis(3).is_err());
    }

    #[test]
    fn free_charge_bands_are_parabolas() {
        let ec = 0.3;
        let lp = InterferometerLoop::cos2phi(0.0)
            .with_arms(JunctionArm::new(0.0, 0.0), JunctionArm::new(0.0, 0.0));
        let spec = CircuitSpec::uniform(1, lp, 0.0, capacitance_for_charging_energy(ec));
        let grid = band_structure(&spec, 5, 3).unwrap();
        for (i, e) in grid.energies.iter().enumerate() {
            let ng = grid.point(i)[0];
            let mut exact: Vec<f64> = (-3..=3)
                .map(|n| 4.0 * ec * (n as f64 - ng).powi(2))
                .collect();
            exact.sort_by(f64::total_cmp);
            for (a, b) in e.iter().zip(&exact) {
                assert!((a - b).abs() < 1e-10, "{ng}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn grid_point_enumeration_is_axis0_fastest() {
        let axes = vec![vec![0.0, 0.1], vec![0.0, 0.2, 0.4]];
        assert_eq!(grid_point(&axes, 1), vec![0.1, 0.0]);
        assert_eq!(grid_point(&axes, 4), vec![0.0, 0.4]);
    }
}
