//! Interferometer potentials in harmonic form.
//!
//! Each arm contributes `V_k(φ) = -E_J,1 cos φ + E_J,2 cos 2φ`; a loop
//! threaded by flux `f` (in flux quanta) sums `V_1(φ - πf) + V_2(φ + πf)`.
//! The result is written as `a1 cos φ + b1 sin φ + a2 cos 2φ + b2 sin 2φ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::{InterferometerLoop, JunctionArm};
use crate::error::{Error, Result};
use crate::trig::{cos_pi, sin_pi};

/// Josephson potential of one loop, in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HarmonicPotential {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl HarmonicPotential {
    pub fn eval(&self, phi: f64) -> f64 {
        self.a1 * phi.cos()
            + self.b1 * phi.sin()
            + self.a2 * (2.0 * phi).cos()
            + self.b2 * (2.0 * phi).sin()
    }

    /// True when only the `cos 2φ` / `sin 2φ` terms survive, i.e. the loop
    /// conserves Cooper-pair parity.
    pub fn is_parity_conserving(&self) -> bool {
        self.a1 == 0.0 && self.b1 == 0.0
    }
}

/// How the flux dependence of the first harmonic is modelled.
///
/// `Exact` uses the full angle-addition result. `Linearized` expands every
/// coefficient to first order in `δf = f - 1/2` and replaces the first
/// harmonic by `-slope · δf · cos φ`, where `slope` defaults to `2 E_J,1`
/// (mean of the two arms).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FluxErrorModel {
    #[default]
    Exact,
    Linearized {
        /// GHz per flux quantum.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        slope: Option<f64>,
    },
}

impl FluxErrorModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            FluxErrorModel::Linearized { slope: Some(s) } if !s.is_finite() => Err(
                Error::InvalidSpec("linearized flux-error slope must be finite".into()),
            ),
            _ => Ok(()),
        }
    }
}

/// Single-arm potential `-E_J,1 cos φ + E_J,2 cos 2φ`.
pub fn arm_potential(arm: &JunctionArm, phi: f64) -> f64 {
    -arm.ej1 * phi.cos() + arm.ej2 * (2.0 * phi).cos()
}

/// Harmonic expansion of `V_1(φ - πf) + V_2(φ + πf)`.
pub fn loop_potential(lp: &InterferometerLoop) -> HarmonicPotential {
    loop_potential_with(lp, &FluxErrorModel::Exact)
}

pub fn loop_potential_with(lp: &InterferometerLoop, model: &FluxErrorModel) -> HarmonicPotential {
    let (p, q) = (&lp.arm1, &lp.arm2);
    let sum1 = p.ej1 + q.ej1;
    let diff1 = p.ej1 - q.ej1;
    let sum2 = p.ej2 + q.ej2;
    let diff2 = p.ej2 - q.ej2;
    match model {
        FluxErrorModel::Exact => {
            let f = lp.flux;
            HarmonicPotential {
                a1: -sum1 * cos_pi(f),
                b1: -diff1 * sin_pi(f),
                a2: sum2 * cos_pi(2.0 * f),
                b2: diff2 * sin_pi(2.0 * f),
            }
        }
        FluxErrorModel::Linearized { slope } => {
            let df = lp.flux - 0.5;
            let slope = slope.unwrap_or(sum1);
            HarmonicPotential {
                a1: -slope * df,
                b1: -diff1,
                a2: -sum2,
                b2: -diff2 * 2.0 * PI * df,
            }
        }
    }
}

/// Andreev channels of a short junction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet {
    pub transmissions: Vec<f64>,
    /// Superconducting gap Δ in GHz.
    pub gap: f64,
}

impl ChannelSet {
    pub fn new(transmissions: Vec<f64>, gap: f64) -> Result<Self> {
        if transmissions.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidArgument(
                "transmissions must lie in [0, 1]".into(),
            ));
        }
        if !(gap > 0.0 && gap.is_finite()) {
            return Err(Error::InvalidArgument("gap must be positive".into()));
        }
        Ok(Self { transmissions, gap })
    }
}

/// `-Δ Σ_m sqrt(1 - T_m sin²(φ/2))`.
pub fn short_junction_energy(channels: &ChannelSet, phi: f64) -> f64 {
    let s2 = (0.5 * phi).sin().powi(2);
    -channels.gap
        * channels
            .transmissions
            .iter()
            .map(|t| (1.0 - t * s2).max(0.0).sqrt())
            .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicFit {
    pub ej1: f64,
    pub ej2: f64,
    /// RMS of the cosine coefficients of harmonics 3 through 6.
    pub residual: f64,
}

const FIT_NODES: usize = 2048;

/// First two cosine coefficients of the short-junction energy, mapped onto
/// `-E_J,1 cos φ + E_J,2 cos 2φ`. The trapezoidal rule on a uniform periodic
/// grid is spectrally accurate here.
pub fn fit_harmonics(channels: &ChannelSet) -> HarmonicFit {
    let h = 2.0 * PI / FIT_NODES as f64;
    let samples: Vec<f64> = (0..FIT_NODES)
        .map(|j| short_junction_energy(channels, j as f64 * h))
        .collect();
    let coeff = |k: usize| -> f64 {
        samples
            .iter()
            .enumerate()
            .map(|(j, e)| e * (k as f64 * j as f64 * h).cos())
            .sum::<f64>()
            * 2.0
            / FIT_NODES as f64
    };
    let higher: f64 = (3..=6).map(|k| coeff(k).powi(2)).sum::<f64>() / 4.0;
    HarmonicFit {
        ej1: -coeff(1),
        ej2: coeff(2),
        residual: higher.sqrt(),
    }
}
