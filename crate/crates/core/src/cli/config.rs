//! JSON run configuration: schema, defaults, validation and resolution.
//!
//! ```json
//! {
//!   "mode": "sweep-flux",
//!   "circuit": {
//!     "n_loops": 2,
//!     "loop": { "arm1": { "ej1": 125, "ej2": 5 }, "arm2": { "ej1": 125, "ej2": 5 } },
//!     "c_big": 200, "c_small": 10
//!   },
//!   "truncation": { "n_max": 8 },
//!   "levels": 4,
//!   "sweep": [ { "paths": ["loops[*].flux"], "start": 0.49, "stop": 0.51, "points": 41 } ],
//!   "flags": { "linearized_flux_error": true, "flux_slope": 250 },
//!   "output": "out/window_n2"
//! }
//! ```
//!
//! A circuit is either `n_loops` copies of a `loop` template or an explicit
//! `loops` list; `ec` (GHz) may replace `c_small` and sets `C_S` so that
//! `e²/(2h C_S) = ec`. Loops default to zero arms at half flux and zero offset
//! charge. Sweep axes form a Cartesian grid with the first axis outermost; an
//! axis bound to several paths moves them together.

use serde::{Deserialize, Serialize};

use crate::charge_basis::Truncation;
use crate::circuit::{CircuitSpec, InterferometerLoop, JunctionArm};
use crate::giant_spin::LMGProblem;
use crate::interferometer::FluxErrorModel;
use crate::units::capacitance_for_charging_energy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Spectrum,
    SweepCharge,
    SweepFlux,
    FitTb,
    LmgScan,
    Capmat,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArmConfig {
    pub ej1: f64,
    pub ej2: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    #[serde(default)]
    pub arm1: ArmConfig,
    #[serde(default)]
    pub arm2: ArmConfig,
    #[serde(default = "half")]
    pub flux: f64,
    #[serde(default)]
    pub offset_charge: f64,
}

impl LoopConfig {
    fn to_loop(self) -> InterferometerLoop {
        InterferometerLoop {
            arm1: JunctionArm::new(self.arm1.ej1, self.arm1.ej2),
            arm2: JunctionArm::new(self.arm2.ej1, self.arm2.ej2),
            flux: self.flux,
            offset_charge: self.offset_charge,
        }
    }

    fn from_loop(lp: &InterferometerLoop) -> Self {
        Self {
            arm1: ArmConfig {
                ej1: lp.arm1.ej1,
                ej2: lp.arm1.ej2,
            },
            arm2: ArmConfig {
                ej1: lp.arm2.ej1,
                ej2: lp.arm2.ej2,
            },
            flux: lp.flux,
            offset_charge: lp.offset_charge,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_loops: Option<usize>,
    #[serde(default, rename = "loop", skip_serializing_if = "Option::is_none")]
    pub template: Option<LoopConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loops: Option<Vec<LoopConfig>>,
    #[serde(default)]
    pub c_big: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_small: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ec: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Flags {
    /// Use the linearized flux-error model instead of exact interference.
    pub linearized_flux_error: bool,
    /// Slope (GHz per flux quantum) of the linearized `cos φ` coefficient.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux_slope: Option<f64>,
    /// Retain eigenvectors and report Cooper-pair parity per level.
    pub keep_eigenvectors: bool,
    /// Gap threshold, as a fraction of `4J`, for the transition estimate.
    pub gap_threshold: f64,
}

impl Default for Flags {
    fn default() -> Self {
        Self {
            linearized_flux_error: false,
            flux_slope: None,
            keep_eigenvectors: false,
            gap_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Column header; defaults to the paths joined by `+`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub paths: Vec<String>,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepAxis {
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.paths.join("+"))
    }

    /// Equally spaced values with both endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmgConfig {
    pub n: usize,
    #[serde(default)]
    pub t: f64,
    pub j: f64,
    #[serde(default)]
    pub epsilon: f64,
}

impl LmgConfig {
    pub fn problem(&self) -> LMGProblem {
        LMGProblem::new(self.n, self.t, self.j, self.epsilon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// Odd number of offset-charge points per axis on `[0, 1/2]`.
    pub grid_points: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { grid_points: 9 }
    }
}

fn default_levels() -> usize {
    6
}

fn default_output() -> String {
    "jjarray_out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitConfig>,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default)]
    pub sweep: Vec<SweepAxis>,
    #[serde(default = "default_output")]
    pub output: String,
    #[serde(default)]
    pub flags: Flags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lmg: Option<LmgConfig>,
    #[serde(default)]
    pub fit: FitConfig,
}

/// Which loops a path addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopSel {
    All,
    One(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopField {
    Flux,
    OffsetCharge,
    /// `(arm 1|2, harmonic 1|2)`.
    Ej(u8, u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmgField {
    Epsilon,
    T,
    J,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Loop(LoopSel, LoopField),
    CBig,
    CSmall,
    Lmg(LmgField),
}

/// Parse a sweep parameter path such as `loops[*].flux`,
/// `loops[1].arm2.ej1`, `c_big` or `lmg.epsilon`.
pub fn parse_path(path: &str) -> Option<Target> {
    match path {
        "c_big" => return Some(Target::CBig),
        "c_small" => return Some(Target::CSmall),
        "lmg.epsilon" => return Some(Target::Lmg(LmgField::Epsilon)),
        "lmg.t" => return Some(Target::Lmg(LmgField::T)),
        "lmg.j" => return Some(Target::Lmg(LmgField::J)),
        _ => {}
    }
    let rest = path.strip_prefix("loops[")?;
    let (sel, field) = rest.split_once("].")?;
    let sel = if sel == "*" {
        LoopSel::All
    } else {
        LoopSel::One(sel.parse().ok()?)
    };
    let field = match field {
        "flux" => LoopField::Flux,
        "offset_charge" => LoopField::OffsetCharge,
        "arm1.ej1" => LoopField::Ej(1, 1),
        "arm1.ej2" => LoopField::Ej(1, 2),
        "arm2.ej1" => LoopField::Ej(2, 1),
        "arm2.ej2" => LoopField::Ej(2, 2),
        _ => return None,
    };
    Some(Target::Loop(sel, field))
}

/// Set one parameter of a circuit or giant-spin problem.
pub fn assign(
    target: Target,
    value: f64,
    spec: Option<&mut CircuitSpec>,
    lmg: Option<&mut LMGProblem>,
) {
    match target {
        Target::Loop(sel, field) => {
            if let Some(spec) = spec {
                for (i, lp) in spec.loops.iter_mut().enumerate() {
                    if sel == LoopSel::All || sel == LoopSel::One(i) {
                        match field {
                            LoopField::Flux => lp.flux = value,
                            LoopField::OffsetCharge => lp.offset_charge = value,
                            LoopField::Ej(arm, h) => {
                                let a = if arm == 1 { &mut lp.arm1 } else { &mut lp.arm2 };
                                if h == 1 {
                                    a.ej1 = value;
                                } else {
                                    a.ej2 = value;
                                }
                            }
                        }
                    }
                }
            }
        }
        Target::CBig => {
            if let Some(spec) = spec {
                spec.c_big = value;
            }
        }
        Target::CSmall => {
            if let Some(spec) = spec {
                spec.c_small = value;
            }
        }
        Target::Lmg(f) => {
            if let Some(p) = lmg {
                match f {
                    LmgField::Epsilon => p.epsilon = value,
                    LmgField::T => p.t = value,
                    LmgField::J => p.j = value,
                }
            }
        }
    }
}

/// Parse JSON text; syntax, type and unknown-key errors carry line and column.
pub fn parse(text: &str) -> Result<SweepConfig, Vec<String>> {
    serde_json::from_str(text).map_err(|e| vec![format!("config: {e}")])
}

impl SweepConfig {
    /// Build the circuit, applying the flux-error flags.
    pub fn circuit_spec(&self) -> Result<CircuitSpec, Vec<String>> {
        let c = self
            .circuit
            .as_ref()
            .ok_or_else(|| vec![format!("circuit: required for mode {:?}", self.mode)])?;
        let mut errs = Vec::new();
        let loops: Vec<InterferometerLoop> = match (&c.loops, c.n_loops, &c.template) {
            (Some(ls), None, None) => ls.iter().map(|l| l.to_loop()).collect(),
            (None, Some(n), Some(t)) => vec![t.to_loop(); n],
            (None, Some(n), None) => vec![
                LoopConfig {
                    arm1: ArmConfig::default(),
                    arm2: ArmConfig::default(),
                    flux: 0.5,
                    offset_charge: 0.0
                }
                .to_loop();
                n
            ],
            _ => {
                errs.push(
                    "circuit: give either `loops` or `n_loops` (with an optional `loop` template), not both"
                        .into(),
                );
                Vec::new()
            }
        };
        if c.n_loops == Some(0) || c.loops.as_ref().is_some_and(Vec::is_empty) {
            errs.push("circuit.n_loops: at least one loop is required (N >= 1)".into());
        }
        let c_small = match (c.c_small, c.ec) {
            (Some(cs), None) => {
                if !(cs > 0.0 && cs.is_finite()) {
                    errs.push(format!(
                        "circuit.c_small: must be > 0 fF (C_S > 0), got {cs}"
                    ));
                }
                cs
            }
            (None, Some(ec)) => {
                if !(ec > 0.0 && ec.is_finite()) {
                    errs.push(format!("circuit.ec: must be > 0 GHz, got {ec}"));
                }
                capacitance_for_charging_energy(ec)
            }
            _ => {
                errs.push("circuit: give exactly one of `c_small` (fF) or `ec` (GHz)".into());
                f64::NAN
            }
        };
        if !(c.c_big >= 0.0 && c.c_big.is_finite()) {
            errs.push(format!(
                "circuit.c_big: must be >= 0 fF (C_B >= 0), got {}",
                c.c_big
            ));
        }
        if !errs.is_empty() {
            return Err(errs);
        }
        let model = if self.flags.linearized_flux_error {
            FluxErrorModel::Linearized {
                slope: self.flags.flux_slope,
            }
        } else {
            FluxErrorModel::Exact
        };
        let spec = CircuitSpec::new(loops, c.c_big, c_small).with_flux_model(model);
        spec.validate().map_err(|e| vec![format!("circuit: {e}")])?;
        Ok(spec)
    }

    /// Schema and range checks; returns the fully resolved configuration.
    pub fn resolve(&self) -> Result<SweepConfig, Vec<String>> {
        let mut errs: Vec<String> = Vec::new();
        let needs_circuit = self.mode != Mode::LmgScan;
        let spec = if needs_circuit {
            match self.circuit_spec() {
                Ok(s) => Some(s),
                Err(e) => {
                    errs.extend(e);
                    None
                }
            }
        } else {
            if self.circuit.is_some() {
                errs.push("circuit: not used by mode lmg-scan".into());
            }
            None
        };
        if let Err(e) = self.truncation.validate() {
            errs.push(format!("truncation: {e}"));
        }
        if self.levels < 2 {
            errs.push(format!("levels: must be >= 2, got {}", self.levels));
        }
        if !(self.flags.gap_threshold >= 0.0 && self.flags.gap_threshold.is_finite()) {
            errs.push("flags.gap_threshold: must be finite and >= 0".into());
        }
        if self.flags.flux_slope.is_some_and(|s| !s.is_finite()) {
            errs.push("flags.flux_slope: must be finite".into());
        }
        if self.output.is_empty() {
            errs.push("output: must be a non-empty path prefix".into());
        }
        match (self.mode, &self.lmg) {
            (Mode::LmgScan, None) => errs.push("lmg: required for mode lmg-scan".into()),
            (Mode::LmgScan, Some(l)) => {
                if let Err(e) = l.problem().validate() {
                    errs.push(e.to_string());
                }
            }
            (_, Some(_)) => errs.push("lmg: only used by mode lmg-scan".into()),
            _ => {}
        }
        if self.mode == Mode::FitTb {
            let g = self.fit.grid_points;
            if g < 5 || g.is_multiple_of(2) {
                errs.push(format!("fit.grid_points: must be odd and >= 5, got {g}"));
            }
            if let Some(s) = &spec {
                match s.n_loops() {
                    1 => {}
                    2 if self.levels >= 4 => {}
                    2 => errs.push("levels: two-loop fit needs >= 4 levels".into()),
                    n => errs.push(format!("circuit: fit-tb supports 1 or 2 loops, got {n}")),
                }
            }
        }
        if self.mode == Mode::Capmat && !self.sweep.is_empty() {
            errs.push("sweep: mode capmat takes no sweep axes".into());
        }
        let n_loops = spec.as_ref().map(CircuitSpec::n_loops).unwrap_or(0);
        for (i, ax) in self.sweep.iter().enumerate() {
            let tag = format!("sweep[{i}] ({})", ax.label());
            if ax.points < 2 {
                errs.push(format!("{tag}.points: must be >= 2, got {}", ax.points));
            }
            if !ax.start.is_finite() || !ax.stop.is_finite() {
                errs.push(format!("{tag}: start and stop must be finite"));
            }
            if ax.paths.is_empty() {
                errs.push(format!(
                    "{tag}.paths: at least one parameter path is required"
                ));
            }
            for p in &ax.paths {
                let Some(target) = parse_path(p) else {
                    errs.push(format!("{tag}.paths: unknown parameter path `{p}`"));
                    continue;
                };
                if let Target::Loop(LoopSel::One(k), _) = target {
                    if needs_circuit && k >= n_loops {
                        errs.push(format!(
                            "{tag}.paths: `{p}` addresses loop {k} of {n_loops}"
                        ));
                    }
                }
                let allowed = match (self.mode, target) {
                    (Mode::SweepCharge, Target::Loop(_, LoopField::OffsetCharge)) => true,
                    (Mode::SweepCharge, _) => false,
                    (Mode::SweepFlux, Target::Loop(_, LoopField::Flux)) => true,
                    (Mode::SweepFlux, _) => false,
                    (Mode::LmgScan, Target::Lmg(_)) => true,
                    (Mode::LmgScan, _) => false,
                    (Mode::FitTb, Target::Loop(_, LoopField::OffsetCharge)) => false,
                    (_, Target::Lmg(_)) => false,
                    _ => true,
                };
                if !allowed {
                    errs.push(format!(
                        "{tag}.paths: `{p}` cannot be swept in mode {:?}",
                        self.mode
                    ));
                }
            }
        }
        if !errs.is_empty() {
            return Err(errs);
        }
        let mut resolved = self.clone();
        if let Some(spec) = spec {
            resolved.circuit = Some(CircuitConfig {
                n_loops: None,
                template: None,
                loops: Some(spec.loops.iter().map(LoopConfig::from_loop).collect()),
                c_big: spec.c_big,
                c_small: Some(spec.c_small),
                ec: None,
            });
        }
        Ok(resolved)
    }

    pub fn grid_len(&self) -> usize {
        self.sweep.iter().map(|a| a.points).product()
    }

    /// Axis values of grid point `index` (first axis outermost).
    pub fn grid_point(&self, mut index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.sweep.len()];
        for (slot, ax) in out.iter_mut().zip(&self.sweep).rev() {
            let vals = ax.values();
            *slot = vals[index % ax.points];
            index /= ax.points;
        }
        out
    }
}
