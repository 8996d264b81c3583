//! Circuit description and capacitance-network algebra.
//!
//! The array has `N + 1` superconducting islands joined by `N`
//! interferometers. Neighbouring islands are coupled by `C_S`; the two end
//! islands are additionally shunted by `C_B`. The Hamiltonian works in branch
//! variables (charge transferred across each interferometer), so the node
//! capacitance matrix is transformed to branch coordinates, the free
//! total-charge mode is dropped and the remaining block is inverted.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferometer::FluxErrorModel;
use crate::units::CHARGING_GHZ_FF;

/// One junction arm of an interferometer: `V(φ) = -ej1 cos φ + ej2 cos 2φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct JunctionArm {
    pub ej1: f64,
    pub ej2: f64,
}

impl JunctionArm {
    pub fn new(ej1: f64, ej2: f64) -> Self {
        Self { ej1, ej2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferometerLoop {
    pub arm1: JunctionArm,
    pub arm2: JunctionArm,
    /// External flux in units of the flux quantum.
    pub flux: f64,
    /// Offset charge in units of 2e.
    pub offset_charge: f64,
}

impl InterferometerLoop {
    /// Balanced loop at half flux acting as a pure `-ej2_total cos 2φ` element.
    pub fn cos2phi(ej2_total: f64) -> Self {
        let arm = JunctionArm::new(0.0, ej2_total / 2.0);
        Self {
            arm1: arm,
            arm2: arm,
            flux: 0.5,
            offset_charge: 0.0,
        }
    }

    pub fn with_flux(mut self, flux: f64) -> Self {
        self.flux = flux;
        self
    }

    pub fn with_offset_charge(mut self, ng: f64) -> Self {
        self.offset_charge = ng;
        self
    }

    pub fn with_arms(mut self, arm1: JunctionArm, arm2: JunctionArm) -> Self {
        self.arm1 = arm1;
        self.arm2 = arm2;
        self
    }

    fn validate(&self, index: usize) -> Result<()> {
        for (name, arm) in [("arm1", &self.arm1), ("arm2", &self.arm2)] {
            if !(arm.ej1 >= 0.0 && arm.ej1.is_finite()) || !(arm.ej2 >= 0.0 && arm.ej2.is_finite())
            {
                return Err(Error::InvalidSpec(format!(
                    "loops[{index}].{name}: harmonic amplitudes must be finite and >= 0"
                )));
            }
        }
        if !self.flux.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "loops[{index}].flux must be finite"
            )));
        }
        if !self.offset_charge.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "loops[{index}].offset_charge must be finite"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub loops: Vec<InterferometerLoop>,
    /// End-to-end shunt capacitance C_B in fF.
    pub c_big: f64,
    /// Neighbour coupling capacitance C_S in fF.
    pub c_small: f64,
    #[serde(default)]
    pub flux_model: FluxErrorModel,
}

impl CircuitSpec {
    pub fn new(loops: Vec<InterferometerLoop>, c_big: f64, c_small: f64) -> Self {
        Self {
            loops,
            c_big,
            c_small,
            flux_model: FluxErrorModel::Exact,
        }
    }

    /// `n` identical copies of `lp`.
    pub fn uniform(n: usize, lp: InterferometerLoop, c_big: f64, c_small: f64) -> Self {
        Self::new(vec![lp; n], c_big, c_small)
    }

    pub fn with_flux_model(mut self, model: FluxErrorModel) -> Self {
        self.flux_model = model;
        self
    }

    pub fn n_loops(&self) -> usize {
        self.loops.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.loops.is_empty() {
            return Err(Error::InvalidSpec("at least one loop is required".into()));
        }
        if !(self.c_small > 0.0 && self.c_small.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "c_small must be > 0 (got {})",
                self.c_small
            )));
        }
        if !(self.c_big >= 0.0 && self.c_big.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "c_big must be >= 0 (got {})",
                self.c_big
            )));
        }
        for (i, lp) in self.loops.iter().enumerate() {
            lp.validate(i)?;
        }
        self.flux_model.validate()
    }

    /// Charging-energy matrix through the numerical node-to-branch reduction.
    pub fn charging_matrix(&self) -> Result<ChargingMatrix> {
        let node = build_node_capacitance(self)?;
        reduce_to_branch(&node, self.n_loops())
    }
}

/// Inverse branch capacitance (fF⁻¹) and charging energies (GHz).
#[derive(Debug, Clone, PartialEq)]
pub struct ChargingMatrix {
    pub inv_cap: DMatrix<f64>,
    /// `E_C^(ij) = e²/(2h) · (C⁻¹)_ij`.
    pub ec: DMatrix<f64>,
}

impl ChargingMatrix {
    pub fn from_inverse(inv_cap: DMatrix<f64>) -> Self {
        let ec = &inv_cap * CHARGING_GHZ_FF;
        Self { inv_cap, ec }
    }

    pub fn dim(&self) -> usize {
        self.inv_cap.nrows()
    }
}

/// `(N+1)×(N+1)` node capacitance matrix, built by stamping each branch
/// capacitor. For `N = 1` the shunt and the coupling capacitor sit on the same
/// branch and add in parallel.
pub fn build_node_capacitance(spec: &CircuitSpec) -> Result<DMatrix<f64>> {
    if spec.c_big == 0.0 && spec.c_small == 0.0 {
        return Err(Error::InvalidSpec(
            "c_big and c_small cannot both vanish".into(),
        ));
    }
    spec.validate()?;
    let n = spec.n_loops();
    let mut c = DMatrix::zeros(n + 1, n + 1);
    let mut stamp = |a: usize, b: usize, cap: f64| {
        c[(a, a)] += cap;
        c[(b, b)] += cap;
        c[(a, b)] -= cap;
        c[(b, a)] -= cap;
    };
    for i in 0..n {
        stamp(i, i + 1, spec.c_small);
    }
    stamp(0, n, spec.c_big);
    Ok(c)
}

/// Node-to-branch transformation matrix: rows `0..N` take differences of
/// neighbouring nodes, the last row is the total (free) mode.
pub fn transformation_matrix(n: usize) -> DMatrix<f64> {
    let mut r = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        r[(i, i)] = -1.0;
        r[(i, i + 1)] = 1.0;
    }
    for j in 0..=n {
        r[(n, j)] = 1.0;
    }
    r
}

fn invert_checked(m: DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let lu = m.lu();
    let u = lu.u();
    let diag = u.diagonal();
    let max = diag.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let min = diag.iter().fold(f64::INFINITY, |a, x| a.min(x.abs()));
    if !(max > 0.0) || min <= 1e-13 * max {
        return Err(Error::SingularMatrix(what.to_string()));
    }
    lu.try_inverse()
        .ok_or_else(|| Error::SingularMatrix(what.to_string()))
}

/// Transform the node matrix to branch coordinates, drop the free mode and
/// invert the `N×N` branch block by LU with partial pivoting.
pub fn reduce_to_branch(node_cap: &DMatrix<f64>, n: usize) -> Result<ChargingMatrix> {
    if node_cap.nrows() != n + 1 || node_cap.ncols() != n + 1 {
        return Err(Error::InvalidArgument(format!(
            "node capacitance must be {0}x{0}, got {1}x{2}",
            n + 1,
            node_cap.nrows(),
            node_cap.ncols()
        )));
    }
    let r_inv = invert_checked(transformation_matrix(n), "transformation matrix")?;
    let branch_full = r_inv.transpose() * node_cap * &r_inv;
    let branch = branch_full.view((0, 0), (n, n)).into_owned();
    let mut inv = invert_checked(branch, "branch capacitance matrix")?;
    // symmetrise away round-off
    let t = inv.transpose();
    inv = (inv + t) * 0.5;
    Ok(ChargingMatrix::from_inverse(inv))
}

/// `κ·Q + I/C_S` with `κ = -C_B / (C_S (C_S + N C_B))`.
pub fn closed_form_inverse(n: usize, c_big: f64, c_small: f64) -> Result<DMatrix<f64>> {
    if !(c_small > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "c_small must be > 0 (got {c_small})"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidSpec("at least one loop is required".into()));
    }
    let kappa = -c_big / (c_small * (c_small + c_big * n as f64));
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            kappa + 1.0 / c_small
        } else {
            kappa
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, cb: f64, cs: f64) -> CircuitSpec {
        CircuitSpec::uniform(n, InterferometerLoop::cos2phi(10.0), cb, cs)
    }

    #[test]
    fn node_matrix_two_loops() {
        let c = build_node_capacitance(&spec(2, 200.0, 10.0)).unwrap();
        let want = DMatrix::from_row_slice(
            3,
            3,
            &[
                210.0, -10.0, -200.0, -10.0, 20.0, -10.0, -200.0, -10.0, 210.0,
            ],
        );
        assert_eq!(c, want);
    }

    #[test]
    fn node_matrix_single_loop_is_parallel_combination() {
        let c = build_node_capacitance(&spec(1, 100.0, 10.0)).unwrap();
        assert_eq!(
            c,
            DMatrix::from_row_slice(2, 2, &[110.0, -110.0, -110.0, 110.0])
        );
        // ½C_S(V0-V1)² + ½C_B(V0-V1)² for V = (1, 0)
        let v = nalgebra::DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!((v.transpose() * &c * &v)[0] / 2.0, 0.5 * 10.0 + 0.5 * 100.0);
    }

    #[test]
    fn node_matrix_interior_structure() {
        let c = build_node_capacitance(&spec(4, 300.0, 7.0)).unwrap();
        for i in 1..4 {
            assert_eq!(c[(i, i)], 14.0);
        }
        assert_eq!(c[(0, 4)], -300.0);
        assert_eq!(c[(0, 0)], 307.0);
        assert_eq!(c[(2, 3)], -7.0);
    }

    #[test]
    fn zero_capacitances_rejected() {
        assert!(matches!(
            build_node_capacitance(&spec(3, 0.0, 0.0)),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn branch_inverse_two_loops() {
        let cm = spec(2, 200.0, 10.0).charging_matrix().unwrap();
        assert!((cm.inv_cap[(0, 0)] - 210.0 / 4100.0).abs() < 1e-15);
        assert!((cm.inv_cap[(0, 1)] + 200.0 / 4100.0).abs() < 1e-15);
        assert!((cm.inv_cap[(1, 1)] - 210.0 / 4100.0).abs() < 1e-15);
    }

    #[test]
    fn branch_inverse_three_loops() {
        let cm = spec(3, 350.0, 10.0).charging_matrix().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j {
                    710.0 / 10600.0
                } else {
                    -350.0 / 10600.0
                };
                assert!((cm.inv_cap[(i, j)] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn no_shunt_gives_scaled_identity() {
        let cm = spec(4, 0.0, 8.0).charging_matrix().unwrap();
        let want = DMatrix::<f64>::identity(4, 4) / 8.0;
        assert!((cm.inv_cap - want).amax() < 1e-15);
    }

    #[test]
    fn singular_branch_block_reported() {
        let node = DMatrix::from_row_slice(
            3,
            3,
            &[200.0, 0.0, -200.0, 0.0, 0.0, 0.0, -200.0, 0.0, 200.0],
        );
        assert!(matches!(
            reduce_to_branch(&node, 2),
            Err(Error::SingularMatrix(_))
        ));
    }

    #[test]
    fn closed_form_single_loop() {
        let m = closed_form_inverse(1, 100.0, 10.0).unwrap();
        assert!((m[(0, 0)] - 1.0 / 110.0).abs() < 1e-16);
        assert!(closed_form_inverse(2, 1.0, 0.0).is_err());
    }

    #[test]
    fn charging_energy_single_loop() {
        let cm = spec(1, 100.0, 10.0).charging_matrix().unwrap();
        assert!((cm.ec[(0, 0)] - CHARGING_GHZ_FF / 110.0).abs() < 1e-14);
    }
}
