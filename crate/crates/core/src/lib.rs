//! Numerical toolkit for protected qubits built from arrays of flux-frustrated
//! Josephson interferometers.
//!
//! The crate is organised bottom-up:
//!
//! * [`circuit`]: declarative circuit description and the capacitance algebra
//!   producing the charging-energy matrix.
//! * [`interferometer`]: two-arm interferometer potentials in harmonic form,
//!   including imbalance and flux-detuning errors, plus the short-junction
//!   Andreev energy.
//! * [`charge_basis`]: truncated Cooper-pair-number Hamiltonians and their
//!   low-lying spectra.
//! * [`effective_spin`]: band structures over the offset-charge zone, spin-model
//!   fits and explicit few-spin Pauli Hamiltonians.
//! * [`giant_spin`]: the collective (Lipkin-Meshkov-Glick) spin model, its
//!   symmetries, mean-field analysis and the gap-closing scan.
//! * [`cli`]: JSON-configured sweeps writing CSV, plot scripts and metadata.
//!
//! Energies are frequencies in GHz, capacitances in fF, fluxes in units of the
//! flux quantum and charges in units of 2e.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charge_basis;
pub mod circuit;
pub mod cli;
pub mod effective_spin;
pub mod error;
pub mod giant_spin;
pub mod interferometer;
pub mod linalg;
pub mod par;
pub mod trig;
pub mod units;

pub use charge_basis::{
    build_hamiltonian, converged_spectrum, lowest_eigenvalues, parity_expectation, ChargeOperator,
    Diagonalizer, SpectrumResult, Truncation,
};
pub use circuit::{
    build_node_capacitance, closed_form_inverse, reduce_to_branch, ChargingMatrix, CircuitSpec,
    InterferometerLoop, JunctionArm,
};
pub use error::{Error, Result};
pub use interferometer::{
    fit_harmonics, loop_potential, short_junction_energy, ChannelSet, FluxErrorModel,
    HarmonicPotential,
};
pub use par::Execution;
