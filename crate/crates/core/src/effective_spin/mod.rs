//! Effective spin models: band structures over the offset-charge zone,
//! spectral hopping extraction and explicit Pauli Hamiltonians.

pub mod bands;
pub mod fit;
pub mod pauli;

pub use bands::{band_structure, band_structure_on, half_zone_axis, BandGrid, BandOptions};
pub use fit::{
    extract_single_loop, extract_two_loop, single_loop_bands, two_loop_bands, SpinModelFit,
};
pub use pauli::{build_spin_hamiltonian, inject_error_terms, Pauli, PauliHamiltonian};
