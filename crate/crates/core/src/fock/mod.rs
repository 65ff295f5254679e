//! Truncated Fock-space states and operators.

mod operators;
mod state;

pub use operators::{
    attenuate, attenuate_dense, beamsplitter_unitary, displacement_block, displacement_operator, BeamsplitterColumns,
    UnitaryMatrix,
};
pub use state::{
    make_coherent_state, make_number_state, make_pure_state, make_thermal_state, random_density_matrix,
    thermal_dim_for_tail, thermal_tail_mass, DensityMatrix, DensityMatrixJson, Subsystem, TAIL_WARN,
};

/// `S(ρ)` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> crate::Result<f64> {
    rho.von_neumann_entropy()
}

pub fn mean_photon_number(rho: &DensityMatrix) -> f64 {
    rho.mean_photon_number()
}

pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> crate::Result<DensityMatrix> {
    rho.partial_trace(keep)
}
