//! States, channels and distance measures.

mod channel;
mod diamond;
mod distance;
mod haar;
mod layout;
mod state;
mod uhlmann;

pub use channel::{apply_channel, channel_from_choi, pauli_x, pauli_z, weyl, Channel, PartialIsometry, KRAUS_TOL};
pub use diamond::diamond_norm;
pub use distance::{
    fidelity, fidelity_mat, generalized_fidelity, generalized_fidelity_mat, purified_distance, purified_distance_mat,
    trace_distance, trace_norm,
};
pub use haar::{haar_unitary, haar_unitary_with};
pub use layout::{embed_op, partial_trace_mat, permute_mat, permute_vec, reduce_vec, vec_to_mat, DimLayout};
pub use state::{
    basis_state, ginibre, max_entangled, max_mixed, psd_tol, random_density, random_pure, DensityOperator, PureState,
};
pub use uhlmann::{uhlmann_isometry, uhlmann_split};

/// Partial trace of a state, keeping the listed subsystems in that order.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> crate::error::Result<DensityOperator> {
    rho.partial_trace(keep)
}

pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> DensityOperator {
    a.tensor(b)
}

pub fn choi(n: &Channel) -> DensityOperator {
    n.choi()
}

pub fn stinespring(n: &Channel) -> PartialIsometry {
    n.stinespring()
}

pub fn complementary(n: &Channel) -> Channel {
    n.complementary()
}
