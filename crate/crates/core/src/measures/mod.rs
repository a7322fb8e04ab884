//! Effective-size measures.
//!
//! Spin-side measures optimize over collective operators `J_n` only; every
//! input is permutation symmetric, and the optimum over `n` reduces to the
//! top eigenpair of a 3x3 matrix (covariance or Fisher information).

pub mod dispatch;
pub mod groups;
pub mod photonic;
pub mod result;
pub mod spin;

pub use crate::scaling::index_p_modified;
pub use dispatch::{measure, DispatchParams};
pub use groups::{c_delta, d_bar, group_success_probability};
pub use photonic::{size_pg, size_prefactor, wigner_i_photonic, wigner_i_photonic_mixed, Channel};
pub use result::{MeasureId, MeasureResult, PhotonPair, SpinPair, SuperpositionPair, Witness};
pub use spin::{
    fisher_matrix, index_q, m_squared, max_variance_collective, max_variance_collective_mixed, max_variance_result,
    moments, moments_mixed, n_eff, n_eff_mixed, relative_fisher, wigner_i_spin, wigner_i_spin_mixed, SpinMoments,
};
