//! Basis machinery and numerical kernels shared by every other module.

pub mod basis;
pub mod combinatorics;
pub mod linalg;
pub mod state;

pub use basis::{
    apply_collective, cartesian_rect, cartesian_square, collective_matrix, collective_matrix_rect, lower_coeff,
    raise_coeff, CollectiveObservable, DickeBasis,
};
pub use combinatorics::{binomial_pmf, hypergeometric_pmf, log_binomial, log_factorial};
pub use linalg::{
    c64, operator_norm, self_adjoint_eig, trace_norm, unitary_from_generator, CMatrix, CVector, Eigh, C64,
};
pub use state::{BasisTag, DensityOp, PhotonicState, SymState};
