//! Effective-size measures for macroscopic quantum states of light and of
//! spin ensembles.
//!
//! Photonic states are carried onto a permutation-symmetric ensemble of `M`
//! two-level atoms by a collective absorption interaction, which puts the
//! photonic measures (Wigner-oscillation size, coarse-grained distinguishability)
//! and the spin measures (variance and Fisher-information sizes, interferometric
//! and measurement-based sizes, microscopic-step distance) on common ground.
//!
//! Module map:
//!
//! * [`symcore`]: Dicke basis, collective operators, log-space combinatorics and
//!   dense Hermitian kernels.
//! * [`states`]: factories for the named photonic and spin states.
//! * [`mapping`]: exact block-diagonal absorption dynamics and the approximate
//!   phase-relabelling map.
//! * [`measures`]: every effective-size measure.
//! * [`entanglement`]: Dicke splittings, Schmidt spectra, negativity and
//!   Helstrom discrimination.
//! * [`scaling`]: state families, exponent fits and the size-classification
//!   table.
//! * [`io`]: JSON and CSV formats shared by the command line and the demo.

pub mod entanglement;
pub mod error;
pub mod io;
pub mod mapping;
pub mod measures;
pub mod scaling;
pub mod states;
pub mod symcore;

pub use error::{Error, Result};
