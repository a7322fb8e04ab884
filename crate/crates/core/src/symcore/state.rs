//! State containers: symmetric spin states, truncated Fock states and
//! density operators with a basis tag.

use serde::{Deserialize, Serialize};

use super::basis::{cartesian_rect, DickeBasis};
use super::linalg::{c64, check_hermitian, eigenvalues, self_adjoint_eig, trace, CMatrix, CVector, C64, Eigh};
use crate::error::{Error, Result};

/// Tolerance on the norm of pure states and the trace of density operators.
pub const NORM_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted in a density operator.
pub const POSITIVITY_TOL: f64 = 1e-8;
/// Default bound on the population of the two highest Fock levels.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

fn norm_sqr(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Pure state of `M` spins in the truncated symmetric sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SymState {
    basis: DickeBasis,
    amps: CVector,
}

impl SymState {
    pub fn new(basis: DickeBasis, amps: CVector) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::Contract(format!(
                "amplitude vector has length {}, basis dimension is {}",
                amps.len(),
                basis.dim()
            )));
        }
        let n = norm_sqr(&amps);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::Contract(format!("state norm^2 = {n}, expected 1")));
        }
        Ok(Self { basis, amps })
    }

    /// Normalizes `amps` before construction.
    pub fn normalized(basis: DickeBasis, amps: CVector) -> Result<Self> {
        let n = norm_sqr(&amps).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Contract("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new(basis, amps.unscale(n))
    }

    /// The Dicke state `|M,k>` in a basis truncated at `cutoff`.
    pub fn dicke(basis: DickeBasis, k: usize) -> Result<Self> {
        if k > basis.cutoff() {
            return Err(Error::Domain(format!("Dicke label {k} exceeds truncation {}", basis.cutoff())));
        }
        let mut amps = CVector::zeros(basis.dim());
        amps[k] = c64(1.0, 0.0);
        Self::new(basis, amps)
    }

    pub fn basis(&self) -> &DickeBasis {
        &self.basis
    }

    pub fn spins(&self) -> usize {
        self.basis.spins()
    }

    pub fn amps(&self) -> &CVector {
        &self.amps
    }

    pub fn into_amps(self) -> CVector {
        self.amps
    }

    /// `<k>`, the mean number of excitations.
    pub fn mean_excitation(&self) -> f64 {
        self.amps.iter().enumerate().map(|(k, a)| k as f64 * a.norm_sqr()).sum()
    }

    /// `<J_+ J_->/M`, the excitation number seen through the collective ladder.
    pub fn normalized_ladder_excitation(&self) -> f64 {
        let m = self.spins() as f64;
        self.amps
            .iter()
            .enumerate()
            .map(|(k, a)| (k as f64) * (m - k as f64 + 1.0) / m * a.norm_sqr())
            .sum()
    }

    /// Outside the low-excitation regime when `K >= M/4`.
    pub fn outside_low_excitation_regime(&self) -> bool {
        !self.basis.in_low_excitation_regime()
    }

    pub fn inner(&self, other: &SymState) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::Contract("inner product across different bases".into()));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// Re-expressed with a different truncation. Dropping amplitudes is an error.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<Self> {
        let basis = self.basis.with_cutoff(cutoff)?;
        let dropped: f64 = self.amps.iter().skip(cutoff + 1).map(|a| a.norm_sqr()).sum();
        if dropped > NORM_TOL {
            return Err(Error::Truncation(format!("re-truncation drops population {dropped:.3e}")));
        }
        let mut amps = CVector::zeros(basis.dim());
        let n = self.amps.len().min(basis.dim());
        amps.rows_mut(0, n).copy_from(&self.amps.rows(0, n));
        Self::normalized(basis, amps)
    }

    pub fn density(&self) -> DensityOp {
        DensityOp {
            tag: BasisTag::DickeSector { spins: self.spins(), cutoff: self.basis.cutoff() },
            matrix: &self.amps * self.amps.adjoint(),
        }
    }

    /// Expectations `[<J_x>, <J_y>, <J_z>]`.
    pub fn mean_spin(&self) -> [f64; 3] {
        let ops = cartesian_rect(&self.basis);
        let out_dim = ops[0].nrows();
        let padded = super::basis::pad_vector(&self.amps, out_dim);
        ops.map(|op| padded.dotc(&(&op * &self.amps)).re)
    }
}

/// Basis label carried by density operators and state files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum BasisTag {
    #[serde(rename = "dicke")]
    DickeSector {
        #[serde(rename = "M")]
        spins: usize,
        #[serde(rename = "K")]
        cutoff: usize,
    },
    #[serde(rename = "fock")]
    Fock { cutoff: usize, modes: usize },
}

impl BasisTag {
    pub fn dim(&self) -> usize {
        match *self {
            BasisTag::DickeSector { cutoff, .. } => cutoff + 1,
            BasisTag::Fock { cutoff, modes } => (cutoff + 1).pow(modes as u32),
        }
    }

    pub fn dicke_basis(&self) -> Result<DickeBasis> {
        match *self {
            BasisTag::DickeSector { spins, cutoff } => DickeBasis::new(spins, cutoff),
            BasisTag::Fock { .. } => Err(Error::Contract("expected a Dicke-sector operator, found Fock".into())),
        }
    }
}

/// Pure photonic state of one or two modes in a truncated Fock basis.
///
/// Two-mode amplitudes are stored row-major, index `n1 * (cutoff + 1) + n2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonicState {
    modes: usize,
    cutoff: usize,
    amps: CVector,
    tail_tol: f64,
}

impl PhotonicState {
    pub fn new(modes: usize, cutoff: usize, amps: CVector, tail_tol: f64) -> Result<Self> {
        if !(1..=2).contains(&modes) {
            return Err(Error::Domain(format!("{modes} modes requested, only 1 or 2 supported")));
        }
        if cutoff < 1 {
            return Err(Error::Domain("Fock cutoff must be at least 1".into()));
        }
        let dim = (cutoff + 1).pow(modes as u32);
        if amps.len() != dim {
            return Err(Error::Contract(format!("amplitude vector has length {}, expected {dim}", amps.len())));
        }
        let n = norm_sqr(&amps);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::Contract(format!("photonic state norm^2 = {n}, expected 1")));
        }
        let state = Self { modes, cutoff, amps, tail_tol };
        let tail = state.tail_mass();
        if tail > tail_tol {
            return Err(Error::Truncation(format!(
                "population {tail:.3e} in the two highest Fock levels exceeds tolerance {tail_tol:.1e}"
            )));
        }
        Ok(state)
    }

    pub fn normalized(modes: usize, cutoff: usize, amps: CVector, tail_tol: f64) -> Result<Self> {
        let n = norm_sqr(&amps).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Contract("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new(modes, cutoff, amps.unscale(n), tail_tol)
    }

    pub fn single_mode(cutoff: usize, amps: CVector) -> Result<Self> {
        Self::new(1, cutoff, amps, DEFAULT_TAIL_TOL)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amps(&self) -> &CVector {
        &self.amps
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn tag(&self) -> BasisTag {
        BasisTag::Fock { cutoff: self.cutoff, modes: self.modes }
    }

    fn side(&self) -> usize {
        self.cutoff + 1
    }

    /// Amplitude of `|n1, n2>` (`n2` ignored for one mode).
    pub fn amp(&self, n1: usize, n2: usize) -> C64 {
        match self.modes {
            1 => self.amps[n1],
            _ => self.amps[n1 * self.side() + n2],
        }
    }

    /// Population of Fock levels above `cutoff - 2` in any mode.
    pub fn tail_mass(&self) -> f64 {
        let edge = self.cutoff.saturating_sub(1);
        match self.modes {
            1 => self.amps.iter().skip(edge).map(|a| a.norm_sqr()).sum(),
            _ => {
                let s = self.side();
                self.amps
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i / s >= edge || i % s >= edge)
                    .map(|(_, a)| a.norm_sqr())
                    .sum()
            }
        }
    }

    /// Photon-number distribution of one mode.
    pub fn photon_distribution(&self, mode: usize) -> Vec<f64> {
        let s = self.side();
        let mut p = vec![0.0; s];
        match self.modes {
            1 => {
                for (n, a) in self.amps.iter().enumerate() {
                    p[n] = a.norm_sqr();
                }
            }
            _ => {
                for (i, a) in self.amps.iter().enumerate() {
                    let n = if mode == 0 { i / s } else { i % s };
                    p[n] += a.norm_sqr();
                }
            }
        }
        p
    }

    /// `<a_m† a_m>`.
    pub fn mean_photons(&self, mode: usize) -> f64 {
        self.photon_distribution(mode).iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// `<a_m>`.
    pub fn mean_field(&self, mode: usize) -> C64 {
        let s = self.side();
        let mut acc = c64(0.0, 0.0);
        match self.modes {
            1 => {
                for n in 1..s {
                    acc += self.amps[n - 1].conj() * self.amps[n] * (n as f64).sqrt();
                }
            }
            _ => {
                for n1 in 0..s {
                    for n2 in 0..s {
                        let (src, dst, n) = if mode == 0 {
                            if n1 == 0 {
                                continue;
                            }
                            (n1 * s + n2, (n1 - 1) * s + n2, n1)
                        } else {
                            if n2 == 0 {
                                continue;
                            }
                            (n1 * s + n2, n1 * s + n2 - 1, n2)
                        };
                        acc += self.amps[dst].conj() * self.amps[src] * (n as f64).sqrt();
                    }
                }
            }
        }
        acc
    }

    pub fn inner(&self, other: &PhotonicState) -> Result<C64> {
        if self.modes != other.modes || self.cutoff != other.cutoff {
            return Err(Error::Contract("inner product across different Fock bases".into()));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn density(&self) -> DensityOp {
        DensityOp { tag: self.tag(), matrix: &self.amps * self.amps.adjoint() }
    }

    /// Reduced density operator of one mode of a two-mode state.
    pub fn reduced_mode(&self, mode: usize) -> Result<DensityOp> {
        if self.modes == 1 {
            return Ok(self.density());
        }
        let s = self.side();
        let mut rho = CMatrix::zeros(s, s);
        for a in 0..s {
            for b in 0..s {
                let mut acc = c64(0.0, 0.0);
                for other in 0..s {
                    let (ia, ib) = if mode == 0 { (a * s + other, b * s + other) } else { (other * s + a, other * s + b) };
                    acc += self.amps[ia] * self.amps[ib].conj();
                }
                rho[(a, b)] = acc;
            }
        }
        DensityOp::new(BasisTag::Fock { cutoff: self.cutoff, modes: 1 }, rho)
    }
}

/// Hermitian, unit-trace, positive matrix with a basis tag.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOp {
    tag: BasisTag,
    matrix: CMatrix,
}

impl DensityOp {
    pub fn new(tag: BasisTag, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != tag.dim() || matrix.ncols() != tag.dim() {
            return Err(Error::Contract(format!(
                "density matrix is {}x{}, basis dimension is {}",
                matrix.nrows(),
                matrix.ncols(),
                tag.dim()
            )));
        }
        check_hermitian(&matrix, "density operator")?;
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::Contract(format!("density operator trace {tr}, expected 1")));
        }
        let min = eigenvalues(&matrix)?.first().copied().unwrap_or(0.0);
        if min < -POSITIVITY_TOL {
            return Err(Error::Contract(format!("density operator has eigenvalue {min:.3e}")));
        }
        Ok(Self { tag, matrix })
    }

    /// Rescales a Hermitian positive matrix to unit trace first.
    pub fn normalized(tag: BasisTag, matrix: CMatrix) -> Result<Self> {
        let tr = trace(&matrix).re;
        if tr <= 0.0 || !tr.is_finite() {
            return Err(Error::Contract(format!("cannot normalize a matrix with trace {tr}")));
        }
        Self::new(tag, matrix.unscale(tr))
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eig(&self) -> Result<Eigh> {
        self_adjoint_eig(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn dicke_basis(&self) -> Result<DickeBasis> {
        self.tag.dicke_basis()
    }

    /// `Tr(rho A)` for a square operator on the same basis.
    pub fn expect(&self, a: &CMatrix) -> C64 {
        let mut acc = c64(0.0, 0.0);
        for i in 0..self.dim() {
            for k in 0..self.dim() {
                acc += self.matrix[(i, k)] * a[(k, i)];
            }
        }
        acc
    }

    /// Convex combination `w rho + (1 - w) sigma` on a common basis.
    pub fn mix(&self, other: &DensityOp, w: f64) -> Result<DensityOp> {
        if self.tag != other.tag {
            return Err(Error::Contract("mixing operators on different bases".into()));
        }
        DensityOp::new(self.tag, self.matrix.scale(w) + other.matrix.scale(1.0 - w))
    }
}
