//! Truncated Dicke basis and collective spin operators.
//!
//! Conventions: `|M,k>` carries `k` excitations, `J_z |M,k> = (2k - M) |M,k>`,
//! `J_+ |M,k> = C_+(k) |M,k+1>` with `C_+(k)^2 = (k+1)(M-k)`, and
//! `J_x = J_+ + J_-`, `J_y = -i (J_+ - J_-)`. No factors of 1/2: the spectral
//! radius of every `J_n` is `M`.

use serde::{Deserialize, Serialize};

use super::linalg::{c64, CMatrix, CVector, C64};
use crate::error::{Error, Result};

/// Permutation-symmetric sector of `M` spins truncated at `K` excitations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DickeBasis {
    spins: usize,
    cutoff: usize,
}

impl DickeBasis {
    pub fn new(spins: usize, cutoff: usize) -> Result<Self> {
        if spins == 0 {
            return Err(Error::Domain("Dicke basis needs at least one spin".into()));
        }
        if cutoff > spins {
            return Err(Error::Domain(format!("truncation K = {cutoff} exceeds spin count M = {spins}")));
        }
        Ok(Self { spins, cutoff })
    }

    /// Full symmetric sector, `K = M`.
    pub fn full(spins: usize) -> Result<Self> {
        Self::new(spins, spins)
    }

    /// Default truncation `min(M, 4 n + 25)` for a target mean excitation `n`.
    pub fn for_mean_excitation(spins: usize, mean: f64) -> Result<Self> {
        let k = (4.0 * mean.max(0.0)).ceil() as usize + 25;
        Self::new(spins, k.min(spins))
    }

    pub fn spins(&self) -> usize {
        self.spins
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn is_full(&self) -> bool {
        self.cutoff == self.spins
    }

    /// `K < M/4`, the low-excitation regime the absorption map targets.
    pub fn in_low_excitation_regime(&self) -> bool {
        4 * self.cutoff < self.spins
    }

    /// Same spin count, truncation raised by `extra` (capped at `M`).
    pub fn widened(&self, extra: usize) -> Self {
        Self { spins: self.spins, cutoff: (self.cutoff + extra).min(self.spins) }
    }

    pub fn with_cutoff(&self, cutoff: usize) -> Result<Self> {
        Self::new(self.spins, cutoff)
    }
}

/// `C_+(k)`, the matrix element `<M,k+1| J_+ |M,k>`.
#[inline]
pub fn raise_coeff(spins: usize, k: usize) -> f64 {
    if k >= spins {
        0.0
    } else {
        (((k + 1) * (spins - k)) as f64).sqrt()
    }
}

/// `C_-(k)`, the matrix element `<M,k-1| J_- |M,k>`.
#[inline]
pub fn lower_coeff(spins: usize, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        raise_coeff(spins, k - 1)
    }
}

/// A symmetric collective operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CollectiveObservable {
    Plus,
    Minus,
    X,
    Y,
    Z,
    /// `n_x J_x + n_y J_y + n_z J_z` for a unit vector `n`.
    Direction([f64; 3]),
}

impl CollectiveObservable {
    /// Direction observable, rejecting vectors that are not unit length.
    pub fn direction(n: [f64; 3]) -> Result<Self> {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("direction has norm {norm}, expected 1")));
        }
        Ok(Self::Direction(n))
    }

    /// Direction from polar and azimuthal angles.
    pub fn spherical(theta: f64, phi: f64) -> Self {
        Self::Direction(unit_vector(theta, phi))
    }

    fn components(&self) -> (C64, C64, f64) {
        // coefficients of J_+, J_-, J_z
        match *self {
            Self::Plus => (c64(1.0, 0.0), c64(0.0, 0.0), 0.0),
            Self::Minus => (c64(0.0, 0.0), c64(1.0, 0.0), 0.0),
            Self::X => (c64(1.0, 0.0), c64(1.0, 0.0), 0.0),
            Self::Y => (c64(0.0, -1.0), c64(0.0, 1.0), 0.0),
            Self::Z => (c64(0.0, 0.0), c64(0.0, 0.0), 1.0),
            Self::Direction([x, y, z]) => (c64(x, -y), c64(x, y), z),
        }
    }
}

pub fn unit_vector(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Matrix of `obs` from the span of `|M,0..=k_in>` into `|M,0..=k_out>`.
///
/// With `k_out = k_in + 1` the product with a vector supported on the input
/// span is exact, which is how expectation values of products are formed
/// without truncation error.
pub fn collective_matrix_rect(spins: usize, k_in: usize, k_out: usize, obs: CollectiveObservable) -> CMatrix {
    let (cp, cm, cz) = obs.components();
    let mut out = CMatrix::zeros(k_out + 1, k_in + 1);
    for k in 0..=k_in {
        if k <= k_out && cz != 0.0 {
            out[(k, k)] = c64(cz * (2.0 * k as f64 - spins as f64), 0.0);
        }
        if k < spins && k < k_out {
            out[(k + 1, k)] = cp * raise_coeff(spins, k);
        }
        if k > 0 && k - 1 <= k_out {
            out[(k - 1, k)] = cm * lower_coeff(spins, k);
        }
    }
    out
}

/// Square tridiagonal matrix of `obs` on the truncated basis.
pub fn collective_matrix(basis: &DickeBasis, obs: CollectiveObservable) -> CMatrix {
    collective_matrix_rect(basis.spins(), basis.cutoff(), basis.cutoff(), obs)
}

/// `obs |v>` for `v` in the basis, returned in the basis widened by one level.
pub fn apply_collective(basis: &DickeBasis, obs: CollectiveObservable, v: &CVector) -> CVector {
    let out_cut = (basis.cutoff() + 1).min(basis.spins());
    collective_matrix_rect(basis.spins(), basis.cutoff(), out_cut, obs) * v
}

/// The three Cartesian operators widened by one level, `[J_x, J_y, J_z]`.
pub fn cartesian_rect(basis: &DickeBasis) -> [CMatrix; 3] {
    let out_cut = (basis.cutoff() + 1).min(basis.spins());
    [CollectiveObservable::X, CollectiveObservable::Y, CollectiveObservable::Z]
        .map(|o| collective_matrix_rect(basis.spins(), basis.cutoff(), out_cut, o))
}

/// The three Cartesian operators on the square truncated basis.
pub fn cartesian_square(basis: &DickeBasis) -> [CMatrix; 3] {
    [CollectiveObservable::X, CollectiveObservable::Y, CollectiveObservable::Z].map(|o| collective_matrix(basis, o))
}

/// Embed a vector in a basis with a larger cutoff (zero padding).
pub fn pad_vector(v: &CVector, dim: usize) -> CVector {
    let mut out = CVector::zeros(dim);
    out.rows_mut(0, v.len().min(dim)).copy_from(&v.rows(0, v.len().min(dim)));
    out
}

/// Embed a square matrix in a larger one (zero padding).
pub fn pad_matrix(a: &CMatrix, dim: usize) -> CMatrix {
    let mut out = CMatrix::zeros(dim, dim);
    let n = a.nrows().min(dim);
    out.view_mut((0, 0), (n, n)).copy_from(&a.view((0, 0), (n, n)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::linalg::{commutator, eigenvalues, operator_norm};

    #[test]
    fn jz_diagonal() {
        let b = DickeBasis::new(2, 2).unwrap();
        let jz = collective_matrix(&b, CollectiveObservable::Z);
        for (k, want) in [-2.0, 0.0, 2.0].iter().enumerate() {
            assert_eq!(jz[(k, k)], c64(*want, 0.0));
        }
    }

    #[test]
    fn raise_from_ground_is_sqrt_m() {
        let b = DickeBasis::new(4, 1).unwrap();
        let jp = collective_matrix(&b, CollectiveObservable::Plus);
        let ground = CVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 0.0)]);
        let out = jp * ground;
        assert!((out[1] - c64(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn raise_coeff_matches_angular_momentum_formula() {
        for m in [1usize, 2, 7, 40] {
            for k in 0..m {
                let half = m as f64 / 2.0;
                let want = half * (half + 1.0) - (half - k as f64) * (half - k as f64 - 1.0);
                assert!((raise_coeff(m, k).powi(2) - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn jx_eigenvalues_for_two_spins() {
        let b = DickeBasis::full(2).unwrap();
        let vals = eigenvalues(&collective_matrix(&b, CollectiveObservable::X)).unwrap();
        for (v, want) in vals.iter().zip([-2.0, 0.0, 2.0]) {
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_radius_equals_m_on_full_sector() {
        let b = DickeBasis::full(9).unwrap();
        for obs in [
            CollectiveObservable::X,
            CollectiveObservable::Y,
            CollectiveObservable::Z,
            CollectiveObservable::spherical(0.7, 2.1),
        ] {
            let a = collective_matrix(&b, obs);
            assert!((operator_norm(&a) - 9.0).abs() < 1e-10);
        }
    }

    #[test]
    fn commutation_relations_on_interior() {
        let b = DickeBasis::new(30, 8).unwrap();
        let jz = collective_matrix(&b, CollectiveObservable::Z);
        let jp = collective_matrix(&b, CollectiveObservable::Plus);
        let jm = collective_matrix(&b, CollectiveObservable::Minus);
        let c1 = commutator(&jz, &jp) - jp.scale(2.0);
        let c2 = commutator(&jz, &jm) + jm.scale(2.0);
        let c3 = commutator(&jp, &jm) - &jz;
        for c in [c1, c2, c3] {
            for i in 1..8 {
                for j in 1..8 {
                    assert!(c[(i, j)].norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn direction_must_be_unit() {
        assert!(CollectiveObservable::direction([1.0, 1.0, 0.0]).is_err());
        assert!(CollectiveObservable::direction([0.6, 0.8, 0.0]).is_ok());
    }

    #[test]
    fn truncation_bounds() {
        assert!(DickeBasis::new(3, 4).is_err());
        assert!(DickeBasis::new(0, 0).is_err());
        let b = DickeBasis::for_mean_excitation(1000, 2.0).unwrap();
        assert_eq!(b.cutoff(), 33);
        assert!(b.in_low_excitation_regime());
    }
}
