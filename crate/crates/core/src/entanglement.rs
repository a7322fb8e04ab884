//! Bipartitions of symmetric states.
//!
//! Splitting `M` spins into groups of `m_a` and `m_b` maps
//! `|M,k> -> sum_l sqrt(C(m_a,l) C(m_b,k-l) / C(M,k)) |m_a,l> |m_b,k-l>`, so a
//! symmetric state becomes a coefficient matrix over the Dicke labels of the
//! two groups. Labels are capped at the truncation `K` of the input.

use crate::error::{Error, Result};
use crate::symcore::combinatorics::dicke_split_weight;
use crate::symcore::linalg::{c64, self_adjoint_eig, trace_norm, CMatrix, CVector};
use crate::symcore::{BasisTag, DensityOp, SymState};

/// Largest product-basis dimension accepted by [`negativity`].
pub const MAX_NEGATIVITY_DIM: usize = 16384;

/// Eigenvalues below this are dropped when a mixed state is split.
const SPECTRAL_FLOOR: f64 = 1e-14;

/// Coefficients `c[l][j]` of `sum c[l][j] |m_a,l> |m_b,j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitState {
    pub m_a: usize,
    pub m_b: usize,
    pub coeffs: CMatrix,
}

impl SplitState {
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.norm_squared()
    }

    /// Contracts back to amplitudes on `|M,k>`, `k <= cutoff`.
    pub fn merge(&self, cutoff: usize) -> CVector {
        let mut out = CVector::zeros(cutoff + 1);
        let (ma, mb) = (self.m_a as u64, self.m_b as u64);
        for l in 0..self.coeffs.nrows() {
            for j in 0..self.coeffs.ncols() {
                let k = l + j;
                if k <= cutoff {
                    out[k] += self.coeffs[(l, j)] * dicke_split_weight(ma, mb, k as u64, l as u64).sqrt();
                }
            }
        }
        out
    }
}

fn split_amplitudes(spins: usize, amps: &CVector, m_a: usize) -> Result<SplitState> {
    if m_a == 0 || m_a >= spins {
        return Err(Error::Domain(format!("group size {m_a} outside [1, {}]", spins.saturating_sub(1))));
    }
    let m_b = spins - m_a;
    let cutoff = amps.len() - 1;
    let (la, lb) = (cutoff.min(m_a), cutoff.min(m_b));
    let mut coeffs = CMatrix::zeros(la + 1, lb + 1);
    for (k, amp) in amps.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        for l in k.saturating_sub(lb)..=k.min(la) {
            let w = dicke_split_weight(m_a as u64, m_b as u64, k as u64, l as u64);
            coeffs[(l, k - l)] = amp * w.sqrt();
        }
    }
    Ok(SplitState { m_a, m_b, coeffs })
}

/// Exact split of `phi` into groups of `m_a` and `M - m_a` spins.
pub fn split(phi: &SymState, m_a: usize) -> Result<SplitState> {
    split_amplitudes(phi.spins(), phi.amps(), m_a)
}

/// Squared Schmidt coefficients, descending.
pub fn schmidt_weights(s: &SplitState) -> Vec<f64> {
    let mut w: Vec<f64> = s.coeffs.clone().singular_values().iter().map(|x| x * x).collect();
    w.sort_by(|a, b| b.total_cmp(a));
    w
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn shannon_bits(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// Entanglement entropy of the bipartition, in bits.
pub fn entanglement_entropy(s: &SplitState) -> f64 {
    shannon_bits(&schmidt_weights(s))
}

fn check_negativity_dim(da: usize, db: usize) -> Result<()> {
    if da * db > MAX_NEGATIVITY_DIM {
        return Err(Error::DimensionOverflow(format!(
            "bipartite dimension {} exceeds {MAX_NEGATIVITY_DIM}",
            da * db
        )));
    }
    Ok(())
}

/// Negativity `(||rho^{T_B}||_1 - 1) / 2` of a pure split state.
///
/// For a pure state the partially transposed operator has eigenvalues
/// `s_i s_j` and `-s_i s_j`, so its trace norm is `(sum_i s_i)^2`.
pub fn negativity(s: &SplitState) -> Result<f64> {
    check_negativity_dim(s.coeffs.nrows(), s.coeffs.ncols())?;
    let sum: f64 = s.coeffs.clone().singular_values().iter().sum();
    Ok(((sum * sum - 1.0) / 2.0).max(0.0))
}

/// Index of `|l> |j>` in the product basis.
fn pidx(l: usize, j: usize, db: usize) -> usize {
    l * db + j
}

/// Partial transpose over the second factor of a `da x db` bipartite operator.
pub fn partial_transpose(rho: &CMatrix, da: usize, db: usize) -> CMatrix {
    let mut out = CMatrix::zeros(da * db, da * db);
    for l in 0..da {
        for j in 0..db {
            for l2 in 0..da {
                for j2 in 0..db {
                    out[(pidx(l, j2, db), pidx(l2, j, db))] = rho[(pidx(l, j, db), pidx(l2, j2, db))];
                }
            }
        }
    }
    out
}

/// Negativity of a bipartite operator given in the product basis.
pub fn negativity_of_operator(rho: &CMatrix, da: usize, db: usize) -> Result<f64> {
    check_negativity_dim(da, db)?;
    let pt = partial_transpose(rho, da, db);
    Ok(((trace_norm(&pt) - 1.0) / 2.0).max(0.0))
}

/// Bipartite density operator of a mixed symmetric state, in the
/// `(l, j)` product basis of the two groups.
pub fn split_density(rho: &DensityOp, m_a: usize) -> Result<(CMatrix, usize, usize)> {
    let basis = rho.dicke_basis()?;
    let eig = rho.eig()?;
    let mut acc: Option<(CMatrix, usize, usize)> = None;
    for i in 0..eig.dim() {
        let lam = eig.values[i];
        if lam <= SPECTRAL_FLOOR {
            continue;
        }
        let s = split_amplitudes(basis.spins(), &eig.vector(i), m_a)?;
        let (da, db) = (s.coeffs.nrows(), s.coeffs.ncols());
        check_negativity_dim(da, db)?;
        let v = CVector::from_fn(da * db, |p, _| s.coeffs[(p / db, p % db)]);
        let term = (&v * v.adjoint()).scale(lam);
        match acc.as_mut() {
            Some((m, _, _)) => *m += term,
            None => acc = Some((term, da, db)),
        }
    }
    acc.ok_or_else(|| Error::Contract("density operator has no positive spectrum".into()))
}

/// Negativity between groups of `m_a` and `M - m_a` spins of a mixed state.
pub fn negativity_mixed(rho: &DensityOp, m_a: usize) -> Result<f64> {
    let (ab, da, db) = split_density(rho, m_a)?;
    negativity_of_operator(&ab, da, db)
}

/// Reduced state of a group of `n` spins.
pub fn reduced_group_state(phi: &SymState, n: usize) -> Result<DensityOp> {
    if n == phi.spins() {
        return Ok(phi.density());
    }
    let s = split(phi, n)?;
    let rho = &s.coeffs * s.coeffs.adjoint();
    let cutoff = rho.nrows() - 1;
    DensityOp::normalized(BasisTag::DickeSector { spins: n, cutoff }, rho)
}

/// Reduced group state written on a fixed label cap, so that states of
/// different parents can be compared.
pub fn reduced_group_matrix(phi: &SymState, n: usize, cap: usize) -> Result<CMatrix> {
    let full = if n == phi.spins() {
        phi.density().matrix().clone()
    } else {
        let s = split(phi, n)?;
        &s.coeffs * s.coeffs.adjoint()
    };
    let dim = cap.min(n) + 1;
    let mut out = CMatrix::zeros(dim, dim);
    let m = full.nrows().min(dim);
    out.view_mut((0, 0), (m, m)).copy_from(&full.view((0, 0), (m, m)));
    Ok(out)
}

/// Optimal equal-prior discrimination probability `1/2 + ||rho0 - rho1||_1 / 4`.
pub fn helstrom_ps(rho0: &DensityOp, rho1: &DensityOp) -> Result<f64> {
    if rho0.tag() != rho1.tag() {
        return Err(Error::Contract("Helstrom probability needs operators on the same basis".into()));
    }
    Ok(helstrom_from_difference(&(rho0.matrix() - rho1.matrix())))
}

/// `1/2 + ||D||_1 / 4`, clamped to `[1/2, 1]`.
pub fn helstrom_from_difference(diff: &CMatrix) -> f64 {
    (0.5 + 0.25 * trace_norm(diff)).clamp(0.5, 1.0)
}

/// Spectrum of a reduced state, ascending.
pub fn reduced_spectrum(phi: &SymState, n: usize) -> Result<Vec<f64>> {
    let rho = reduced_group_state(phi, n)?;
    Ok(self_adjoint_eig(rho.matrix())?.values)
}

/// `(|1,0>|1,1> + |1,1>|1,0>) / sqrt(2)` as a split of two single spins.
pub fn bell_split() -> SplitState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut coeffs = CMatrix::zeros(2, 2);
    coeffs[(0, 1)] = c64(h, 0.0);
    coeffs[(1, 0)] = c64(h, 0.0);
    SplitState { m_a: 1, m_b: 1, coeffs }
}
