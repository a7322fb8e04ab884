//! Collective-operator measures on the symmetric sector.
//!
//! Every product `J_a J_b` is formed through the rectangular matrices that map
//! the truncated span into one extra level, so second moments carry no
//! truncation error: `<J_a J_b> = (J_a phi)† (J_b phi)` and, for mixed states,
//! `Tr(rho E_a† E_b)`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use super::result::{MeasureId, MeasureResult, SpinPair, Witness};
use crate::error::{Error, Result};
use crate::symcore::basis::{cartesian_rect, cartesian_square, pad_matrix, unit_vector};
use crate::symcore::linalg::{eigenvalues, trace_product_re, CMatrix};
use crate::symcore::{DensityOp, DickeBasis, SymState};

/// Eigenvalue cutoff `eps` in the mixed-state Fisher sum.
pub const FISHER_EPS: f64 = 1e-12;

/// Denominators below this make the pair measure undefined.
const DEGENERATE_TOL: f64 = 1e-12;

/// First and second moments of `(J_x, J_y, J_z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMoments {
    pub mean: Vector3<f64>,
    /// Symmetrized covariance `(<J_a J_b + J_b J_a>)/2 - <J_a><J_b>`.
    pub cov: Matrix3<f64>,
}

pub fn moments(phi: &SymState) -> SpinMoments {
    let ops = cartesian_rect(phi.basis());
    let applied: Vec<_> = ops.iter().map(|e| e * phi.amps()).collect();
    let k = phi.amps().len();
    let mut mean = Vector3::zeros();
    let mut cov = Matrix3::zeros();
    for a in 0..3 {
        mean[a] = phi.amps().dotc(&applied[a].rows(0, k)).re;
    }
    for a in 0..3 {
        for b in a..3 {
            let second = applied[a].dotc(&applied[b]).re;
            cov[(a, b)] = second - mean[a] * mean[b];
            cov[(b, a)] = cov[(a, b)];
        }
    }
    SpinMoments { mean, cov }
}

/// Per-operator data for mixed states: rectangular `E_a` and square `T_a`.
struct MixedOps {
    rect: [CMatrix; 3],
    square: [CMatrix; 3],
}

impl MixedOps {
    fn new(basis: &DickeBasis) -> Self {
        Self { rect: cartesian_rect(basis), square: cartesian_square(basis) }
    }

    /// `E_a† E_b`, the exact compression of `J_a J_b`.
    fn second(&self, a: usize, b: usize) -> CMatrix {
        self.rect[a].adjoint() * &self.rect[b]
    }
}

pub fn moments_mixed(rho: &DensityOp) -> Result<SpinMoments> {
    let basis = rho.dicke_basis()?;
    let ops = MixedOps::new(&basis);
    let mut mean = Vector3::zeros();
    for a in 0..3 {
        mean[a] = trace_product_re(rho.matrix(), &ops.square[a]);
    }
    let mut cov = Matrix3::zeros();
    for a in 0..3 {
        for b in a..3 {
            cov[(a, b)] = trace_product_re(rho.matrix(), &ops.second(a, b)) - mean[a] * mean[b];
            cov[(b, a)] = cov[(a, b)];
        }
    }
    Ok(SpinMoments { mean, cov })
}

/// 3x3 quantum Fisher information matrix of `rho` for the generators
/// `J_x, J_y, J_z`. `n^T F n` is the Fisher information of `J_n`.
///
/// Uses `F_ab = 4 sum_i l_i Re<i|J_a J_b|i> - 8 sum_{ij} l_i l_j/(l_i+l_j) Re(<i|J_a|j><j|J_b|i>)`,
/// which equals the spectral double sum including eigenvectors outside the
/// truncated span.
pub fn fisher_matrix(rho: &DensityOp) -> Result<Matrix3<f64>> {
    let basis = rho.dicke_basis()?;
    let ops = MixedOps::new(&basis);
    let eig = rho.eig()?;
    let lam: Vec<f64> = eig.values.iter().map(|l| l.max(0.0)).collect();
    let v = &eig.vectors;
    let in_eig: Vec<CMatrix> = ops.square.iter().map(|t| v.adjoint() * t * v).collect();
    let n = lam.len();
    let mut f = Matrix3::zeros();
    for a in 0..3 {
        for b in a..3 {
            let g = v.adjoint() * ops.second(a, b) * v;
            let mut first = 0.0;
            for i in 0..n {
                first += lam[i] * g[(i, i)].re;
            }
            let mut cross = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let s = lam[i] + lam[j];
                    if s > FISHER_EPS {
                        cross += lam[i] * lam[j] / s * (in_eig[a][(i, j)] * in_eig[b][(j, i)]).re;
                    }
                }
            }
            f[(a, b)] = 4.0 * first - 8.0 * cross;
            f[(b, a)] = f[(a, b)];
        }
    }
    Ok(f)
}

/// Largest eigenvalue and its unit eigenvector, sign fixed so that the
/// largest-magnitude component is positive.
pub fn top_eigen(m: &Matrix3<f64>) -> (f64, [f64; 3]) {
    let eig = SymmetricEigen::new(*m);
    let i = eig.eigenvalues.imax();
    let mut v = eig.eigenvectors.column(i).into_owned();
    let big = v.iamax();
    if v[big] < 0.0 {
        v = -v;
    }
    (eig.eigenvalues[i], [v[0], v[1], v[2]])
}

/// `max_n V(J_n)` and the maximizing direction.
pub fn max_variance_collective(phi: &SymState) -> (f64, [f64; 3]) {
    top_eigen(&moments(phi).cov)
}

/// Mixed-state variant of [`max_variance_collective`].
pub fn max_variance_collective_mixed(rho: &DensityOp) -> Result<(f64, [f64; 3])> {
    Ok(top_eigen(&moments_mixed(rho)?.cov))
}

pub fn max_variance_result(phi: &SymState) -> Result<MeasureResult> {
    let (v, dir) = max_variance_collective(phi);
    MeasureResult::new(MeasureId::MaxVariance, v, Some(Witness { direction: Some(dir), ..Default::default() }))
}

/// `N_eff = max_n F(J_n) / (4M)`; for pure states `max_n V(J_n) / M`.
pub fn n_eff(phi: &SymState) -> Result<MeasureResult> {
    let (v, dir) = max_variance_collective(phi);
    MeasureResult::new(
        MeasureId::NEff,
        v / phi.spins() as f64,
        Some(Witness { direction: Some(dir), ..Default::default() }),
    )
}

pub fn n_eff_mixed(rho: &DensityOp) -> Result<MeasureResult> {
    let spins = rho.dicke_basis()?.spins() as f64;
    let (f, dir) = top_eigen(&fisher_matrix(rho)?);
    MeasureResult::new(MeasureId::NEff, f / (4.0 * spins), Some(Witness { direction: Some(dir), ..Default::default() }))
}

/// `N_eff(psi) / (N_eff(psi0)/2 + N_eff(psi1)/2)` with `psi` the normalized sum.
pub fn relative_fisher(pair: &SpinPair) -> Result<MeasureResult> {
    let whole = n_eff(&pair.superposition()?)?.value;
    let parts = 0.5 * (n_eff(&pair.psi0)?.value + n_eff(&pair.psi1)?.value);
    if parts < DEGENERATE_TOL {
        return Err(Error::Undefined("components have vanishing Fisher information".into()));
    }
    MeasureResult::plain(MeasureId::RelativeFisher, whole / parts)
}

/// `max_n (<J_n>_1 - <J_n>_0)^2 / max_n (V_0(J_n) + V_1(J_n))`.
pub fn m_squared(pair: &SpinPair) -> Result<MeasureResult> {
    let m0 = moments(&pair.psi0);
    let m1 = moments(&pair.psi1);
    let gap = m1.mean - m0.mean;
    let (den, _) = top_eigen(&(m0.cov + m1.cov));
    if den < DEGENERATE_TOL {
        return Err(Error::Undefined("both components are eigenstates of every collective operator".into()));
    }
    let num = gap.norm_squared();
    let dir = if num > 0.0 { gap / gap.norm() } else { Vector3::new(0.0, 0.0, 1.0) };
    MeasureResult::new(MeasureId::MSquared, num / den, Some(Witness { direction: Some([dir[0], dir[1], dir[2]]), ..Default::default() }))
}

/// Wigner-oscillation measure on the spin side, `(V(J_x) + V(J_y)) / (4M)`.
pub fn wigner_i_spin(phi: &SymState) -> Result<MeasureResult> {
    let c = moments(phi).cov;
    MeasureResult::plain(MeasureId::ISpin, (c[(0, 0)] + c[(1, 1)]) / (4.0 * phi.spins() as f64))
}

/// Mixed form `(1/4M) sum_{a=x,y} (Tr(rho^2 J_a^2) - Tr(rho J_a rho J_a))`,
/// i.e. `(1/8M) sum_a Tr(rho [J_a, [J_a, rho]])`.
pub fn wigner_i_spin_mixed(rho: &DensityOp) -> Result<MeasureResult> {
    let basis = rho.dicke_basis()?;
    let ops = MixedOps::new(&basis);
    let mut acc = 0.0;
    for a in 0..2 {
        let er = &ops.rect[a] * rho.matrix();
        let tr = &ops.square[a] * rho.matrix();
        acc += er.norm_squared() - trace_product_re(&tr, &tr);
    }
    MeasureResult::plain(MeasureId::ISpin, acc / (4.0 * basis.spins() as f64))
}

/// Objective `||[J_n, [J_n, rho]]||_1` on a padded basis where it is exact.
struct IndexQObjective {
    rho: CMatrix,
    ops: [CMatrix; 3],
}

impl IndexQObjective {
    fn new(rho: &DensityOp) -> Result<Self> {
        let basis = rho.dicke_basis()?;
        let padded = basis.widened(2);
        let ops = cartesian_square(&padded);
        Ok(Self { rho: pad_matrix(rho.matrix(), padded.dim()), ops })
    }

    fn eval(&self, n: [f64; 3]) -> Result<f64> {
        let j = self.ops[0].scale(n[0]) + self.ops[1].scale(n[1]) + self.ops[2].scale(n[2]);
        let jr = &j * &self.rho;
        let inner = &jr - jr.adjoint();
        let dc = &j * &inner - &inner * &j;
        Ok(eigenvalues(&dc)?.iter().map(|x| x.abs()).sum())
    }
}

/// Grid over the hemisphere `theta <= pi/2` (`n` and `-n` give the same value).
const GRID_THETA: usize = 12;
const GRID_PHI: usize = 24;
/// Number of best starting points refined by the local search.
const SEEDS: usize = 6;
/// Smallest rotation step of the local search.
const MIN_STEP: f64 = 1e-10;

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Orthonormal pair spanning the tangent plane at `n`.
fn tangent_frame(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = normalize(cross(n, helper));
    (e1, cross(n, e1))
}

/// Compass search on the sphere: try the eight tangent directions at the
/// current step, move on improvement, halve the step otherwise.
fn compass_max(obj: &IndexQObjective, start: [f64; 3], value: f64, step: f64) -> Result<([f64; 3], f64)> {
    let (mut n, mut best, mut h) = (start, value, step);
    let dirs: [(f64, f64); 8] = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    while h > MIN_STEP {
        let (e1, e2) = tangent_frame(n);
        let mut moved = false;
        for (a, b) in dirs {
            let (c, s) = (h.cos(), h.sin() / (a * a + b * b).sqrt());
            let cand = normalize([
                c * n[0] + s * (a * e1[0] + b * e2[0]),
                c * n[1] + s * (a * e1[1] + b * e2[1]),
                c * n[2] + s * (a * e1[2] + b * e2[2]),
            ]);
            let v = obj.eval(cand)?;
            if v > best {
                best = v;
                n = cand;
                moved = true;
                break;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    Ok((n, best))
}

/// `max_n ||[J_n, [J_n, rho]]||_1`: a hemisphere grid plus the Fisher
/// eigenvector as starting points, the best few refined by compass search.
pub fn index_q(rho: &DensityOp) -> Result<MeasureResult> {
    let obj = IndexQObjective::new(rho)?;
    let (_, seed) = top_eigen(&fisher_matrix(rho)?);
    let mut starts = vec![(seed, obj.eval(seed)?)];
    for it in 0..=GRID_THETA {
        let theta = it as f64 * FRAC_PI_2 / GRID_THETA as f64;
        let phis = if it == 0 { 1 } else { GRID_PHI };
        for ip in 0..phis {
            let n = unit_vector(theta, ip as f64 * 2.0 * PI / GRID_PHI as f64);
            starts.push((n, obj.eval(n)?));
        }
    }
    starts.sort_by(|a, b| b.1.total_cmp(&a.1));
    let step = FRAC_PI_2 / GRID_THETA as f64;
    let mut best = starts[0];
    for &(n, v) in starts.iter().take(SEEDS) {
        let found = compass_max(&obj, n, v, step)?;
        if found.1 > best.1 {
            best = found;
        }
    }
    let dir = if best.0[2] < 0.0 { best.0.map(|x| -x) } else { best.0 };
    MeasureResult::new(MeasureId::IndexQ, best.1, Some(Witness { direction: Some(dir), ..Default::default() }))
}
