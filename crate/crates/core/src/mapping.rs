//! Photon absorption by a symmetric spin ensemble.
//!
//! The interaction `H = chi (a J_+ + a† J_-)` conserves `E = n + k` (photon
//! number plus spin excitation), so the joint state splits into blocks of
//! fixed `E` that are evolved independently. Time enters only through the pulse
//! area `g = chi sqrt(M) t`; at `g = pi/2` and `M >> n` a photonic amplitude
//! `c_k` lands on `|M,k>` with phase `(-i)^k`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::symcore::basis::raise_coeff;
use crate::symcore::linalg::{
    c64, hermitian_exp, nilpotent_exp, operator_norm, unitary_from_generator, CMatrix, CVector, C64, MAX_DENSE_DIM,
};
use crate::symcore::{BasisTag, DensityOp, DickeBasis, PhotonicState, SymState};

/// `(-i)^k`.
pub fn absorption_phase(k: usize) -> C64 {
    match k % 4 {
        0 => c64(1.0, 0.0),
        1 => c64(0.0, -1.0),
        2 => c64(-1.0, 0.0),
        _ => c64(0.0, 1.0),
    }
}

/// Photon mode times symmetric spins, stored as excitation blocks.
///
/// Block `E` holds amplitudes of `|E - k> ⊗ |M,k>` for
/// `k` in [`JointState::block_range`].
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    spins: usize,
    photon_cutoff: usize,
    spin_cutoff: usize,
    blocks: BTreeMap<usize, CVector>,
}

impl JointState {
    /// Zero-amplitude state with every block present.
    fn empty(spins: usize, photon_cutoff: usize, spin_cutoff: usize) -> Result<Self> {
        if spin_cutoff > spins {
            return Err(Error::Domain(format!("spin cutoff {spin_cutoff} exceeds M = {spins}")));
        }
        let mut blocks = BTreeMap::new();
        for e in 0..=photon_cutoff + spin_cutoff {
            let (lo, hi) = block_range(spins, photon_cutoff, spin_cutoff, e);
            blocks.insert(e, CVector::zeros(hi - lo + 1));
        }
        Ok(Self { spins, photon_cutoff, spin_cutoff, blocks })
    }

    /// `|psi> ⊗ |chi>` for a single-mode photonic state and a spin state.
    pub fn product(photon: &PhotonicState, spin: &SymState) -> Result<Self> {
        if photon.modes() != 1 {
            return Err(Error::Unsupported("joint states take a single photonic mode".into()));
        }
        let mut out = Self::empty(spin.spins(), photon.cutoff(), spin.basis().cutoff())?;
        for (n, c) in photon.amps().iter().enumerate() {
            for (k, s) in spin.amps().iter().enumerate() {
                let amp = c * s;
                if amp != c64(0.0, 0.0) {
                    out.set(n, k, amp);
                }
            }
        }
        Ok(out)
    }

    /// `|psi> ⊗ |M,0>` with spin truncation `K`.
    pub fn with_ground_spins(photon: &PhotonicState, spins: usize, spin_cutoff: usize) -> Result<Self> {
        let ground = SymState::dicke(DickeBasis::new(spins, spin_cutoff)?, 0)?;
        Self::product(photon, &ground)
    }

    /// Rebuilds a state from explicit blocks, checking shapes and the global norm.
    pub fn from_blocks(
        spins: usize,
        photon_cutoff: usize,
        spin_cutoff: usize,
        blocks: BTreeMap<usize, CVector>,
    ) -> Result<Self> {
        let mut out = Self::empty(spins, photon_cutoff, spin_cutoff)?;
        for (e, v) in blocks {
            let slot = out
                .blocks
                .get_mut(&e)
                .ok_or_else(|| Error::Contract(format!("block E = {e} outside the truncated space")))?;
            if slot.len() != v.len() {
                return Err(Error::Contract(format!("block E = {e} has length {}, expected {}", v.len(), slot.len())));
            }
            *slot = v;
        }
        let norm = out.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Contract(format!("joint state norm^2 = {norm}, expected 1")));
        }
        Ok(out)
    }

    pub fn spins(&self) -> usize {
        self.spins
    }

    pub fn photon_cutoff(&self) -> usize {
        self.photon_cutoff
    }

    pub fn spin_cutoff(&self) -> usize {
        self.spin_cutoff
    }

    pub fn blocks(&self) -> &BTreeMap<usize, CVector> {
        &self.blocks
    }

    /// Range of spin excitations `k` in block `E`.
    pub fn block_range(&self, e: usize) -> (usize, usize) {
        block_range(self.spins, self.photon_cutoff, self.spin_cutoff, e)
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.values().map(|v| v.len()).collect()
    }

    /// Amplitude of `|n> ⊗ |M,k>`.
    pub fn amp(&self, n: usize, k: usize) -> C64 {
        let e = n + k;
        match self.blocks.get(&e) {
            Some(v) => {
                let (lo, hi) = self.block_range(e);
                if (lo..=hi).contains(&k) {
                    v[k - lo]
                } else {
                    c64(0.0, 0.0)
                }
            }
            None => c64(0.0, 0.0),
        }
    }

    fn set(&mut self, n: usize, k: usize, value: C64) {
        let e = n + k;
        let (lo, _) = self.block_range(e);
        self.blocks.get_mut(&e).expect("block exists")[k - lo] = value;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.blocks.values().map(|v| v.norm_squared()).sum()
    }

    /// Population left in the photon vacuum, `sum_k |<0,k|Psi>|^2`.
    pub fn photon_vacuum_population(&self) -> f64 {
        (0..=self.spin_cutoff).map(|k| self.amp(0, k).norm_sqr()).sum()
    }

    /// Spin amplitudes conditioned on the photon vacuum (not renormalized).
    pub fn vacuum_spin_amplitudes(&self) -> CVector {
        CVector::from_iterator(self.spin_cutoff + 1, (0..=self.spin_cutoff).map(|k| self.amp(0, k)))
    }

    /// Reduced spin state, tracing out the photon.
    pub fn spin_marginal(&self) -> Result<DensityOp> {
        let dim = self.spin_cutoff + 1;
        let mut rho = CMatrix::zeros(dim, dim);
        for n in 0..=self.photon_cutoff {
            let v = CVector::from_iterator(dim, (0..dim).map(|k| self.amp(n, k)));
            if v.norm_squared() > 0.0 {
                rho += &v * v.adjoint();
            }
        }
        DensityOp::normalized(BasisTag::DickeSector { spins: self.spins, cutoff: self.spin_cutoff }, rho)
    }

    /// Distribution of spin excitations `P(k)`.
    pub fn spin_excitation_distribution(&self) -> Vec<f64> {
        (0..=self.spin_cutoff)
            .map(|k| (0..=self.photon_cutoff).map(|n| self.amp(n, k).norm_sqr()).sum())
            .collect()
    }
}

fn block_range(spins: usize, photon_cutoff: usize, spin_cutoff: usize, e: usize) -> (usize, usize) {
    let lo = e.saturating_sub(photon_cutoff);
    let hi = e.min(spin_cutoff).min(spins);
    (lo, hi.max(lo))
}

/// Block of `H / (chi sqrt(M))` on the excitation-`E` subspace.
///
/// Row/column `i` is `|E - k, k>` with `k = lo + i`; the coupling
/// `|n,k> -> |n-1,k+1>` is `sqrt(n) C_+(k) / sqrt(M)`.
pub fn block_generator(spins: usize, photon_cutoff: usize, spin_cutoff: usize, e: usize) -> Result<CMatrix> {
    let (lo, hi) = block_range(spins, photon_cutoff, spin_cutoff, e);
    let dim = hi - lo + 1;
    if dim > MAX_DENSE_DIM {
        return Err(Error::DimensionOverflow(format!("excitation block E = {e} has dimension {dim}")));
    }
    let scale = 1.0 / (spins as f64).sqrt();
    let mut h = CMatrix::zeros(dim, dim);
    for k in lo..hi {
        let n = e - k;
        let coupling = (n as f64).sqrt() * raise_coeff(spins, k) * scale;
        let i = k - lo;
        h[(i + 1, i)] = c64(coupling, 0.0);
        h[(i, i + 1)] = c64(coupling, 0.0);
    }
    Ok(h)
}

/// `exp(-i g B_E)`.
pub fn block_unitary(spins: usize, photon_cutoff: usize, spin_cutoff: usize, e: usize, g: f64) -> Result<CMatrix> {
    unitary_from_generator(&block_generator(spins, photon_cutoff, spin_cutoff, e)?, g)
}

/// Exact evolution to pulse area `g`, one block at a time.
pub fn exact_propagate(joint: &JointState, g: f64) -> Result<JointState> {
    exact_propagate_threads(joint, g, 1)
}

/// [`exact_propagate`] spread over up to `threads` workers; the result does not
/// depend on the worker count.
pub fn exact_propagate_threads(joint: &JointState, g: f64, threads: usize) -> Result<JointState> {
    let keys: Vec<usize> = joint.blocks.keys().copied().collect();
    let evolve = |e: usize| -> Result<(usize, CVector)> {
        let v = &joint.blocks[&e];
        if v.len() == 1 || v.norm_squared() == 0.0 {
            return Ok((e, v.clone()));
        }
        let u = block_unitary(joint.spins, joint.photon_cutoff, joint.spin_cutoff, e, g)?;
        Ok((e, u * v))
    };
    let results: Vec<Result<(usize, CVector)>> = if threads <= 1 || keys.len() < 2 {
        keys.iter().map(|&e| evolve(e)).collect()
    } else {
        let chunk = keys.len().div_ceil(threads);
        std::thread::scope(|s| {
            let handles: Vec<_> = keys
                .chunks(chunk)
                .map(|part| s.spawn(|| part.iter().map(|&e| evolve(e)).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("block worker panicked")).collect()
        })
    };
    let mut blocks = BTreeMap::new();
    for r in results {
        let (e, v) = r?;
        blocks.insert(e, v);
    }
    Ok(JointState { blocks, ..joint.clone() })
}

fn warn_regime(cutoff: usize, spins: usize) -> Result<()> {
    if cutoff > spins {
        return Err(Error::Domain(format!("photon cutoff {cutoff} exceeds the spin count {spins}")));
    }
    if 4 * cutoff > spins {
        log::warn!("photon cutoff {cutoff} is outside the low-excitation regime for M = {spins} (K > M/4)");
    }
    Ok(())
}

/// Approximate absorption `c_k |k> -> (-i)^k c_k |M,k>`, with `K` equal to the
/// photon cutoff.
pub fn approx_absorb(psi: &PhotonicState, spins: usize) -> Result<SymState> {
    if psi.modes() != 1 {
        return Err(Error::Unsupported("absorption maps a single photonic mode".into()));
    }
    warn_regime(psi.cutoff(), spins)?;
    let basis = DickeBasis::new(spins, psi.cutoff())?;
    let amps = CVector::from_iterator(basis.dim(), psi.amps().iter().enumerate().map(|(k, c)| absorption_phase(k) * c));
    SymState::new(basis, amps)
}

/// Approximate absorption of a single-mode density operator.
pub fn absorb_density(rho: &DensityOp, spins: usize) -> Result<DensityOp> {
    let cutoff = match rho.tag() {
        BasisTag::Fock { cutoff, modes: 1 } => cutoff,
        other => return Err(Error::Contract(format!("absorb_density expects a single-mode Fock operator, got {other:?}"))),
    };
    warn_regime(cutoff, spins)?;
    let dim = cutoff + 1;
    let mapped = CMatrix::from_fn(dim, dim, |i, j| absorption_phase(i) * rho.matrix()[(i, j)] * absorption_phase(j).conj());
    DensityOp::new(BasisTag::DickeSector { spins, cutoff }, mapped)
}

/// How well the approximate map reproduces exact absorption.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MappingReport {
    pub fidelity: f64,
    pub residual_photon_population: f64,
    pub block_dims: Vec<usize>,
}

/// Exact evolution of `|psi> ⊗ |M,0>` to pulse area `g`, compared with
/// [`approx_absorb`].
pub fn mapping_fidelity(psi: &PhotonicState, spins: usize, g: f64) -> Result<MappingReport> {
    let approx = approx_absorb(psi, spins)?;
    let joint = JointState::with_ground_spins(psi, spins, psi.cutoff())?;
    let out = exact_propagate(&joint, g)?;
    let overlap = approx.amps().dotc(&out.vacuum_spin_amplitudes());
    Ok(MappingReport {
        fidelity: overlap.norm_sqr(),
        residual_photon_population: (1.0 - out.photon_vacuum_population()).max(0.0),
        block_dims: out.block_dims(),
    })
}

/// [`mapping_fidelity`] at `g = pi/2`.
pub fn mapping_fidelity_default(psi: &PhotonicState, spins: usize) -> Result<MappingReport> {
    mapping_fidelity(psi, spins, FRAC_PI_2)
}

/// Largest operator-norm deviation of `U a U†` from `(i/sqrt(M)) J_-` over the
/// excitation blocks `E <= K`, with exact block unitaries at `g = pi/2`.
///
/// Both operators map block `E` to block `E - 1`. Every block with `E <= K` is
/// represented without truncation when the photon and spin cutoffs are `K`.
pub fn verify_operator_map(spins: usize, cutoff: usize) -> Result<f64> {
    if cutoff > spins {
        return Err(Error::Domain(format!("cutoff {cutoff} exceeds M = {spins}")));
    }
    let (pc, kc) = (cutoff, cutoff);
    let target_scale = c64(0.0, 1.0 / (spins as f64).sqrt());
    let mut worst: f64 = 0.0;
    let mut u_prev = block_unitary(spins, pc, kc, 0, FRAC_PI_2)?;
    for e in 1..=cutoff {
        let u = block_unitary(spins, pc, kc, e, FRAC_PI_2)?;
        let (lo, hi) = block_range(spins, pc, kc, e);
        let (lo1, hi1) = block_range(spins, pc, kc, e - 1);
        let mut a = CMatrix::zeros(hi1 - lo1 + 1, hi - lo + 1);
        let mut jm = CMatrix::zeros(hi1 - lo1 + 1, hi - lo + 1);
        for k in lo..=hi {
            let n = e - k;
            // a: |n,k> -> sqrt(n) |n-1,k>
            if n > 0 && (lo1..=hi1).contains(&k) {
                a[(k - lo1, k - lo)] = c64((n as f64).sqrt(), 0.0);
            }
            // J_-: |n,k> -> C_-(k) |n,k-1>
            if k > 0 && (lo1..=hi1).contains(&(k - 1)) {
                jm[(k - 1 - lo1, k - lo)] = c64(raise_coeff(spins, k - 1), 0.0);
            }
        }
        let lhs = &u_prev * a * u.adjoint();
        worst = worst.max(operator_norm(&(lhs - jm * target_scale)));
        u_prev = u;
    }
    Ok(worst)
}

/// Relative Frobenius deviation between `exp(lambda (X_+ + X_-))` and the
/// factorized form
/// `exp(tanh(c lambda)/c X_-) exp(ln cosh(c lambda) X_3 / c^2) exp(tanh(c lambda)/c X_+)`
/// on the spin-`j` representation (`two_j = 2j`), where `X_± = c S_±`,
/// `X_3 = 2 c^2 S_z` and `c = 1/sqrt(2j)`.
pub fn verify_disentangling_identity(two_j: usize, lambda: f64) -> Result<f64> {
    if two_j == 0 {
        return Err(Error::Domain("spin j must be positive".into()));
    }
    let dim = two_j + 1;
    let c = 1.0 / (two_j as f64).sqrt();
    // basis index k = j + m, S_+ |k> = sqrt((k+1)(2j-k)) |k+1>
    let mut sp = CMatrix::zeros(dim, dim);
    let mut sz = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        sz[(k, k)] = c64(k as f64 - two_j as f64 / 2.0, 0.0);
        if k + 1 < dim {
            sp[(k + 1, k)] = c64((((k + 1) * (two_j - k)) as f64).sqrt(), 0.0);
        }
    }
    let xp = sp.scale(c);
    let xm = xp.adjoint();
    let x3 = sz.scale(2.0 * c * c);
    let lhs = hermitian_exp(&(&xp + &xm), lambda)?;
    let t = (c * lambda).tanh() / c;
    let d = (c * lambda).cosh().ln() / (c * c);
    let rhs = nilpotent_exp(&xm.scale(t))? * hermitian_exp(&x3, d)? * nilpotent_exp(&xp.scale(t))?;
    Ok((&lhs - rhs).norm() / lhs.norm())
}
