//! Factories for the named photonic and spin states.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{PhotonPair, SpinPair};
use crate::symcore::combinatorics::{log_binomial_unchecked, log_factorial};
use crate::symcore::linalg::{c64, unitary_from_generator, CMatrix, CVector, C64};
use crate::symcore::state::DEFAULT_TAIL_TOL;
use crate::symcore::{BasisTag, DensityOp, DickeBasis, PhotonicState, SymState};

/// Tail tolerance declared by states whose support is represented exactly.
const EXACT_SUPPORT_TOL: f64 = 1.0;

/// Smallest cutoff accepted for a Poissonian photon distribution of mean `n`.
pub fn min_coherent_cutoff(mean: f64) -> usize {
    (mean + 6.0 * (mean + 1.0).sqrt()).ceil() as usize
}

/// Cutoff used when none is given: comfortably past the Poisson tail.
pub fn default_cutoff(mean: f64) -> usize {
    (mean + 8.0 * (mean + 1.0).sqrt() + 10.0).ceil() as usize
}

fn check_coherent_cutoff(alpha: C64, cutoff: usize, extra: usize) -> Result<()> {
    let need = min_coherent_cutoff(alpha.norm_sqr()) + extra;
    if cutoff < need {
        return Err(Error::Truncation(format!(
            "cutoff {cutoff} too small for |alpha|^2 = {:.4}; need at least {need}",
            alpha.norm_sqr()
        )));
    }
    Ok(())
}

/// Truncated coherent amplitudes `exp(-|a|^2/2) a^k / sqrt(k!)`, not renormalized.
pub fn coherent_amplitudes(alpha: C64, cutoff: usize) -> CVector {
    let r2 = alpha.norm_sqr();
    let mut amps = CVector::zeros(cutoff + 1);
    if r2 == 0.0 {
        amps[0] = c64(1.0, 0.0);
        return amps;
    }
    let (r, phase) = (r2.sqrt(), alpha.arg());
    for k in 0..=cutoff {
        let log_mag = -0.5 * r2 + k as f64 * r.ln() - 0.5 * log_factorial(k as u64);
        amps[k] = C64::from_polar(log_mag.exp(), k as f64 * phase);
    }
    amps
}

/// Fock state `|N>`.
pub fn make_fock(n: usize, cutoff: usize) -> Result<PhotonicState> {
    if n > cutoff {
        return Err(Error::Domain(format!("Fock level {n} exceeds cutoff {cutoff}")));
    }
    let mut amps = CVector::zeros(cutoff + 1);
    amps[n] = c64(1.0, 0.0);
    PhotonicState::new(1, cutoff, amps, EXACT_SUPPORT_TOL)
}

/// Coherent state `|alpha>`.
pub fn make_coherent(alpha: C64, cutoff: usize) -> Result<PhotonicState> {
    check_coherent_cutoff(alpha, cutoff, 0)?;
    PhotonicState::normalized(1, cutoff, coherent_amplitudes(alpha, cutoff), DEFAULT_TAIL_TOL)
}

fn cat_amplitudes(alpha: C64, cutoff: usize, parity: i32) -> CVector {
    let mut amps = coherent_amplitudes(alpha, cutoff);
    for (k, a) in amps.iter_mut().enumerate() {
        if (k as i32 + parity) % 2 != 0 {
            *a = c64(0.0, 0.0);
        } else {
            *a *= 2.0;
        }
    }
    amps
}

/// Even cat `(|alpha> + |-alpha>) / sqrt(2 (1 + exp(-2|alpha|^2)))`.
pub fn make_even_cat(alpha: C64, cutoff: usize) -> Result<PhotonicState> {
    check_coherent_cutoff(alpha, cutoff, 0)?;
    let norm = 1.0 / (2.0 * (1.0 + (-2.0 * alpha.norm_sqr()).exp())).sqrt();
    let amps = cat_amplitudes(alpha, cutoff, 0).scale(norm);
    PhotonicState::normalized(1, cutoff, amps, DEFAULT_TAIL_TOL)
}

/// Odd cat, proportional to `|alpha> - |-alpha>`.
pub fn make_odd_cat(alpha: C64, cutoff: usize) -> Result<PhotonicState> {
    if alpha.norm_sqr() == 0.0 {
        return Err(Error::Domain("odd cat is undefined at alpha = 0".into()));
    }
    check_coherent_cutoff(alpha, cutoff, 0)?;
    PhotonicState::normalized(1, cutoff, cat_amplitudes(alpha, cutoff, 1), DEFAULT_TAIL_TOL)
}

/// `(|0> + |2N>) / sqrt(2)`.
pub fn make_fock_superposition(n: usize, cutoff: usize) -> Result<PhotonicState> {
    if 2 * n > cutoff {
        return Err(Error::Domain(format!("level 2N = {} exceeds cutoff {cutoff}", 2 * n)));
    }
    if n == 0 {
        return make_fock(0, cutoff);
    }
    let mut amps = CVector::zeros(cutoff + 1);
    amps[0] = c64(FRAC_1_SQRT_2, 0.0);
    amps[2 * n] = c64(FRAC_1_SQRT_2, 0.0);
    PhotonicState::new(1, cutoff, amps, EXACT_SUPPORT_TOL)
}

/// Annihilation operator on `cutoff + 1` Fock levels.
pub fn annihilation(cutoff: usize) -> CMatrix {
    let mut a = CMatrix::zeros(cutoff + 1, cutoff + 1);
    for n in 1..=cutoff {
        a[(n - 1, n)] = c64((n as f64).sqrt(), 0.0);
    }
    a
}

/// Displacement `exp(alpha a† - alpha* a)` on the truncated Fock space.
///
/// Built as `exp(-i G)` with Hermitian `G = i (alpha a† - alpha* a)`.
pub fn displacement_matrix(alpha: C64, cutoff: usize) -> Result<CMatrix> {
    let a = annihilation(cutoff);
    let i = c64(0.0, 1.0);
    let gen = (a.adjoint() * alpha - &a * alpha.conj()) * i;
    unitary_from_generator(&gen, 1.0)
}

/// Applies `D_alpha` to mode `mode` (0 or 1).
pub fn displace(state: &PhotonicState, alpha: C64, mode: usize) -> Result<PhotonicState> {
    if mode >= state.modes() {
        return Err(Error::Domain(format!("mode {mode} does not exist in a {}-mode state", state.modes())));
    }
    let d = displacement_matrix(alpha, state.cutoff())?;
    let amps = match state.modes() {
        1 => &d * state.amps(),
        _ => {
            let s = state.cutoff() + 1;
            // amplitudes as an s x s matrix with row index n1
            let mat = CMatrix::from_row_slice(s, s, state.amps().as_slice());
            let out = if mode == 0 { &d * mat } else { mat * d.transpose() };
            CVector::from_iterator(s * s, out.transpose().iter().copied())
        }
    };
    PhotonicState::new(state.modes(), state.cutoff(), amps, DEFAULT_TAIL_TOL)
}

/// `(D_alpha ⊗ 1)(|0,1> - |1,0>) / sqrt(2)`.
pub fn make_displaced_single_photon(alpha: C64, cutoff: usize) -> Result<PhotonicState> {
    check_coherent_cutoff(alpha, cutoff, 2)?;
    let s = cutoff + 1;
    let mut amps = CVector::zeros(s * s);
    amps[1] = c64(FRAC_1_SQRT_2, 0.0); // |0,1>
    amps[s] = c64(-FRAC_1_SQRT_2, 0.0); // |1,0>
    let bell = PhotonicState::new(2, cutoff, amps, EXACT_SUPPORT_TOL)?;
    displace(&bell, alpha, 0)
}

/// Single-mode component `D_alpha (|0> + sign |1>) / sqrt(2)`.
pub fn make_displaced_qubit(alpha: C64, sign: f64, cutoff: usize) -> Result<PhotonicState> {
    check_coherent_cutoff(alpha, cutoff, 2)?;
    let mut amps = CVector::zeros(cutoff + 1);
    amps[0] = c64(FRAC_1_SQRT_2, 0.0);
    amps[1] = c64(sign.signum() * FRAC_1_SQRT_2, 0.0);
    let plus = PhotonicState::new(1, cutoff, amps, EXACT_SUPPORT_TOL)?;
    displace(&plus, alpha, 0)
}

/// `(|M,0> + |M,M>) / sqrt(2)` on the full symmetric sector.
pub fn make_ghz(spins: usize) -> Result<SymState> {
    let basis = DickeBasis::full(spins)?;
    let mut amps = CVector::zeros(basis.dim());
    amps[0] = c64(FRAC_1_SQRT_2, 0.0);
    amps[spins] += c64(FRAC_1_SQRT_2, 0.0);
    SymState::normalized(basis, amps)
}

/// `|M,k>` truncated at `cutoff`.
pub fn make_dicke(spins: usize, k: usize, cutoff: usize) -> Result<SymState> {
    SymState::dicke(DickeBasis::new(spins, cutoff)?, k)
}

/// Product state `(sqrt(1 - |a|^2/M) |g> - i a/sqrt(M) |e>)^{⊗M}` in the Dicke basis.
///
/// Amplitudes `sqrt(C(M,k)) (1 - |a|^2/M)^{(M-k)/2} (-i a / sqrt(M))^k`,
/// assembled in log space and renormalized after truncation.
pub fn make_spin_coherent(alpha: C64, spins: usize, cutoff: usize) -> Result<SymState> {
    let basis = DickeBasis::new(spins, cutoff)?;
    let m = spins as f64;
    let p = alpha.norm_sqr() / m;
    if p > 1.0 {
        return Err(Error::Domain(format!("|alpha|^2 = {} exceeds the spin count {spins}", alpha.norm_sqr())));
    }
    let mut amps = CVector::zeros(basis.dim());
    if p == 0.0 {
        amps[0] = c64(1.0, 0.0);
        return SymState::new(basis, amps);
    }
    let excited = c64(0.0, -1.0) * alpha / m.sqrt();
    let (log_e, phase) = (excited.norm().ln(), excited.arg());
    let log_g = if p < 1.0 { 0.5 * (1.0 - p).ln() } else { f64::NEG_INFINITY };
    let mut dropped_guess = 1.0;
    for k in 0..=cutoff {
        let logmag = 0.5 * log_binomial_unchecked(spins as u64, k as u64)
            + (spins - k) as f64 * log_g
            + k as f64 * log_e;
        let mag = if logmag.is_finite() { logmag.exp() } else { 0.0 };
        amps[k] = C64::from_polar(mag, k as f64 * phase);
        dropped_guess -= mag * mag;
    }
    if dropped_guess > 1e-8 {
        return Err(Error::Truncation(format!(
            "spin-coherent state loses population {dropped_guess:.3e} at K = {cutoff}"
        )));
    }
    SymState::normalized(basis, amps)
}

/// `(1+d)/2 |Ψ+><Ψ+| + (1-d)/2 |Ψ-><Ψ-|` with even and odd cats `Ψ±`.
pub fn make_mixed_cat(alpha: C64, d: f64, cutoff: usize) -> Result<DensityOp> {
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::Domain(format!("mixing parameter d = {d} outside [0, 1]")));
    }
    let even = make_even_cat(alpha, cutoff)?;
    let odd = make_odd_cat(alpha, cutoff)?;
    let w_even = 0.5 * (1.0 + d);
    let w_odd = 0.5 * (1.0 - d);
    let rho = (even.amps() * even.amps().adjoint()).scale(w_even) + (odd.amps() * odd.amps().adjoint()).scale(w_odd);
    DensityOp::new(BasisTag::Fock { cutoff, modes: 1 }, rho)
}

/// `1/2 |alpha><alpha| + 1/2 |-alpha><-alpha|`.
pub fn make_incoherent_cat(alpha: C64, cutoff: usize) -> Result<DensityOp> {
    let plus = make_coherent(alpha, cutoff)?;
    let minus = make_coherent(-alpha, cutoff)?;
    plus.density().mix(&minus.density(), 0.5)
}

/// Named state families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateName {
    Fock,
    Coherent,
    EvenCat,
    FockSuperposition,
    DisplacedSinglePhoton,
    Ghz,
    Dicke,
    SpinCoherent,
    MixedCat,
}

impl StateName {
    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Domain(format!("unknown state name '{s}'")))
    }
}

/// A complex parameter given either as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexParam {
    Real(f64),
    Complex([f64; 2]),
}

impl ComplexParam {
    pub fn value(&self) -> C64 {
        match *self {
            ComplexParam::Real(r) => c64(r, 0.0),
            ComplexParam::Complex([re, im]) => c64(re, im),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<ComplexParam>,
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub k_cutoff: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
}

/// `{"name": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub name: StateName,
    #[serde(default)]
    pub params: StateParams,
}

/// Whatever a spec builds.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltState {
    Photonic(PhotonicState),
    Spin(SymState),
    Density(DensityOp),
}

impl StateSpec {
    pub fn build(&self) -> Result<BuiltState> {
        let p = &self.params;
        let need = |v: Option<usize>, what: &str| v.ok_or_else(|| Error::Domain(format!("missing parameter {what}")));
        let alpha = || {
            p.alpha.map(|a| a.value()).ok_or_else(|| Error::Domain("missing parameter alpha".into()))
        };
        let cutoff_for = |mean: f64| p.cutoff.unwrap_or_else(|| default_cutoff(mean));
        Ok(match self.name {
            StateName::Fock => {
                let n = need(p.n, "N")?;
                BuiltState::Photonic(make_fock(n, p.cutoff.unwrap_or(n + 2))?)
            }
            StateName::Coherent => {
                let a = alpha()?;
                BuiltState::Photonic(make_coherent(a, cutoff_for(a.norm_sqr()))?)
            }
            StateName::EvenCat => {
                let a = alpha()?;
                BuiltState::Photonic(make_even_cat(a, cutoff_for(a.norm_sqr()))?)
            }
            StateName::FockSuperposition => {
                let n = need(p.n, "N")?;
                BuiltState::Photonic(make_fock_superposition(n, p.cutoff.unwrap_or(2 * n + 2))?)
            }
            StateName::DisplacedSinglePhoton => {
                let a = alpha()?;
                let cutoff = p.cutoff.unwrap_or_else(|| default_cutoff(a.norm_sqr() + 1.0) + 2);
                BuiltState::Photonic(make_displaced_single_photon(a, cutoff)?)
            }
            StateName::MixedCat => {
                let a = alpha()?;
                let d = p.d.ok_or_else(|| Error::Domain("missing parameter d".into()))?;
                BuiltState::Density(make_mixed_cat(a, d, cutoff_for(a.norm_sqr()))?)
            }
            StateName::Ghz => BuiltState::Spin(make_ghz(need(p.m, "M")?)?),
            StateName::Dicke => {
                let m = need(p.m, "M")?;
                let n = need(p.n, "N")?;
                let k = p.k_cutoff.unwrap_or_else(|| (4 * n + 25).min(m).max(n));
                BuiltState::Spin(make_dicke(m, n, k)?)
            }
            StateName::SpinCoherent => {
                let m = need(p.m, "M")?;
                let a = alpha()?;
                let k = p.k_cutoff.unwrap_or_else(|| DickeBasis::for_mean_excitation(m, a.norm_sqr()).map(|b| b.cutoff()).unwrap_or(m));
                BuiltState::Spin(make_spin_coherent(a, m, k)?)
            }
        })
    }
}

/// The two components whose equal-weight superposition is a named state.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltPair {
    Photonic(PhotonPair),
    Spin(SpinPair),
}

impl StateSpec {
    /// Components of the states that are superpositions of two named branches:
    /// `|±alpha>` for the even cat, `|0>, |2N>` for the Fock superposition,
    /// `D_alpha|±>` for the displaced single photon and `|M,0>, |M,M>` for GHZ.
    pub fn build_components(&self) -> Result<BuiltPair> {
        let p = &self.params;
        let need = |v: Option<usize>, what: &str| v.ok_or_else(|| Error::Domain(format!("missing parameter {what}")));
        let alpha = || p.alpha.map(|a| a.value()).ok_or_else(|| Error::Domain("missing parameter alpha".into()));
        Ok(match self.name {
            StateName::EvenCat => {
                let a = alpha()?;
                let k = p.cutoff.unwrap_or_else(|| default_cutoff(a.norm_sqr()));
                BuiltPair::Photonic(PhotonPair::new(make_coherent(a, k)?, make_coherent(-a, k)?)?)
            }
            StateName::FockSuperposition => {
                let n = need(p.n, "N")?;
                let k = p.cutoff.unwrap_or(2 * n + 2);
                BuiltPair::Photonic(PhotonPair::new(make_fock(0, k)?, make_fock(2 * n, k)?)?)
            }
            StateName::DisplacedSinglePhoton => {
                let a = alpha()?;
                let k = p.cutoff.unwrap_or_else(|| default_cutoff(a.norm_sqr() + 1.0) + 2);
                BuiltPair::Photonic(PhotonPair::new(make_displaced_qubit(a, 1.0, k)?, make_displaced_qubit(a, -1.0, k)?)?)
            }
            StateName::Ghz => {
                let m = need(p.m, "M")?;
                BuiltPair::Spin(SpinPair::new(make_dicke(m, 0, m)?, make_dicke(m, m, m)?)?)
            }
            other => {
                let name = serde_json::to_value(other).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
                return Err(Error::Undefined(format!("{name} is not a superposition of two named components")));
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_states() {
        let vac = make_fock(0, 5).unwrap();
        assert_eq!(vac.amps()[0], c64(1.0, 0.0));
        let f3 = make_fock(3, 10).unwrap();
        assert_eq!(f3.amps()[3], c64(1.0, 0.0));
        assert!((f3.mean_photons(0) - 3.0).abs() < 1e-15);
        assert!(make_fock(4, 3).is_err());
    }

    #[test]
    fn coherent_poisson_weights() {
        assert_eq!(make_coherent(c64(0.0, 0.0), 10).unwrap().amps()[0], c64(1.0, 0.0));
        let st = make_coherent(c64(2.0, 0.0), default_cutoff(4.0)).unwrap();
        // e^-4 4^4 / 4!
        let want = (-4.0f64).exp() * 256.0 / 24.0;
        assert!((st.amps()[4].norm_sqr() - want).abs() < 1e-10);
        assert!((want - 0.19537).abs() < 1e-5);
        let alpha = c64(1.3, -0.4);
        let st = make_coherent(alpha, default_cutoff(alpha.norm_sqr())).unwrap();
        assert!((st.mean_field(0) - alpha).norm() < 1e-8);
    }

    #[test]
    fn coherent_cutoff_guard() {
        assert!(matches!(make_coherent(c64(3.0, 0.0), 12), Err(Error::Truncation(_))));
    }

    #[test]
    fn even_cat_parity_and_mean() {
        for r2 in [1.0f64, 4.0, 9.0] {
            let a = c64(r2.sqrt(), 0.0);
            let st = make_even_cat(a, default_cutoff(r2)).unwrap();
            for k in (1..st.amps().len()).step_by(2) {
                assert_eq!(st.amps()[k], c64(0.0, 0.0));
            }
            assert!((st.mean_photons(0) - r2 * r2.tanh()).abs() < 1e-8);
        }
        let vac = make_even_cat(c64(1e-9, 0.0), 12).unwrap();
        assert!((vac.amps()[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fock_superposition() {
        let st = make_fock_superposition(3, 8).unwrap();
        assert!((st.amps()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((st.amps()[6].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((st.mean_photons(0) - 3.0).abs() < 1e-14);
        assert!(st.mean_field(0).norm() < 1e-15);
    }

    #[test]
    fn displaced_single_photon_moments() {
        let bell = make_displaced_single_photon(c64(0.0, 0.0), 8).unwrap();
        assert!((bell.amp(0, 1).re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((bell.amp(1, 0).re + FRAC_1_SQRT_2).abs() < 1e-12);
        for r2 in [1.0f64, 4.0] {
            let a = c64(r2.sqrt(), 0.0);
            let st = make_displaced_single_photon(a, default_cutoff(r2 + 1.0) + 2).unwrap();
            assert!((st.mean_photons(0) - (r2 + 0.5)).abs() < 1e-8);
            assert!((st.mean_photons(0) + st.mean_photons(1) - (r2 + 1.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn displacing_vacuum_gives_coherent() {
        let alpha = c64(1.5, 0.7);
        let cutoff = default_cutoff(alpha.norm_sqr());
        let d = displace(&make_fock(0, cutoff).unwrap(), alpha, 0).unwrap();
        let coh = make_coherent(alpha, cutoff).unwrap();
        assert!((d.amps() - coh.amps()).norm() < 1e-8);
        assert!((d.mean_field(0) - coh.mean_field(0)).norm() < 1e-8);
    }

    #[test]
    fn displacement_against_laguerre_elements() {
        // <m|D(a)|n> = sqrt(n!/m!) a^{m-n} e^{-|a|^2/2} L_n^{(m-n)}(|a|^2) for m >= n
        fn laguerre(n: usize, k: f64, x: f64) -> f64 {
            let (mut l0, mut l1) = (1.0, 1.0 + k - x);
            if n == 0 {
                return l0;
            }
            for j in 1..n {
                let jf = j as f64;
                let l2 = ((2.0 * jf + 1.0 + k - x) * l1 - (jf + k) * l0) / (jf + 1.0);
                l0 = l1;
                l1 = l2;
            }
            l1
        }
        let a = 1.2f64;
        let cutoff = 60;
        let d = displacement_matrix(c64(a, 0.0), cutoff).unwrap();
        for n in 0..5usize {
            for m in n..n + 6 {
                let lf = log_factorial(n as u64) - log_factorial(m as u64);
                let want = (0.5 * lf).exp() * a.powi((m - n) as i32) * (-a * a / 2.0).exp()
                    * laguerre(n, (m - n) as f64, a * a);
                assert!((d[(m, n)].re - want).abs() < 1e-10, "m={m} n={n}");
                assert!(d[(m, n)].im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn displacement_inverse_and_norm() {
        let alpha = c64(0.8, -1.1);
        let st = make_even_cat(c64(1.0, 0.0), 40).unwrap();
        let there = displace(&st, alpha, 0).unwrap();
        assert!((there.amps().norm() - 1.0).abs() < 1e-9);
        let back = displace(&there, -alpha, 0).unwrap();
        assert!((back.amps() - st.amps()).norm() < 1e-8);
        let shift = there.mean_field(0) - st.mean_field(0);
        assert!((shift - alpha).norm() < 1e-8);
    }

    #[test]
    fn spin_states() {
        let ghz = make_ghz(2).unwrap();
        assert!((ghz.amps()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((ghz.amps()[2].re - FRAC_1_SQRT_2).abs() < 1e-15);
        let d = make_dicke(50, 3, 10).unwrap();
        assert_eq!(d.amps()[3], c64(1.0, 0.0));
        let m = 2000;
        let alpha = c64(1.5, 0.0);
        let sc = make_spin_coherent(alpha, m, 40).unwrap();
        let ladder = sc.normalized_ladder_excitation();
        // product state: <J+J->/M = p + (M - 1) p (1 - p) with p = |alpha|^2 / M
        let (mf, r2) = (m as f64, alpha.norm_sqr());
        let p = r2 / mf;
        assert!((ladder - (p + (mf - 1.0) * p * (1.0 - p))).abs() < 1e-9);
        assert!((sc.mean_excitation() - r2).abs() < 1e-9);
    }

    #[test]
    fn mixed_cat_spectrum() {
        let alpha = c64(2.0, 0.0);
        let pure = make_mixed_cat(alpha, 1.0, 40).unwrap();
        let cat = make_even_cat(alpha, 40).unwrap();
        assert!((pure.matrix() - cat.density().matrix()).norm() < 1e-12);
        let half = make_mixed_cat(alpha, 0.0, 40).unwrap();
        assert!((crate::symcore::linalg::trace(half.matrix()).re - 1.0).abs() < 1e-12);
        let rho = make_mixed_cat(alpha, 0.4, 40).unwrap();
        let vals = rho.eig().unwrap().values;
        let n = vals.len();
        assert!((vals[n - 1] - 0.7).abs() < 1e-10);
        assert!((vals[n - 2] - 0.3).abs() < 1e-10);
        assert!(vals[..n - 2].iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn spec_round_trip_and_build() {
        let json = r#"{"name": "even-cat", "params": {"alpha": 2.0}}"#;
        let spec: StateSpec = serde_json::from_str(json).unwrap();
        match spec.build().unwrap() {
            BuiltState::Photonic(p) => assert!(p.amps()[1].norm() == 0.0),
            other => panic!("unexpected {other:?}"),
        }
        let cplx: StateSpec = serde_json::from_str(r#"{"name":"coherent","params":{"alpha":[0.5,0.5]}}"#).unwrap();
        assert!(cplx.build().is_ok());
        assert!(serde_json::from_str::<StateSpec>(r#"{"name":"fock","params":{"bogus":1}}"#).is_err());
        let missing: StateSpec = serde_json::from_str(r#"{"name":"fock"}"#).unwrap();
        assert!(missing.build().is_err());
        let ghz: StateSpec = serde_json::from_str(r#"{"name":"ghz","params":{"M":4}}"#).unwrap();
        assert!(matches!(ghz.build().unwrap(), BuiltState::Spin(_)));
    }

    #[test]
    fn named_components() {
        let spec = |json: &str| -> StateSpec { serde_json::from_str(json).unwrap() };
        match spec(r#"{"name": "fock-superposition", "params": {"N": 3}}"#).build_components().unwrap() {
            BuiltPair::Photonic(p) => {
                assert_eq!(p.psi0.amps()[0], c64(1.0, 0.0));
                assert_eq!(p.psi1.amps()[6], c64(1.0, 0.0));
            }
            other => panic!("{other:?}"),
        }
        match spec(r#"{"name": "even-cat", "params": {"alpha": 2}}"#).build_components().unwrap() {
            BuiltPair::Photonic(p) => assert!((p.overlap().re - (-8.0f64).exp()).abs() < 1e-10),
            other => panic!("{other:?}"),
        }
        assert!(matches!(spec(r#"{"name": "ghz", "params": {"M": 6}}"#).build_components(), Ok(BuiltPair::Spin(_))));
        assert!(matches!(
            spec(r#"{"name": "fock", "params": {"N": 2}}"#).build_components(),
            Err(Error::Undefined(_))
        ));
    }
}
