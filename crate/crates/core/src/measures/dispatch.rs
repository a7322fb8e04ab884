//! Routes a measure to whatever kind of input was loaded.
//!
//! Photonic inputs reach the spin measures through [`approx_absorb`] when a
//! spin count is supplied. Single-state measures applied to a pair act on the
//! normalized superposition `psi0 + psi1`. Superposition measures applied to a
//! single state are undefined.

use serde::{Deserialize, Serialize};

use super::photonic::{size_pg, wigner_i_photonic, wigner_i_photonic_mixed, Channel};
use super::result::{MeasureId, MeasureResult, PhotonPair, SpinPair, Witness};
use super::{groups, spin};
use crate::error::{Error, Result};
use crate::io::Loaded;
use crate::mapping::{absorb_density, approx_absorb};
use crate::scaling::SpinImage;
use crate::symcore::{BasisTag, DensityOp, PhotonicState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct DispatchParams {
    /// Error tolerance of `c-delta`.
    pub delta: f64,
    /// Guessing threshold of `size-pg`.
    pub p_g: f64,
    /// Detector channel of `size-pg`.
    pub channel: Channel,
    /// Spin count used to absorb photonic inputs before a spin measure.
    pub spins: Option<usize>,
}

impl Default for DispatchParams {
    fn default() -> Self {
        Self { delta: 0.1, p_g: 2.0 / 3.0, channel: Channel::PhotonCount, spins: None }
    }
}

/// Evaluates `id` on `input`.
pub fn measure(id: MeasureId, input: &Loaded, p: &DispatchParams) -> Result<MeasureResult> {
    match input {
        Loaded::Spin(s) => single_spin(id, &SpinImage::Pure(s.clone())),
        Loaded::Density(r) => match r.tag() {
            BasisTag::DickeSector { .. } => single_spin(id, &SpinImage::Mixed(r.clone())),
            BasisTag::Fock { .. } => photonic_mixed(id, r, p),
        },
        Loaded::Photonic(psi) => photonic(id, psi, p),
        Loaded::SpinPair(pair) => spin_pair(id, pair, p),
        Loaded::PhotonPair(pair) => photon_pair(id, pair, p),
    }
}

fn single_component(id: MeasureId) -> Error {
    Error::Undefined(format!("{} compares two components; the input is a single state", id.name()))
}

fn spins_needed(id: MeasureId, p: &DispatchParams) -> Result<usize> {
    p.spins.ok_or_else(|| {
        Error::Domain(format!("{} is a spin measure; give a spin count to absorb the photonic input first", id.name()))
    })
}

fn single_spin(id: MeasureId, image: &SpinImage) -> Result<MeasureResult> {
    let direction = |n: [f64; 3]| Some(Witness { direction: Some(n), ..Default::default() });
    let max_variance = || -> Result<(f64, [f64; 3])> {
        match image {
            SpinImage::Pure(s) => Ok(spin::max_variance_collective(s)),
            SpinImage::Mixed(r) => spin::max_variance_collective_mixed(r),
        }
    };
    match id {
        MeasureId::MaxVariance => {
            let (v, n) = max_variance()?;
            MeasureResult::new(id, v, direction(n))
        }
        MeasureId::IndexP => {
            let (v, n) = max_variance()?;
            let spins = match image {
                SpinImage::Pure(s) => s.spins(),
                SpinImage::Mixed(r) => r.dicke_basis()?.spins(),
            };
            MeasureResult::new(id, v / spins as f64, direction(n))
        }
        MeasureId::NEff => match image {
            SpinImage::Pure(s) => spin::n_eff(s),
            SpinImage::Mixed(r) => spin::n_eff_mixed(r),
        },
        MeasureId::ISpin => match image {
            SpinImage::Pure(s) => spin::wigner_i_spin(s),
            SpinImage::Mixed(r) => spin::wigner_i_spin_mixed(r),
        },
        MeasureId::IndexQ => spin::index_q(&image.density()),
        MeasureId::IWigner => {
            Err(Error::Undefined("i-wigner is a photonic measure; use i-spin on spin states".into()))
        }
        MeasureId::SizePg => Err(Error::Undefined("size-pg takes photonic components".into())),
        MeasureId::RelativeFisher | MeasureId::MSquared | MeasureId::CDelta | MeasureId::DBar => {
            Err(single_component(id))
        }
    }
}

fn photonic(id: MeasureId, psi: &PhotonicState, p: &DispatchParams) -> Result<MeasureResult> {
    match id {
        MeasureId::IWigner => wigner_i_photonic(psi),
        _ if id.needs_pair() => Err(single_component(id)),
        _ => single_spin(id, &SpinImage::Pure(approx_absorb(psi, spins_needed(id, p)?)?)),
    }
}

fn photonic_mixed(id: MeasureId, rho: &DensityOp, p: &DispatchParams) -> Result<MeasureResult> {
    match id {
        MeasureId::IWigner => wigner_i_photonic_mixed(rho),
        _ if id.needs_pair() => Err(single_component(id)),
        _ => single_spin(id, &SpinImage::Mixed(absorb_density(rho, spins_needed(id, p)?)?)),
    }
}

fn spin_pair(id: MeasureId, pair: &SpinPair, p: &DispatchParams) -> Result<MeasureResult> {
    match id {
        MeasureId::RelativeFisher => spin::relative_fisher(pair),
        MeasureId::MSquared => spin::m_squared(pair),
        MeasureId::CDelta => groups::c_delta(pair, p.delta),
        MeasureId::DBar => groups::d_bar(pair),
        MeasureId::SizePg => Err(Error::Undefined("size-pg takes photonic components".into())),
        _ => single_spin(id, &SpinImage::Pure(pair.superposition()?)),
    }
}

fn photon_pair(id: MeasureId, pair: &PhotonPair, p: &DispatchParams) -> Result<MeasureResult> {
    let superposition = || {
        let (a, b) = (&pair.psi0, &pair.psi1);
        PhotonicState::normalized(a.modes(), a.cutoff(), a.amps() + b.amps(), a.tail_tol().max(b.tail_tol()))
    };
    match id {
        MeasureId::SizePg => size_pg(pair, p.p_g, p.channel),
        MeasureId::IWigner => wigner_i_photonic(&superposition()?),
        _ if id.needs_pair() => {
            let spins = spins_needed(id, p)?;
            let mapped = SpinPair::new(approx_absorb(&pair.psi0, spins)?, approx_absorb(&pair.psi1, spins)?)?;
            spin_pair(id, &mapped, p)
        }
        _ => single_spin(id, &SpinImage::Pure(approx_absorb(&superposition()?, spins_needed(id, p)?)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{make_dicke, make_fock, make_ghz};

    #[test]
    fn routes_by_input_kind() {
        let p = DispatchParams::default();
        let ghz = Loaded::Spin(make_ghz(20).unwrap());
        assert!((measure(MeasureId::NEff, &ghz, &p).unwrap().value - 20.0).abs() < 1e-9);
        assert!(matches!(measure(MeasureId::MSquared, &ghz, &p), Err(Error::Undefined(_))));

        let fock = Loaded::Photonic(make_fock(3, 16).unwrap());
        assert!((measure(MeasureId::IWigner, &fock, &p).unwrap().value - 3.5).abs() < 1e-12);
        assert!(matches!(measure(MeasureId::NEff, &fock, &p), Err(Error::Domain(_))));
        let with_spins = DispatchParams { spins: Some(600), ..p };
        let v = measure(MeasureId::NEff, &fock, &with_spins).unwrap().value;
        assert!((v - 7.0).abs() < 0.1, "{v}");

        let rho = Loaded::Density(make_fock(2, 6).unwrap().density());
        assert!((measure(MeasureId::IWigner, &rho, &p).unwrap().value - 2.5).abs() < 1e-12);
    }

    #[test]
    fn pairs() {
        let p = DispatchParams::default();
        let m = 400;
        let pair = SpinPair::new(make_dicke(m, 0, 12).unwrap(), make_dicke(m, 8, 12).unwrap()).unwrap();
        let input = Loaded::SpinPair(pair);
        assert!((measure(MeasureId::DBar, &input, &p).unwrap().value - 8.0).abs() < 1e-9);
        let sup = measure(MeasureId::NEff, &input, &p).unwrap().value;
        assert!((sup / 9.0 - 1.0).abs() < 0.05, "{sup}");

        let photons = PhotonPair::new(make_fock(0, 10).unwrap(), make_fock(8, 10).unwrap()).unwrap();
        let input = Loaded::PhotonPair(photons);
        let i = measure(MeasureId::IWigner, &input, &p).unwrap().value;
        assert!((i - 4.5).abs() < 1e-9, "{i}");
        assert!(measure(MeasureId::SizePg, &input, &p).unwrap().value > 0.0);
        assert!(matches!(measure(MeasureId::MSquared, &input, &p), Err(Error::Domain(_))));
        let with_spins = DispatchParams { spins: Some(m), ..p };
        assert!((measure(MeasureId::DBar, &input, &with_spins).unwrap().value - 8.0).abs() < 1e-9);
    }
}
