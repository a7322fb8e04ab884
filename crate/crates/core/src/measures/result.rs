use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symcore::{PhotonicState, SymState, C64};

/// Identifiers used on the command line and in JSON output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureId {
    MaxVariance,
    NEff,
    RelativeFisher,
    #[serde(rename = "m2")]
    MSquared,
    CDelta,
    DBar,
    IndexQ,
    IndexP,
    IWigner,
    ISpin,
    SizePg,
}

impl MeasureId {
    pub const ALL: [MeasureId; 11] = [
        MeasureId::MaxVariance,
        MeasureId::NEff,
        MeasureId::RelativeFisher,
        MeasureId::MSquared,
        MeasureId::CDelta,
        MeasureId::DBar,
        MeasureId::IndexQ,
        MeasureId::IndexP,
        MeasureId::IWigner,
        MeasureId::ISpin,
        MeasureId::SizePg,
    ];

    pub fn name(&self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
    }

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Domain(format!("unknown measure '{s}'")))
    }

    /// Measures that take a pair of components rather than a single state.
    pub fn needs_pair(&self) -> bool {
        matches!(
            self,
            MeasureId::RelativeFisher | MeasureId::MSquared | MeasureId::CDelta | MeasureId::DBar | MeasureId::SizePg
        )
    }
}

/// Supporting data for a measure value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Witness {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success_probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// `{"measure": id, "value": v, "witness": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureResult {
    pub measure: MeasureId,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl MeasureResult {
    /// Rejects non-finite values; round-off below zero is clamped.
    pub fn new(measure: MeasureId, value: f64, witness: Option<Witness>) -> Result<Self> {
        if !value.is_finite() || value < -1e-9 * value.abs().max(1.0) {
            return Err(Error::Numerical(format!("{} produced the value {value}", measure.name())));
        }
        Ok(Self { measure, value: value.max(0.0), witness })
    }

    pub fn plain(measure: MeasureId, value: f64) -> Result<Self> {
        Self::new(measure, value, None)
    }
}

/// Components `psi0`, `psi1` of an equal-weight superposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionPair<S> {
    pub psi0: S,
    pub psi1: S,
}

pub type SpinPair = SuperpositionPair<SymState>;
pub type PhotonPair = SuperpositionPair<PhotonicState>;

impl SpinPair {
    pub fn new(psi0: SymState, psi1: SymState) -> Result<Self> {
        if psi0.basis() != psi1.basis() {
            return Err(Error::Contract("pair components live in different Dicke bases".into()));
        }
        Ok(Self { psi0, psi1 })
    }

    pub fn overlap(&self) -> C64 {
        self.psi0.amps().dotc(self.psi1.amps())
    }

    /// `(psi0 + psi1)` normalized.
    pub fn superposition(&self) -> Result<SymState> {
        SymState::normalized(*self.psi0.basis(), self.psi0.amps() + self.psi1.amps())
    }
}

impl PhotonPair {
    pub fn new(psi0: PhotonicState, psi1: PhotonicState) -> Result<Self> {
        if psi0.tag() != psi1.tag() {
            return Err(Error::Contract("pair components live in different Fock bases".into()));
        }
        Ok(Self { psi0, psi1 })
    }

    pub fn overlap(&self) -> C64 {
        self.psi0.amps().dotc(self.psi1.amps())
    }
}
