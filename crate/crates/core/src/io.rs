//! File formats shared by the command line and the browser demo.
//!
//! States are stored as `{"header": {...}, "state": {...}}` where the state is
//! a pure vector, a density matrix, or a pair of pure components. Complex
//! numbers are `[re, im]`. Every floating-point number written through
//! [`to_json`] carries at most 12 significant digits.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::measures::{PhotonPair, SpinPair};
use crate::symcore::linalg::{c64, CMatrix, CVector};
use crate::symcore::state::DEFAULT_TAIL_TOL;
use crate::symcore::{BasisTag, DensityOp, DickeBasis, PhotonicState, SymState};

/// Significant digits of every number written out.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Positional decimal with at most 12 significant digits, trailing zeros dropped.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let r = round_sig(x);
    if r == 0.0 {
        return "0".into();
    }
    let exp = r.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
    let s = format!("{r:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Provenance written at the top of every output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Header {
    pub fn new(config_hash: impl Into<String>, seed: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config_hash.into(),
            seed,
        }
    }

    /// `# key: value` lines for CSV and text outputs.
    pub fn comment_lines(&self) -> String {
        format!(
            "# tool: {} {}\n# config-hash: {}\n# seed: {}\n",
            self.tool, self.version, self.config_hash, self.seed
        )
    }
}

/// Serializes with every float rounded to 12 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::Contract(format!("serialization failed: {e}")))?;
    round_numbers(&mut v);
    serde_json::to_string_pretty(&v).map_err(|e| Error::Contract(format!("serialization failed: {e}")))
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig(x))) {
                *n = x;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_numbers),
        Value::Object(o) => o.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// A state as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", deny_unknown_fields)]
pub enum StateFile {
    Pure {
        basis: BasisTag,
        amps: Vec<[f64; 2]>,
        /// Boundary population tolerated for Fock-basis vectors.
        #[serde(default, rename = "tailTol", skip_serializing_if = "Option::is_none")]
        tail_tol: Option<f64>,
    },
    Density {
        basis: BasisTag,
        matrix: Vec<Vec<[f64; 2]>>,
    },
    Pair {
        psi0: Box<StateFile>,
        psi1: Box<StateFile>,
    },
}

/// File contents once validated.
#[derive(Debug, Clone, PartialEq)]
pub enum Loaded {
    Photonic(PhotonicState),
    Spin(SymState),
    Density(DensityOp),
    PhotonPair(PhotonPair),
    SpinPair(SpinPair),
}

impl Loaded {
    pub fn kind(&self) -> &'static str {
        match self {
            Loaded::Photonic(_) => "photonic state",
            Loaded::Spin(_) => "spin state",
            Loaded::Density(_) => "density operator",
            Loaded::PhotonPair(_) => "photonic pair",
            Loaded::SpinPair(_) => "spin pair",
        }
    }
}

fn pack(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn unpack(v: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|p| c64(p[0], p[1])))
}

impl StateFile {
    pub fn photonic(psi: &PhotonicState) -> Self {
        let tail_tol = (psi.tail_tol() != DEFAULT_TAIL_TOL).then_some(psi.tail_tol());
        StateFile::Pure { basis: psi.tag(), amps: pack(psi.amps()), tail_tol }
    }

    pub fn spin(phi: &SymState) -> Self {
        StateFile::Pure { basis: BasisTag::DickeSector { spins: phi.spins(), cutoff: phi.basis().cutoff() }, amps: pack(phi.amps()), tail_tol: None }
    }

    pub fn density(rho: &DensityOp) -> Self {
        let m = rho.matrix();
        let matrix = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        StateFile::Density { basis: rho.tag(), matrix }
    }

    pub fn from_loaded(l: &Loaded) -> Self {
        match l {
            Loaded::Photonic(p) => Self::photonic(p),
            Loaded::Spin(s) => Self::spin(s),
            Loaded::Density(r) => Self::density(r),
            Loaded::PhotonPair(p) => {
                StateFile::Pair { psi0: Box::new(Self::photonic(&p.psi0)), psi1: Box::new(Self::photonic(&p.psi1)) }
            }
            Loaded::SpinPair(p) => StateFile::Pair { psi0: Box::new(Self::spin(&p.psi0)), psi1: Box::new(Self::spin(&p.psi1)) },
        }
    }

    pub fn load(&self) -> Result<Loaded> {
        match self {
            StateFile::Pure { basis, amps, tail_tol } => {
                let amps = unpack(amps);
                match *basis {
                    BasisTag::DickeSector { spins, cutoff } => {
                        Ok(Loaded::Spin(SymState::new(DickeBasis::new(spins, cutoff)?, amps)?))
                    }
                    BasisTag::Fock { cutoff, modes } => Ok(Loaded::Photonic(PhotonicState::new(
                        modes,
                        cutoff,
                        amps,
                        tail_tol.unwrap_or(DEFAULT_TAIL_TOL),
                    )?)),
                }
            }
            StateFile::Density { basis, matrix } => {
                let n = matrix.len();
                if matrix.iter().any(|r| r.len() != n) {
                    return Err(Error::Contract("density matrix must be square".into()));
                }
                let m = CMatrix::from_fn(n, n, |i, j| c64(matrix[i][j][0], matrix[i][j][1]));
                Ok(Loaded::Density(DensityOp::new(*basis, m)?))
            }
            StateFile::Pair { psi0, psi1 } => match (psi0.load()?, psi1.load()?) {
                (Loaded::Photonic(a), Loaded::Photonic(b)) => Ok(Loaded::PhotonPair(PhotonPair::new(a, b)?)),
                (Loaded::Spin(a), Loaded::Spin(b)) => Ok(Loaded::SpinPair(SpinPair::new(a, b)?)),
                _ => Err(Error::Contract("pair components must be pure states of the same kind".into())),
            },
        }
    }
}

/// `{"header": ..., "state": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<Header>,
    pub state: StateFile,
}

impl StateDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Contract(format!("malformed state file: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{make_coherent, make_dicke, make_fock, make_mixed_cat};

    #[test]
    fn twelve_digits() {
        assert_eq!(format_number(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_number(3.5), "3.5");
        assert_eq!(format_number(-0.000123456789012345), "-0.000123456789012");
        assert_eq!(format_number(123456789012345.0), "123456789012000");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
    }

    #[test]
    fn json_rounds_floats() {
        let s = to_json(&serde_json::json!({"x": 1.0 / 3.0, "n": 7, "v": [2.0f64.sqrt()]})).unwrap();
        assert!(s.contains("0.333333333333") && !s.contains("0.3333333333333"));
        assert!(s.contains("1.41421356237"));
        assert!(s.contains("\"n\": 7"));
    }

    #[test]
    fn round_trips() {
        let items = [
            Loaded::Photonic(make_fock(3, 3).unwrap()),
            Loaded::Photonic(make_coherent(c64(1.0, 0.5), 30).unwrap()),
            Loaded::Spin(make_dicke(100, 2, 6).unwrap()),
            Loaded::Density(make_mixed_cat(c64(1.5, 0.0), 0.5, 30).unwrap()),
            Loaded::SpinPair(SpinPair::new(make_dicke(50, 0, 4).unwrap(), make_dicke(50, 4, 4).unwrap()).unwrap()),
        ];
        for item in items {
            let doc = StateDocument { header: Some(Header::new("abc", 7)), state: StateFile::from_loaded(&item) };
            let text = to_json(&doc).unwrap();
            let back = StateDocument::parse(&text).unwrap();
            assert_eq!(back.header, doc.header);
            let loaded = back.state.load().unwrap();
            assert_eq!(loaded.kind(), item.kind());
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(StateDocument::parse("{\"state\": {\"type\": \"pure\"}}").is_err());
        let bad = StateFile::Pure { basis: BasisTag::DickeSector { spins: 10, cutoff: 2 }, amps: vec![[1.0, 0.0]], tail_tol: None };
        assert!(bad.load().is_err());
    }
}
