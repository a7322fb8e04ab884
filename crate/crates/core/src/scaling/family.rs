use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_exponent, ScalingFit};
use crate::error::{Error, Result};
use crate::mapping::{absorb_density, approx_absorb};
use crate::measures::{self, Channel, MeasureId, PhotonPair, SpinPair};
use crate::states::{
    default_cutoff, make_coherent, make_dicke, make_displaced_qubit, make_displaced_single_photon, make_even_cat,
    make_fock, make_fock_superposition, make_spin_coherent,
};
use crate::symcore::{c64, DensityOp, PhotonicState, SymState};

/// Photonic state families, each parameterized by its mean excitation `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyId {
    /// Even cat `|alpha> + |-alpha>`, `alpha = sqrt(N)`.
    EvenCat,
    /// `D_alpha` on the first mode of `|0,1> - |1,0>`, `alpha = sqrt(N)`.
    DisplacedSinglePhoton,
    /// `|0> + |2N>`.
    FockSuperposition,
    /// `|N>`.
    Fock,
    /// Coherent `|alpha>`, `alpha = sqrt(N)`; a classical reference.
    Coherent,
}

impl FamilyId {
    /// The four columns of the classification table.
    pub const TABLE: [FamilyId; 4] =
        [FamilyId::EvenCat, FamilyId::DisplacedSinglePhoton, FamilyId::FockSuperposition, FamilyId::Fock];

    pub fn name(&self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
    }

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Domain(format!("unknown family '{s}'")))
    }
}

/// Number of spins absorbing the state of size `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SpinRule {
    /// `M = factor * N`.
    PerExcitation(usize),
    /// `M` independent of `N`.
    Fixed(usize),
}

impl Default for SpinRule {
    fn default() -> Self {
        SpinRule::PerExcitation(200)
    }
}

impl SpinRule {
    pub fn spins(&self, n: usize) -> usize {
        match *self {
            SpinRule::PerExcitation(f) => f * n,
            SpinRule::Fixed(m) => m,
        }
    }
}

/// A family with the sizes it is evaluated at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StateFamily {
    pub family_id: FamilyId,
    pub size_ladder: Vec<usize>,
    #[serde(default)]
    pub spin_rule: SpinRule,
}

/// Smallest ratio between consecutive ladder sizes.
pub const MIN_LADDER_RATIO: f64 = 1.5;

impl StateFamily {
    pub fn new(family_id: FamilyId, size_ladder: Vec<usize>, spin_rule: SpinRule) -> Result<Self> {
        validate_ladder(&size_ladder)?;
        Ok(Self { family_id, size_ladder, spin_rule })
    }
}

/// At least four positive sizes, each at least 1.5 times the previous one.
pub fn validate_ladder(ladder: &[usize]) -> Result<()> {
    if ladder.len() < 4 {
        return Err(Error::Domain(format!("size ladder needs at least 4 points, got {}", ladder.len())));
    }
    if ladder[0] == 0 {
        return Err(Error::Domain("size ladder must start above 0".into()));
    }
    for w in ladder.windows(2) {
        if (w[1] as f64) < MIN_LADDER_RATIO * w[0] as f64 {
            return Err(Error::Domain(format!("ladder step {} -> {} is below the ratio {MIN_LADDER_RATIO}", w[0], w[1])));
        }
    }
    Ok(())
}

/// Spin-side image of a family member.
#[derive(Debug, Clone, PartialEq)]
pub enum SpinImage {
    Pure(SymState),
    Mixed(DensityOp),
}

impl SpinImage {
    pub fn density(&self) -> DensityOp {
        match self {
            SpinImage::Pure(s) => s.density(),
            SpinImage::Mixed(r) => r.clone(),
        }
    }
}

/// One member of a family: the photonic state, its absorbed image, and the
/// component pairs used by the superposition measures where they exist.
#[derive(Debug, Clone)]
pub struct FamilyState {
    pub family: FamilyId,
    pub size: usize,
    pub spins: usize,
    pub photonic: PhotonicState,
    pub photon_pair: Option<PhotonPair>,
    pub size_channel: Option<Channel>,
    pub spin_image: SpinImage,
    pub spin_pair: Option<SpinPair>,
}

/// Builds member `N` of a family.
///
/// The even-cat spin pair is the pair of product states `(phi_alpha, phi_-alpha)`
/// that the coherent components are absorbed into. The displaced single photon
/// is two-mode; its spin image is the absorbed first-mode marginal, and its
/// pair is `(D_alpha|+>, D_alpha|->)` absorbed mode by mode.
pub fn family_state(family: FamilyId, n: usize, rule: SpinRule) -> Result<FamilyState> {
    if n == 0 {
        return Err(Error::Domain("family size must be positive".into()));
    }
    let spins = rule.spins(n);
    let alpha = c64((n as f64).sqrt(), 0.0);
    let coherent_cutoff = default_cutoff(n as f64);
    let state = |photonic: PhotonicState| -> Result<FamilyState> {
        let spin_image = SpinImage::Pure(approx_absorb(&photonic, spins)?);
        Ok(FamilyState {
            family,
            size: n,
            spins,
            photonic,
            photon_pair: None,
            size_channel: None,
            spin_image,
            spin_pair: None,
        })
    };
    match family {
        FamilyId::EvenCat => {
            let k = coherent_cutoff;
            let mut st = state(make_even_cat(alpha, k)?)?;
            st.photon_pair = Some(PhotonPair::new(make_coherent(alpha, k)?, make_coherent(-alpha, k)?)?);
            st.size_channel = Some(Channel::Homodyne { theta: 0.0 });
            st.spin_pair = Some(SpinPair::new(make_spin_coherent(alpha, spins, k)?, make_spin_coherent(-alpha, spins, k)?)?);
            Ok(st)
        }
        FamilyId::DisplacedSinglePhoton => {
            let k = coherent_cutoff;
            let photonic = make_displaced_single_photon(alpha, k)?;
            let spin_image = SpinImage::Mixed(absorb_density(&photonic.reduced_mode(0)?, spins)?);
            let plus = make_displaced_qubit(alpha, 1.0, k)?;
            let minus = make_displaced_qubit(alpha, -1.0, k)?;
            let spin_pair = SpinPair::new(approx_absorb(&plus, spins)?, approx_absorb(&minus, spins)?)?;
            Ok(FamilyState {
                family,
                size: n,
                spins,
                photonic,
                photon_pair: Some(PhotonPair::new(plus, minus)?),
                size_channel: Some(Channel::PhotonCount),
                spin_image,
                spin_pair: Some(spin_pair),
            })
        }
        FamilyId::FockSuperposition => {
            let k = 2 * n + 4;
            let mut st = state(make_fock_superposition(n, k)?)?;
            st.photon_pair = Some(PhotonPair::new(make_fock(0, k)?, make_fock(2 * n, k)?)?);
            st.size_channel = Some(Channel::PhotonCount);
            st.spin_pair = Some(SpinPair::new(make_dicke(spins, 0, k)?, make_dicke(spins, 2 * n, k)?)?);
            Ok(st)
        }
        FamilyId::Fock => state(make_fock(n, n + 4)?),
        FamilyId::Coherent => state(make_coherent(alpha, coherent_cutoff)?),
    }
}

/// Parameters of the measures that need them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MeasureParams {
    pub delta: f64,
    pub p_g: f64,
}

impl Default for MeasureParams {
    fn default() -> Self {
        Self { delta: 0.1, p_g: 2.0 / 3.0 }
    }
}

fn no_pair(family: FamilyId) -> Error {
    Error::Undefined(format!("{} is a single component; superposition measures are not defined", family.name()))
}

/// Value of one measure on one family member.
pub fn evaluate(st: &FamilyState, measure: MeasureId, params: &MeasureParams) -> Result<f64> {
    let spin_pair = || st.spin_pair.as_ref().ok_or_else(|| no_pair(st.family));
    let r = match measure {
        MeasureId::MaxVariance => return max_variance(&st.spin_image),
        MeasureId::IndexP => return Ok(max_variance(&st.spin_image)? / st.spins as f64),
        MeasureId::NEff => match &st.spin_image {
            SpinImage::Pure(s) => measures::n_eff(s)?,
            SpinImage::Mixed(r) => measures::n_eff_mixed(r)?,
        },
        MeasureId::ISpin => match &st.spin_image {
            SpinImage::Pure(s) => measures::wigner_i_spin(s)?,
            SpinImage::Mixed(r) => measures::wigner_i_spin_mixed(r)?,
        },
        MeasureId::IndexQ => measures::index_q(&st.spin_image.density())?,
        MeasureId::IWigner => measures::wigner_i_photonic(&st.photonic)?,
        MeasureId::RelativeFisher => measures::relative_fisher(spin_pair()?)?,
        MeasureId::MSquared => measures::m_squared(spin_pair()?)?,
        MeasureId::CDelta => measures::c_delta(spin_pair()?, params.delta)?,
        MeasureId::DBar => measures::d_bar(spin_pair()?)?,
        MeasureId::SizePg => {
            let pair = st.photon_pair.as_ref().ok_or_else(|| no_pair(st.family))?;
            measures::size_pg(pair, params.p_g, st.size_channel.unwrap_or(Channel::PhotonCount))?
        }
    };
    Ok(r.value)
}

fn max_variance(image: &SpinImage) -> Result<f64> {
    Ok(match image {
        SpinImage::Pure(s) => measures::max_variance_collective(s).0,
        SpinImage::Mixed(r) => measures::max_variance_collective_mixed(r)?.0,
    })
}

/// Runs `f` on a pool of `threads` workers (`0` lets the pool decide).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// One evaluated family member.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepPoint {
    pub size: usize,
    pub spins: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepReport {
    pub family: FamilyId,
    pub measure: MeasureId,
    pub points: Vec<SweepPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<ScalingFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
}

/// Evaluates one measure along the ladder and fits its exponent in `N`.
/// Points are independent and run concurrently; results keep ladder order.
pub fn sweep(family: &StateFamily, measure: MeasureId, params: &MeasureParams, threads: usize) -> Result<SweepReport> {
    validate_ladder(&family.size_ladder)?;
    let points: Vec<SweepPoint> = with_threads(threads, || {
        family
            .size_ladder
            .par_iter()
            .map(|&n| {
                let spins = family.spin_rule.spins(n);
                match family_state(family.family_id, n, family.spin_rule).and_then(|st| evaluate(&st, measure, params)) {
                    Ok(v) => SweepPoint { size: n, spins, value: Some(v), error: None },
                    Err(e) => SweepPoint { size: n, spins, value: None, error: Some(e.to_string()) },
                }
            })
            .collect()
    })?;
    let (fit, fit_error) = fit_points(&points, |p| p.size as f64);
    Ok(SweepReport { family: family.family_id, measure, points, fit, fit_error })
}

/// Fits the points against `abscissa`, or explains why no fit exists.
pub fn fit_points(points: &[SweepPoint], abscissa: impl Fn(&SweepPoint) -> f64) -> (Option<ScalingFit>, Option<String>) {
    if let Some(bad) = points.iter().find_map(|p| p.error.as_ref()) {
        return (None, Some(bad.clone()));
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (abscissa(p), p.value.unwrap_or(f64::NAN))).collect();
    match fit_exponent(&xy) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

/// Exponent of `max_n V(J_n) / M` in `N` along the family.
pub fn index_p_modified(family: &StateFamily, threads: usize) -> Result<ScalingFit> {
    let report = sweep(family, MeasureId::IndexP, &MeasureParams::default(), threads)?;
    if let Some(e) = report.points.iter().find_map(|p| p.error.clone()) {
        return Err(Error::Numerical(e));
    }
    report.fit.ok_or_else(|| Error::Undefined(report.fit_error.unwrap_or_default()))
}
