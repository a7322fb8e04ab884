//! Browser bindings for three operations: evaluate a measure on a named
//! state, absorb a photonic state into spins, and trace the coarse-grained
//! success probability against the smearing width.
//!
//! Every binding takes and returns JSON strings. The `*_json` functions carry
//! the logic and are plain Rust, so they run in native tests as well.

use std::f64::consts::FRAC_PI_2;

use macrosize::io::{to_json, Loaded};
use macrosize::mapping::{approx_absorb, exact_propagate, JointState};
use macrosize::measures::photonic::{critical_sigma, CountDistance, HomodyneDistance, SmearedDistance};
use macrosize::measures::{measure, n_eff, size_prefactor, Channel, DispatchParams, MeasureId, PhotonPair};
use macrosize::states::{BuiltPair, BuiltState, StateName, StateSpec};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Largest spin count the demo accepts; keeps exact evolution interactive.
pub const MAX_SPINS: usize = 100_000;

fn spec(json: &str) -> Result<StateSpec, String> {
    serde_json::from_str(json).map_err(|e| format!("state spec: {e}"))
}

fn out(value: &impl Serialize) -> Result<String, String> {
    to_json(value).map_err(|e| e.to_string())
}

fn check_spins(spins: usize) -> Result<(), String> {
    if spins == 0 || spins > MAX_SPINS {
        return Err(format!("spin count must lie in 1..={MAX_SPINS}, got {spins}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MeasureRequest {
    pub measure: String,
    #[serde(default)]
    pub spins: Option<usize>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub p_g: Option<f64>,
}

/// Superposition measures use the two named components of the state; the
/// others use the state itself.
pub fn measure_state_json(spec_json: &str, request_json: &str) -> Result<String, String> {
    let spec = spec(spec_json)?;
    let req: MeasureRequest = serde_json::from_str(request_json).map_err(|e| format!("request: {e}"))?;
    let id = MeasureId::parse(&req.measure).map_err(|e| e.to_string())?;
    if let Some(m) = req.spins {
        check_spins(m)?;
    }
    let input = if id.needs_pair() {
        match spec.build_components().map_err(|e| e.to_string())? {
            BuiltPair::Photonic(p) => Loaded::PhotonPair(p),
            BuiltPair::Spin(p) => Loaded::SpinPair(p),
        }
    } else {
        match spec.build().map_err(|e| e.to_string())? {
            BuiltState::Photonic(p) => Loaded::Photonic(p),
            BuiltState::Spin(s) => Loaded::Spin(s),
            BuiltState::Density(r) => Loaded::Density(r),
        }
    };
    let defaults = DispatchParams::default();
    let params = DispatchParams {
        delta: req.delta.unwrap_or(defaults.delta),
        p_g: req.p_g.unwrap_or(defaults.p_g),
        channel: channel_for(spec.name),
        spins: req.spins,
    };
    out(&measure(id, &input, &params).map_err(|e| e.to_string())?)
}

/// Cat components are told apart by homodyne detection, Fock-diagonal ones by
/// photon counting.
fn channel_for(name: StateName) -> Channel {
    match name {
        StateName::EvenCat => Channel::Homodyne { theta: 0.0 },
        _ => Channel::PhotonCount,
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AbsorbResult {
    pub spins: usize,
    /// Photon-number distribution of the input.
    pub photons: Vec<f64>,
    /// Spin-excitation distribution after exact evolution to `g = pi/2`.
    pub spin_excitations: Vec<f64>,
    pub fidelity: f64,
    pub residual_photon_population: f64,
    pub n_eff: f64,
}

pub fn absorb_json(spec_json: &str, spins: usize) -> Result<String, String> {
    check_spins(spins)?;
    let psi = match spec(spec_json)?.build().map_err(|e| e.to_string())? {
        BuiltState::Photonic(p) if p.modes() == 1 => p,
        _ => return Err("absorption takes a single-mode photonic state".into()),
    };
    let approx = approx_absorb(&psi, spins).map_err(|e| e.to_string())?;
    let joint = JointState::with_ground_spins(&psi, spins, psi.cutoff()).map_err(|e| e.to_string())?;
    let evolved = exact_propagate(&joint, FRAC_PI_2).map_err(|e| e.to_string())?;
    out(&AbsorbResult {
        spins,
        photons: psi.photon_distribution(0),
        spin_excitations: evolved.spin_excitation_distribution(),
        fidelity: approx.amps().dotc(&evolved.vacuum_spin_amplitudes()).norm_sqr(),
        residual_photon_population: (1.0 - evolved.photon_vacuum_population()).max(0.0),
        n_eff: n_eff(&approx).map_err(|e| e.to_string())?.value,
    })
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SizeCurve {
    pub channel: Channel,
    pub p_g: f64,
    pub sigma: Vec<f64>,
    pub success_probability: Vec<f64>,
    pub sigma_star: Option<f64>,
    pub size: f64,
}

/// Success probability of telling the two components apart, on `points`
/// widths from 0 to twice the critical width.
pub fn size_curve_json(spec_json: &str, p_g: f64, points: usize) -> Result<String, String> {
    if !(p_g > 0.5 && p_g < 1.0) {
        return Err(format!("P_g must lie in (1/2, 1), got {p_g}"));
    }
    let spec = spec(spec_json)?;
    let pair: PhotonPair = match spec.build_components().map_err(|e| e.to_string())? {
        BuiltPair::Photonic(p) => p,
        BuiltPair::Spin(_) => return Err("the size curve takes photonic components".into()),
    };
    let channel = channel_for(spec.name);
    let mut dist: Box<dyn SmearedDistance> = match channel {
        Channel::PhotonCount => Box::new(CountDistance::new(&pair).map_err(|e| e.to_string())?),
        Channel::Homodyne { theta } => Box::new(HomodyneDistance::new(&pair, theta).map_err(|e| e.to_string())?),
    };
    let sigma_star = critical_sigma(dist.as_mut(), p_g).map_err(|e| e.to_string())?;
    let top = 2.0 * sigma_star.unwrap_or(1.0);
    let n = points.clamp(2, 400);
    let sigma: Vec<f64> = (0..n).map(|i| top * i as f64 / (n - 1) as f64).collect();
    let success_probability = sigma.iter().map(|&s| dist.success_probability(s)).collect();
    out(&SizeCurve {
        channel,
        p_g,
        sigma,
        success_probability,
        sigma_star,
        size: sigma_star.map_or(0.0, |s| size_prefactor(p_g) * s),
    })
}

#[wasm_bindgen(js_name = measureState)]
pub fn measure_state(spec_json: &str, request_json: &str) -> Result<String, JsValue> {
    measure_state_json(spec_json, request_json).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn absorb(spec_json: &str, spins: usize) -> Result<String, JsValue> {
    absorb_json(spec_json, spins).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = sizeCurve)]
pub fn size_curve(spec_json: &str, p_g: f64, points: usize) -> Result<String, JsValue> {
    size_curve_json(spec_json, p_g, points).map_err(|e| JsValue::from_str(&e))
}
