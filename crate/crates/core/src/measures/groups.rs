//! Measures built on local groups of spins: the measurement-based size `C_delta`
//! and the microscopic-step distance `D_bar`.

use super::result::{MeasureId, MeasureResult, SpinPair, Witness};
use crate::entanglement::{helstrom_from_difference, reduced_group_matrix};
use crate::error::{Error, Result};
use crate::symcore::basis::pad_vector;
use crate::symcore::linalg::{self_adjoint_eig, CVector};
use crate::symcore::{collective_matrix, CollectiveObservable, DickeBasis, SymState};

/// Slack on the success-probability threshold.
const PS_SLACK: f64 = 1e-12;

/// A component counts as a Dicke basis state above this population.
const BASIS_STATE_TOL: f64 = 1e-10;

/// A component counts as a product state when its single-spin marginal has
/// purity within this of one.
const PRODUCT_TOL: f64 = 1e-7;

/// Krylov vectors with relative norm below this after reorthogonalization
/// are treated as linearly dependent.
const KRYLOV_DEPENDENCE: f64 = 1e-9;

/// Unassigned weight tolerated when the Krylov construction stops.
const KRYLOV_RESIDUAL: f64 = 1e-6;

/// Helstrom probability of telling the components apart from a group of `n` spins.
pub fn group_success_probability(pair: &SpinPair, n: usize) -> Result<f64> {
    let cap = pair.psi0.basis().cutoff();
    let r0 = reduced_group_matrix(&pair.psi0, n, cap)?;
    let r1 = reduced_group_matrix(&pair.psi1, n, cap)?;
    Ok(helstrom_from_difference(&(r0 - r1)))
}

/// `C_delta = M / n_min` with `n_min` the smallest group reaching success
/// probability `1 - delta`, found by doubling then bisection (the success
/// probability cannot decrease with `n`).
pub fn c_delta(pair: &SpinPair, delta: f64) -> Result<MeasureResult> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::Domain(format!("delta = {delta} outside (0, 1/2]")));
    }
    let m = pair.psi0.spins();
    let target = 1.0 - delta - PS_SLACK;
    let ps = |n: usize| group_success_probability(pair, n);
    let first = ps(1)?;
    let (n_min, p_at) = if first >= target {
        (1, first)
    } else {
        let mut lo = 1;
        let mut hi = 2.min(m);
        let mut p_hi = ps(hi)?;
        while p_hi < target {
            if hi == m {
                return Err(Error::Undefined(format!(
                    "components are not distinguishable with probability {} even from all {m} spins (reached {p_hi:.6})",
                    1.0 - delta
                )));
            }
            lo = hi;
            hi = (2 * hi).min(m);
            p_hi = ps(hi)?;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let p = ps(mid)?;
            if p >= target {
                hi = mid;
                p_hi = p;
            } else {
                lo = mid;
            }
        }
        (hi, p_hi)
    };
    MeasureResult::new(
        MeasureId::CDelta,
        m as f64 / n_min as f64,
        Some(Witness { n_min: Some(n_min), success_probability: Some(p_at), delta: Some(delta), ..Default::default() }),
    )
}

fn dicke_label(phi: &SymState) -> Option<usize> {
    phi.amps().iter().position(|a| a.norm_sqr() > 1.0 - BASIS_STATE_TOL)
}

/// Average number of single-spin steps separating `psi1` from `psi0`.
///
/// With `psi0 = |M,k0>` this is `sum_k |<M,k|psi1>|^2 |k - k0|`. A product
/// `psi0` is a Dicke ground state in a rotated frame, which gives
/// `M (1 - <u|rho_1|u>)` with `u` the single-spin state of `psi0` and `rho_1`
/// the single-spin marginal of `psi1`. Other components go through the
/// nested spans `V_d` of collective words of degree `<= d` applied to `psi0`.
pub fn d_bar(pair: &SpinPair) -> Result<MeasureResult> {
    let (value, note) = if let Some(k0) = dicke_label(&pair.psi0) {
        let v = pair.psi1.amps().iter().enumerate().map(|(k, a)| a.norm_sqr() * k.abs_diff(k0) as f64).sum();
        (v, "dicke reference")
    } else if let Some(v) = d_bar_product(pair)? {
        (v, "product reference")
    } else {
        (d_bar_krylov(pair)?, "krylov reference")
    };
    MeasureResult::new(MeasureId::DBar, value, Some(Witness { note: Some(note.into()), ..Default::default() }))
}

fn d_bar_product(pair: &SpinPair) -> Result<Option<f64>> {
    let r0 = reduced_group_matrix(&pair.psi0, 1, 1)?;
    let purity: f64 = r0.iter().map(|z| z.norm_sqr()).sum();
    if purity < 1.0 - PRODUCT_TOL {
        return Ok(None);
    }
    let eig = self_adjoint_eig(&r0)?;
    let u = eig.vector(1);
    let r1 = reduced_group_matrix(&pair.psi1, 1, 1)?;
    let stay = u.dotc(&(&r1 * &u)).re;
    Ok(Some(pair.psi0.spins() as f64 * (1.0 - stay).max(0.0)))
}

/// Weights `||P_{V_d} psi1||^2 - ||P_{V_{d-1}} psi1||^2` summed against `d`.
///
/// Words of degree `d` applied to a state supported on `k <= K` stay below
/// `K + d`, so the working basis `min(M, 2K + 1)` keeps every level up to
/// `d = K + 1` exact.
pub fn d_bar_krylov(pair: &SpinPair) -> Result<f64> {
    let spins = pair.psi0.spins();
    let k = pair.psi0.basis().cutoff();
    let work = DickeBasis::new(spins, (2 * k + 1).min(spins))?;
    let ops = [CollectiveObservable::Plus, CollectiveObservable::Minus, CollectiveObservable::Z]
        .map(|o| collective_matrix(&work, o));
    let target = pad_vector(pair.psi1.amps(), work.dim());
    let start = pad_vector(pair.psi0.amps(), work.dim());
    let mut span: Vec<CVector> = vec![start.clone()];
    let mut frontier = vec![start];
    let mut captured = span[0].dotc(&target).norm_sqr();
    let mut total = 0.0;
    let max_level = if work.is_full() { work.dim() } else { work.cutoff() - k };
    for d in 1..=max_level {
        if 1.0 - captured < 1e-12 {
            break;
        }
        let mut fresh: Vec<CVector> = Vec::new();
        for v in &frontier {
            for op in &ops {
                let mut w = op * v;
                let scale = w.norm();
                if scale == 0.0 {
                    continue;
                }
                for _ in 0..2 {
                    for q in span.iter().chain(fresh.iter()) {
                        let c = q.dotc(&w);
                        w -= q * c;
                    }
                }
                let n = w.norm();
                if n > KRYLOV_DEPENDENCE * scale {
                    fresh.push(w.unscale(n));
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        let weight: f64 = fresh.iter().map(|q| q.dotc(&target).norm_sqr()).sum();
        captured += weight;
        total += d as f64 * weight;
        span.extend(fresh.iter().cloned());
        frontier = fresh;
    }
    if 1.0 - captured > KRYLOV_RESIDUAL {
        return Err(Error::Numerical(format!(
            "step-distance construction left weight {:.3e} unassigned",
            1.0 - captured
        )));
    }
    Ok(total)
}
