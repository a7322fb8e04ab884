//! Photon-side measures: the Wigner-oscillation measure `I` and the
//! coarse-grained size `Size_Pg`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf_inv, erfc};

use super::result::{MeasureId, MeasureResult, PhotonPair, Witness};
use crate::error::{Error, Result};
use crate::states::annihilation;
use crate::symcore::linalg::{trace_product_re, CMatrix};
use crate::symcore::{BasisTag, DensityOp, PhotonicState, C64};

/// Boundary population above which the truncation is reported.
const BOUNDARY_WARN: f64 = 1e-8;

fn warn_boundary(pop: f64) {
    if pop > BOUNDARY_WARN {
        log::warn!("population {pop:.3e} near the Fock cutoff; the Wigner measure may be truncated");
    }
}

/// `I = sum_m (<a_m† a_m> - |<a_m>|^2) + 1/2` for a pure state.
pub fn wigner_i_photonic(psi: &PhotonicState) -> Result<MeasureResult> {
    warn_boundary(psi.tail_mass());
    let spread: f64 = (0..psi.modes()).map(|m| psi.mean_photons(m) - psi.mean_field(m).norm_sqr()).sum();
    MeasureResult::plain(MeasureId::IWigner, spread + 0.5)
}

/// Mixed form `sum_m [Tr(rho^2 a_m† a_m) - Tr(rho a_m rho a_m†)] + Tr(rho^2)/2`.
///
/// Reduces to the pure-state expression when `rho^2 = rho`.
pub fn wigner_i_photonic_mixed(rho: &DensityOp) -> Result<MeasureResult> {
    let (cutoff, modes) = match rho.tag() {
        BasisTag::Fock { cutoff, modes } => (cutoff, modes),
        BasisTag::DickeSector { .. } => return Err(Error::Contract("expected a Fock-basis operator".into())),
    };
    let a = annihilation(cutoff);
    let ops: Vec<CMatrix> = match modes {
        1 => vec![a],
        _ => {
            let id = CMatrix::identity(cutoff + 1, cutoff + 1);
            vec![a.kronecker(&id), id.kronecker(&a)]
        }
    };
    let r = rho.matrix();
    let r2 = r * r;
    let edge = cutoff.saturating_sub(1);
    let side = cutoff + 1;
    let boundary: f64 = (0..rho.dim())
        .filter(|&i| if modes == 1 { i >= edge } else { i / side >= edge || i % side >= edge })
        .map(|i| r[(i, i)].re)
        .sum();
    warn_boundary(boundary);
    let mut acc = 0.0;
    for a in &ops {
        let number = a.adjoint() * a;
        let ra = r * a;
        let rad = r * a.adjoint();
        acc += trace_product_re(&r2, &number) - trace_product_re(&ra, &rad);
    }
    let purity = trace_product_re(r, r);
    MeasureResult::plain(MeasureId::IWigner, acc + 0.5 * purity)
}

/// Outcome channel of the coarse-grained detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Channel {
    PhotonCount,
    /// Quadrature `(a e^{-i theta} + a† e^{i theta}) / sqrt(2)`.
    Homodyne { theta: f64 },
}

/// `2 sqrt(2) erfinv(2 P_g - 1)`, the factor converting `sigma*` into a size.
pub fn size_prefactor(p_g: f64) -> f64 {
    2.0 * SQRT_2 * erf_inv(2.0 * p_g - 1.0)
}

/// Gaussian-smeared distinguishability of a pair under one channel.
pub trait SmearedDistance {
    /// L1 distance between the two outcome densities after convolution with a
    /// Gaussian of width `sigma`.
    fn l1(&mut self, sigma: f64) -> f64;

    /// `1/2 + L1/4`.
    fn success_probability(&mut self, sigma: f64) -> f64 {
        (0.5 + 0.25 * self.l1(sigma)).clamp(0.5, 1.0)
    }
}

/// `int |f|` from equally spaced samples: trapezoid rule, with each sign
/// change integrated exactly under linear interpolation.
pub fn abs_integral(f: &[f64], h: f64) -> f64 {
    let mut acc = 0.0;
    for w in f.windows(2) {
        let (a, b) = (w[0], w[1]);
        acc += if a * b >= 0.0 { 0.5 * (a.abs() + b.abs()) } else { 0.5 * (a * a + b * b) / (a.abs() + b.abs()) };
    }
    acc * h
}

/// Gaussian kernels are cut off beyond this many widths.
const KERNEL_REACH: f64 = 8.0;

/// Signed point masses `w_j` at sorted positions `x_j`, smeared by a Gaussian.
///
/// The L1 norm of the smeared density is evaluated exactly up to root
/// finding: the sign changes `z_k` are bracketed on a grid of 16 points per
/// `sigma` and bisected, and `int |g| = sum_k |G(z_{k+1}) - G(z_k)|` with the
/// antiderivative `G(x) = sum_j w_j Phi((x - x_j)/sigma)`.
#[derive(Debug, Clone)]
pub struct PointMasses {
    xs: Vec<f64>,
    ws: Vec<f64>,
    prefix: Vec<f64>,
}

impl PointMasses {
    pub fn new(points: Vec<(f64, f64)>) -> Self {
        let mut points: Vec<(f64, f64)> = points.into_iter().filter(|p| p.1 != 0.0).collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ws: Vec<f64> = points.iter().map(|p| p.1).collect();
        let mut prefix = Vec::with_capacity(ws.len() + 1);
        prefix.push(0.0);
        for w in &ws {
            prefix.push(prefix.last().unwrap() + w);
        }
        Self { xs, ws, prefix }
    }

    fn window(&self, x: f64, reach: f64) -> (usize, usize) {
        (self.xs.partition_point(|&p| p < x - reach), self.xs.partition_point(|&p| p <= x + reach))
    }

    /// Smeared density at `x`.
    pub fn density(&self, x: f64, sigma: f64) -> f64 {
        let (lo, hi) = self.window(x, KERNEL_REACH * sigma);
        (lo..hi).map(|j| self.ws[j] * gaussian(x - self.xs[j], sigma)).sum()
    }

    /// Antiderivative of the smeared density.
    pub fn cdf(&self, x: f64, sigma: f64) -> f64 {
        let (lo, hi) = self.window(x, KERNEL_REACH * sigma);
        self.prefix[lo] + (lo..hi).map(|j| self.ws[j] * normal_cdf((x - self.xs[j]) / sigma)).sum::<f64>()
    }

    /// `sum_j |w_j|`, the limit `sigma -> 0` for well separated points.
    pub fn raw_l1(&self) -> f64 {
        self.ws.iter().map(|w| w.abs()).sum()
    }

    pub fn smeared_l1(&self, sigma: f64) -> f64 {
        let (Some(&first), Some(&last)) = (self.xs.first(), self.xs.last()) else {
            return 0.0;
        };
        let reach = KERNEL_REACH * sigma;
        let h = sigma / 16.0;
        let x0 = first - reach;
        let steps = ((last + reach - x0) / h).ceil() as usize;
        let mut roots = Vec::new();
        let mut prev = (x0, self.density(x0, sigma));
        for i in 1..=steps {
            let x = x0 + i as f64 * h;
            let f = self.density(x, sigma);
            if f == 0.0 {
                continue;
            }
            if prev.1 != 0.0 && f.signum() != prev.1.signum() {
                roots.push(self.bisect(prev.0, x, prev.1, sigma));
            }
            prev = (x, f);
        }
        let total = *self.prefix.last().unwrap();
        let mut acc = 0.0;
        let mut g_prev = 0.0;
        for z in roots {
            let g = self.cdf(z, sigma);
            acc += (g - g_prev).abs();
            g_prev = g;
        }
        acc + (total - g_prev).abs()
    }

    fn bisect(&self, mut a: f64, mut b: f64, fa: f64, sigma: f64) -> f64 {
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            let fm = self.density(m, sigma);
            if fm == 0.0 {
                return m;
            }
            if fm.signum() == fa.signum() {
                a = m;
            } else {
                b = m;
            }
            if b - a < 1e-13 * sigma {
                break;
            }
        }
        0.5 * (a + b)
    }
}

fn gaussian(x: f64, sigma: f64) -> f64 {
    (-0.5 * (x / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt())
}

fn normal_cdf(t: f64) -> f64 {
    0.5 * erfc(-t / SQRT_2)
}

/// Photon-number outcomes `p(n) = |c_n|^2`.
pub struct CountDistance {
    masses: PointMasses,
}

impl CountDistance {
    pub fn new(pair: &PhotonPair) -> Result<Self> {
        let p0 = single_mode(&pair.psi0)?.photon_distribution(0);
        let p1 = single_mode(&pair.psi1)?.photon_distribution(0);
        Ok(Self::from_difference(p0.iter().zip(&p1).map(|(a, b)| a - b).collect()))
    }

    pub fn from_difference(diff: Vec<f64>) -> Self {
        Self { masses: PointMasses::new(diff.into_iter().enumerate().map(|(n, d)| (n as f64, d)).collect()) }
    }
}

impl SmearedDistance for CountDistance {
    fn l1(&mut self, sigma: f64) -> f64 {
        // unit-spaced Gaussians narrower than 1/8 overlap only below e^{-32}
        if sigma <= 0.125 {
            return self.masses.raw_l1();
        }
        self.masses.smeared_l1(sigma)
    }
}

/// Hermite functions `h_0..=h_nmax` at `x`, normalized in `L^2(R)`.
pub fn hermite_functions(nmax: usize, x: f64) -> Vec<f64> {
    let mut h = vec![0.0; nmax + 1];
    h[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if nmax >= 1 {
        h[1] = SQRT_2 * x * h[0];
    }
    for n in 1..nmax {
        let nf = n as f64;
        h[n + 1] = (2.0 / (nf + 1.0)).sqrt() * x * h[n] - (nf / (nf + 1.0)).sqrt() * h[n - 1];
    }
    h
}

/// Quadrature outcomes. The difference of the two densities is tabulated on
/// successively finer midpoint grids (each cell a point mass) until the
/// smeared L1 distance changes by less than the tolerance.
pub struct HomodyneDistance {
    amps: [Vec<C64>; 2],
    half_width: f64,
    base_step: f64,
    grids: Vec<(f64, Vec<f64>, PointMasses)>,
}

/// Change in L1 below which grid refinement stops.
const HOMODYNE_TOL: f64 = 1e-8;
const HOMODYNE_MAX_LEVELS: usize = 4;

impl HomodyneDistance {
    pub fn new(pair: &PhotonPair, theta: f64) -> Result<Self> {
        let rotate = |psi: &PhotonicState| -> Vec<C64> {
            psi.amps().iter().enumerate().map(|(n, c)| c * C64::from_polar(1.0, -(n as f64) * theta)).collect()
        };
        let a0 = rotate(single_mode(&pair.psi0)?);
        let a1 = rotate(single_mode(&pair.psi1)?);
        let nmax = a0.len() - 1;
        let turning = (2.0 * nmax as f64 + 1.0).sqrt();
        Ok(Self {
            amps: [a0, a1],
            half_width: turning + 10.0,
            base_step: (0.5 / turning).min(0.05),
            grids: Vec::new(),
        })
    }

    /// Quadrature density of component `which` at `x`.
    pub fn density(&self, which: usize, x: f64) -> f64 {
        let h = hermite_functions(self.amps[which].len() - 1, x);
        self.amps[which].iter().zip(&h).map(|(c, hn)| c * hn).sum::<C64>().norm_sqr()
    }

    fn grid(&mut self, level: usize) -> &(f64, Vec<f64>, PointMasses) {
        while self.grids.len() <= level {
            let step = self.base_step / (1 << self.grids.len()) as f64;
            let count = (2.0 * self.half_width / step).ceil() as usize;
            let xs: Vec<f64> = (0..count).map(|i| -self.half_width + (i as f64 + 0.5) * step).collect();
            let diff: Vec<f64> = xs.iter().map(|&x| self.density(0, x) - self.density(1, x)).collect();
            let masses = PointMasses::new(xs.iter().zip(&diff).map(|(&x, &d)| (x, d * step)).collect());
            self.grids.push((step, diff, masses));
        }
        &self.grids[level]
    }

    fn l1_at_level(&mut self, sigma: f64, level: usize) -> f64 {
        let (step, diff, masses) = self.grid(level);
        if sigma < *step {
            return abs_integral(diff, *step);
        }
        masses.smeared_l1(sigma)
    }
}

impl SmearedDistance for HomodyneDistance {
    fn l1(&mut self, sigma: f64) -> f64 {
        let mut prev = self.l1_at_level(sigma, 0);
        for level in 1..HOMODYNE_MAX_LEVELS {
            let next = self.l1_at_level(sigma, level);
            if (next - prev).abs() < HOMODYNE_TOL {
                return next;
            }
            prev = next;
        }
        prev
    }
}

fn single_mode(psi: &PhotonicState) -> Result<&PhotonicState> {
    if psi.modes() != 1 {
        return Err(Error::Unsupported("coarse-grained size takes single-mode components".into()));
    }
    Ok(psi)
}

/// Largest `sigma` with success probability at least `p_g`, by bracketing and
/// bisection. Returns `None` when even `sigma = 0` falls short.
pub fn critical_sigma(dist: &mut dyn SmearedDistance, p_g: f64) -> Result<Option<f64>> {
    if dist.success_probability(0.0) < p_g {
        return Ok(None);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while dist.success_probability(hi) >= p_g {
        lo = hi;
        hi *= 2.0;
        if hi > 1e7 {
            return Err(Error::Numerical("critical width did not bracket below 1e7".into()));
        }
    }
    while hi - lo > 1e-7 * hi {
        let mid = 0.5 * (lo + hi);
        if dist.success_probability(mid) >= p_g {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// `Size_Pg = 2 sqrt(2) erfinv(2 P_g - 1) sigma*`.
pub fn size_pg(pair: &PhotonPair, p_g: f64, channel: Channel) -> Result<MeasureResult> {
    if !(p_g > 0.5 && p_g < 1.0) {
        return Err(Error::Domain(format!("guessing threshold P_g = {p_g} outside (1/2, 1)")));
    }
    let mut dist: Box<dyn SmearedDistance> = match channel {
        Channel::PhotonCount => Box::new(CountDistance::new(pair)?),
        Channel::Homodyne { theta } => Box::new(HomodyneDistance::new(pair, theta)?),
    };
    let p0 = dist.success_probability(0.0);
    let mut witness = Witness { p_g: Some(p_g), success_probability: Some(p0), ..Default::default() };
    match critical_sigma(dist.as_mut(), p_g)? {
        Some(sigma) => {
            witness.sigma_star = Some(sigma);
            MeasureResult::new(MeasureId::SizePg, size_prefactor(p_g) * sigma, Some(witness))
        }
        None => {
            witness.note = Some(format!("not distinguishable at P_g = {p_g} even without smearing"));
            MeasureResult::new(MeasureId::SizePg, 0.0, Some(witness))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{
        default_cutoff, make_coherent, make_displaced_qubit, make_even_cat, make_fock, make_incoherent_cat,
        make_mixed_cat, displace, make_displaced_single_photon,
    };
    use crate::symcore::c64;

    #[test]
    fn fock_and_cat_values() {
        for n in [0usize, 1, 5] {
            let i = wigner_i_photonic(&make_fock(n, n + 4).unwrap()).unwrap().value;
            assert!((i - (n as f64 + 0.5)).abs() < 1e-14);
            let im = wigner_i_photonic_mixed(&make_fock(n, n + 4).unwrap().density()).unwrap().value;
            assert!((im - (n as f64 + 0.5)).abs() < 1e-12);
        }
        for r2 in [1.0f64, 4.0, 9.0] {
            let cat = make_even_cat(c64(r2.sqrt(), 0.0), default_cutoff(r2)).unwrap();
            let want = r2 * r2.tanh() + 0.5;
            assert!((wigner_i_photonic(&cat).unwrap().value - want).abs() < 1e-8);
            assert!((wigner_i_photonic_mixed(&cat.density()).unwrap().value - want).abs() < 1e-8);
        }
        let coh = make_coherent(c64(1.3, 0.2), 30).unwrap();
        assert!((wigner_i_photonic(&coh).unwrap().value - 0.5).abs() < 1e-8);
    }

    #[test]
    fn displacement_invariance() {
        let cat = make_even_cat(c64(1.0, 0.0), 60).unwrap();
        let base = wigner_i_photonic(&cat).unwrap().value;
        for alpha in [c64(0.7, 0.0), c64(-1.1, 0.9)] {
            let moved = displace(&cat, alpha, 0).unwrap();
            assert!((wigner_i_photonic(&moved).unwrap().value - base).abs() < 1e-6);
        }
    }

    #[test]
    fn displaced_single_photon_is_three_halves() {
        let st = make_displaced_single_photon(c64(2.0, 0.0), 40).unwrap();
        assert!((wigner_i_photonic(&st).unwrap().value - 1.5).abs() < 1e-6);
        let im = wigner_i_photonic_mixed(&st.density()).unwrap().value;
        assert!((im - 1.5).abs() < 1e-6);
    }

    #[test]
    fn incoherent_mixture_is_bounded() {
        let mut values = Vec::new();
        for a in [1.5f64, 2.5, 3.5] {
            let rho = make_incoherent_cat(c64(a, 0.0), default_cutoff(a * a)).unwrap();
            values.push(wigner_i_photonic_mixed(&rho).unwrap().value);
        }
        for v in &values {
            assert!(*v > 0.0 && *v < 0.3, "{v}");
        }
        assert!((values[2] - values[1]).abs() < 1e-3);
    }

    #[test]
    fn mixed_cat_between_limits() {
        let a = c64(3.0, 0.0);
        let pure = wigner_i_photonic_mixed(&make_mixed_cat(a, 1.0, 50).unwrap()).unwrap().value;
        let half = wigner_i_photonic_mixed(&make_mixed_cat(a, 0.5, 50).unwrap()).unwrap().value;
        assert!((pure - (9.0 * 9f64.tanh() + 0.5)).abs() < 1e-8);
        assert!(half < pure);
    }

    #[test]
    fn prefactor_at_two_thirds() {
        assert!((size_prefactor(2.0 / 3.0) - 0.8616).abs() < 1e-3);
    }

    #[test]
    fn hermite_functions_orthonormal() {
        let step = 0.01;
        let mut gram = vec![0.0; 36];
        let mut x = -15.0;
        while x < 15.0 {
            let h = hermite_functions(5, x);
            for i in 0..6 {
                for j in 0..6 {
                    gram[i * 6 + j] += h[i] * h[j] * step;
                }
            }
            x += step;
        }
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i * 6 + j] - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn separated_fock_pair_gives_twice_n() {
        // (|0>, |2N>): P_S = 1/2 + erf(N / (sigma sqrt 2)) / 2, so Size = 2N exactly
        for n in [10usize, 40] {
            let pair = PhotonPair::new(make_fock(0, 2 * n + 2).unwrap(), make_fock(2 * n, 2 * n + 2).unwrap()).unwrap();
            let v = size_pg(&pair, 2.0 / 3.0, Channel::PhotonCount).unwrap().value;
            assert!((v / (2.0 * n as f64) - 1.0).abs() < 1e-4, "{v}");
        }
    }

    #[test]
    fn homodyne_coherent_pair() {
        // |a> vs |-a> on x: Gaussians of variance 1/2 at +-sqrt(2) a; the smeared
        // variance is 1/2 + sigma^2, P_S = 1/2 + erf(sqrt2 a / sqrt(2 (1/2 + sigma^2))) / 2
        let a = 2.0f64;
        let cutoff = default_cutoff(a * a);
        let pair =
            PhotonPair::new(make_coherent(c64(a, 0.0), cutoff).unwrap(), make_coherent(c64(-a, 0.0), cutoff).unwrap())
                .unwrap();
        let mut d = HomodyneDistance::new(&pair, 0.0).unwrap();
        for sigma in [0.0f64, 0.5, 2.0] {
            let var = 0.5 + sigma * sigma;
            let want = 0.5 + 0.5 * statrs::function::erf::erf(SQRT_2 * a / (2.0 * var).sqrt());
            assert!((d.success_probability(sigma) - want).abs() < 1e-6, "sigma {sigma}");
        }
        let p_g = 2.0 / 3.0;
        let sigma = ((SQRT_2 * a / erf_inv(2.0 * p_g - 1.0)).powi(2) / 2.0 - 0.5).sqrt();
        let v = size_pg(&pair, p_g, Channel::Homodyne { theta: 0.0 }).unwrap();
        assert!((v.witness.unwrap().sigma_star.unwrap() - sigma).abs() < 1e-4 * sigma);
    }

    #[test]
    fn displaced_qubit_pair_matches_closed_form() {
        for r2 in [25.0f64] {
            let a = r2.sqrt();
            let cutoff = default_cutoff(r2 + 1.0) + 2;
            let pair = PhotonPair::new(
                make_displaced_qubit(c64(a, 0.0), 1.0, cutoff).unwrap(),
                make_displaced_qubit(c64(a, 0.0), -1.0, cutoff).unwrap(),
            )
            .unwrap();
            for p_g in [0.6, 0.75] {
                let s = 2.0 * p_g - 1.0;
                let want = 2.0 * a * erf_inv(s) * (4.0 / (PI * s * s) - 2.0).sqrt();
                let got = size_pg(&pair, p_g, Channel::PhotonCount).unwrap().value;
                assert!((got / want - 1.0).abs() < 0.05, "P_g {p_g}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn not_distinguishable_gives_zero() {
        let f = make_fock(1, 4).unwrap();
        let pair = PhotonPair::new(f.clone(), f).unwrap();
        let r = size_pg(&pair, 0.7, Channel::PhotonCount).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.witness.unwrap().note.is_some());
        assert!(size_pg(&PhotonPair::new(make_fock(0, 4).unwrap(), make_fock(1, 4).unwrap()).unwrap(), 1.0, Channel::PhotonCount).is_err());
    }
}
