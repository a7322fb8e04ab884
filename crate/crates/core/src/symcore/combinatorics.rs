//! Binomial and hypergeometric weights in log space.
//!
//! Closed-form weights for Dicke splittings and spin-coherent amplitudes
//! involve binomials of the spin count `M`, which overflow `f64` long before
//! the ensemble sizes used here. Everything is assembled as logarithms and only
//! exponentiated at the end.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Below this many factors the multiplicative form is summed directly.
const DIRECT_SUM_LIMIT: u64 = 48;

/// `ln C(n, k)`.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::Domain(format!("log_binomial: k = {k} exceeds n = {n}")));
    }
    Ok(log_binomial_unchecked(n, k))
}

/// `ln C(n, k)` for `k <= n`. Panics in debug builds when `k > n`.
pub(crate) fn log_binomial_unchecked(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    if k == 0 {
        return 0.0;
    }
    if k <= DIRECT_SUM_LIMIT {
        // ln prod_{i=1}^{k} (n - k + i) / i
        let base = (n - k) as f64;
        return (1..=k).map(|i| ((base + i as f64) / i as f64).ln()).sum();
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `ln n!`.
pub fn log_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else if n <= DIRECT_SUM_LIMIT {
        (2..=n).map(|i| (i as f64).ln()).sum()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Hypergeometric probability of drawing `l` marked items in a sample of
/// `draws` from `population` items of which `marked` are marked.
///
/// Returns 0 outside the support.
pub fn hypergeometric_pmf(population: u64, marked: u64, draws: u64, l: u64) -> f64 {
    if marked > population || draws > population || l > marked || l > draws {
        return 0.0;
    }
    if draws - l > population - marked {
        return 0.0;
    }
    (log_binomial_unchecked(marked, l) + log_binomial_unchecked(population - marked, draws - l)
        - log_binomial_unchecked(population, draws))
    .exp()
}

/// Binomial probability `C(n, l) p^l (1-p)^(n-l)`.
pub fn binomial_pmf(n: u64, p: f64, l: u64) -> f64 {
    if l > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if l == n { 1.0 } else { 0.0 };
    }
    (log_binomial_unchecked(n, l) + l as f64 * p.ln() + (n - l) as f64 * (1.0 - p).ln()).exp()
}

/// Weight `C(m_a, l) C(m_b, k - l) / C(m_a + m_b, k)` of the Dicke splitting
/// `|M,k> -> |m_a,l> |m_b,k-l>`, i.e. the squared Schmidt coefficient.
pub fn dicke_split_weight(m_a: u64, m_b: u64, k: u64, l: u64) -> f64 {
    hypergeometric_pmf(m_a + m_b, k, m_a, l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact_binomial(n: u64, k: u64) -> u128 {
        let k = k.min(n - k);
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc
    }

    #[test]
    fn trivial_and_small_values() {
        assert_eq!(log_binomial(5, 0).unwrap(), 0.0);
        assert!((log_binomial(4, 2).unwrap() - 6f64.ln()).abs() < 1e-14);
        assert!((log_binomial(4, 2).unwrap() - 1.791759).abs() < 1e-6);
        for n in 0..60u64 {
            for k in 0..=n {
                let exact = (exact_binomial(n, k) as f64).ln();
                let got = log_binomial(n, k).unwrap();
                assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn domain_error_when_k_exceeds_n() {
        assert!(matches!(log_binomial(3, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn product_form_oracle_large_arguments() {
        // sum of logs of the multiplicative formula, accumulated independently
        let oracle = |n: u64, k: u64| -> f64 {
            let mut s = 0.0f64;
            let mut c = 0.0f64; // Kahan compensation
            for i in 1..=k {
                let term = ((n - k + i) as f64).ln() - (i as f64).ln();
                let y = term - c;
                let t = s + y;
                c = (t - s) - y;
                s = t;
            }
            s
        };
        for &(n, k) in &[(1000u64, 500u64), (1000, 3), (100_000, 50_000), (1_000_000, 7), (1_000_000, 333_333)] {
            let want = oracle(n, k);
            let got = log_binomial(n, k).unwrap();
            assert!(((got - want) / want).abs() <= 1e-10, "n={n} k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn hypergeometric_sums_to_one() {
        let total: f64 = (0..=10).map(|l| hypergeometric_pmf(300, 10, 40, l)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(hypergeometric_pmf(10, 3, 4, 4), 0.0);
        // support bound from the unmarked side: population 5, 4 marked, 3 draws
        assert_eq!(hypergeometric_pmf(5, 4, 3, 1), 0.0);
    }

    #[test]
    fn binomial_pmf_normalized() {
        let total: f64 = (0..=30).map(|l| binomial_pmf(30, 0.3, l)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(binomial_pmf(4, 0.0, 0), 1.0);
    }
}
