use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Power-law fit `value ~ exp(intercept) * size^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Half-width of the 95% confidence interval on the exponent.
    pub ci95: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
}

/// Ordinary least squares on `(ln size, ln value)`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.iter().any(|&(s, _)| !(s > 0.0 && s.is_finite())) {
        return Err(Error::Domain("sizes must be positive".into()));
    }
    if points.iter().any(|&(_, v)| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Undefined("exponent undefined, values ~ 0".into()));
    }
    if points.len() < 4 {
        return Err(Error::Domain(format!("a fit needs at least 4 points, got {}", points.len())));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all sizes are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - exponent * x).powi(2)).sum();
    let dof = n - 2.0;
    let se = (ssr / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::Numerical(e.to_string()))?.inverse_cdf(0.975);
    Ok(ScalingFit { exponent, intercept, ci95: t * se, residual: (ssr / n).sqrt(), points: points.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ladder() -> Vec<f64> {
        vec![8.0, 16.0, 32.0, 64.0, 128.0]
    }

    #[test]
    fn exact_power_laws() {
        for p in [1.0, 0.5, -1.0] {
            let pts: Vec<_> = ladder().into_iter().map(|s| (s, 3.0 * s.powf(p))).collect();
            let f = fit_exponent(&pts).unwrap();
            assert!((f.exponent - p).abs() < 1e-12);
            assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
            assert!(f.ci95 < 1e-10);
        }
    }

    #[test]
    fn jittered_constant() {
        let jitter = [1.0, 1.01, 0.99, 1.005, 0.995];
        let pts: Vec<_> = ladder().into_iter().zip(jitter).map(|(s, j)| (s, 2.0 * j)).collect();
        let f = fit_exponent(&pts).unwrap();
        assert!(f.exponent.abs() < 0.01);
        assert!(f.ci95 > 0.0 && f.ci95 < 0.03);
    }

    #[test]
    fn rescaling_leaves_exponent() {
        let pts: Vec<_> = ladder().into_iter().map(|s| (s, s.powf(0.7) * (1.0 + 0.01 * s.sin()))).collect();
        let scaled: Vec<_> = pts.iter().map(|&(s, v)| (s, 17.0 * v)).collect();
        let (a, b) = (fit_exponent(&pts).unwrap(), fit_exponent(&scaled).unwrap());
        assert!((a.exponent - b.exponent).abs() < 1e-12);
        assert!((b.intercept - a.intercept - 17f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 2.0), (4.0, 4.0)]).is_err());
        let zero = [(1.0, 1.0), (2.0, 0.0), (4.0, 4.0), (8.0, 8.0)];
        assert!(matches!(fit_exponent(&zero), Err(Error::Undefined(_))));
    }
}
