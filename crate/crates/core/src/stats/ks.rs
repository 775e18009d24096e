//! One-sample Kolmogorov–Smirnov test against `N(0, σ²)`.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

impl KsResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Two-sided statistic of `samples / sigma` against the standard normal,
/// with the asymptotic Kolmogorov p-value of `√M · D`.
pub fn ks_normality(samples: &[f64], sigma: f64) -> Result<KsResult> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientReplications { needed: MIN_SAMPLES, got: samples.len() });
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma = {sigma} must be positive")));
    }
    if samples.iter().all(|&x| x == samples[0]) {
        return Err(Error::DegenerateSample);
    }
    let normal = Normal::standard();
    let mut z: Vec<f64> = samples.iter().map(|x| x / sigma).collect();
    z.sort_by(|a, b| a.total_cmp(b));
    let m = z.len() as f64;
    let statistic = z
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / m).max((i + 1) as f64 / m - f)
        })
        .fold(0.0, f64::max);
    Ok(KsResult { statistic, p_value: kolmogorov_sf(m.sqrt() * statistic) })
}

/// `P(K > x)` for the Kolmogorov distribution, each series cut at 100 terms.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let p = if x < 1.0 {
        // P(K ≤ x) = √(2π)/x Σ_{k≥1} exp(−(2k−1)²π²/(8x²))
        let c = std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let s: f64 = (1..=100).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum();
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s
    } else {
        // P(K > x) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²x²)
        2.0 * (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * x * x).exp()
            })
            .sum::<f64>()
    };
    p.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::ContinuousCDF;

    #[test]
    fn kolmogorov_reference_points() {
        // classical critical values of √M·D
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_sf(1.2238) - 0.10).abs() < 1e-4);
        // both series agree where they meet
        let x = 1.0;
        let c = std::f64::consts::PI.powi(2) / 8.0;
        let small: f64 = 1.0 - (2.0 * std::f64::consts::PI).sqrt()
            * (1..=100).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum::<f64>();
        assert!((small - kolmogorov_sf(x)).abs() < 1e-14);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
        assert!(kolmogorov_sf(0.05) <= 1.0 && kolmogorov_sf(10.0) >= 0.0);
    }

    #[test]
    fn quantile_plug_in_is_nearly_perfect() {
        let m = 1000;
        let normal = Normal::standard();
        let xs: Vec<f64> = (1..=m).map(|i| normal.inverse_cdf((i as f64 - 0.5) / m as f64)).collect();
        let r = ks_normality(&xs, 1.0).unwrap();
        assert!(r.statistic <= 0.5 / m as f64 + 1e-8, "{}", r.statistic);
        assert!(r.p_value > 0.999);
        // wrong scale is detected
        assert!(ks_normality(&xs, 2.0).unwrap().rejects(0.01));
    }

    #[test]
    fn errors() {
        assert_eq!(ks_normality(&[1.0; 30], 1.0), Err(Error::DegenerateSample));
        assert!(matches!(ks_normality(&[1.0; 5], 1.0), Err(Error::InsufficientReplications { .. })));
        assert!(ks_normality(&(0..30).map(f64::from).collect::<Vec<_>>(), 0.0).is_err());
    }
}
