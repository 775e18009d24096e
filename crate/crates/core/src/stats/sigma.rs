//! Limiting variances and the Ben Hariz tightness series.

use serde::Serialize;

use crate::chaos::expansion::weighted_sq;
use crate::chaos::{factorial, HermiteExpansion};
use crate::covariance::{power_sum, power_sum_abs, require_critical_rank, CovarianceModel};
use crate::error::{Error, Result};
use crate::stats::summation::NeumaierSum;

/// `σ² = Σ_{q=d}^{Q} q! c_q² Σ_{|k|≤K} ρ(k)^q` with a certified bound on
/// everything left out (lag tails, levels above `Q`, and the quadrature
/// mass above the expansion's truncation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaSquared {
    pub value: f64,
    pub tail_bound: f64,
    pub terms_used: usize,
    pub lag_cutoff: usize,
}

pub fn sigma_squared(
    e: &HermiteExpansion,
    m: &CovarianceModel,
    max_level: usize,
    lag_cutoff: usize,
) -> Result<SigmaSquared> {
    let d = e.rank();
    if d == 0 {
        return Err(Error::ZeroRank);
    }
    let h1 = power_sum_abs(m, d, lag_cutoff).map_err(|_| Error::ConditionH1Violated { rank: d })?;
    let top = max_level.min(e.truncation());

    let mut value = NeumaierSum::default();
    let mut tail = NeumaierSum::default();
    for q in d..=top {
        let w = weighted_sq(q, e.coeff(q));
        if w == 0.0 {
            continue;
        }
        let s = power_sum(m, q, lag_cutoff)?;
        value.add(w * s.value);
        tail.add(w * s.tail_bound);
    }
    // |Σ ρ^q| ≤ Σ |ρ|^d for every q ≥ d.
    let unused: f64 = (top + 1..=e.truncation()).map(|q| weighted_sq(q, e.coeff(q))).sum();
    let beyond = unused + e.discarded_mass().unwrap_or(0.0);
    if beyond > 0.0 {
        tail.add(beyond * (h1.value + h1.tail_bound));
    }

    let out = SigmaSquared {
        value: value.total(),
        tail_bound: tail.total(),
        terms_used: top,
        lag_cutoff,
    };
    let slack = 1e-12 * out.value.abs().max(1.0);
    if out.value < -out.tail_bound - slack {
        return Err(Error::NegativeVariance { value: out.value, tail_bound: out.tail_bound });
    }
    Ok(out)
}

/// `2 d! ((2d−1)(d−1) / (2d²))^d`, the variance of `Y_n/√(ln n)` for
/// `φ = H_d` on fractional noise at the critical index `H = 1 − 1/(2d)`.
pub fn critical_sigma_squared(d: usize) -> Result<f64> {
    require_critical_rank(d)?;
    let df = d as f64;
    Ok(2.0 * factorial(d) * ((2.0 * df - 1.0) * (df - 1.0) / (2.0 * df * df)).powi(d as i32))
}

/// Partial sums of `Σ_{q≥d} √(q!) |c_q| (Σ_k |ρ(k)|^q)^{1/2} R^q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenHariz {
    pub partial: f64,
    /// `(q, term)` for `q = d..=Q`.
    pub per_term: Vec<(usize, f64)>,
}

pub fn ben_hariz_sum(
    e: &HermiteExpansion,
    m: &CovarianceModel,
    radius: f64,
    max_level: usize,
    lag_cutoff: usize,
) -> Result<BenHariz> {
    if radius.is_nan() || radius <= 1.0 {
        return Err(Error::InvalidArgument(format!("R = {radius} must exceed 1")));
    }
    let d = e.rank();
    if d == 0 {
        return Err(Error::ZeroRank);
    }
    let mut per_term = Vec::new();
    for q in d..=max_level {
        let s = power_sum_abs(m, q, lag_cutoff).map_err(|_| Error::ConditionH1Violated { rank: d })?;
        let term = weighted_sq(q, e.coeff(q)).sqrt() * s.value.sqrt() * radius.powi(q as i32);
        per_term.push((q, term));
    }
    let partial = per_term.iter().map(|t| t.1).collect::<NeumaierSum>().total();
    Ok(BenHariz { partial, per_term })
}
