//! Stationary covariance models `ρ(k)`, certified power sums and the
//! fractional-noise regime classifier.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::summation::NeumaierSum;

/// Relative distance to the critical Hurst index treated as equality.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

/// Covariance family with `ρ(0) = 1`.
///
/// Serialized as `{"family":"fgn","H":0.75}`, `{"family":"exponential","a":0.5}`,
/// `{"family":"table","values":[...]}` or `{"family":"white"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", try_from = "RawModel", into = "RawModel")]
pub enum CovarianceModel {
    /// Fractional Gaussian noise with Hurst index `H ∈ (0,1)`.
    Fgn { hurst: f64 },
    /// `ρ(k) = a^{|k|}` with `a ∈ (0,1)`.
    Exponential { a: f64 },
    /// `ρ(k) = values[|k|]`, zero beyond the table.
    Table { values: Vec<f64> },
    White,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
enum RawModel {
    Fgn {
        #[serde(rename = "H")]
        hurst: f64,
    },
    Exponential {
        a: f64,
    },
    Table {
        values: Vec<f64>,
    },
    White,
}

impl TryFrom<RawModel> for CovarianceModel {
    type Error = Error;
    fn try_from(raw: RawModel) -> Result<Self> {
        match raw {
            RawModel::Fgn { hurst } => CovarianceModel::fgn(hurst),
            RawModel::Exponential { a } => CovarianceModel::exponential(a),
            RawModel::Table { values } => CovarianceModel::table(values),
            RawModel::White => Ok(CovarianceModel::White),
        }
    }
}

impl From<CovarianceModel> for RawModel {
    fn from(m: CovarianceModel) -> Self {
        match m {
            CovarianceModel::Fgn { hurst } => RawModel::Fgn { hurst },
            CovarianceModel::Exponential { a } => RawModel::Exponential { a },
            CovarianceModel::Table { values } => RawModel::Table { values },
            CovarianceModel::White => RawModel::White,
        }
    }
}

impl CovarianceModel {
    pub fn fgn(hurst: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::InvalidModel(format!("Hurst index {hurst} not in (0,1)")));
        }
        Ok(CovarianceModel::Fgn { hurst })
    }

    pub fn exponential(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidModel(format!("decay rate {a} not in (0,1)")));
        }
        Ok(CovarianceModel::Exponential { a })
    }

    /// Table model; `values[0]` must be 1 and every entry must lie in `[−1, 1]`.
    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.first() != Some(&1.0) {
            return Err(Error::InvalidModel("table must start with rho(0) = 1".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || v.abs() > 1.0) {
            return Err(Error::InvalidModel(format!("table entry {v} violates |rho| <= 1")));
        }
        Ok(CovarianceModel::Table { values })
    }

    /// `ρ(|k|)`.
    pub fn rho(&self, k: i64) -> f64 {
        let k = k.unsigned_abs();
        if k == 0 {
            return 1.0;
        }
        match self {
            CovarianceModel::Fgn { hurst } => fgn_rho(*hurst, k),
            CovarianceModel::Exponential { a } => a.powf(k as f64),
            CovarianceModel::Table { values } => values.get(k as usize).copied().unwrap_or(0.0),
            CovarianceModel::White => 0.0,
        }
    }

    /// `ρ(0..n)`.
    pub fn autocovariances(&self, n: usize) -> Vec<f64> {
        (0..n as i64).map(|k| self.rho(k)).collect()
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            CovarianceModel::Fgn { .. } => "fgn",
            CovarianceModel::Exponential { .. } => "exponential",
            CovarianceModel::Table { .. } => "table",
            CovarianceModel::White => "white",
        }
    }

    pub fn hurst(&self) -> Option<f64> {
        match self {
            CovarianceModel::Fgn { hurst } => Some(*hurst),
            _ => None,
        }
    }
}

impl fmt::Display for CovarianceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CovarianceModel::Fgn { hurst } => write!(f, "fgn(H={hurst})"),
            CovarianceModel::Exponential { a } => write!(f, "exponential(a={a})"),
            CovarianceModel::Table { values } => write!(f, "table({} lags)", values.len()),
            CovarianceModel::White => write!(f, "white"),
        }
    }
}

/// fGn autocovariance at lag `k ≥ 1`. Far lags use the binomial series of
/// the second difference, which avoids cancelling three `k^{2H}` terms.
fn fgn_rho(h: f64, k: u64) -> f64 {
    let two_h = 2.0 * h;
    let kf = k as f64;
    if k < 64 {
        return 0.5 * ((kf + 1.0).powf(two_h) + (kf - 1.0).powf(two_h) - 2.0 * kf.powf(two_h));
    }
    // ½ k^{2H} [(1+x)^{2H} + (1−x)^{2H} − 2] = k^{2H} Σ_{j≥1} C(2H, 2j) x^{2j}, x = 1/k
    let x2 = 1.0 / (kf * kf);
    let mut binom = 1.0; // C(2H, m) built incrementally
    let mut xp = 1.0;
    let mut acc = 0.0;
    for m in 1..=40u32 {
        binom *= (two_h - (m - 1) as f64) / m as f64;
        if m % 2 == 0 {
            xp *= x2;
            let term = binom * xp;
            acc += term;
            if term.abs() <= 1e-18 * acc.abs() {
                break;
            }
        }
    }
    kf.powf(two_h) * acc
}

/// A truncated lag sum together with a certified bound on the neglected
/// tail `Σ_{|k|>K} |ρ(k)|^q` (`+∞` when no finite bound exists).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerSum {
    pub value: f64,
    pub tail_bound: f64,
}

impl PowerSum {
    pub fn is_certified(&self) -> bool {
        self.tail_bound.is_finite()
    }
}

/// `Σ_{|k|≤K} ρ(k)^q`, the signed sums entering the limiting variance.
pub fn power_sum(m: &CovarianceModel, q: usize, lag_cutoff: usize) -> Result<PowerSum> {
    lag_sum(m, q, lag_cutoff, false)
}

/// `Σ_{|k|≤K} |ρ(k)|^q`; fails with [`Error::DivergentSeries`] when the
/// full series cannot be certified finite.
pub fn power_sum_abs(m: &CovarianceModel, q: usize, lag_cutoff: usize) -> Result<PowerSum> {
    let s = lag_sum(m, q, lag_cutoff, true)?;
    if !s.is_certified() {
        return Err(Error::DivergentSeries { power: q });
    }
    Ok(s)
}

fn lag_sum(m: &CovarianceModel, q: usize, lag_cutoff: usize, absolute: bool) -> Result<PowerSum> {
    if q < 1 {
        return Err(Error::InvalidArgument("power q must be >= 1".into()));
    }
    if lag_cutoff < 1 {
        return Err(Error::InvalidArgument("lag cutoff must be >= 1".into()));
    }
    let last = match m {
        CovarianceModel::White => 0,
        CovarianceModel::Table { values } => lag_cutoff.min(values.len() - 1),
        _ => lag_cutoff,
    };
    let mut acc = NeumaierSum::default();
    for k in 1..=last {
        let r = m.rho(k as i64);
        let v = if absolute { r.abs() } else { r };
        acc.add(v.powi(q as i32));
    }
    let value = 1.0 + 2.0 * acc.total();
    Ok(PowerSum { value, tail_bound: tail_bound(m, q, lag_cutoff) })
}

/// Overestimate of `Σ_{|k|>K} |ρ(k)|^q`.
fn tail_bound(m: &CovarianceModel, q: usize, k_cut: usize) -> f64 {
    let qf = q as f64;
    match m {
        CovarianceModel::White => 0.0,
        CovarianceModel::Table { values } => {
            let tail: f64 = values.iter().skip(k_cut + 1).map(|v| v.abs().powi(q as i32)).sum();
            2.0 * tail
        }
        CovarianceModel::Exponential { a } => {
            let r = a.powf(qf);
            2.0 * r.powf(k_cut as f64 + 1.0) / (1.0 - r)
        }
        CovarianceModel::Fgn { hurst } => {
            if *hurst == 0.5 {
                return 0.0;
            }
            // ρ(k) is half a second difference of x^{2H}, so
            // |ρ(k)| ≤ H|2H−1| (k−1)^{2H−2} for k ≥ 2 and
            // Σ_{k>K} |ρ(k)|^q ≤ C^q (K^{−α} + K^{1−α}/(α−1)), α = q(2−2H).
            let alpha = qf * (2.0 - 2.0 * hurst);
            if alpha <= 1.0 {
                return f64::INFINITY;
            }
            let c = hurst * (2.0 * hurst - 1.0).abs();
            let k = k_cut as f64;
            2.0 * c.powf(qf) * (k.powf(-alpha) + k.powf(1.0 - alpha) / (alpha - 1.0))
        }
    }
}

/// Scaling `a_n` applied to the raw partial sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `√n`
    SqrtN,
    /// `√(n ln n)`
    SqrtNLogN,
}

impl Normalization {
    /// `a_n`; `None` for `√(n ln n)` at `n < 2`.
    pub fn scale(self, n: usize) -> Option<f64> {
        let nf = n as f64;
        match self {
            Normalization::SqrtN => (n >= 1).then(|| nf.sqrt()),
            Normalization::SqrtNLogN => (n >= 2).then(|| (nf * nf.ln()).sqrt()),
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Normalization::SqrtN => write!(f, "sqrt(n)"),
            Normalization::SqrtNLogN => write!(f, "sqrt(n log n)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
    Summable,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
            Regime::Summable => "summable",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeVerdict {
    pub regime: Regime,
    /// Normalization under which the Brownian limit holds. Supercritical
    /// paths keep `√n` here; their non-Gaussian scaling is reported in
    /// `hermite_exponent`.
    pub normalization: Normalization,
    pub hurst: Option<f64>,
    pub rank: usize,
    /// `1 − d(1−H)`: `Y_n · n^{1/2} / n^{1−d(1−H)}` converges to a Hermite
    /// process in the supercritical regime.
    pub hermite_exponent: Option<f64>,
}

impl fmt::Display for RegimeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.regime {
            Regime::Supercritical => write!(
                f,
                "supercritical, non-Gaussian limit under n^{:.6}",
                self.hermite_exponent.unwrap_or(f64::NAN)
            ),
            r => write!(f, "{r}, normalization {}", self.normalization),
        }
    }
}

/// Splits fGn at `H = 1 − 1/(2d)`; every other family is summable.
///
/// Criticality requires the literal boundary value (within
/// [`CRITICAL_TOLERANCE`]) and `d ≥ 2`. At `d = 1` the boundary `H = 1/2`
/// is white noise and is reported as summable.
pub fn classify_regime(m: &CovarianceModel, d: usize) -> Result<RegimeVerdict> {
    if d < 1 {
        return Err(Error::ZeroRank);
    }
    let summable = RegimeVerdict {
        regime: Regime::Summable,
        normalization: Normalization::SqrtN,
        hurst: m.hurst(),
        rank: d,
        hermite_exponent: None,
    };
    let CovarianceModel::Fgn { hurst } = *m else {
        return Ok(summable);
    };
    let threshold = 1.0 - 1.0 / (2.0 * d as f64);
    let regime = if (hurst - threshold).abs() < CRITICAL_TOLERANCE {
        if d == 1 {
            return Ok(summable);
        }
        Regime::Critical
    } else if hurst < threshold {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    };
    Ok(RegimeVerdict {
        regime,
        normalization: if regime == Regime::Critical { Normalization::SqrtNLogN } else { Normalization::SqrtN },
        hurst: Some(hurst),
        rank: d,
        hermite_exponent: (regime == Regime::Supercritical).then_some(1.0 - d as f64 * (1.0 - hurst)),
    })
}

/// Refuses `d = 1` at criticality, where the limiting constant degenerates.
pub fn require_critical_rank(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::CriticalRankOne)
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_examples() {
        assert_eq!(CovarianceModel::fgn(0.5).unwrap().rho(3), 0.0);
        let r1 = CovarianceModel::fgn(0.75).unwrap().rho(1);
        assert!((r1 - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((r1 - 0.414214).abs() < 1e-6);
        assert_eq!(CovarianceModel::exponential(0.5).unwrap().rho(2), 0.25);
        assert_eq!(CovarianceModel::exponential(0.5).unwrap().rho(-2), 0.25);
        for m in models() {
            assert_eq!(m.rho(0), 1.0);
        }
    }

    fn models() -> Vec<CovarianceModel> {
        vec![
            CovarianceModel::fgn(0.3).unwrap(),
            CovarianceModel::fgn(0.75).unwrap(),
            CovarianceModel::exponential(0.5).unwrap(),
            CovarianceModel::table(vec![1.0, -0.4, 0.1]).unwrap(),
            CovarianceModel::White,
        ]
    }

    #[test]
    fn fgn_series_branch_matches_direct_form() {
        for h in [0.2, 0.4, 0.6, 0.75, 0.95] {
            for k in [64u64, 65, 100, 1000] {
                let kf = k as f64;
                let direct = 0.5 * ((kf + 1.0).powf(2.0 * h) + (kf - 1.0).powf(2.0 * h) - 2.0 * kf.powf(2.0 * h));
                let series = fgn_rho(h, k);
                assert!((series - direct).abs() <= 1e-9 * direct.abs(), "H={h} k={k}: {series} vs {direct}");
            }
        }
    }

    #[test]
    fn fgn_telescoping_sum() {
        for h in [0.3, 0.6, 0.75] {
            let m = CovarianceModel::fgn(h).unwrap();
            let k = 1000usize;
            let s = power_sum(&m, 1, k).unwrap();
            let want = (k as f64 + 1.0).powf(2.0 * h) - (k as f64).powf(2.0 * h);
            assert!((s.value - want).abs() < 1e-10, "H={h}: {} vs {want}", s.value);
        }
    }

    #[test]
    fn exponential_power_sum() {
        let m = CovarianceModel::exponential(0.5).unwrap();
        let s = power_sum(&m, 2, 100).unwrap();
        assert!((s.value - 5.0 / 3.0).abs() < 1e-12);
        assert!(s.tail_bound < 1e-50);
        let s1 = power_sum_abs(&m, 1, 100).unwrap();
        assert!((s1.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn white_noise_power_sum() {
        for q in 1..5 {
            let s = power_sum(&CovarianceModel::White, q, 10).unwrap();
            assert_eq!(s, PowerSum { value: 1.0, tail_bound: 0.0 });
        }
    }

    #[test]
    fn borderline_fgn_diverges() {
        let m = CovarianceModel::fgn(0.75).unwrap();
        for cutoff in [1, 10, 10_000] {
            assert_eq!(power_sum_abs(&m, 2, cutoff), Err(Error::DivergentSeries { power: 2 }));
        }
        // the signed variant still returns the partial sum with an infinite tail
        assert!(power_sum(&m, 2, 10).unwrap().tail_bound.is_infinite());
        assert!(power_sum_abs(&m, 3, 10).is_ok());
    }

    #[test]
    fn fgn_tail_bound_is_an_overestimate() {
        for (h, q) in [(0.3, 1), (0.3, 2), (0.6, 2), (0.75, 3), (0.9, 6)] {
            let m = CovarianceModel::fgn(h).unwrap();
            let near = power_sum_abs(&m, q, 50).unwrap();
            let far = power_sum_abs(&m, q, 200_000).unwrap();
            let neglected = far.value - near.value;
            assert!(neglected <= near.tail_bound, "H={h} q={q}: {neglected} > {}", near.tail_bound);
        }
    }

    #[test]
    fn absolute_sums_decrease_in_power() {
        for m in models() {
            let mut prev = f64::INFINITY;
            for q in 1..=10 {
                let Ok(s) = power_sum_abs(&m, q, 500) else { continue };
                assert!(s.value <= prev + 1e-15, "{m} q={q}");
                prev = s.value;
            }
        }
    }

    #[test]
    fn table_validation() {
        assert!(CovarianceModel::table(vec![0.9, 0.1]).is_err());
        assert!(CovarianceModel::table(vec![1.0, 1.2]).is_err());
        assert!(CovarianceModel::table(vec![]).is_err());
        let m = CovarianceModel::table(vec![1.0, 0.5]).unwrap();
        assert_eq!(m.rho(7), 0.0);
        assert_eq!(power_sum(&m, 1, 100).unwrap(), PowerSum { value: 2.0, tail_bound: 0.0 });
        assert_eq!(power_sum(&m, 1, 1).unwrap().tail_bound, 0.0);
        let m = CovarianceModel::table(vec![1.0, 0.5, 0.25]).unwrap();
        assert_eq!(power_sum(&m, 1, 1).unwrap().tail_bound, 0.5);
    }

    #[test]
    fn json_forms() {
        let cases = [
            (r#"{"family":"fgn","H":0.75}"#, CovarianceModel::Fgn { hurst: 0.75 }),
            (r#"{"family":"exponential","a":0.5}"#, CovarianceModel::Exponential { a: 0.5 }),
            (r#"{"family":"table","values":[1.0,0.5]}"#, CovarianceModel::Table { values: vec![1.0, 0.5] }),
            (r#"{"family":"white"}"#, CovarianceModel::White),
        ];
        for (text, want) in cases {
            let m: CovarianceModel = serde_json::from_str(text).unwrap();
            assert_eq!(m, want);
            assert_eq!(serde_json::to_string(&m).unwrap(), text);
        }
        assert!(serde_json::from_str::<CovarianceModel>(r#"{"family":"fgn","H":1.5}"#).is_err());
    }

    #[test]
    fn regimes() {
        let fgn = |h| CovarianceModel::fgn(h).unwrap();
        assert_eq!(classify_regime(&fgn(0.3), 2).unwrap().regime, Regime::Subcritical);
        let crit = classify_regime(&fgn(0.75), 2).unwrap();
        assert_eq!(crit.regime, Regime::Critical);
        assert_eq!(crit.normalization, Normalization::SqrtNLogN);
        assert_eq!(crit.to_string(), "critical, normalization sqrt(n log n)");
        assert_eq!(classify_regime(&fgn(0.9), 2).unwrap().regime, Regime::Supercritical);
        assert_eq!(classify_regime(&CovarianceModel::exponential(0.5).unwrap(), 3).unwrap().regime, Regime::Summable);
        assert_eq!(classify_regime(&fgn(1.0 - 1.0 / 6.0), 3).unwrap().regime, Regime::Critical);
        assert_eq!(classify_regime(&fgn(0.5), 1).unwrap().regime, Regime::Summable);
        assert_eq!(classify_regime(&fgn(0.6), 1).unwrap().regime, Regime::Supercritical);
        assert_eq!(require_critical_rank(1), Err(Error::CriticalRankOne));
    }
}
