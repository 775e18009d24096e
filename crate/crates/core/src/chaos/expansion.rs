use serde::{Deserialize, Serialize};

use super::hermite::{hermite_all, hermite_series, ln_factorial};
use super::quadrature::GaussianRule;
use crate::error::{Error, Result};

/// Default truncation level `Q`.
pub const DEFAULT_TRUNCATION: usize = 40;

/// Relative threshold below which a coefficient counts as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// A finite Hermite expansion `φ = Σ_{q=0}^{Q} c_q H_q`.
///
/// `coeffs[0]` is the mean part `E φ(N)`; the Hermite rank is the first
/// level `q ≥ 1` whose coefficient clears [`HermiteExpansion::tolerance`]
/// (0 when there is none). Coefficients past the truncation are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteExpansion {
    coeffs: Vec<f64>,
    rank: usize,
    /// `E φ(N)² − Σ_{q≤Q} q! c_q²` when the expansion came from quadrature.
    discarded_mass: Option<f64>,
}

impl HermiteExpansion {
    /// Wraps `c_0..c_Q`. An empty slice is the zero function at truncation 0.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        let mut coeffs = coeffs;
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        let rank = find_rank(&coeffs);
        Self { coeffs, rank, discarded_mass: None }
    }

    /// `H_q` alone.
    pub fn hermite(q: usize) -> Self {
        let mut c = vec![0.0; q + 1];
        c[q] = 1.0;
        Self::from_coeffs(c)
    }

    /// Sparse constructor from `(level, coefficient)` pairs.
    pub fn from_terms(terms: &[(usize, f64)]) -> Self {
        let top = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let mut c = vec![0.0; top + 1];
        for &(q, v) in terms {
            c[q] += v;
        }
        Self::from_coeffs(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `c_q`, zero past the truncation.
    pub fn coeff(&self, q: usize) -> f64 {
        self.coeffs.get(q).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn discarded_mass(&self) -> Option<f64> {
        self.discarded_mass
    }

    /// Absolute threshold for "non-zero": `1e−10 · max(1, Σ|c_j|)`.
    pub fn tolerance(&self) -> f64 {
        rank_tolerance(&self.coeffs)
    }

    pub fn is_centered(&self) -> bool {
        self.mean().abs() <= self.tolerance()
    }

    /// `Σ_{q≥1} q! c_q²`, the variance of `φ(N)` carried by the kept levels.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().enumerate().skip(1).map(|(q, &c)| weighted_sq(q, c)).sum()
    }

    /// Evaluates the truncated series at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        hermite_series(&self.coeffs, x)
    }

    /// Same coefficients with `c_0` replaced by `mean`.
    pub fn with_mean(&self, mean: f64) -> Self {
        let mut c = self.coeffs.clone();
        c[0] = mean;
        Self { coeffs: c, rank: self.rank, discarded_mass: self.discarded_mass }
    }

    /// Applies `c_q ↦ g(q, c_q)` to every stored level and recomputes the rank.
    pub(crate) fn map_levels(&self, g: impl Fn(usize, f64) -> f64) -> Self {
        let c = self.coeffs.iter().enumerate().map(|(q, &c)| g(q, c)).collect();
        Self::from_coeffs(c)
    }

    pub fn to_json(&self) -> ExpansionJson {
        ExpansionJson {
            mean: self.mean(),
            coeffs: self.coeffs.clone(),
            rank: self.rank,
            truncation: self.truncation(),
        }
    }

    pub fn from_json(doc: &ExpansionJson) -> Result<Self> {
        if doc.coeffs.len() != doc.truncation + 1 {
            return Err(Error::InvalidExpansion(format!(
                "truncation {} needs {} coefficients, found {}",
                doc.truncation,
                doc.truncation + 1,
                doc.coeffs.len()
            )));
        }
        if doc.coeffs.iter().any(|c| !c.is_finite()) || !doc.mean.is_finite() {
            return Err(Error::InvalidExpansion("non-finite coefficient".into()));
        }
        let e = Self::from_coeffs(doc.coeffs.clone());
        if (e.mean() - doc.mean).abs() > e.tolerance() {
            return Err(Error::InvalidExpansion(format!(
                "mean {} disagrees with c_0 = {}",
                doc.mean,
                e.mean()
            )));
        }
        if e.rank != doc.rank {
            return Err(Error::InvalidExpansion(format!(
                "declared rank {} but coefficients have rank {}",
                doc.rank, e.rank
            )));
        }
        Ok(e)
    }
}

/// Wire form: `{"mean", "coeffs", "rank", "truncation"}` where `coeffs`
/// lists `c_0..c_Q` (so `coeffs[0] == mean`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionJson {
    pub mean: f64,
    pub coeffs: Vec<f64>,
    pub rank: usize,
    pub truncation: usize,
}

/// Hermite coefficients `c_q = E[f(N) H_q(N)] / q!` for `q = 0..=truncation`
/// by Gauss–Hermite quadrature of the given order.
pub fn expand<F>(f: F, truncation: usize, quad_order: usize) -> Result<HermiteExpansion>
where
    F: Fn(f64) -> f64,
{
    if truncation < 1 {
        return Err(Error::InvalidArgument("truncation must be >= 1".into()));
    }
    if quad_order < truncation + 1 {
        return Err(Error::InvalidArgument(format!(
            "quadrature order {quad_order} must be at least truncation + 1 = {}",
            truncation + 1
        )));
    }
    let rule = GaussianRule::hermite(quad_order);
    expand_with(&rule, f, truncation)
}

/// [`expand`] with a prebuilt rule, e.g. a [`GaussianRule::composite`]
/// rule split where `f` jumps or kinks.
pub fn expand_with<F>(rule: &GaussianRule, f: F, truncation: usize) -> Result<HermiteExpansion>
where
    F: Fn(f64) -> f64,
{
    let mut moments = vec![0.0; truncation + 1];
    let mut h = vec![0.0; truncation + 1];
    let mut second_moment = 0.0;
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::NonFiniteQuadrature { node: x });
        }
        hermite_all(x, &mut h);
        let wf = w * fx;
        for (m, hq) in moments.iter_mut().zip(&h) {
            *m += wf * hq;
        }
        second_moment += wf * fx;
    }
    let coeffs: Vec<f64> = moments
        .iter()
        .enumerate()
        .map(|(q, &m)| if q > 30 { m * (-ln_factorial(q)).exp() } else { m / super::hermite::factorial(q) })
        .collect();
    let mut e = HermiteExpansion::from_coeffs(coeffs);
    if e.rank == 0 {
        return Err(Error::RankNotFound { truncation, tolerance: e.tolerance() });
    }
    let kept = e.mean() * e.mean() + e.l2_norm_sq();
    e.discarded_mass = Some((second_moment - kept).max(0.0));
    Ok(e)
}

/// `q! c²`, through logarithms above `q = 30`.
pub(crate) fn weighted_sq(q: usize, c: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else if q > 30 {
        (ln_factorial(q) + 2.0 * c.abs().ln()).exp()
    } else {
        super::hermite::factorial(q) * c * c
    }
}

fn rank_tolerance(coeffs: &[f64]) -> f64 {
    let l1: f64 = coeffs.iter().map(|c| c.abs()).sum();
    RANK_TOLERANCE * l1.max(1.0)
}

fn find_rank(coeffs: &[f64]) -> usize {
    let tol = rank_tolerance(coeffs);
    coeffs.iter().enumerate().skip(1).find(|(_, c)| c.abs() > tol).map_or(0, |(q, _)| q)
}
