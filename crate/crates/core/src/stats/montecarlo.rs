//! Monte Carlo checks on batches of partial-sum paths.
//!
//! Every replication-level average goes through compensated summation over
//! the batch in replication order, so results do not depend on how the
//! batch was produced.

use serde::Serialize;

use crate::chaos::{hermite_eval, GaussHermite};
use crate::covariance::CovarianceModel;
use crate::error::{Error, Result};
use crate::partial_sum::{floor_nt, PartialSumPath, PartialSums};
use crate::sim::map_replications;
use crate::stats::summation::{mean, sum};

/// Replications required by [`fdd_covariance_check`].
pub const MIN_FDD_REPLICATIONS: usize = 100;
/// Replications required for `p`-th moment statistics.
pub const MIN_MOMENT_REPLICATIONS: usize = 100;

/// A Monte Carlo estimate and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// Mean of `xs` with standard error `sd/√M`.
    pub fn mean_of(xs: &[f64]) -> Self {
        let m = xs.len() as f64;
        let mu = mean(xs);
        let var = sum(&xs.iter().map(|x| (x - mu) * (x - mu)).collect::<Vec<_>>()) / (m - 1.0);
        Self { value: mu, se: (var / m).sqrt() }
    }

    /// `|value − target| / se`.
    pub fn z_score(&self, target: f64) -> f64 {
        let dev = (self.value - target).abs();
        if dev == 0.0 {
            0.0
        } else {
            dev / self.se
        }
    }
}

/// `E[Y²]` of a mean-zero sample.
pub fn second_moment(xs: &[f64]) -> Estimate {
    Estimate::mean_of(&xs.iter().map(|x| x * x).collect::<Vec<_>>())
}

/// `(E|X|^p)^{1/p}` with a delta-method standard error.
pub fn lp_norm(xs: &[f64], p: f64) -> Estimate {
    let m = Estimate::mean_of(&xs.iter().map(|x| x.abs().powf(p)).collect::<Vec<_>>());
    let value = m.value.powf(1.0 / p);
    let se = if m.value > 0.0 { value / (p * m.value) * m.se } else { 0.0 };
    Estimate { value, se }
}

/// Pearson correlation with the large-sample error `(1 − r²)/√M`.
pub fn correlation(xs: &[f64], ys: &[f64]) -> Estimate {
    let (mx, my) = (mean(xs), mean(ys));
    let dx: Vec<f64> = xs.iter().map(|x| x - mx).collect();
    let dy: Vec<f64> = ys.iter().map(|y| y - my).collect();
    let cov = sum(&dx.iter().zip(&dy).map(|(a, b)| a * b).collect::<Vec<_>>());
    let vx = sum(&dx.iter().map(|a| a * a).collect::<Vec<_>>());
    let vy = sum(&dy.iter().map(|b| b * b).collect::<Vec<_>>());
    let r = cov / (vx * vy).sqrt();
    Estimate { value: r, se: (1.0 - r * r) / (xs.len() as f64).sqrt() }
}

fn values_at(batch: &[PartialSumPath], t: f64) -> Result<Vec<f64>> {
    batch.iter().map(|p| p.at(t)).collect()
}

/// Entry `(i, j)` of an empirical-vs-target covariance comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceEntry {
    pub i: usize,
    pub j: usize,
    pub estimate: f64,
    pub se: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FddCheck {
    pub times: Vec<f64>,
    pub entries: Vec<CovarianceEntry>,
    pub max_abs_deviation: f64,
    /// Largest `|estimate − target| / se` over the entries.
    pub max_se_multiple: f64,
}

/// Compares `E[Y(t_i) Y(t_j)]` with `σ² min(t_i, t_j)`.
pub fn fdd_covariance_check(batch: &[PartialSumPath], times: &[f64], sigma2: f64) -> Result<FddCheck> {
    covariance_check(batch, times, |s, t| sigma2 * s.min(t))
}

/// Compares `E[Y(t_i) Y(t_j)]` (known zero mean) with `target(t_i, t_j)`.
pub fn covariance_check<F>(batch: &[PartialSumPath], times: &[f64], target: F) -> Result<FddCheck>
where
    F: Fn(f64, f64) -> f64,
{
    if batch.len() < MIN_FDD_REPLICATIONS {
        return Err(Error::InsufficientReplications { needed: MIN_FDD_REPLICATIONS, got: batch.len() });
    }
    let columns: Vec<Vec<f64>> = times.iter().map(|&t| values_at(batch, t)).collect::<Result<_>>()?;
    let mut entries = Vec::new();
    let (mut max_dev, mut max_z) = (0.0f64, 0.0f64);
    for i in 0..times.len() {
        for j in i..times.len() {
            let products: Vec<f64> = columns[i].iter().zip(&columns[j]).map(|(a, b)| a * b).collect();
            let est = Estimate::mean_of(&products);
            let tgt = target(times[i], times[j]);
            max_dev = max_dev.max((est.value - tgt).abs());
            max_z = max_z.max(est.z_score(tgt));
            entries.push(CovarianceEntry { i, j, estimate: est.value, se: est.se, target: tgt });
        }
    }
    Ok(FddCheck { times: times.to_vec(), entries, max_abs_deviation: max_dev, max_se_multiple: max_z })
}

/// `E[Y(t)²]` across the batch.
pub fn variance_at(batch: &[PartialSumPath], t: f64) -> Result<Estimate> {
    Ok(second_moment(&values_at(batch, t)?))
}

/// Correlation of `Y(b) − Y(a)` with `Y(d) − Y(c)` across the batch.
pub fn increment_correlation(batch: &[PartialSumPath], first: (f64, f64), second: (f64, f64)) -> Result<Estimate> {
    let mut xs = Vec::with_capacity(batch.len());
    let mut ys = Vec::with_capacity(batch.len());
    for p in batch {
        let inc = p.increments(&[first, second])?;
        xs.push(inc[0]);
        ys.push(inc[1]);
    }
    Ok(correlation(&xs, &ys))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TightnessRow {
    pub s: f64,
    pub t: f64,
    /// `⌊nt⌋ − ⌊ns⌋`
    pub steps: usize,
    pub norm: Estimate,
    /// `norm / ((⌊nt⌋−⌊ns⌋)/n)^{1/2}`
    pub ratio: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tightness {
    pub n: usize,
    pub p: f64,
    pub max_ratio: f64,
    pub rows: Vec<TightnessRow>,
}

/// Empirical `‖Y(t) − Y(s)‖_p / ((⌊nt⌋−⌊ns⌋)/n)^{1/2}` over `pairs`.
pub fn tightness_diagnostic(batch: &[PartialSumPath], p: f64, pairs: &[(f64, f64)]) -> Result<Tightness> {
    if p.is_nan() || p <= 2.0 {
        return Err(Error::InvalidArgument(format!("moment order p = {p} must exceed 2")));
    }
    if batch.len() < MIN_MOMENT_REPLICATIONS {
        return Err(Error::InsufficientReplications { needed: MIN_MOMENT_REPLICATIONS, got: batch.len() });
    }
    let n = batch[0].n;
    let mut rows = Vec::with_capacity(pairs.len());
    for &(s, t) in pairs {
        let (ks, kt) = (floor_nt(n, s), floor_nt(n, t));
        if kt <= ks {
            return Err(Error::InvalidArgument(format!("pair ({s}, {t}) spans no summands at n = {n}")));
        }
        let inc: Vec<f64> = batch.iter().map(|b| Ok(b.at(t)? - b.at(s)?)).collect::<Result<_>>()?;
        let norm = lp_norm(&inc, p);
        let scale = ((kt - ks) as f64 / n as f64).sqrt();
        rows.push(TightnessRow {
            s,
            t,
            steps: kt - ks,
            norm,
            ratio: Estimate { value: norm.value / scale, se: norm.se / scale },
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio.value).fold(f64::NEG_INFINITY, f64::max);
    Ok(Tightness { n, p, max_ratio, rows })
}

/// All pairs `s < t` from `grid`.
pub fn grid_pairs(grid: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for (i, &s) in grid.iter().enumerate() {
        for &t in &grid[i + 1..] {
            out.push((s, t));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hypercontractivity {
    /// `‖n^{-1/2} Σ H_q(X_i)‖_p`
    pub lhs: Estimate,
    /// `(p−1)^{q/2} ‖n^{-1/2} Σ H_q(X_i)‖_2`
    pub rhs: Estimate,
    pub slack: f64,
    pub ok: bool,
}

/// Simulates `replications` paths of length `n` and compares both sides of
/// the chaos-`q` moment inequality for the block `⌊ns⌋..⌊nt⌋`. The check
/// passes when `lhs ≤ rhs (1 + slack)` with `slack` four combined relative
/// standard errors.
#[allow(clippy::too_many_arguments)]
pub fn hypercontractivity_check(
    q: usize,
    p: f64,
    m: &CovarianceModel,
    n: usize,
    s: f64,
    t: f64,
    replications: usize,
    master_seed: u64,
) -> Result<Hypercontractivity> {
    if q < 1 {
        return Err(Error::ZeroRank);
    }
    if p.is_nan() || p <= 2.0 {
        return Err(Error::InvalidArgument(format!("moment order p = {p} must exceed 2")));
    }
    if replications < MIN_MOMENT_REPLICATIONS {
        return Err(Error::InsufficientReplications { needed: MIN_MOMENT_REPLICATIONS, got: replications });
    }
    let (ks, kt) = (floor_nt(n, s), floor_nt(n, t));
    if kt <= ks || kt > n {
        return Err(Error::InvalidArgument(format!("block ({s}, {t}) is empty at n = {n}")));
    }
    let e = crate::chaos::HermiteExpansion::hermite(q);
    let root_n = (n as f64).sqrt();
    let blocks = map_replications(m, n, 0..replications as u64, master_seed, None, |path| {
        let sums = PartialSums::new(&path.samples, &e)?;
        Ok((sums.prefix(kt)? - sums.prefix(ks)?) / root_n)
    })?
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(compare_norms(&blocks, q, p, 4.0))
}

/// Both sides of the chaos-`q` moment inequality for the sample `xs`, with
/// `se_multiple` combined relative standard errors of slack.
pub(crate) fn compare_norms(xs: &[f64], q: usize, p: f64, se_multiple: f64) -> Hypercontractivity {
    let lhs = lp_norm(xs, p);
    let two = lp_norm(xs, 2.0);
    let factor = (p - 1.0).powf(q as f64 / 2.0);
    let rhs = Estimate { value: factor * two.value, se: factor * two.se };
    let slack = se_multiple * ((lhs.se / lhs.value).powi(2) + (rhs.se / rhs.value).powi(2)).sqrt();
    Hypercontractivity { lhs, rhs, slack, ok: lhs.value <= rhs.value * (1.0 + slack) }
}

/// Exact `(‖H_q(N)‖_p, (p−1)^{q/2} ‖H_q(N)‖_2)` for one summand, by
/// Gauss–Hermite quadrature (exact for even integer `p`).
pub fn hypercontractivity_single_summand(q: usize, p: f64) -> (f64, f64) {
    let rule = GaussHermite::new(128);
    let lhs = rule.integrate(|x| hermite_eval(q, x).abs().powf(p)).powf(1.0 / p);
    let l2 = rule.integrate(|x| hermite_eval(q, x).powi(2)).sqrt();
    (lhs, (p - 1.0).powf(q as f64 / 2.0) * l2)
}
