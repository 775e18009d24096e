use std::fmt::Write as _;

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::covariance::{Normalization, RegimeVerdict};
use crate::stats::{Estimate, FddCheck, Hypercontractivity, KsResult, Tightness};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionSummary {
    pub mean: f64,
    pub rank: usize,
    pub truncation: usize,
    /// `Σ_{1≤q≤Q} q! c_q²`
    pub l2_norm_sq: f64,
    /// `E φ(N)² − Σ_{q≤Q} q! c_q²` when known.
    pub discarded_mass: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSource {
    /// `Σ q! c_q² Σ ρ^q`
    SigmaSquared,
    /// `c_d² · 2 d! ((2d−1)(d−1)/(2d²))^d`
    CriticalConstant,
}

/// Limiting variance of `Y_n(1)` under the chosen normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Target {
    pub value: f64,
    pub tail_bound: f64,
    pub source: TargetSource,
}

/// Statistics for one `n` of the ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderRow {
    pub n: usize,
    /// `E[Y_n(1)²]`
    pub variance: Estimate,
    /// `variance / target`
    pub ratio: Option<f64>,
    /// Scale the KS test divided by: `√target`, or the sample standard
    /// deviation when there is no target.
    pub ks_scale: f64,
    pub ks: KsResult,
    pub fdd: Option<FddCheck>,
    /// Correlation of `Y(1/2) − Y(0)` with `Y(1) − Y(1/2)`.
    pub increment_correlation: Option<Estimate>,
    pub tightness: Option<Tightness>,
    pub hypercontractivity: Option<Hypercontractivity>,
    /// `E[Z_n(1)²]` and `max |Z_n − Y_n|` over grid and batch.
    pub interpolated_variance: Option<Estimate>,
    pub interpolation_gap: Option<f64>,
}

/// One pass/fail decision against a named tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub n: Option<usize>,
    /// Name of the field in [`super::Tolerances`].
    pub tolerance: String,
    pub threshold: f64,
    pub observed: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub experiment_id: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub tool_version: String,
    pub generator: String,
    pub threads: Option<usize>,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    /// The full configuration; rerunning it reproduces every table.
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub experiment_id: String,
    pub regime: RegimeVerdict,
    pub normalization: Normalization,
    pub normalization_overridden: bool,
    pub expansion: ExpansionSummary,
    pub target: Option<Target>,
    pub rows: Vec<LadderRow>,
    pub verdicts: Vec<Verdict>,
    pub manifest: Manifest,
    /// Set when the run aborted after flushing partial results.
    pub error: Option<String>,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.verdicts.iter().all(|v| v.passed)
    }

    pub fn failed_verdicts(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `n,estimate,se,target,ratio,verdict` for `Var Y_n(1)`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("n,estimate,se,target,ratio,verdict\n");
        for row in &self.rows {
            let verdict = self
                .verdicts
                .iter()
                .find(|v| v.name == "variance" && v.n == Some(row.n))
                .map_or("na", |v| if v.passed { "pass" } else { "fail" });
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                row.n,
                num(row.variance.value),
                num(row.variance.se),
                self.target.map_or("".into(), |t| num(t.value)),
                row.ratio.map_or("".into(), num),
                verdict
            );
        }
        out
    }

    /// `n,s,t,steps,estimate,se,ratio,ratio_se` per tightness pair.
    pub fn tightness_csv(&self) -> String {
        let mut out = String::from("n,s,t,steps,estimate,se,ratio,ratio_se\n");
        for row in &self.rows {
            let Some(t) = &row.tightness else { continue };
            for r in &t.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    row.n,
                    num(r.s),
                    num(r.t),
                    r.steps,
                    num(r.norm.value),
                    num(r.norm.se),
                    num(r.ratio.value),
                    num(r.ratio.se)
                );
            }
        }
        out
    }

    /// `name,n,tolerance,threshold,observed,verdict`.
    pub fn verdicts_csv(&self) -> String {
        let mut out = String::from("name,n,tolerance,threshold,observed,verdict\n");
        for v in &self.verdicts {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                v.name,
                v.n.map_or("".into(), |n| n.to_string()),
                v.tolerance,
                num(v.threshold),
                num(v.observed),
                if v.passed { "pass" } else { "fail" }
            );
        }
        out
    }
}

/// Shortest round-trip representation, so equal floats print equal bytes.
pub(crate) fn num(x: f64) -> String {
    format!("{x:?}")
}
