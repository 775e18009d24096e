//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "id": "h2-exponential",
//!   "function": "hermite:2",
//!   "covariance": {"family": "exponential", "a": 0.5},
//!   "n_ladder": [256, 1024, 4096],
//!   "replications": 2000,
//!   "p": 3.0,
//!   "master_seed": 7
//! }
//! ```
//!
//! Every other field has a default; see [`ExperimentConfig`].

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chaos::{ExpansionJson, FunctionSpec, HermiteExpansion, DEFAULT_TRUNCATION};
use crate::chaos::quadrature::DEFAULT_ORDER;
use crate::covariance::{CovarianceModel, Normalization};
use crate::error::{Error, Result};
use crate::partial_sum::dyadic_grid;
use crate::stats::montecarlo::{MIN_FDD_REPLICATIONS, MIN_MOMENT_REPLICATIONS};

/// Smallest `M` for which the asymptotic Kolmogorov p-value is trusted.
pub const MIN_KS_REPLICATIONS: usize = 100;

/// Either a registry name or explicit coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSource {
    Named(FunctionSpec),
    Expansion(ExpansionJson),
}

impl FunctionSource {
    pub fn expansion(&self, truncation: usize, quad_order: usize) -> Result<HermiteExpansion> {
        match self {
            FunctionSource::Named(f) => f.expansion(truncation, quad_order),
            FunctionSource::Expansion(doc) => HermiteExpansion::from_json(doc),
        }
    }
}

/// Requested scaling of the partial sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationChoice {
    /// Whatever the regime classifier prescribes.
    #[default]
    Auto,
    SqrtN,
    SqrtNLogN,
}

impl NormalizationChoice {
    pub fn fixed(self) -> Option<Normalization> {
        match self {
            NormalizationChoice::Auto => None,
            NormalizationChoice::SqrtN => Some(Normalization::SqrtN),
            NormalizationChoice::SqrtNLogN => Some(Normalization::SqrtNLogN),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Statistics {
    pub fdd: bool,
    pub tightness: bool,
    pub hypercontractivity: bool,
}

impl Default for Statistics {
    fn default() -> Self {
        Self { fdd: true, tightness: true, hypercontractivity: false }
    }
}

/// Named thresholds every verdict refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative error allowed on `Var Y_n(1)` against the target.
    pub variance_rel: f64,
    /// KS significance level.
    pub ks_alpha: f64,
    /// Standard-error multiple for Brownian covariance entries.
    pub cov_se_multiple: f64,
    /// Standard-error multiple for the disjoint-increment correlation.
    pub corr_se_multiple: f64,
    /// Allowed relative spread of the tightness ratio across the ladder.
    pub tightness_spread: f64,
    /// Standard-error multiple of the hypercontractivity slack.
    pub hyper_se_multiple: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            variance_rel: 0.07,
            ks_alpha: 0.01,
            cov_se_multiple: 4.0,
            corr_se_multiple: 4.0,
            tightness_spread: 0.10,
            hyper_se_multiple: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_id")]
    pub id: String,
    pub function: FunctionSource,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    pub covariance: CovarianceModel,
    #[serde(default = "default_ladder")]
    pub n_ladder: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    /// Time grid; defaults to `{k/16}`.
    #[serde(default = "default_grid")]
    pub grid: Vec<f64>,
    #[serde(default)]
    pub normalization: NormalizationChoice,
    /// Also build the interpolated process `Z_n`.
    #[serde(default)]
    pub interpolate: bool,
    #[serde(default = "default_lag_cutoff")]
    pub lag_cutoff: usize,
    #[serde(default)]
    pub statistics: Statistics,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub master_seed: u64,
    /// Number of `Y_n` trajectories per `n` written to a wide CSV.
    #[serde(default)]
    pub export_trajectories: usize,
    #[serde(default)]
    pub output_dir: Option<String>,
}

fn default_id() -> String {
    "experiment".into()
}
fn default_truncation() -> usize {
    DEFAULT_TRUNCATION
}
fn default_quad_order() -> usize {
    DEFAULT_ORDER
}
fn default_ladder() -> Vec<usize> {
    vec![1 << 8, 1 << 10, 1 << 12, 1 << 14]
}
fn default_replications() -> usize {
    2000
}
fn default_p() -> f64 {
    3.0
}
fn default_grid() -> Vec<f64> {
    dyadic_grid(16)
}
fn default_lag_cutoff() -> usize {
    10_000
}

impl ExperimentConfig {
    /// A config with every default and the given function and model.
    pub fn new(function: FunctionSpec, covariance: CovarianceModel) -> Self {
        Self {
            id: default_id(),
            function: FunctionSource::Named(function),
            truncation: default_truncation(),
            quad_order: default_quad_order(),
            covariance,
            n_ladder: default_ladder(),
            replications: default_replications(),
            p: default_p(),
            grid: default_grid(),
            normalization: NormalizationChoice::Auto,
            interpolate: false,
            lag_cutoff: default_lag_cutoff(),
            statistics: Statistics::default(),
            tolerances: Tolerances::default(),
            master_seed: 0,
            export_trajectories: 0,
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical (compact) JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Structural checks that do not need the expansion or the regime.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_ladder.is_empty() {
            return bad("n_ladder is empty".into());
        }
        if let Some(n) = self.n_ladder.iter().find(|&&n| n < 2) {
            return bad(format!("n = {n} in n_ladder; every n must be >= 2"));
        }
        if self.replications < MIN_KS_REPLICATIONS {
            return bad(format!("replications = {} < {MIN_KS_REPLICATIONS}", self.replications));
        }
        if self.statistics.fdd && self.replications < MIN_FDD_REPLICATIONS {
            return bad(format!("fdd statistics need >= {MIN_FDD_REPLICATIONS} replications"));
        }
        let moments = self.statistics.tightness || self.statistics.hypercontractivity;
        if moments && self.replications < MIN_MOMENT_REPLICATIONS {
            return bad(format!("moment statistics need >= {MIN_MOMENT_REPLICATIONS} replications"));
        }
        if moments && (self.p.is_nan() || self.p <= 2.0) {
            return bad(format!("p = {} must exceed 2", self.p));
        }
        if self.grid.is_empty() || self.grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return bad("grid must be non-empty and inside [0, 1]".into());
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("grid must be strictly increasing".into());
        }
        if !self.grid.contains(&1.0) {
            return bad("grid must contain t = 1".into());
        }
        if self.truncation < 1 || self.quad_order < self.truncation + 1 {
            return bad("need truncation >= 1 and quad_order >= truncation + 1".into());
        }
        if self.lag_cutoff < 1 {
            return bad("lag_cutoff must be >= 1".into());
        }
        let t = &self.tolerances;
        if !(t.ks_alpha > 0.0 && t.ks_alpha < 1.0) {
            return bad("tolerances.ks_alpha must be in (0, 1)".into());
        }
        Ok(())
    }
}
