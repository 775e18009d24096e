use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use super::config::ExperimentConfig;
use super::report::{
    num, ConvergenceReport, ExpansionSummary, LadderRow, Manifest, Target, TargetSource, Verdict,
};
use crate::chaos::HermiteExpansion;
use crate::covariance::{classify_regime, CovarianceModel, require_critical_rank, Normalization, Regime, RegimeVerdict};
use crate::error::{Error, Result};
use crate::partial_sum::{PartialSumPath, PartialSums, PathKind};
use crate::sim::{map_replications, GENERATOR};
use crate::stats::montecarlo::{compare_norms, increment_correlation, second_moment};
use crate::stats::{
    critical_sigma_squared, fdd_covariance_check, grid_pairs, ks_normality, sigma_squared, tightness_diagnostic,
    Estimate,
};

/// Switches that do not belong in the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Refuse a normalization that contradicts the regime instead of
    /// overriding it.
    pub strict: bool,
    /// Worker threads; results do not depend on it.
    pub threads: Option<usize>,
    /// Overrides `output_dir` from the config.
    pub output_dir: Option<PathBuf>,
}

/// Report plus the CSV tables as `(file name, contents)`.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: ConvergenceReport,
    pub tables: Vec<(String, String)>,
}

impl ExperimentOutput {
    pub fn table(&self, name: &str) -> Option<&str> {
        self.tables.iter().find(|t| t.0 == name).map(|t| t.1.as_str())
    }
}

/// Times used for the Brownian covariance matrix.
const FDD_TIMES: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// Picks the normalization, overriding (or, when strict, refusing) one
/// that contradicts the regime.
pub fn resolve_normalization(
    cfg: &ExperimentConfig,
    regime: &RegimeVerdict,
    strict: bool,
) -> Result<(Normalization, bool)> {
    let required = regime.normalization;
    let Some(requested) = cfg.normalization.fixed() else {
        return Ok((required, false));
    };
    if requested == Normalization::SqrtNLogN {
        require_critical_rank(regime.rank)?;
    }
    if requested == required {
        return Ok((requested, false));
    }
    if strict {
        return Err(Error::NormalizationMismatch {
            requested: requested.to_string(),
            required: required.to_string(),
            regime: regime.regime.to_string(),
        });
    }
    log::warn!("{} regime: normalization {requested} overridden to {required}", regime.regime);
    Ok((required, true))
}

struct Replication {
    y: PartialSumPath,
    z: Option<PartialSumPath>,
    chaos_block: Option<f64>,
}

/// Runs the whole ladder and, when an output directory is configured,
/// writes `report.json`, `manifest.json` and the CSV tables there.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());

    let expansion = cfg.function.expansion(cfg.truncation, cfg.quad_order)?;
    if !expansion.is_centered() {
        return Err(Error::NonCenteredExpansion(expansion.mean()));
    }
    let d = expansion.rank();
    let regime = classify_regime(&cfg.covariance, d)?;
    let (normalization, overridden) = resolve_normalization(cfg, &regime, opts.strict)?;
    let target = limiting_variance(&expansion, &cfg.covariance, &regime, normalization, cfg.lag_cutoff)?;
    if let Some(mass) = expansion.discarded_mass() {
        log::info!("expansion discards L2 mass {mass:e} above level {}", cfg.truncation);
    }

    let mut report = ConvergenceReport {
        experiment_id: cfg.id.clone(),
        regime: regime.clone(),
        normalization,
        normalization_overridden: overridden,
        expansion: ExpansionSummary {
            mean: expansion.mean(),
            rank: d,
            truncation: expansion.truncation(),
            l2_norm_sq: expansion.l2_norm_sq(),
            discarded_mass: expansion.discarded_mass(),
        },
        target,
        rows: Vec::new(),
        verdicts: Vec::new(),
        manifest: Manifest {
            experiment_id: cfg.id.clone(),
            config_hash: cfg.hash(),
            master_seed: cfg.master_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            generator: GENERATOR.to_string(),
            threads: opts.threads,
            started_unix,
            wall_clock_seconds: 0.0,
            config: cfg.clone(),
        },
        error: None,
    };
    let out_dir = opts.output_dir.clone().or_else(|| cfg.output_dir.as_ref().map(PathBuf::from));
    let mut trajectories = Vec::new();

    for (rung, &n) in cfg.n_ladder.iter().enumerate() {
        let step = run_rung(cfg, opts, &expansion, &regime, normalization, target, rung, n);
        match step {
            Ok((row, traj)) => {
                report.rows.push(row);
                if let Some(t) = traj {
                    trajectories.push(t);
                }
            }
            Err(e) => {
                report.error = Some(e.to_string());
                report.manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
                let output = ExperimentOutput { tables: tables(&report, &trajectories), report };
                if let Some(dir) = &out_dir {
                    write_output(&output, dir)?;
                }
                return Err(e);
            }
        }
    }

    report.verdicts = verdicts(cfg, &report);
    report.manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    let output = ExperimentOutput { tables: tables(&report, &trajectories), report };
    if let Some(dir) = &out_dir {
        write_output(&output, dir)?;
    }
    Ok(output)
}

/// Variance of the Brownian limit under `normalization`: `σ²` for the
/// `√n` regimes, `c_d²` times the critical constant at the boundary, and
/// `None` where no Gaussian limit exists.
pub fn limiting_variance(
    e: &HermiteExpansion,
    m: &CovarianceModel,
    regime: &RegimeVerdict,
    normalization: Normalization,
    lag_cutoff: usize,
) -> Result<Option<Target>> {
    Ok(match (regime.regime, normalization) {
        (Regime::Critical, Normalization::SqrtNLogN) => {
            let c = e.coeff(regime.rank);
            Some(Target {
                value: c * c * critical_sigma_squared(regime.rank)?,
                tail_bound: 0.0,
                source: TargetSource::CriticalConstant,
            })
        }
        (Regime::Summable | Regime::Subcritical, Normalization::SqrtN) => {
            let s = sigma_squared(e, m, e.truncation(), lag_cutoff)?;
            Some(Target { value: s.value, tail_bound: s.tail_bound, source: TargetSource::SigmaSquared })
        }
        _ => None,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_rung(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    e: &HermiteExpansion,
    regime: &RegimeVerdict,
    normalization: Normalization,
    target: Option<Target>,
    rung: usize,
    n: usize,
) -> Result<(LadderRow, Option<(usize, String)>)> {
    let a_n = normalization
        .scale(n)
        .ok_or_else(|| Error::Config(format!("normalization {normalization} undefined at n = {n}")))?;
    let chaos = cfg.statistics.hypercontractivity.then(|| HermiteExpansion::hermite(regime.rank));
    // Ladder rungs get disjoint seed streams.
    let master = crate::sim::derive_seed(cfg.master_seed, u64::MAX - rung as u64);
    let reps = map_replications(
        &cfg.covariance,
        n,
        0..cfg.replications as u64,
        master,
        opts.threads,
        |path| -> Result<Replication> {
            let sums = PartialSums::new(&path.samples, e)?;
            let values: Vec<f64> = cfg.grid.iter().map(|&t| Ok(sums.step(n, t)? / a_n)).collect::<Result<_>>()?;
            let y = PartialSumPath { grid: cfg.grid.clone(), values, normalization, n, kind: PathKind::CadlagY };
            let z = if cfg.interpolate {
                let values = cfg.grid.iter().map(|&t| Ok(sums.interpolated(n, t)? / a_n)).collect::<Result<_>>()?;
                Some(PartialSumPath { grid: cfg.grid.clone(), values, normalization, n, kind: PathKind::InterpolatedZ })
            } else {
                None
            };
            let chaos_block = match &chaos {
                Some(h) => Some(PartialSums::new(&path.samples, h)?.prefix(n)? / (n as f64).sqrt()),
                None => None,
            };
            Ok(Replication { y, z, chaos_block })
        },
    )?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let ys: Vec<PartialSumPath> = reps.iter().map(|r| r.y.clone()).collect();
    let at_one: Vec<f64> = ys.iter().map(|y| y.at(1.0)).collect::<Result<_>>()?;
    let variance = second_moment(&at_one);
    let ks_scale = match target {
        Some(t) => t.value.sqrt(),
        None => Estimate::mean_of(&at_one).se * (at_one.len() as f64).sqrt(),
    };
    let ks = ks_normality(&at_one, ks_scale)?;

    let has = |t: f64| cfg.grid.iter().any(|g| (g - t).abs() <= 1e-12);
    let (fdd, increment_corr) = if cfg.statistics.fdd {
        let times: Vec<f64> = FDD_TIMES.iter().copied().filter(|&t| has(t)).collect();
        let fdd = match target {
            Some(t) => Some(fdd_covariance_check(&ys, &times, t.value)?),
            None => None,
        };
        let corr = if has(0.5) { Some(increment_correlation(&ys, (0.0, 0.5), (0.5, 1.0))?) } else { None };
        (fdd, corr)
    } else {
        (None, None)
    };

    let tightness = if cfg.statistics.tightness {
        let pairs: Vec<(f64, f64)> = grid_pairs(&cfg.grid)
            .into_iter()
            .filter(|&(s, t)| crate::partial_sum::floor_nt(n, t) > crate::partial_sum::floor_nt(n, s))
            .collect();
        Some(tightness_diagnostic(&ys, cfg.p, &pairs)?)
    } else {
        None
    };

    let hypercontractivity = if cfg.statistics.hypercontractivity {
        let blocks: Vec<f64> = reps.iter().filter_map(|r| r.chaos_block).collect();
        Some(compare_norms(&blocks, regime.rank, cfg.p, cfg.tolerances.hyper_se_multiple))
    } else {
        None
    };

    let (interpolated_variance, interpolation_gap) = if cfg.interpolate {
        let zs: Vec<f64> = reps.iter().filter_map(|r| r.z.as_ref()).map(|z| z.at(1.0)).collect::<Result<_>>()?;
        let gap = reps
            .iter()
            .filter_map(|r| r.z.as_ref().map(|z| (z, &r.y)))
            .flat_map(|(z, y)| z.values.iter().zip(&y.values).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        (Some(second_moment(&zs)), Some(gap))
    } else {
        (None, None)
    };

    let trajectories = (cfg.export_trajectories > 0).then(|| {
        let keep = &ys[..cfg.export_trajectories.min(ys.len())];
        let mut csv = String::from("t");
        for i in 0..keep.len() {
            let _ = write!(csv, ",rep{i}");
        }
        csv.push('\n');
        for (k, &t) in cfg.grid.iter().enumerate() {
            csv.push_str(&num(t));
            for y in keep {
                csv.push(',');
                csv.push_str(&num(y.values[k]));
            }
            csv.push('\n');
        }
        (n, csv)
    });

    let row = LadderRow {
        n,
        variance,
        ratio: target.map(|t| variance.value / t.value),
        ks_scale,
        ks,
        fdd,
        increment_correlation: increment_corr,
        tightness,
        hypercontractivity,
        interpolated_variance,
        interpolation_gap,
    };
    Ok((row, trajectories))
}

fn verdicts(cfg: &ExperimentConfig, report: &ConvergenceReport) -> Vec<Verdict> {
    let tol = &cfg.tolerances;
    let regime = report.regime.regime;
    let mut out = Vec::new();
    let mut push = |name: &str, n: Option<usize>, tolerance: &str, threshold: f64, observed: f64, passed: bool| {
        out.push(Verdict { name: name.into(), n, tolerance: tolerance.into(), threshold, observed, passed });
    };
    for row in &report.rows {
        let n = Some(row.n);
        if let Some(ratio) = row.ratio {
            let dev = (ratio - 1.0).abs();
            push("variance", n, "variance_rel", tol.variance_rel, dev, dev <= tol.variance_rel);
        }
        if regime == Regime::Supercritical {
            let p = row.ks.p_value;
            push("ks_rejects_normality", n, "ks_alpha", tol.ks_alpha, p, p < tol.ks_alpha);
            continue;
        }
        let p = row.ks.p_value;
        push("ks_normality", n, "ks_alpha", tol.ks_alpha, p, p >= tol.ks_alpha);
        if regime != Regime::Critical {
            if let Some(fdd) = &row.fdd {
                let z = fdd.max_se_multiple;
                push("brownian_covariance", n, "cov_se_multiple", tol.cov_se_multiple, z, z <= tol.cov_se_multiple);
            }
        }
        if let Some(c) = row.increment_correlation {
            let z = c.z_score(0.0);
            push("disjoint_increments", n, "corr_se_multiple", tol.corr_se_multiple, z, z <= tol.corr_se_multiple);
        }
        if let Some(h) = row.hypercontractivity {
            let excess = h.lhs.value / h.rhs.value - 1.0;
            push("hypercontractivity", n, "hyper_se_multiple", tol.hyper_se_multiple, excess, h.ok);
        }
    }
    if regime != Regime::Supercritical {
        let ratios: Vec<f64> = report.rows.iter().filter_map(|r| r.tightness.as_ref()).map(|t| t.max_ratio).collect();
        if ratios.len() >= 2 {
            let spread = tightness_spread(&ratios);
            push("tightness_spread", None, "tightness_spread", tol.tightness_spread, spread, spread < tol.tightness_spread);
        }
    }
    if regime == Regime::Critical && report.rows.len() >= 2 {
        let devs: Vec<f64> = report.rows.iter().filter_map(|r| r.ratio).map(|r| (r - 1.0).abs()).collect();
        let worst_step = devs.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        push("monotone_approach", None, "variance_rel", 0.0, worst_step, worst_step <= 0.0);
    }
    out
}

/// `(max − min) / min` of the ladder's tightness ratios.
pub fn tightness_spread(ratios: &[f64]) -> f64 {
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    (max - min) / min
}

fn tables(report: &ConvergenceReport, trajectories: &[(usize, String)]) -> Vec<(String, String)> {
    let mut t = vec![
        ("summary.csv".to_string(), report.summary_csv()),
        ("verdicts.csv".to_string(), report.verdicts_csv()),
        ("tightness.csv".to_string(), report.tightness_csv()),
    ];
    for (n, csv) in trajectories {
        t.push((format!("trajectories_n{n}.csv"), csv.clone()));
    }
    t
}

fn write_output(out: &ExperimentOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, body) in &out.tables {
        fs::write(dir.join(name), body)?;
    }
    fs::write(dir.join("report.json"), out.report.to_json() + "\n")?;
    let manifest = serde_json::to_string_pretty(&out.report.manifest).expect("manifest serializes");
    fs::write(dir.join("manifest.json"), manifest + "\n")?;
    Ok(())
}
