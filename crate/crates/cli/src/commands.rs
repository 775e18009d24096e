use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use bmlab::chaos::{selftest, ExpansionJson, FunctionSpec, HermiteExpansion, DEFAULT_TRUNCATION};
use bmlab::chaos::quadrature::DEFAULT_ORDER;
use bmlab::covariance::{classify_regime, CovarianceModel};
use bmlab::experiment::{limiting_variance, run_experiment, ConvergenceReport, ExperimentConfig, RunOptions, Statistics, Tolerances};
use bmlab::partial_sum::{build_y, dyadic_grid, floor_nt};
use bmlab::sim::{read_path, simulate_range, write_path};
use bmlab::stats::{ben_hariz_sum, fdd_covariance_check, grid_pairs, increment_correlation, sigma_squared, tightness_diagnostic};
use bmlab::Error;

use crate::args::{Cli, Command, CovarianceArgs, FunctionArgs, Global, VerifyArgs};

/// Whether the statistics that were run all passed.
pub enum Outcome {
    Passed,
    Failed,
}

const DEFAULT_LAG_CUTOFF: usize = 10_000;

struct Ctx {
    global: Global,
    config: Option<ExperimentConfig>,
}

pub fn dispatch(cli: Cli) -> Result<Outcome> {
    let config = match &cli.global.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(Error::from).with_context(|| format!("reading {}", path.display()))?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            if let Some(seed) = cli.global.seed {
                cfg.master_seed = seed;
            }
            Some(cfg)
        }
        None => None,
    };
    let ctx = Ctx { global: cli.global, config };
    match cli.command {
        Command::Expand(f) => expand(&ctx, &f),
        Command::Sigma { function, covariance, lag_cutoff } => sigma(&ctx, &function, &covariance, lag_cutoff),
        Command::Criterion { function, covariance, radius, lag_cutoff } => {
            criterion(&ctx, &function, &covariance, radius, lag_cutoff)
        }
        Command::Simulate { covariance, n, replications } => simulate(&ctx, &covariance, n, replications),
        Command::VerifyFdd(v) => verify(&ctx, &v, Check::Fdd),
        Command::VerifyTightness(v) => verify(&ctx, &v, Check::Tightness),
        Command::ChaosSelftest { cases } => chaos_selftest(&ctx, cases),
        Command::Regime { covariance, rank, function } => regime(&ctx, &covariance, rank, &function),
        Command::Run => run(&ctx),
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidArgument(msg.into()).into()
}

impl Ctx {
    fn seed(&self) -> u64 {
        self.global.seed.or(self.config.as_ref().map(|c| c.master_seed)).unwrap_or(0)
    }

    fn function(&self, args: &FunctionArgs) -> Result<HermiteExpansion> {
        let truncation = args.truncation.or(self.config.as_ref().map(|c| c.truncation)).unwrap_or(DEFAULT_TRUNCATION);
        let quad = args.quad_order.or(self.config.as_ref().map(|c| c.quad_order)).unwrap_or(DEFAULT_ORDER);
        if let Some(path) = &args.expansion {
            let doc: ExpansionJson = serde_json::from_str(&fs::read_to_string(path).map_err(Error::from)?)
                .map_err(Error::from)?;
            return Ok(HermiteExpansion::from_json(&doc)?);
        }
        if let Some(spec) = &args.function {
            return Ok(FunctionSpec::from_str(spec)?.expansion(truncation, quad)?);
        }
        match &self.config {
            Some(cfg) => Ok(cfg.function.expansion(truncation, quad)?),
            None => Err(usage("one of --function, --expansion or --config is required")),
        }
    }

    fn covariance(&self, args: &CovarianceArgs) -> Result<CovarianceModel> {
        let Some(family) = &args.family else {
            return match &self.config {
                Some(cfg) => Ok(cfg.covariance.clone()),
                None => Err(usage("one of --family or --config is required")),
            };
        };
        let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| usage(format!("--family {family} needs {flag}")));
        Ok(match family.as_str() {
            "fgn" => CovarianceModel::fgn(need(args.hurst, "--H")?)?,
            "exponential" => CovarianceModel::exponential(need(args.a, "--a")?)?,
            "table" => CovarianceModel::table(args.values.clone().ok_or_else(|| usage("--family table needs --values"))?)?,
            "white" => CovarianceModel::White,
            other => return Err(usage(format!("unknown covariance family `{other}`"))),
        })
    }

    fn lag_cutoff(&self, flag: Option<usize>) -> usize {
        flag.or(self.config.as_ref().map(|c| c.lag_cutoff)).unwrap_or(DEFAULT_LAG_CUTOFF)
    }

    fn tolerances(&self) -> Tolerances {
        self.config.as_ref().map(|c| c.tolerances).unwrap_or_default()
    }

    /// Writes `text` to --out, or stdout without it.
    fn emit(&self, text: &str) -> Result<()> {
        match &self.global.out {
            Some(path) => fs::write(path, text).map_err(Error::from).with_context(|| format!("writing {}", path.display()))?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn expand(ctx: &Ctx, f: &FunctionArgs) -> Result<Outcome> {
    let e = ctx.function(f)?;
    ctx.emit(&(serde_json::to_string_pretty(&e.to_json())? + "\n"))?;
    Ok(Outcome::Passed)
}

fn sigma(ctx: &Ctx, f: &FunctionArgs, c: &CovarianceArgs, lag: Option<usize>) -> Result<Outcome> {
    let e = ctx.function(f)?;
    let m = ctx.covariance(c)?;
    let s = sigma_squared(&e, &m, e.truncation(), ctx.lag_cutoff(lag))?;
    println!("{:.6} ± {:.3e}", s.value, s.tail_bound);
    if let Some(path) = &ctx.global.out {
        fs::write(path, serde_json::to_string_pretty(&s)? + "\n").map_err(Error::from)?;
    }
    Ok(Outcome::Passed)
}

fn criterion(ctx: &Ctx, f: &FunctionArgs, c: &CovarianceArgs, radius: f64, lag: Option<usize>) -> Result<Outcome> {
    let e = ctx.function(f)?;
    let m = ctx.covariance(c)?;
    let b = ben_hariz_sum(&e, &m, radius, e.truncation(), ctx.lag_cutoff(lag))?;
    let mut csv = String::from("q,term,partial_sum\n");
    let mut acc = 0.0;
    for &(q, term) in &b.per_term {
        acc += term;
        csv.push_str(&format!("{q},{term:?},{acc:?}\n"));
    }
    ctx.emit(&csv)?;
    Ok(Outcome::Passed)
}

fn simulate(ctx: &Ctx, c: &CovarianceArgs, n: usize, replications: u64) -> Result<Outcome> {
    let m = ctx.covariance(c)?;
    let dir = ctx.global.out.clone().unwrap_or_else(|| PathBuf::from("paths"));
    fs::create_dir_all(&dir).map_err(Error::from)?;
    let paths = simulate_range(&m, n, 0..replications, ctx.seed(), ctx.global.threads)?;
    for (i, p) in paths.iter().enumerate() {
        write_path(p, &dir.join(format!("path_{i:06}.bin")))?;
    }
    eprintln!("wrote {replications} paths of length {n} to {}", dir.display());
    Ok(Outcome::Passed)
}

#[derive(Clone, Copy, PartialEq)]
enum Check {
    Fdd,
    Tightness,
}

fn verify(ctx: &Ctx, v: &VerifyArgs, check: Check) -> Result<Outcome> {
    match &v.paths {
        Some(dir) => verify_stored(ctx, v, dir, check),
        None => {
            let mut cfg = ctx.config.clone().ok_or_else(|| usage("either --paths or --config is required"))?;
            cfg.statistics = Statistics {
                fdd: check == Check::Fdd,
                tightness: check == Check::Tightness,
                hypercontractivity: false,
            };
            let report = run_experiment(&cfg, &run_options(ctx))?.report;
            print_verdicts(&report);
            Ok(if report.passed() { Outcome::Passed } else { Outcome::Failed })
        }
    }
}

fn verify_stored(ctx: &Ctx, v: &VerifyArgs, dir: &Path, check: Check) -> Result<Outcome> {
    let mut bins: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(Error::from)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bin"))
        .collect();
    bins.sort();
    if bins.is_empty() {
        return Err(usage(format!("no .bin paths in {}", dir.display())));
    }
    let paths = bins.iter().map(|b| read_path(b)).collect::<bmlab::Result<Vec<_>>>()?;
    let (n, model) = (paths[0].len(), paths[0].model.clone());
    if paths.iter().any(|p| p.len() != n || p.model != model) {
        return Err(usage("stored paths differ in length or covariance model"));
    }
    let e = ctx.function(&v.function)?;
    let regime = classify_regime(&model, e.rank())?;
    let grid = ctx.config.as_ref().map(|c| c.grid.clone()).unwrap_or_else(|| dyadic_grid(16));
    let ys = paths.iter().map(|p| build_y(p, &e, &grid, regime.normalization)).collect::<bmlab::Result<Vec<_>>>()?;
    let tol = ctx.tolerances();
    println!("regime: {regime}");
    let mut passed = true;
    match check {
        Check::Fdd => {
            let target = limiting_variance(&e, &model, &regime, regime.normalization, ctx.lag_cutoff(None))?
                .ok_or_else(|| usage(format!("no Gaussian limit in the {} regime", regime.regime)))?;
            let times: Vec<f64> = [0.25, 0.5, 0.75, 1.0].into_iter().filter(|t| grid.contains(t)).collect();
            let fdd = fdd_covariance_check(&ys, &times, target.value)?;
            let ok = fdd.max_se_multiple <= tol.cov_se_multiple;
            passed &= ok;
            println!("brownian_covariance n={n} max_se_multiple={:.3} threshold={} {}", fdd.max_se_multiple, tol.cov_se_multiple, pass(ok));
            if grid.contains(&0.5) {
                let z = increment_correlation(&ys, (0.0, 0.5), (0.5, 1.0))?.z_score(0.0);
                let ok = z <= tol.corr_se_multiple;
                passed &= ok;
                println!("disjoint_increments n={n} z={z:.3} threshold={} {}", tol.corr_se_multiple, pass(ok));
            }
        }
        Check::Tightness => {
            let p = ctx.config.as_ref().map_or(3.0, |c| c.p);
            let pairs: Vec<_> = grid_pairs(&grid).into_iter().filter(|&(s, t)| floor_nt(n, t) > floor_nt(n, s)).collect();
            let t = tightness_diagnostic(&ys, p, &pairs)?;
            println!("tightness n={n} p={p} max_ratio={:.4}", t.max_ratio);
        }
    }
    Ok(if passed { Outcome::Passed } else { Outcome::Failed })
}

fn chaos_selftest(ctx: &Ctx, cases: usize) -> Result<Outcome> {
    let checks = selftest(cases, ctx.seed());
    for c in &checks {
        println!("{:<34} cases={} max_error={:.3e} tolerance={:e} {}", c.name, c.cases, c.max_error, c.tolerance, pass(c.passed));
    }
    Ok(if checks.iter().all(|c| c.passed) { Outcome::Passed } else { Outcome::Failed })
}

fn regime(ctx: &Ctx, c: &CovarianceArgs, rank: Option<usize>, f: &FunctionArgs) -> Result<Outcome> {
    let m = ctx.covariance(c)?;
    let d = match rank {
        Some(d) => d,
        None => ctx.function(f)?.rank(),
    };
    println!("{}", classify_regime(&m, d)?);
    Ok(Outcome::Passed)
}

fn run(ctx: &Ctx) -> Result<Outcome> {
    let cfg = ctx.config.as_ref().ok_or_else(|| usage("run needs --config"))?;
    let report = run_experiment(cfg, &run_options(ctx))?.report;
    print_verdicts(&report);
    Ok(if report.passed() { Outcome::Passed } else { Outcome::Failed })
}

fn run_options(ctx: &Ctx) -> RunOptions {
    RunOptions { strict: ctx.global.strict, threads: ctx.global.threads, output_dir: ctx.global.out.clone() }
}

fn print_verdicts(report: &ConvergenceReport) {
    println!("regime: {}", report.regime);
    if let Some(t) = report.target {
        println!("target variance: {:.6}", t.value);
    }
    for v in &report.verdicts {
        let n = v.n.map_or_else(|| "ladder".to_string(), |n| format!("n={n}"));
        println!("{:<22} {:<10} observed={:.4} threshold={} {}", v.name, n, v.observed, v.threshold, pass(v.passed));
    }
}

fn pass(ok: bool) -> &'static str {
    if ok { "PASS" } else { "FAIL" }
}
