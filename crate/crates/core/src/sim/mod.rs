//! Exact-in-law simulation of stationary Gaussian sequences.
//!
//! The default sampler embeds `ρ(0..n)` in a symmetric circulant matrix of
//! even size `m ≥ 2(n−1)`, diagonalizes it with one FFT and colors complex
//! white noise by the square-rooted spectrum. The real part of the inverse
//! transform, truncated to `n` values, has covariance exactly
//! `Toeplitz(ρ(0..n))`. When the spectrum has negative mass beyond
//! [`EIGEN_TOLERANCE`] and `n` is small enough, the sampler falls back to
//! a dense Cholesky factor.

mod dump;
pub mod seed;

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::covariance::CovarianceModel;
use crate::error::{Error, Result};

pub use dump::{read_path, write_path, PathSidecar};
pub use seed::{derive_seed, stream, GENERATOR};

/// Eigenvalues in `[−EIGEN_TOLERANCE · λ_max, 0)` are clamped to zero.
pub const EIGEN_TOLERANCE: f64 = 1e-9;

/// Largest `n` for which the dense Cholesky fallback is attempted.
pub const CHOLESKY_MAX: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Circulant,
    Cholesky,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Circulant => "circulant",
            Method::Cholesky => "cholesky",
        })
    }
}

/// One realization `X_0..X_{n−1}` with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPath {
    pub samples: Vec<f64>,
    pub model: CovarianceModel,
    pub seed: u64,
    pub method: Method,
}

impl GaussianPath {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

enum Factor {
    Circulant { sqrt_eigen: Vec<f64>, fft: Arc<dyn Fft<f64>> },
    Cholesky(DMatrix<f64>),
}

/// Precomputed sampler for a fixed `(model, n)`.
pub struct Simulator {
    model: CovarianceModel,
    n: usize,
    factor: Factor,
    min_eigenvalue: f64,
}

impl fmt::Debug for Simulator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Simulator")
            .field("model", &self.model)
            .field("n", &self.n)
            .field("method", &self.method())
            .field("min_eigenvalue", &self.min_eigenvalue)
            .finish()
    }
}

impl Simulator {
    pub fn new(model: &CovarianceModel, n: usize) -> Result<Self> {
        Self::with_cholesky_max(model, n, CHOLESKY_MAX)
    }

    /// Like [`Simulator::new`] with an explicit fallback limit; `0`
    /// disables the fallback.
    pub fn with_cholesky_max(model: &CovarianceModel, n: usize, cholesky_max: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument("path length must be >= 1".into()));
        }
        let (eigen, fft) = circulant_spectrum(model, n);
        let max = eigen.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = eigen.iter().copied().fold(f64::INFINITY, f64::min);
        let floor = -EIGEN_TOLERANCE * max.max(0.0);
        if min >= floor {
            let m = eigen.len() as f64;
            let sqrt_eigen = eigen.iter().map(|&l| (l.max(0.0) / m).sqrt()).collect();
            return Ok(Self {
                model: model.clone(),
                n,
                factor: Factor::Circulant { sqrt_eigen, fft },
                min_eigenvalue: min,
            });
        }
        log::debug!("circulant embedding of {model} at n={n} has eigenvalue {min:e}");
        if n > cholesky_max {
            return Err(Error::NotEmbeddable { n, min_eigenvalue: min });
        }
        let rho = model.autocovariances(n);
        let toeplitz = DMatrix::from_fn(n, n, |i, j| rho[i.abs_diff(j)]);
        let chol = toeplitz.cholesky().ok_or(Error::NotEmbeddable { n, min_eigenvalue: min })?;
        Ok(Self { model: model.clone(), n, factor: Factor::Cholesky(chol.unpack()), min_eigenvalue: min })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn method(&self) -> Method {
        match self.factor {
            Factor::Circulant { .. } => Method::Circulant,
            Factor::Cholesky(_) => Method::Cholesky,
        }
    }

    /// Smallest eigenvalue of the circulant embedding before clamping.
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn model(&self) -> &CovarianceModel {
        &self.model
    }

    /// The path for `seed`.
    pub fn sample(&self, seed: u64) -> GaussianPath {
        let mut rng = seed::stream(seed);
        let samples = match &self.factor {
            Factor::Circulant { sqrt_eigen, fft } => {
                let mut buf: Vec<Complex<f64>> = sqrt_eigen
                    .iter()
                    .map(|&s| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                buf.iter().take(self.n).map(|z| z.re).collect()
            }
            Factor::Cholesky(l) => {
                let z = DVector::from_fn(self.n, |_, _| rng.sample::<f64, _>(StandardNormal));
                (l * z).iter().copied().collect()
            }
        };
        GaussianPath { samples, model: self.model.clone(), seed, method: self.method() }
    }
}

/// Eigenvalues of the minimal power-of-two circulant embedding and the
/// forward FFT of that size.
fn circulant_spectrum(model: &CovarianceModel, n: usize) -> (Vec<f64>, Arc<dyn Fft<f64>>) {
    let half = (n.max(2) - 1).next_power_of_two();
    let m = 2 * half;
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|j| Complex::new(model.rho(j.min(m - j) as i64), 0.0))
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(m);
    fft.process(&mut row);
    (row.iter().map(|z| z.re).collect(), fft)
}

/// One path of `model` with `n` samples.
pub fn simulate(model: &CovarianceModel, n: usize, seed: u64) -> Result<GaussianPath> {
    Ok(Simulator::new(model, n)?.sample(seed))
}

/// Replications `0..replications` under `master_seed`.
pub fn simulate_batch(
    model: &CovarianceModel,
    n: usize,
    replications: usize,
    master_seed: u64,
) -> Result<Vec<GaussianPath>> {
    simulate_range(model, n, 0..replications as u64, master_seed, None)
}

/// Replications `range` under `master_seed` on `threads` workers (the
/// global pool when `None`). The result is ordered by replication index
/// and does not depend on the thread count.
pub fn simulate_range(
    model: &CovarianceModel,
    n: usize,
    range: Range<u64>,
    master_seed: u64,
    threads: Option<usize>,
) -> Result<Vec<GaussianPath>> {
    map_replications(model, n, range, master_seed, threads, |p| p)
}

/// Simulates every replication in `range` and maps it through `f`
/// without keeping the paths around.
pub fn map_replications<T, F>(
    model: &CovarianceModel,
    n: usize,
    range: Range<u64>,
    master_seed: u64,
    threads: Option<usize>,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(GaussianPath) -> T + Sync + Send,
{
    if range.is_empty() {
        return Err(Error::InvalidArgument("at least one replication is required".into()));
    }
    let sim = Simulator::new(model, n)
        .map_err(|e| Error::Replication { index: range.start, source: Box::new(e) })?;
    let run = || -> Vec<T> {
        range
            .clone()
            .into_par_iter()
            .map(|i| f(sim.sample(derive_seed(master_seed, i))))
            .collect()
    };
    match threads {
        None => Ok(run()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(run))
        }
    }
}
