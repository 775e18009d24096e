//! Theory-side constants and Monte Carlo verification statistics.

pub mod ks;
pub mod montecarlo;
pub mod sigma;
pub mod summation;

pub use ks::{ks_normality, KsResult};
pub use montecarlo::{
    covariance_check, fdd_covariance_check, grid_pairs, hypercontractivity_check, hypercontractivity_single_summand,
    increment_correlation, lp_norm, second_moment, tightness_diagnostic, variance_at, Estimate, FddCheck,
    Hypercontractivity, Tightness, TightnessRow,
};
pub use sigma::{ben_hariz_sum, critical_sigma_squared, sigma_squared, BenHariz, SigmaSquared};
