//! Randomized check of the exact coefficient identities.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::expansion::HermiteExpansion;
use super::hermite::factorial;
use super::operators::{
    derivative_norm_bound, derivative_norm_sq, neg_l_power, ou_semigroup, shift_down_n, shift_operator,
    ShiftedExpansion,
};
use crate::sim::{derive_seed, stream};

/// Tolerance used by [`selftest`] for every identity.
pub const SELFTEST_TOLERANCE: f64 = 1e-12;

/// Outcome of one identity over all random cases.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub cases: usize,
    /// Largest relative error (or bound excess) seen.
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// A centered expansion with rank in `1..=6`, at most 24 levels and
/// coefficients scaled so that every level carries comparable L² mass.
pub fn random_expansion(seed: u64) -> HermiteExpansion {
    let mut rng = stream(seed);
    let d = rng.random_range(1..=6usize);
    let top = rng.random_range(d..=24usize);
    let mut coeffs = vec![0.0; top + 1];
    for (q, c) in coeffs.iter_mut().enumerate().skip(d) {
        let z: f64 = rng.sample(StandardNormal);
        *c = z / factorial(q).sqrt();
    }
    // Keep the rank exactly d.
    let sign = if coeffs[d] < 0.0 { -1.0 } else { 1.0 };
    coeffs[d] = sign * (coeffs[d].abs() + 0.5 / factorial(d).sqrt());
    HermiteExpansion::from_coeffs(coeffs)
}

/// Runs the identity suite on `cases` random expansions derived from `seed`:
/// `shift_down^d = shift_operator`, `P_s P_t = P_{s+t}`,
/// `(−L)(−L)^{−1} = Id` and `E‖D^k φ_d‖² ≤ Σ q! c_q²` for `k ≤ d`.
pub fn selftest(cases: usize, seed: u64) -> Vec<IdentityCheck> {
    let mut shift = 0.0f64;
    let mut semigroup = 0.0f64;
    let mut inverse = 0.0f64;
    let mut derivative = 0.0f64;
    let mut failures = [false; 4];
    for i in 0..cases as u64 {
        let e = random_expansion(derive_seed(seed, i));
        let d = e.rank();
        let scale = e.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));

        match (shift_down_n(&ShiftedExpansion::from(&e), d), shift_operator(&e)) {
            (Ok(s), Ok(phi_d)) if s.tensor_power() == d => {
                shift = shift.max(max_diff(s.coeffs(), phi_d.coeffs()) / scale);
            }
            _ => failures[0] = true,
        }

        let mut rng = stream(derive_seed(seed ^ 0x5eed, i));
        let (s, t) = (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
        match (ou_semigroup(&e, s).and_then(|x| ou_semigroup(&x, t)), ou_semigroup(&e, s + t)) {
            (Ok(a), Ok(b)) => semigroup = semigroup.max(max_diff(a.coeffs(), b.coeffs()) / scale),
            _ => failures[1] = true,
        }

        match neg_l_power(&e, -1.0).and_then(|x| neg_l_power(&x, 1.0)) {
            Ok(back) => inverse = inverse.max(max_diff(back.coeffs(), e.coeffs()) / scale),
            Err(_) => failures[2] = true,
        }

        let bound = derivative_norm_bound(&e);
        for k in 0..=d {
            let excess = (derivative_norm_sq(&e, k) - bound) / bound;
            derivative = derivative.max(excess);
        }
    }
    let check = |name, max_error: f64, failed: bool| IdentityCheck {
        name,
        cases,
        max_error,
        tolerance: SELFTEST_TOLERANCE,
        passed: !failed && max_error <= SELFTEST_TOLERANCE,
    };
    vec![
        check("shift_down^d = shift_operator", shift, failures[0]),
        check("P_s P_t = P_(s+t)", semigroup, failures[1]),
        check("(-L)(-L)^(-1) = Id", inverse, failures[2]),
        check("E|D^k phi_d|^2 <= sum q! c_q^2", derivative, failures[3]),
    ]
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_expansions_have_requested_shape() {
        for i in 0..50 {
            let e = random_expansion(i);
            assert!((1..=6).contains(&e.rank()));
            assert!(e.is_centered());
        }
    }

    #[test]
    fn suite_passes() {
        for c in selftest(100, 3) {
            assert!(c.passed, "{c:?}");
        }
    }
}
