//! Coefficient-level shadows of the Malliavin operators acting on
//! `φ(W(h))` for a unit vector `h`.
//!
//! On a single Gaussian the `q`-th chaos component of `φ(W(h))` is
//! `c_q H_q(W(h))`, so every operator below is a transform of the
//! coefficient array: the Ornstein–Uhlenbeck semigroup scales level `q` by
//! `e^{−qt}`, `(−L)^r` scales it by `q^r`, and `D(−L)^{−1}` moves level `q`
//! to level `q − 1` while attaching one more factor of `h`.

use super::expansion::{weighted_sq, HermiteExpansion};
use super::hermite::{factorial, falling};
use crate::error::{Error, Result};

/// A coefficient sequence multiplied by the tensor power `h^{⊗r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedExpansion {
    coeffs: Vec<f64>,
    tensor_power: usize,
}

impl ShiftedExpansion {
    pub fn new(coeffs: Vec<f64>, tensor_power: usize) -> Self {
        Self { coeffs, tensor_power }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn tensor_power(&self) -> usize {
        self.tensor_power
    }

    /// Drops the tensor factor.
    pub fn into_expansion(self) -> HermiteExpansion {
        HermiteExpansion::from_coeffs(self.coeffs)
    }
}

impl From<&HermiteExpansion> for ShiftedExpansion {
    fn from(e: &HermiteExpansion) -> Self {
        Self { coeffs: e.coeffs().to_vec(), tensor_power: 0 }
    }
}

/// `φ_d = Σ_{q≥d} c_q H_{q−d}` where `d` is the rank of `e`.
pub fn shift_operator(e: &HermiteExpansion) -> Result<HermiteExpansion> {
    let d = e.rank();
    if d == 0 {
        return Err(Error::ZeroRank);
    }
    if !e.is_centered() {
        return Err(Error::NonzeroConstant { value: e.mean(), tolerance: e.tolerance() });
    }
    Ok(HermiteExpansion::from_coeffs(e.coeffs()[d..].to_vec()))
}

/// One application of `D(−L)^{−1}`: level `q` moves to `q − 1` unchanged
/// and the tensor power grows by one. Constants are not in the domain.
pub fn shift_down(s: &ShiftedExpansion) -> Result<ShiftedExpansion> {
    let tolerance = coefficient_tolerance(&s.coeffs);
    let c0 = s.coeffs.first().copied().unwrap_or(0.0);
    if c0.abs() > tolerance {
        return Err(Error::NonzeroConstant { value: c0, tolerance });
    }
    let coeffs = if s.coeffs.len() > 1 { s.coeffs[1..].to_vec() } else { vec![0.0] };
    Ok(ShiftedExpansion { coeffs, tensor_power: s.tensor_power + 1 })
}

/// `shift_down` applied `times` times.
pub fn shift_down_n(s: &ShiftedExpansion, times: usize) -> Result<ShiftedExpansion> {
    (0..times).try_fold(s.clone(), |acc, _| shift_down(&acc))
}

/// `P_t`: `c_q ↦ e^{−qt} c_q`, mean part untouched.
pub fn ou_semigroup(e: &HermiteExpansion, t: f64) -> Result<HermiteExpansion> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok(e.map_levels(|q, c| if q == 0 { c } else { (-(q as f64) * t).exp() * c }))
}

/// `(−L)^r`: `c_q ↦ q^r c_q` for `q ≥ 1`. The output is always centered
/// (the generator annihilates constants); for `r < 0` a non-zero mean part
/// is rejected instead of being dropped.
pub fn neg_l_power(e: &HermiteExpansion, r: f64) -> Result<HermiteExpansion> {
    if r < 0.0 && !e.is_centered() {
        return Err(Error::NonzeroConstant { value: e.mean(), tolerance: e.tolerance() });
    }
    Ok(e.map_levels(|q, c| if q == 0 { 0.0 } else { (q as f64).powf(r) * c }))
}

/// `E‖D^k φ_d(W(h))‖² = Σ_{q≥d} c_q² [(q−d)(q−d−1)···(q−d−k+1)]² (q−d−k)!`
/// with `d` the rank of `e`.
pub fn derivative_norm_sq(e: &HermiteExpansion, k: usize) -> f64 {
    let d = e.rank();
    e.coeffs()
        .iter()
        .enumerate()
        .skip(d.max(1))
        .filter(|(q, _)| q - d >= k)
        .map(|(q, &c)| {
            let m = q - d;
            let fall = falling(m, k);
            c * c * fall * fall * factorial(m - k)
        })
        .sum()
}

/// `Σ_{q≥d} q! c_q²`, the common upper bound of [`derivative_norm_sq`]
/// for `0 ≤ k ≤ d`.
pub fn derivative_norm_bound(e: &HermiteExpansion) -> f64 {
    let d = e.rank().max(1);
    e.coeffs().iter().enumerate().skip(d).map(|(q, &c)| weighted_sq(q, c)).sum()
}

fn coefficient_tolerance(coeffs: &[f64]) -> f64 {
    let l1: f64 = coeffs.iter().map(|c| c.abs()).sum();
    super::expansion::RANK_TOLERANCE * l1.max(1.0)
}
