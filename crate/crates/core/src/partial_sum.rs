//! Normalized partial-sum processes of `φ(X_i)`.
//!
//! `Y_n(t) = a_n^{-1} Σ_{i<⌊nt⌋} φ(X_i)` is the càdlàg step process and
//! `Z_n(t) = Y_n(t) + a_n^{-1} (nt − ⌊nt⌋) φ(X_{⌊nt⌋})` its linear
//! interpolation, with `a_n` either `√n` or `√(n ln n)`. `φ` is always the
//! truncated Hermite series, so simulated sums and the variance formulas
//! refer to the same function.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::chaos::{hermite_series, HermiteExpansion};
use crate::covariance::Normalization;
use crate::error::{Error, Result};
use crate::sim::GaussianPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    CadlagY,
    InterpolatedZ,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialSumPath {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub normalization: Normalization,
    pub n: usize,
    pub kind: PathKind,
}

impl PartialSumPath {
    /// Value at grid time `t`.
    pub fn at(&self, t: f64) -> Result<f64> {
        self.grid
            .iter()
            .position(|&g| (g - t).abs() <= 1e-12)
            .map(|i| self.values[i])
            .ok_or(Error::GridOutOfRange(t))
    }

    /// `p(t) − p(s)` for each pair; both times must be grid points.
    pub fn increments(&self, pairs: &[(f64, f64)]) -> Result<Vec<f64>> {
        pairs.iter().map(|&(s, t)| Ok(self.at(t)? - self.at(s)?)).collect()
    }

    /// Two-column CSV `t,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,value")?;
        for (t, v) in self.grid.iter().zip(&self.values) {
            writeln!(w, "{t:?},{v:?}")?;
        }
        Ok(())
    }
}

/// `{0, 1/k, ..., 1}`.
pub fn dyadic_grid(k: usize) -> Vec<f64> {
    (0..=k).map(|j| j as f64 / k as f64).collect()
}

/// `⌊nt⌋`, snapping products within rounding of an integer.
pub fn floor_nt(n: usize, t: f64) -> usize {
    let x = n as f64 * t;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}

/// `φ(X_i)` and the prefix sums `S_k = Σ_{i<k} φ(X_i)` of one path.
#[derive(Debug, Clone)]
pub struct PartialSums {
    phi: Vec<f64>,
    prefix: Vec<f64>,
}

impl PartialSums {
    pub fn new(samples: &[f64], e: &HermiteExpansion) -> Result<Self> {
        if !e.is_centered() {
            return Err(Error::NonCenteredExpansion(e.mean()));
        }
        if e.rank() == 0 {
            return Err(Error::ZeroRank);
        }
        let coeffs = e.coeffs();
        let top = coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0);
        let coeffs = &coeffs[..=top];
        let phi: Vec<f64> = samples.iter().map(|&x| hermite_series(coeffs, x)).collect();
        let mut prefix = Vec::with_capacity(phi.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for v in &phi {
            acc += v;
            prefix.push(acc);
        }
        Ok(Self { phi, prefix })
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// `S_k`.
    pub fn prefix(&self, k: usize) -> Result<f64> {
        self.prefix
            .get(k)
            .copied()
            .ok_or(Error::PathTooShort { len: self.phi.len(), needed: k })
    }

    /// Unnormalized `Σ_{i<⌊nt⌋} φ(X_i)`.
    pub fn step(&self, n: usize, t: f64) -> Result<f64> {
        check_time(t)?;
        self.prefix(floor_nt(n, t))
    }

    /// Unnormalized interpolated sum.
    pub fn interpolated(&self, n: usize, t: f64) -> Result<f64> {
        check_time(t)?;
        let k = floor_nt(n, t);
        let frac = n as f64 * t - k as f64;
        let base = self.prefix(k)?;
        if frac <= 0.0 {
            return Ok(base);
        }
        let tail = self.phi.get(k).ok_or(Error::PathTooShort { len: self.phi.len(), needed: k + 1 })?;
        Ok(base + frac * tail)
    }
}

fn check_time(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::GridOutOfRange(t))
    }
}

fn scale(normalization: Normalization, n: usize) -> Result<f64> {
    normalization.scale(n).ok_or_else(|| {
        Error::InvalidArgument(format!("normalization {normalization} is undefined at n = {n}"))
    })
}

/// `Y_n` on `grid` with `n` = path length.
pub fn build_y(
    path: &GaussianPath,
    e: &HermiteExpansion,
    grid: &[f64],
    normalization: Normalization,
) -> Result<PartialSumPath> {
    build_y_n(&path.samples, path.len(), e, grid, normalization)
}

/// `Y_n` on `grid` from the first `n` samples.
pub fn build_y_n(
    samples: &[f64],
    n: usize,
    e: &HermiteExpansion,
    grid: &[f64],
    normalization: Normalization,
) -> Result<PartialSumPath> {
    if samples.len() < n {
        return Err(Error::PathTooShort { len: samples.len(), needed: n });
    }
    let a_n = scale(normalization, n)?;
    let sums = PartialSums::new(&samples[..n], e)?;
    let values = grid.iter().map(|&t| Ok(sums.step(n, t)? / a_n)).collect::<Result<_>>()?;
    Ok(PartialSumPath { grid: grid.to_vec(), values, normalization, n, kind: PathKind::CadlagY })
}

/// `Z_n` on `grid` with `n` = path length.
pub fn build_z(
    path: &GaussianPath,
    e: &HermiteExpansion,
    grid: &[f64],
    normalization: Normalization,
) -> Result<PartialSumPath> {
    build_z_n(&path.samples, path.len(), e, grid, normalization)
}

/// `Z_n` on `grid`; needs `⌊n·t⌋ + 1` samples wherever `nt` is fractional.
pub fn build_z_n(
    samples: &[f64],
    n: usize,
    e: &HermiteExpansion,
    grid: &[f64],
    normalization: Normalization,
) -> Result<PartialSumPath> {
    let a_n = scale(normalization, n)?;
    let sums = PartialSums::new(samples, e)?;
    let values = grid.iter().map(|&t| Ok(sums.interpolated(n, t)? / a_n)).collect::<Result<_>>()?;
    Ok(PartialSumPath { grid: grid.to_vec(), values, normalization, n, kind: PathKind::InterpolatedZ })
}

/// `p(t) − p(s)` per pair.
pub fn increments(p: &PartialSumPath, pairs: &[(f64, f64)]) -> Result<Vec<f64>> {
    p.increments(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::CovarianceModel;
    use crate::sim::Method;

    fn path(samples: Vec<f64>) -> GaussianPath {
        GaussianPath { samples, model: CovarianceModel::White, seed: 0, method: Method::Circulant }
    }

    fn h2() -> HermiteExpansion {
        HermiteExpansion::hermite(2)
    }

    #[test]
    fn hand_evaluated_y_and_z() {
        let p = path(vec![1.0, -1.0, 2.0, 0.0]);
        let y = build_y(&p, &h2(), &[0.0, 0.6, 0.75, 1.0], Normalization::SqrtN).unwrap();
        assert_eq!(y.values, vec![0.0, 0.0, 1.5, 1.0]);
        let z = build_z(&p, &h2(), &[0.875], Normalization::SqrtN).unwrap();
        assert_eq!(z.values, vec![1.25]);
    }

    #[test]
    fn linear_case_is_the_prefix_sum() {
        let xs = vec![0.3, -1.2, 0.7, 2.2, -0.1];
        let y = build_y(&path(xs.clone()), &HermiteExpansion::hermite(1), &[1.0], Normalization::SqrtN).unwrap();
        assert!((y.values[0] - xs.iter().sum::<f64>() / 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn z_agrees_with_y_on_the_lattice_and_interpolates_between() {
        let xs: Vec<f64> = (0..8).map(|i| (i as f64 * 0.7).sin() * 2.0).collect();
        let p = path(xs);
        let e = HermiteExpansion::from_terms(&[(1, 0.5), (2, 1.0), (3, -0.2)]);
        let lattice = dyadic_grid(8);
        let y = build_y(&p, &e, &lattice, Normalization::SqrtN).unwrap();
        let z = build_z(&p, &e, &lattice, Normalization::SqrtN).unwrap();
        for (a, b) in y.values.iter().zip(&z.values) {
            assert!((a - b).abs() < 1e-15);
        }
        let mid = build_z(&p, &e, &[2.5 / 8.0], Normalization::SqrtN).unwrap().values[0];
        assert!((mid - 0.5 * (y.values[2] + y.values[3])).abs() < 1e-15);
    }

    #[test]
    fn log_normalization() {
        let p = path(vec![1.0; 4]);
        let y = build_y(&p, &HermiteExpansion::hermite(1), &[1.0], Normalization::SqrtNLogN).unwrap();
        assert!((y.values[0] - 4.0 / (4.0 * 4f64.ln()).sqrt()).abs() < 1e-15);
        assert!(build_y(&path(vec![1.0]), &HermiteExpansion::hermite(1), &[1.0], Normalization::SqrtNLogN).is_err());
    }

    #[test]
    fn errors() {
        let p = path(vec![1.0, 2.0]);
        let noncentered = HermiteExpansion::from_terms(&[(0, 1.0), (2, 1.0)]);
        assert!(matches!(build_y(&p, &noncentered, &[0.5], Normalization::SqrtN), Err(Error::NonCenteredExpansion(_))));
        assert_eq!(build_y(&p, &h2(), &[1.5], Normalization::SqrtN), Err(Error::GridOutOfRange(1.5)));
        assert_eq!(build_y(&p, &h2(), &[-0.1], Normalization::SqrtN), Err(Error::GridOutOfRange(-0.1)));
        // Z over a longer horizon than the samples cover
        assert!(matches!(
            build_z_n(&p.samples, 4, &h2(), &[0.6], Normalization::SqrtN),
            Err(Error::PathTooShort { len: 2, needed: 3 })
        ));
        assert!(matches!(build_y_n(&p.samples, 3, &h2(), &[1.0], Normalization::SqrtN), Err(Error::PathTooShort { .. })));
    }

    #[test]
    fn increments_examples() {
        let p = path(vec![0.5, -1.0, 2.0, 1.5, -0.3, 0.0, 0.9, 1.1]);
        let grid = dyadic_grid(8);
        let y = build_y(&p, &HermiteExpansion::hermite(1), &grid, Normalization::SqrtN).unwrap();
        assert_eq!(y.increments(&[(0.25, 0.25)]).unwrap(), vec![0.0]);
        assert_eq!(y.increments(&[(0.0, 0.75)]).unwrap()[0], y.at(0.75).unwrap());
        let parts = y.increments(&[(0.125, 0.5), (0.5, 0.625), (0.625, 1.0)]).unwrap();
        let whole = y.increments(&[(0.125, 1.0)]).unwrap()[0];
        assert!((parts.iter().sum::<f64>() - whole).abs() < 1e-14);
        assert_eq!(y.increments(&[(0.0, 0.3)]), Err(Error::GridOutOfRange(0.3)));
    }

    #[test]
    fn floor_snaps_rounding() {
        assert_eq!(floor_nt(100, 0.57), 57);
        assert_eq!(floor_nt(4, 0.6), 2);
        assert_eq!(floor_nt(10, 0.99), 9);
    }

    #[test]
    fn csv_export() {
        let y = build_y(&path(vec![1.0, 1.0]), &HermiteExpansion::hermite(1), &[0.0, 1.0], Normalization::SqrtN).unwrap();
        let mut out = Vec::new();
        y.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("t,value\n0.0,0.0\n1.0,{:?}\n", 2.0 / 2f64.sqrt()));
    }
}
