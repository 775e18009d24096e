//! Quadrature rules for `E[f(N)]`, `N` standard Gaussian.
//!
//! [`GaussianRule::hermite`] is the default: Gauss–Hermite for the weight
//! `e^{-x²/2}/√(2π)`.
//! Nodes start from the Golub–Welsch eigenvalues of the Jacobi matrix of
//! the monic Hermite recurrence (zero diagonal, off-diagonal `√k`) and are
//! polished by Newton steps on the orthonormal polynomial `p_N`. Weights come
//! from the Christoffel form `w_i = 1 / Σ_{k<N} p_k(x_i)²`, which avoids the
//! poor relative accuracy of squared eigenvector components in the tails.
//! Because the rule is built directly for `e^{-x²/2}/√(2π)`, the weights sum
//! to one and `Σ w_i f(x_i) ≈ E[f(N)]` with no further change of variables.

use nalgebra::{DMatrix, SymmetricEigen};

/// Default number of Gauss–Hermite nodes.
pub const DEFAULT_ORDER: usize = 128;

/// Half-width of the interval covered by [`GaussianRule::composite`];
/// the Gaussian mass outside is below `e^{-800}`.
const COMPOSITE_RANGE: f64 = 40.0;
const COMPOSITE_PANEL: f64 = 0.5;
const COMPOSITE_POINTS: usize = 20;

/// Nodes and weights with `Σ w_i f(x_i) ≈ E[f(N)]`.
#[derive(Debug, Clone)]
pub struct GaussianRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// The Gauss–Hermite flavour of [`GaussianRule`].
pub type GaussHermite = GaussianRule;

impl GaussianRule {
    /// Gauss–Hermite rule with `order` nodes, exact for polynomials of
    /// degree `2·order − 1`.
    pub fn new(order: usize) -> Self {
        Self::hermite(order)
    }

    /// Gauss–Hermite rule with `order` nodes, exact for polynomials of
    /// degree `2·order − 1`.
    pub fn hermite(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        if order == 1 {
            return Self { nodes: vec![0.0], weights: vec![1.0] };
        }
        let mut jacobi = DMatrix::<f64>::zeros(order, order);
        for k in 1..order {
            let b = (k as f64).sqrt();
            jacobi[(k - 1, k)] = b;
            jacobi[(k, k - 1)] = b;
        }
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
        nodes.sort_by(|a, b| a.total_cmp(b));

        // The rule is symmetric; polish the non-negative half and mirror it.
        let half = order / 2;
        let mut weights = vec![0.0; order];
        for i in half..order {
            let mut x = nodes[i];
            if order % 2 == 1 && i == half {
                x = 0.0;
            } else {
                for _ in 0..20 {
                    let (p, p_prev, _) = orthonormal(order, x);
                    let dx = p / ((order as f64).sqrt() * p_prev);
                    x -= dx;
                    if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                        break;
                    }
                }
            }
            let (_, _, sum_sq) = orthonormal(order, x);
            nodes[i] = x;
            weights[i] = 1.0 / sum_sq;
            let mirror = order - 1 - i;
            nodes[mirror] = -x;
            weights[mirror] = weights[i];
        }
        Self { nodes, weights }
    }

    /// Composite Gauss–Legendre against the Gaussian density on
    /// `[−40, 40]`, with panel edges at every breakpoint. Integrands that are
    /// smooth between the breakpoints (jumps or kinks of `f` at known
    /// places) converge at the panel rule's full order, where a
    /// Gauss–Hermite rule would stall at a few digits.
    pub fn composite(breakpoints: &[f64]) -> Self {
        let mut edges: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|b| b.abs() < COMPOSITE_RANGE)
            .chain([-COMPOSITE_RANGE, COMPOSITE_RANGE])
            .collect();
        edges.sort_by(|a, b| a.total_cmp(b));
        edges.dedup();
        let (gl_nodes, gl_weights) = gauss_legendre(COMPOSITE_POINTS);
        let density = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let panels = ((b - a) / COMPOSITE_PANEL).ceil().max(1.0) as usize;
            let h = (b - a) / panels as f64;
            for k in 0..panels {
                let lo = a + k as f64 * h;
                for (&u, &w) in gl_nodes.iter().zip(&gl_weights) {
                    let x = lo + 0.5 * h * (u + 1.0);
                    nodes.push(x);
                    weights.push(0.5 * h * w * density(x));
                }
            }
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_i f(x_i)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

impl Default for GaussianRule {
    fn default() -> Self {
        Self::hermite(DEFAULT_ORDER)
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` by Newton iteration on
/// `P_k` from the Chebyshev-like initial guesses.
fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    let kf = k as f64;
    for i in 0..k.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (kf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=k {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = kf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[k - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[k - 1 - i] = w;
    }
    (nodes, weights)
}

/// Returns `(p_n(x), p_{n-1}(x), Σ_{k<n} p_k(x)²)` for the orthonormal
/// polynomials `p_k = H_k / √(k!)`.
fn orthonormal(n: usize, x: f64) -> (f64, f64, f64) {
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut sum_sq = 0.0;
    for k in 0..n {
        sum_sq += cur * cur;
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    (cur, prev, sum_sq)
}
