//! Hermite polynomials with leading coefficient 1 (the "probabilists'"
//! family), orthogonal under the standard Gaussian measure with
//! `<H_p, H_q> = q! δ_pq`.

/// `H_q(x)` by the three-term recurrence `H_{q+1} = x H_q - q H_{q-1}`.
pub fn hermite_eval(q: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if q == 0 {
        return prev;
    }
    for k in 1..q {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[q] = H_q(x)` for `q = 0..out.len()`.
pub fn hermite_all(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 1..out.len().saturating_sub(1) {
        out[k + 1] = x * out[k] - k as f64 * out[k - 1];
    }
}

/// `Σ_q coeffs[q] H_q(x)`, accumulated in the same pass as the recurrence.
pub fn hermite_series(coeffs: &[f64], x: f64) -> f64 {
    let Some((&c0, rest)) = coeffs.split_first() else {
        return 0.0;
    };
    let mut acc = c0;
    let (mut prev, mut cur) = (1.0, x);
    for (k, &c) in rest.iter().enumerate() {
        // cur = H_{k+1}(x)
        acc += c * cur;
        let next = x * cur - (k + 1) as f64 * prev;
        prev = cur;
        cur = next;
    }
    acc
}

/// `q!` as a float. Overflows to infinity past 170.
pub fn factorial(q: usize) -> f64 {
    (1..=q).fold(1.0, |acc, k| acc * k as f64)
}

/// `ln q!`, exact summation up to 30 and Stirling-type `ln Γ` above.
pub fn ln_factorial(q: usize) -> f64 {
    if q <= 30 {
        factorial(q).ln()
    } else {
        statrs::function::gamma::ln_gamma(q as f64 + 1.0)
    }
}

/// Falling factorial `m (m-1) ... (m-k+1)`; zero when `k > m`.
pub fn falling(m: usize, k: usize) -> f64 {
    if k > m {
        return 0.0;
    }
    ((m - k + 1)..=m).fold(1.0, |acc, j| acc * j as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explicit(q: usize, x: f64) -> f64 {
        match q {
            0 => 1.0,
            1 => x,
            2 => x * x - 1.0,
            3 => x.powi(3) - 3.0 * x,
            4 => x.powi(4) - 6.0 * x * x + 3.0,
            5 => x.powi(5) - 10.0 * x.powi(3) + 15.0 * x,
            _ => unreachable!(),
        }
    }

    #[test]
    fn small_values() {
        assert_eq!(hermite_eval(0, 7.3), 1.0);
        assert_eq!(hermite_eval(1, 0.0), 0.0);
        assert_eq!(hermite_eval(3, 2.0), 2.0);
        assert_eq!(hermite_eval(2, 2.0), 3.0);
    }

    #[test]
    fn recurrence_matches_explicit_forms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x: f64 = rng.random_range(-6.0..6.0);
            for q in 0..=5 {
                let want = explicit(q, x);
                let got = hermite_eval(q, x);
                let scale = want.abs().max(1e-300);
                // absolute slack near roots where the relative error is meaningless
                assert!(
                    (got - want).abs() <= 1e-12 * scale || (got - want).abs() < 1e-12,
                    "q={q} x={x} got={got} want={want}"
                );
            }
        }
    }

    #[test]
    fn all_and_series_agree_with_single() {
        let mut buf = [0.0; 9];
        hermite_all(1.7, &mut buf);
        for (q, v) in buf.iter().enumerate() {
            assert_eq!(*v, hermite_eval(q, 1.7));
        }
        let c = [0.5, -1.0, 0.25, 0.0, 2.0];
        let want: f64 = c.iter().enumerate().map(|(q, c)| c * hermite_eval(q, -0.3)).sum();
        assert!((hermite_series(&c, -0.3) - want).abs() < 1e-14);
        assert_eq!(hermite_series(&[], 1.0), 0.0);
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(5), 120.0);
        assert!((ln_factorial(40) - factorial(40).ln()).abs() < 1e-10);
        assert_eq!(falling(5, 2), 20.0);
        assert_eq!(falling(2, 3), 0.0);
        assert_eq!(falling(4, 0), 1.0);
    }
}
