//! Log-space binomial and multinomial probabilities.

use statrs::function::beta::beta_reg;
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::ln_gamma;

/// `k ln(q)` with the convention `0 · ln 0 = 0`.
fn xlogy(k: u64, q: f64) -> f64 {
    if k == 0 {
        0.0
    } else if q <= 0.0 {
        f64::NEG_INFINITY
    } else {
        k as f64 * q.ln()
    }
}

/// `P(X = k)` for `X ~ Binomial(n, prob)`, evaluated in log space.
pub fn binomial_pmf(n: u64, k: u64, prob: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let prob = prob.clamp(0.0, 1.0);
    if prob == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if prob == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_binomial(n, k) + xlogy(k, prob) + (n - k) as f64 * (-prob).ln_1p()).exp()
}

/// `P(X <= k)` for `X ~ Binomial(n, prob)`; `k < 0` gives 0.
pub fn binomial_cdf(n: u64, k: i64, prob: f64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let k = k as u64;
    if k >= n {
        return 1.0;
    }
    let prob = prob.clamp(0.0, 1.0);
    if prob == 0.0 {
        return 1.0;
    }
    if prob == 1.0 {
        return 0.0;
    }
    beta_reg((n - k) as f64, (k + 1) as f64, 1.0 - prob).clamp(0.0, 1.0)
}

/// Multinomial probability of the counts `ks` with cell probabilities `ps`.
pub fn multinomial_pmf(ks: &[u64], ps: &[f64]) -> f64 {
    let n: u64 = ks.iter().sum();
    let mut log = ln_gamma(n as f64 + 1.0);
    for (&k, &q) in ks.iter().zip(ps) {
        log += xlogy(k, q.clamp(0.0, 1.0)) - ln_gamma(k as f64 + 1.0);
    }
    log.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_against_direct_product() {
        let (n, p) = (7u64, 0.3f64);
        let mut cum = 0.0;
        for k in 0..=n {
            let c = (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64);
            let want = c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
            assert!((binomial_pmf(n, k, p) - want).abs() < 1e-14);
            cum += want;
            assert!((binomial_cdf(n, k as i64, p) - cum).abs() < 1e-13);
        }
        assert_eq!(binomial_cdf(n, -1, p), 0.0);
    }

    #[test]
    fn degenerate_probabilities() {
        assert_eq!(binomial_pmf(5, 0, 0.0), 1.0);
        assert_eq!(binomial_pmf(5, 1, 0.0), 0.0);
        assert_eq!(binomial_pmf(5, 5, 1.0), 1.0);
        assert_eq!(binomial_pmf(5, 4, 1.0), 0.0);
        assert_eq!(binomial_pmf(0, 0, 0.4), 1.0);
        assert_eq!(binomial_cdf(5, 4, 1.0), 0.0);
        assert_eq!(binomial_cdf(5, 0, 0.0), 1.0);
    }

    #[test]
    fn multinomial_reduces_to_binomial() {
        let m = multinomial_pmf(&[2, 3], &[0.4, 0.6]);
        assert!((m - binomial_pmf(5, 2, 0.4)).abs() < 1e-14);
        let total: f64 = (0..=4u64)
            .flat_map(|r| (0..=4 - r).map(move |s| (r, s, 4 - r - s)))
            .map(|(r, s, k)| multinomial_pmf(&[r, s, k], &[0.2, 0.5, 0.3]))
            .sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn large_n_does_not_overflow() {
        let v = binomial_pmf(19_999, 10_000, 0.5);
        assert!(v.is_finite() && v > 0.0 && v < 0.01);
    }
}
