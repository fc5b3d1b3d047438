//! Goodness-of-fit machinery used as Monte Carlo oracles: empirical cdfs
//! with DKW bands, Kolmogorov-Smirnov tests and chi-square tests.

use statrs::function::gamma::gamma_ur;

/// Half-width of the two-sided `1 - alpha` Dvoretzky-Kiefer-Wolfowitz band
/// for an empirical cdf of `n` points.
pub fn dkw_epsilon(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Empirical cdf of a finite sample together with its DKW band.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
    alpha: f64,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>, alpha: f64) -> Self {
        values.sort_by(|a, b| a.total_cmp(b));
        Self { sorted: values, alpha }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of the sample `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return f64::NAN;
        }
        self.sorted.partition_point(|v| *v <= x) as f64 / self.sorted.len() as f64
    }

    /// Band half-width.
    pub fn epsilon(&self) -> f64 {
        dkw_epsilon(self.sorted.len(), self.alpha)
    }

    /// Confidence band `[lo, hi]` at `x`.
    pub fn band(&self, x: f64) -> (f64, f64) {
        let f = self.eval(x);
        let e = self.epsilon();
        ((f - e).max(0.0), (f + e).min(1.0))
    }

    /// Whether `value` lies inside the band at `x`.
    pub fn covers(&self, x: f64, value: f64) -> bool {
        let (lo, hi) = self.band(x);
        lo <= value && value <= hi
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

/// Statistic and p-value of a test.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Sample size, or degrees of freedom for chi-square tests.
    pub size: usize,
}

/// Survivor function of the Kolmogorov distribution,
/// `2 Σ (-1)^(k-1) exp(-2 k² λ²)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        // the series converges slowly here and the tail is 1 to 1e-15
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic p-value of a KS distance `d` for effective size `ne`, with
/// Stephens' small-sample correction.
fn ks_p_value(d: f64, ne: f64) -> f64 {
    let s = ne.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

/// One-sample KS test of `data` against the continuous cdf `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> TestResult {
    let mut x = data.to_vec();
    x.sort_by(|a, b| a.total_cmp(b));
    let n = x.len();
    if n == 0 {
        return TestResult { statistic: 0.0, p_value: 1.0, size: 0 };
    }
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        let f = cdf(xi);
        d = d.max((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf);
    }
    TestResult { statistic: d, p_value: ks_p_value(d, nf), size: n }
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TestResult {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(|p, q| p.total_cmp(q));
    y.sort_by(|p, q| p.total_cmp(q));
    let (n, m) = (x.len(), y.len());
    if n == 0 || m == 0 {
        return TestResult { statistic: 0.0, p_value: 1.0, size: 0 };
    }
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    TestResult { statistic: d, p_value: ks_p_value(d, ne), size: n + m }
}

/// Critical two-sample KS distance at level `alpha` (asymptotic).
pub fn ks_two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n * m) as f64).sqrt()
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(statistic: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    if statistic <= 0.0 {
        return 1.0;
    }
    gamma_ur(df as f64 / 2.0, statistic / 2.0)
}

/// Pearson goodness-of-fit test of `observed` counts against cell
/// probabilities `probs` (which should sum to 1). Adjacent cells are pooled
/// until every expected count is at least `min_expected`.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], min_expected: f64) -> TestResult {
    let total: u64 = observed.iter().sum();
    let tf = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        o_acc += o as f64;
        e_acc += p * tf;
        if e_acc >= min_expected {
            cells.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o_acc;
                last.1 += e_acc;
            }
            None => cells.push((o_acc, e_acc)),
        }
    }
    let stat: f64 = cells.iter().map(|(o, e)| if *e > 0.0 { (o - e).powi(2) / e } else { 0.0 }).sum();
    let df = cells.len().saturating_sub(1);
    TestResult { statistic: stat, p_value: chi_square_sf(stat, df), size: df }
}

/// Pearson chi-square test of independence on a contingency table.
pub fn chi_square_independence<const R: usize, const C: usize>(table: &[[u64; C]; R]) -> TestResult {
    let total: f64 = table.iter().flatten().map(|&v| v as f64).sum();
    let rows: Vec<f64> = table.iter().map(|r| r.iter().map(|&v| v as f64).sum()).collect();
    let cols: Vec<f64> = (0..C).map(|j| table.iter().map(|r| r[j] as f64).sum()).collect();
    let mut stat = 0.0;
    for i in 0..R {
        for j in 0..C {
            let e = rows[i] * cols[j] / total;
            if e > 0.0 {
                stat += (table[i][j] as f64 - e).powi(2) / e;
            }
        }
    }
    let live_rows = rows.iter().filter(|r| **r > 0.0).count();
    let live_cols = cols.iter().filter(|c| **c > 0.0).count();
    let df = live_rows.saturating_sub(1) * live_cols.saturating_sub(1);
    TestResult { statistic: stat, p_value: chi_square_sf(stat, df), size: df }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kolmogorov_reference_values() {
        // Q_KS(1.3581) = 0.05 and Q_KS(1.6276) = 0.01
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn chi_square_reference_values() {
        // 95% points: df 1 -> 3.8415, df 4 -> 9.4877
        assert!((chi_square_sf(3.8415, 1) - 0.05).abs() < 1e-4);
        assert!((chi_square_sf(9.4877, 4) - 0.05).abs() < 1e-4);
    }

    #[test]
    fn dkw_shrinks_with_sample_size() {
        assert!(dkw_epsilon(100, 0.01) >= dkw_epsilon(1_000_000, 0.01));
        assert!((dkw_epsilon(1_000_000, 0.001) - 0.001_95).abs() < 1e-5);
    }

    #[test]
    fn ks_accepts_uniform_and_rejects_shifted() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Vec<f64> = (0..20_000).map(|_| rng.random()).collect();
        assert!(ks_one_sample(&data, |x| x.clamp(0.0, 1.0)).p_value > 0.001);
        let shifted: Vec<f64> = data.iter().map(|x| x * 0.95).collect();
        assert!(ks_one_sample(&shifted, |x| x.clamp(0.0, 1.0)).p_value < 1e-6);
        let other: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
        assert!(ks_two_sample(&data, &other).p_value > 0.001);
        assert!(ks_two_sample(&shifted, &other).p_value < 1e-6);
    }

    #[test]
    fn ecdf_and_band() {
        let e = EmpiricalCdf::new(vec![3.0, 1.0, 2.0, 2.0], 0.05);
        assert_eq!(e.eval(0.5), 0.0);
        assert_eq!(e.eval(2.0), 0.75);
        assert_eq!(e.eval(3.0), 1.0);
        assert!(e.covers(2.0, 0.5));
    }

    #[test]
    fn gof_and_independence() {
        let t = chi_square_gof(&[25, 25, 25, 25], &[0.25; 4], 5.0);
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.size, 3);
        let t = chi_square_gof(&[90, 10, 0], &[0.5, 0.5, 0.0], 5.0);
        assert!(t.p_value < 1e-10);
        let ind = chi_square_independence(&[[10, 20, 30], [20, 40, 60], [5, 10, 15]]);
        assert!(ind.statistic < 1e-12 && ind.size == 4);
        let dep = chi_square_independence(&[[50, 0, 0], [0, 50, 0], [0, 0, 50]]);
        assert!(dep.p_value < 1e-10);
    }
}
