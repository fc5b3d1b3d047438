//! One-dimensional adaptive integration and monotone root finding.
//!
//! Every integral in the exact-distribution formulas goes through
//! [`integrate`] or [`integrate_toward_endpoint`]. The second entry point
//! handles integrands carrying a `K(t)^(n-1)` factor for large `n`, whose mass
//! sits in a window of width `O(n^(-1/e))` next to the right endpoint.

mod gauss_kronrod;
mod powers;
mod roots;
mod table;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use gauss_kronrod::qk21;

pub use powers::log_pow_integrand_guard;
pub(crate) use powers::{pow_one_minus, pow_prob};
pub use roots::{invert_monotone, INVERT_VALUE_TOL, INVERT_WIDTH_REL_TOL};
pub use table::CumulativeTable;

/// Tolerances and refinement policy shared by all integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Resolve right-endpoint peaks by the substitution `t = end - s * w`.
    pub endpoint_transform: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
            endpoint_transform: true,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_subdivisions < 10 {
            return Err(Error::InvalidParameter(
                "max_subdivisions must be at least 10".into(),
            ));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Value of an integral together with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

impl Integral {
    pub const ZERO: Integral = Integral { value: 0.0, error: 0.0 };
}

impl std::ops::Add for Integral {
    type Output = Integral;
    fn add(self, rhs: Integral) -> Integral {
        Integral {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kahan_sum<I: Iterator<Item = f64>>(iter: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in iter {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Integral> {
    integrate_with_breaks(f, &[a, b], cfg)
}

/// Adaptive integration over the partition given by the sorted `points`
/// (first and last entries are the limits). Interior points are places where
/// the integrand has kinks or jumps.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    if points.len() < 2 {
        return Ok(Integral::ZERO);
    }
    let (a, b) = (points[0], points[points.len() - 1]);
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a > b {
        return Err(Error::Domain(format!("integration limits reversed: [{a}, {b}]")));
    }
    if a == b {
        return Ok(Integral::ZERO);
    }

    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel> = Vec::new();
    let mut prev = a;
    for &p in points.iter().skip(1) {
        let p = p.clamp(prev, b);
        if p > prev {
            let r = qk21(&f, prev, p);
            heap.push(Panel { a: prev, b: p, value: r.value, error: r.error });
            prev = p;
        }
    }

    let mut subdivisions = heap.len();
    let totals = |heap: &BinaryHeap<Panel>, frozen: &[Panel]| {
        let value = kahan_sum(heap.iter().chain(frozen.iter()).map(|p| p.value));
        let error: f64 = heap.iter().chain(frozen.iter()).map(|p| p.error).sum();
        (value, error)
    };
    let (mut value, mut error) = totals(&heap, &frozen);
    loop {
        if !value.is_finite() || error.is_nan() {
            return Err(Error::Domain("integrand is not finite on the integration range".into()));
        }
        if error <= cfg.target(value) {
            // running sums drift; confirm on exact totals
            let (v, e) = totals(&heap, &frozen);
            if e <= cfg.target(v) {
                return Ok(Integral { value: v, error: e });
            }
            (value, error) = (v, e);
            continue;
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::Quadrature { estimate: value, error, subdivisions });
        };
        if subdivisions >= cfg.max_subdivisions {
            heap.push(worst);
            let (v, e) = totals(&heap, &frozen);
            return Err(Error::Quadrature { estimate: v, error: e, subdivisions });
        }
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            frozen.push(worst);
            if heap.is_empty() {
                let (v, e) = totals(&heap, &frozen);
                if e <= cfg.target(v) {
                    return Ok(Integral { value: v, error: e });
                }
                return Err(Error::Quadrature { estimate: v, error: e, subdivisions });
            }
            continue;
        }
        let left = qk21(&f, worst.a, mid);
        let right = qk21(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: left.value, error: left.error });
        heap.push(Panel { a: mid, b: worst.b, value: right.value, error: right.error });
        subdivisions += 1;
    }
}

/// Window width `span * n^(-1/exponent)` used by the endpoint substitution.
pub fn endpoint_window(n: f64, exponent: f64, span: f64) -> f64 {
    span * n.powf(-1.0 / exponent)
}

/// Integrates `f` over `[a, b]` when its mass concentrates at `b`.
///
/// With `cfg.endpoint_transform` set this substitutes `t = b - s * window` and
/// seeds the `s` axis with geometrically spaced panels `2^k`, so peaks of any
/// width down to `window / 1024` are resolved. Without the flag (or with no
/// usable window) it falls back to uniform seeding on `[a, b]`. `breaks` are
/// extra interior kink locations in the original variable.
pub fn integrate_toward_endpoint<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    window: Option<f64>,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    if a >= b {
        return if a == b {
            Ok(Integral::ZERO)
        } else {
            Err(Error::Domain(format!("integration limits reversed: [{a}, {b}]")))
        };
    }
    let interior = |x: &f64| *x > a && *x < b;
    match window.filter(|w| cfg.endpoint_transform && w.is_finite() && *w > 0.0) {
        Some(w) => {
            let s_max = (b - a) / w;
            let mut pts: Vec<f64> = vec![0.0, s_max];
            let mut s = 2f64.powi(-10);
            while s < s_max {
                pts.push(s);
                s *= 2.0;
            }
            pts.extend(breaks.iter().filter(|x| interior(x)).map(|x| (b - x) / w));
            sort_dedup(&mut pts);
            let g = |s: f64| w * f(b - s * w);
            integrate_with_breaks(g, &pts, cfg)
        }
        None => {
            let mut pts: Vec<f64> = (0..=16).map(|k| a + (b - a) * k as f64 / 16.0).collect();
            pts.extend(breaks.iter().copied().filter(interior));
            sort_dedup(&mut pts);
            integrate_with_breaks(f, &pts, cfg)
        }
    }
}

pub fn sort_dedup(pts: &mut Vec<f64>) {
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup_by(|x, y| x == y);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn linear_integrand() {
        let r = integrate(|z| 1.0 - z, 0.0, 1.0, &cfg()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-14);
    }

    #[test]
    fn mass_at_zero_unit_uniform_pair() {
        // n (2t - t^2)^(n-1) (1 - t) with n = 2.
        let r = integrate(|t| 2.0 * (2.0 * t - t * t) * (1.0 - t), 0.0, 1.0, &cfg()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-13);
    }

    #[test]
    fn polynomials_are_exact() {
        for deg in 0..=19 {
            let r = integrate(|x: f64| (deg as f64 + 1.0) * x.powi(deg), 0.0, 1.0, &cfg()).unwrap();
            assert!((r.value - 1.0).abs() < 1e-12, "degree {deg}: {}", r.value);
        }
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        let r = integrate(|x: f64| 0.5 / x.sqrt(), 0.0, 1.0, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn reversed_limits_rejected() {
        assert!(matches!(integrate(|x| x, 1.0, 0.0, &cfg()), Err(Error::Domain(_))));
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let tight = QuadratureConfig { abs_tol: 1e-300, rel_tol: 1e-300, max_subdivisions: 10, ..cfg() };
        match integrate(|x: f64| (50.0 * x).sin().abs(), 0.0, 1.0, &tight) {
            Err(Error::Quadrature { estimate, subdivisions, .. }) => {
                assert!(subdivisions >= 10);
                assert!((estimate - std::f64::consts::FRAC_2_PI).abs() < 0.05);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn kink_break_point() {
        let pts = [0.0, 0.3, 1.0];
        let r = integrate_with_breaks(|x: f64| (x - 0.3).abs(), &pts, &cfg()).unwrap();
        let exact = 0.3 * 0.3 / 2.0 + 0.7 * 0.7 / 2.0;
        assert!((r.value - exact).abs() < 1e-14);
    }

    #[test]
    fn endpoint_transform_normalizes_maximum_law() {
        // n K^(n-1) k with K(t) = t^2 on [0, 1]; total mass 1 - K(0)^n = 1.
        for &n in &[10.0, 100.0, 10_000.0] {
            let f = |t: f64| n * pow_prob(t * t, n - 1.0) * 2.0 * t;
            let w = endpoint_window(n, 1.0, 1.0);
            let r = integrate_toward_endpoint(f, 0.0, 1.0, Some(w), &[], &cfg()).unwrap();
            assert!((r.value - 1.0).abs() < 1e-6, "n={n}: {}", r.value);
        }
    }
}
