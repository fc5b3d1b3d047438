use std::fmt;

use crate::error::{Error, Result};

/// `ln(1/ε)` with `ε ≈ 3e-20`: survivor mass beyond the effective upper
/// limit of an unbounded family.
const NEGLIGIBLE_TAIL_LOG: f64 = 45.0;

/// Parametric continuous lifetime or censoring law on `[0, ∞)`.
///
/// `EndpointPower` has cdf `1 - ((tau - x)/tau)^beta` on `[0, tau]`, so its
/// tail below the endpoint is `(z/tau)^beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    TruncatedExponential { rate: f64, tau: f64 },
    EndpointPower { tau: f64, beta: f64 },
}

/// Right-tail behaviour `F̄(τ - z) ≈ coef · z^exponent` as `z ↓ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPower {
    pub coef: f64,
    pub exponent: f64,
}

use DistributionSpec::*;

impl DistributionSpec {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let d = Uniform { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        let d = Exponential { rate };
        d.validate()?;
        Ok(d)
    }

    pub fn truncated_exponential(rate: f64, tau: f64) -> Result<Self> {
        let d = TruncatedExponential { rate, tau };
        d.validate()?;
        Ok(d)
    }

    pub fn endpoint_power(tau: f64, beta: f64) -> Result<Self> {
        let d = EndpointPower { tau, beta };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Uniform { a, b } => a.is_finite() && b.is_finite() && 0.0 <= a && a < b,
            Exponential { rate } => rate.is_finite() && rate > 0.0,
            TruncatedExponential { rate, tau } => {
                rate.is_finite() && rate > 0.0 && tau.is_finite() && tau > 0.0
            }
            EndpointPower { tau, beta } => {
                tau.is_finite() && tau > 0.0 && beta.is_finite() && beta > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid distribution parameters: {self}")))
        }
    }

    /// Lower end of the support.
    pub fn left_endpoint(&self) -> f64 {
        match *self {
            Uniform { a, .. } => a,
            _ => 0.0,
        }
    }

    /// Right end of the support, `∞` for the exponential.
    pub fn right_endpoint(&self) -> f64 {
        match *self {
            Uniform { b, .. } => b,
            Exponential { .. } => f64::INFINITY,
            TruncatedExponential { tau, .. } | EndpointPower { tau, .. } => tau,
        }
    }

    /// Finite point beyond which the remaining mass is below `3e-20`.
    pub fn effective_upper(&self) -> f64 {
        match *self {
            Exponential { rate } => NEGLIGIBLE_TAIL_LOG / rate,
            _ => self.right_endpoint(),
        }
    }

    fn trunc_norm(rate: f64, tau: f64) -> f64 {
        -(-rate * tau).exp_m1()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.left_endpoint() {
            return 0.0;
        }
        if x >= self.right_endpoint() {
            return 1.0;
        }
        match *self {
            Uniform { a, b } => (x - a) / (b - a),
            Exponential { rate } => -(-rate * x).exp_m1(),
            TruncatedExponential { rate, tau } => {
                -(-rate * x).exp_m1() / Self::trunc_norm(rate, tau)
            }
            EndpointPower { tau, beta } => -(beta * (-x / tau).ln_1p()).exp_m1(),
        }
    }

    /// Survivor function `1 - cdf(x)`, evaluated without cancellation.
    pub fn sf(&self, x: f64) -> f64 {
        if x <= self.left_endpoint() {
            return 1.0;
        }
        if x >= self.right_endpoint() {
            return 0.0;
        }
        match *self {
            Uniform { a, b } => (b - x) / (b - a),
            Exponential { rate } => (-rate * x).exp(),
            TruncatedExponential { rate, tau } => {
                (-rate * x).exp() * -(-rate * (tau - x)).exp_m1() / Self::trunc_norm(rate, tau)
            }
            EndpointPower { tau, beta } => ((tau - x) / tau).powf(beta),
        }
    }

    /// Density; zero outside the open support, so a singular endpoint never
    /// produces an infinite value.
    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.left_endpoint() || x >= self.right_endpoint() {
            return 0.0;
        }
        match *self {
            Uniform { a, b } => 1.0 / (b - a),
            Exponential { rate } => rate * (-rate * x).exp(),
            TruncatedExponential { rate, tau } => {
                rate * (-rate * x).exp() / Self::trunc_norm(rate, tau)
            }
            EndpointPower { tau, beta } => beta / tau * ((tau - x) / tau).powf(beta - 1.0),
        }
    }

    /// Inverse cdf on `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match *self {
            Uniform { a, b } => a + u * (b - a),
            Exponential { rate } => {
                if u >= 1.0 { f64::INFINITY } else { -(-u).ln_1p() / rate }
            }
            TruncatedExponential { rate, tau } => {
                if u >= 1.0 {
                    tau
                } else {
                    (-(-u * Self::trunc_norm(rate, tau)).ln_1p() / rate).min(tau)
                }
            }
            EndpointPower { tau, beta } => {
                if u >= 1.0 { tau } else { -tau * ((-u).ln_1p() / beta).exp_m1() }
            }
        }
    }

    /// `∫_0^x cdf(z) dz`, in closed form.
    pub fn cdf_integral(&self, x: f64) -> f64 {
        if x <= self.left_endpoint() {
            return 0.0;
        }
        match *self {
            Uniform { a, b } => {
                if x < b {
                    (x - a) * (x - a) / (2.0 * (b - a))
                } else {
                    0.5 * (b - a) + (x - b)
                }
            }
            Exponential { rate } => x + (-rate * x).exp_m1() / rate,
            TruncatedExponential { rate, tau } => {
                let xx = x.min(tau);
                let inner = (xx + (-rate * xx).exp_m1() / rate) / Self::trunc_norm(rate, tau);
                inner + (x - xx)
            }
            EndpointPower { tau, beta } => {
                if x < tau {
                    x - tau / (beta + 1.0) * (1.0 - ((tau - x) / tau).powf(beta + 1.0))
                } else {
                    x - tau / (beta + 1.0)
                }
            }
        }
    }

    /// `sf(τ - z)` for `0 ≤ z`, computed from `z` directly; `None` when the
    /// support is unbounded.
    pub fn tail_below_endpoint(&self, z: f64) -> Option<f64> {
        let z = z.max(0.0);
        Some(match *self {
            Uniform { a, b } => (z / (b - a)).min(1.0),
            Exponential { .. } => return None,
            TruncatedExponential { rate, tau } => {
                if z >= tau {
                    1.0
                } else {
                    (-rate * tau).exp() * (rate * z).exp_m1() / Self::trunc_norm(rate, tau)
                }
            }
            EndpointPower { tau, beta } => (z / tau).min(1.0).powf(beta),
        })
    }

    /// Power-law constants of the tail at a finite right endpoint.
    pub fn tail_power(&self) -> Option<TailPower> {
        match *self {
            Uniform { a, b } => Some(TailPower { coef: 1.0 / (b - a), exponent: 1.0 }),
            Exponential { .. } => None,
            TruncatedExponential { rate, tau } => Some(TailPower {
                coef: rate * (-rate * tau).exp() / Self::trunc_norm(rate, tau),
                exponent: 1.0,
            }),
            EndpointPower { tau, beta } => Some(TailPower { coef: tau.powf(-beta), exponent: beta }),
        }
    }

    /// Family name as used in model files.
    pub fn family_name(&self) -> &'static str {
        match self {
            Uniform { .. } => "uniform",
            Exponential { .. } => "exponential",
            TruncatedExponential { .. } => "truncated_exponential",
            EndpointPower { .. } => "endpoint_power",
        }
    }

    /// Parameters in model-file order.
    pub fn params(&self) -> Vec<f64> {
        match *self {
            Uniform { a, b } => vec![a, b],
            Exponential { rate } => vec![rate],
            TruncatedExponential { rate, tau } => vec![rate, tau],
            EndpointPower { tau, beta } => vec![tau, beta],
        }
    }

    /// Inverse of [`family_name`](Self::family_name) plus [`params`](Self::params).
    pub fn from_family(name: &str, params: &[f64]) -> Result<Self> {
        let want = |k: usize| -> Result<()> {
            if params.len() == k {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "family {name} takes {k} parameters, got {}",
                    params.len()
                )))
            }
        };
        match name {
            "uniform" => {
                want(2)?;
                Self::uniform(params[0], params[1])
            }
            "exponential" => {
                want(1)?;
                Self::exponential(params[0])
            }
            "truncated_exponential" | "truncexp" => {
                want(2)?;
                Self::truncated_exponential(params[0], params[1])
            }
            "endpoint_power" => {
                want(2)?;
                Self::endpoint_power(params[0], params[1])
            }
            other => Err(Error::Config(format!("unknown distribution family '{other}'"))),
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Uniform { a, b } => write!(f, "U[{a}, {b}]"),
            Exponential { rate } => write!(f, "Exp({rate})"),
            TruncatedExponential { rate, tau } => write!(f, "TruncExp({rate}, {tau})"),
            EndpointPower { tau, beta } => write!(f, "EndpointPower({tau}, {beta})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_with_breaks, sort_dedup, QuadratureConfig};

    fn families() -> Vec<DistributionSpec> {
        vec![
            DistributionSpec::uniform(0.0, 1.0).unwrap(),
            DistributionSpec::uniform(1.0, 2.5).unwrap(),
            DistributionSpec::exponential(1.0).unwrap(),
            DistributionSpec::exponential(3.0).unwrap(),
            DistributionSpec::truncated_exponential(1.0, 4.61).unwrap(),
            DistributionSpec::truncated_exponential(0.5, 2.0).unwrap(),
            DistributionSpec::endpoint_power(1.0, 2.0).unwrap(),
            DistributionSpec::endpoint_power(3.0, 0.5).unwrap(),
            DistributionSpec::endpoint_power(2.0, 1.0).unwrap(),
        ]
    }

    #[test]
    fn quantile_inverts_cdf() {
        for d in families() {
            let lo = d.left_endpoint();
            let hi = d.quantile(0.9999);
            for k in 1..=100 {
                let x = lo + (hi - lo) * k as f64 / 101.0;
                let back = d.quantile(d.cdf(x));
                assert!((back - x).abs() < 1e-10 * x.max(1.0), "{d}: {x} -> {back}");
            }
        }
    }

    #[test]
    fn endpoints_and_continuity() {
        for d in families() {
            assert_eq!(d.cdf(0.0), 0.0, "{d}");
            if d.right_endpoint().is_finite() {
                assert_eq!(d.cdf(d.right_endpoint()), 1.0);
                assert!(d.cdf(d.right_endpoint() - 1e-12) > 1.0 - 1e-3);
            }
        }
    }

    #[test]
    fn density_integrates_to_cdf() {
        let cfg = QuadratureConfig::default();
        for d in families() {
            let lo = d.left_endpoint();
            for &u in &[0.1, 0.5, 0.9, 0.999] {
                let x = d.quantile(u);
                let r = integrate(|z| d.pdf(z), lo, x, &cfg).unwrap();
                assert!((r.value - u).abs() < 1e-8, "{d}: {}", r.value);
            }
            if d.pdf(d.right_endpoint()).is_finite() {
                let r = integrate(|z| d.pdf(z), lo, d.effective_upper(), &cfg).unwrap();
                assert!((r.value - 1.0).abs() < 1e-8, "{d}: {}", r.value);
            }
        }
    }

    #[test]
    fn cdf_integral_matches_quadrature() {
        let cfg = QuadratureConfig::default();
        for d in families() {
            for &x in &[0.3, 1.0, 1.7, 2.2, 5.0] {
                let mut pts = vec![0.0, x];
                pts.extend([d.left_endpoint(), d.right_endpoint()].into_iter().filter(|b| *b > 0.0 && *b < x));
                sort_dedup(&mut pts);
                let want = integrate_with_breaks(|z| d.cdf(z), &pts, &cfg).unwrap().value;
                assert!((d.cdf_integral(x) - want).abs() < 1e-10, "{d} at {x}");
            }
        }
    }

    #[test]
    fn tail_below_endpoint_agrees_with_sf() {
        for d in families() {
            let Some(tp) = d.tail_power() else {
                assert!(d.tail_below_endpoint(0.1).is_none());
                continue;
            };
            let tau = d.right_endpoint();
            for &z in &[0.5, 0.1, 0.01] {
                let direct = d.sf(tau - z);
                let t = d.tail_below_endpoint(z).unwrap();
                assert!((direct - t).abs() < 1e-12, "{d}");
            }
            let z = 1e-7;
            let ratio = d.tail_below_endpoint(z).unwrap() / (tp.coef * z.powf(tp.exponent));
            assert!((ratio - 1.0).abs() < 1e-5, "{d}: {ratio}");
        }
    }

    #[test]
    fn family_round_trip() {
        for d in families() {
            assert_eq!(DistributionSpec::from_family(d.family_name(), &d.params()).unwrap(), d);
        }
        assert!(DistributionSpec::from_family("weibull", &[1.0]).is_err());
        assert!(DistributionSpec::from_family("uniform", &[1.0]).is_err());
        assert!(DistributionSpec::uniform(1.0, 1.0).is_err());
        assert!(DistributionSpec::exponential(-1.0).is_err());
    }
}
