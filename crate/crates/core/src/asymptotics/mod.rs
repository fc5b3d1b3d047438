//! Weibull-type limit laws of `M(n)` and `M_u(n)` near the right endpoints.
//!
//! Three regimes are covered, keyed on the endpoints `tau_F` (lifetimes) and
//! `tau_G` (censoring), with `Ḡ(tau_G - z) ~ a_G z^gamma` and
//! `F̄(tau_F - z) ~ a_F z^beta`:
//!
//! * Case 1, `tau_F < tau_G < ∞`, `p < 1`: `a_n (tau_G - M(n))` and
//!   `b_n (tau_F - M_u(n))` are asymptotically independent.
//! * Case 2, `tau_F < tau_G < ∞`, `p = 1`, balanced tails: both maxima sit
//!   at `tau_F` on the same scale `a_n` and coincide in the limit.
//! * Case 3, `tau_G < tau_F`: `a_n (tau_G - M(n))` and
//!   `b_n (tau_G - M_u(n))` are asymptotically independent; the second law
//!   also describes `b_n (M(n) - M_u(n))` since `b_n / a_n -> 0`.

use crate::distmodel::{CureModel, DistributionSpec};
use crate::error::{Error, Result};
use crate::quadrature::invert_monotone;

/// Points at which the Case 2 tail ratio is inspected.
const BALANCE_POINTS: [f64; 3] = [1e-2, 1e-3, 1e-4];
/// Allowed relative deviation of the Case 2 tail ratio from 1.
const BALANCE_TOL: f64 = 0.01;
/// Lower end of the `ln z` search range when inverting tails.
const LN_Z_MIN: f64 = -460.0;

/// Regime of the model and the constants its limit laws need.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "case")]
pub enum LimitCase {
    Case1 { gamma: f64, beta: f64, a_g: f64, a_f: f64, p: f64, g_bar_at_tau_f: f64 },
    Case2 { beta: f64, a: f64, g_bar_at_tau_f: f64 },
    Case3 { gamma: f64, a_g: f64, p: f64, f_at_tau_g: f64, f_density_at_tau_g: f64 },
    Unsupported { reason: String },
}

/// Which limit law to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    /// Law of the scaled `M(n)` (argument `u`).
    M,
    /// Law of the scaled `M_u(n)` (argument `v`).
    Mu,
    /// Joint law at `(u, v)`.
    Joint,
}

impl LimitCase {
    pub fn name(&self) -> &'static str {
        match self {
            LimitCase::Case1 { .. } => "Case1",
            LimitCase::Case2 { .. } => "Case2",
            LimitCase::Case3 { .. } => "Case3",
            LimitCase::Unsupported { .. } => "Unsupported",
        }
    }
}

fn unsupported(reason: impl Into<String>) -> LimitCase {
    LimitCase::Unsupported { reason: reason.into() }
}

/// Determines the limit regime of `model`.
pub fn classify(model: &CureModel) -> LimitCase {
    let (f, g, p) = (model.lifetime(), model.censoring(), model.p());
    let e = model.endpoints();
    let (tau_f, tau_g) = (e.tau_f, e.tau_g);
    if !tau_g.is_finite() {
        return unsupported("censoring law has an unbounded support");
    }
    let Some(gt) = g.tail_power() else {
        return unsupported("censoring tail is not of power type");
    };
    if tau_f < tau_g {
        let Some(ft) = f.tail_power() else {
            return unsupported("lifetime tail is not of power type");
        };
        let g_bar_at_tau_f = g.sf(tau_f);
        if p < 1.0 {
            return LimitCase::Case1 {
                gamma: gt.exponent,
                beta: ft.exponent,
                a_g: gt.coef,
                a_f: ft.coef,
                p,
                g_bar_at_tau_f,
            };
        }
        let balanced = BALANCE_POINTS.iter().all(|&z| {
            let ratio = f.tail_below_endpoint(z).unwrap_or(0.0) / g.tail_below_endpoint(z).unwrap_or(0.0);
            (ratio - 1.0).abs() <= BALANCE_TOL
        });
        if !balanced {
            return unsupported("p = 1 but the lifetime and censoring tails are not balanced");
        }
        return LimitCase::Case2 { beta: ft.exponent, a: ft.coef, g_bar_at_tau_f };
    }
    if tau_g < tau_f {
        let density = f.pdf(tau_g);
        if !(density > 0.0 && density.is_finite()) {
            return unsupported("lifetime density vanishes at the censoring endpoint");
        }
        return LimitCase::Case3 {
            gamma: gt.exponent,
            a_g: gt.coef,
            p,
            f_at_tau_g: f.cdf(tau_g),
            f_density_at_tau_g: density,
        };
    }
    unsupported("tau_F = tau_G is a boundary case without a limit law here")
}

/// Solves `weight(z) * tail(z) = 1/n` for `z` in log space, where `tail` is
/// the survivor function of `d` just below its endpoint and `weight(z)` is
/// `1` (`with_z = false`) or `z` (`with_z = true`).
fn solve_tail(d: &DistributionSpec, n: f64, with_z: bool) -> Result<f64> {
    let span = d.right_endpoint() - d.left_endpoint();
    let ln_tail = |s: f64| -> Result<f64> {
        let z = s.exp();
        let t = d.tail_below_endpoint(z).ok_or_else(|| {
            Error::Domain("norming needs a finite right endpoint".into())
        })?;
        Ok(t.ln() + if with_z { s } else { 0.0 })
    };
    let s = invert_monotone(ln_tail, -n.ln(), LN_Z_MIN, span.ln())?;
    Ok(s.exp())
}

/// Norming constants `(a_n, b_n)` for `case`.
///
/// `a_n` solves `n Ḡ(tau_G - 1/a_n) = 1`. In Case 1 `b_n` solves
/// `n F̄(tau_F - 1/b_n) = 1`; in Case 2 `b_n = a_n`; in Case 3 `b_n` solves
/// `b_n^(-1) Ḡ(tau_G - 1/b_n) = 1/n`.
pub fn norming(model: &CureModel, case: &LimitCase, n: f64) -> Result<(f64, f64)> {
    if !(n >= 2.0) {
        return Err(Error::InvalidParameter(format!("norming needs n >= 2, got {n}")));
    }
    if let LimitCase::Unsupported { reason } = case {
        return Err(Error::UnsupportedCase(reason.clone()));
    }
    let g = model.censoring();
    let a_n = match *g {
        DistributionSpec::Uniform { a, b } => n / (b - a),
        _ => 1.0 / solve_tail(g, n, false)?,
    };
    let b_n = match case {
        LimitCase::Case1 { .. } => 1.0 / solve_tail(model.lifetime(), n, false)?,
        LimitCase::Case2 { .. } => a_n,
        LimitCase::Case3 { .. } => match *g {
            DistributionSpec::Uniform { a, b } => (n / (b - a)).sqrt(),
            _ => 1.0 / solve_tail(g, n, true)?,
        },
        LimitCase::Unsupported { .. } => unreachable!("rejected above"),
    };
    Ok((a_n, b_n))
}

/// Rates `(c_M, e_M, c_Mu, e_Mu)` of the marginal laws
/// `1 - exp(-c x^e)`.
fn rates(case: &LimitCase) -> Result<(f64, f64, f64, f64)> {
    match *case {
        LimitCase::Case1 { gamma, beta, p, g_bar_at_tau_f, .. } => {
            Ok((1.0 - p, gamma, p * g_bar_at_tau_f, beta))
        }
        LimitCase::Case2 { beta, g_bar_at_tau_f, .. } => {
            Ok((g_bar_at_tau_f, beta, g_bar_at_tau_f, beta))
        }
        LimitCase::Case3 { gamma, p, f_at_tau_g, f_density_at_tau_g, .. } => Ok((
            1.0 - p * f_at_tau_g,
            gamma,
            p * f_density_at_tau_g / (1.0 + gamma),
            1.0 + gamma,
        )),
        LimitCase::Unsupported { ref reason } => Err(Error::UnsupportedCase(reason.clone())),
    }
}

fn weibull_cdf(rate: f64, exponent: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-rate * x.powf(exponent)).exp_m1()
    }
}

/// Limit cdf at `u` (scaled `M`) and/or `v` (scaled `M_u`).
pub fn limit_cdf(case: &LimitCase, which: Which, u: f64, v: f64) -> Result<f64> {
    let (cm, em, cu, eu) = rates(case)?;
    Ok(match which {
        Which::M => weibull_cdf(cm, em, u),
        Which::Mu => weibull_cdf(cu, eu, v),
        Which::Joint => match case {
            // both maxima coincide on the a_n scale
            LimitCase::Case2 { .. } => weibull_cdf(cm, em, u.min(v)),
            _ => weibull_cdf(cm, em, u) * weibull_cdf(cu, eu, v),
        },
    })
}

/// Closed-form inverse of a marginal limit cdf.
pub fn limit_quantile(case: &LimitCase, which: Which, prob: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&prob) {
        return Err(Error::Domain(format!("probability level must lie in [0, 1), got {prob}")));
    }
    let (cm, em, cu, eu) = rates(case)?;
    let (rate, exponent) = match which {
        Which::M => (cm, em),
        Which::Mu => (cu, eu),
        Which::Joint => {
            return Err(Error::Misuse("quantiles are defined for the marginal laws only".into()));
        }
    };
    Ok((-(-prob).ln_1p() / rate).powf(1.0 / exponent))
}

/// Quantile of the limit law of `b_n (M(n) - M_u(n))`, defined through the
/// `M_u` marginal; only meaningful in Case 3.
pub fn diff_limit_quantile(case: &LimitCase, prob: f64) -> Result<f64> {
    match case {
        LimitCase::Case3 { .. } => limit_quantile(case, Which::Mu, prob),
        other => Err(Error::UnsupportedCase(format!(
            "the scaled difference has a limit law in Case3 only, model is {}",
            other.name()
        ))),
    }
}
