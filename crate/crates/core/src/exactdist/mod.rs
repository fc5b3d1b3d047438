//! Finite-sample laws of `M(n)`, `M_u(n)`, their difference and ratio, and
//! the count statistics around `M_u(n)`, for a given cure model and `n`.
//!
//! Every `n`-fold integral is written as `n ∫ K(t)^(n-1) dU(t)` where `dU` is
//! the uncensored part of `dH` and `1 - K(t)` is evaluated directly as a sum
//! of tail masses, so `K^(n-1)` keeps full relative accuracy for `n` in the
//! tens of thousands.

use statrs::function::factorial::ln_binomial;

use crate::distmodel::CureModel;
use crate::error::{Error, Result};
use crate::quadrature::{
    endpoint_window, integrate_toward_endpoint, invert_monotone, pow_one_minus, pow_prob, Integral,
    QuadratureConfig,
};
use crate::special::{binomial_pmf, multinomial_pmf};

/// Sample size from which the endpoint-substituted quadrature is used.
pub const TRANSFORM_MIN_N: u64 = 1000;

/// Smallest admissible `P(M_u(n) > 0)` for the conditional ratio law.
const MIN_DENOMINATOR: f64 = 1e-300;

/// A probability together with the quadrature error estimate behind it.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CdfValue {
    pub value: f64,
    pub error_estimate: f64,
}

impl CdfValue {
    fn exact(value: f64) -> Self {
        Self { value, error_estimate: 0.0 }
    }

    fn from_integral(r: Integral, extra: f64) -> Self {
        Self { value: (r.value + extra).clamp(0.0, 1.0), error_estimate: r.error }
    }
}

/// Statistics whose quantiles can be requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    /// `M(n)`, the largest observed time.
    M,
    /// `M_u(n)`, the largest uncensored time (0 if all are censored).
    Mu,
    /// `M(n) - M_u(n)`.
    Diff,
}

/// A single distributional query; arguments follow the statistic.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactQuery {
    M { x: f64 },
    Mu { t: f64 },
    JointMuM { t: f64, x: f64 },
    JointMuNcGt { t: f64, r: u64 },
    Diff { u: f64 },
    Ratio { v: f64 },
    CountsPmf { t: f64, r: u64, s: u64, k: u64 },
    NcGtGivenNc { t: f64, l: u64, r: u64 },
    AllCensoredObsCdf { t: Vec<f64> },
}

/// Exact laws for one `(model, n)` pair.
#[derive(Debug, Clone)]
pub struct ExactDist {
    model: CureModel,
    n: u64,
    cfg: QuadratureConfig,
    transform_min_n: u64,
}

fn check_arg(name: &str, x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        Err(Error::Domain(format!("{name} must be a nonnegative number, got {x}")))
    } else {
        Ok(())
    }
}

impl ExactDist {
    pub fn new(model: &CureModel, n: u64, cfg: QuadratureConfig) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("sample size n must be at least 1".into()));
        }
        cfg.validate()?;
        Ok(Self { model: model.clone(), n, cfg, transform_min_n: TRANSFORM_MIN_N })
    }

    /// Overrides the sample size from which the endpoint substitution is used.
    pub fn with_transform_threshold(mut self, n_min: u64) -> Self {
        self.transform_min_n = n_min;
        self
    }

    pub fn model(&self) -> &CureModel {
        &self.model
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    fn window(&self) -> Option<f64> {
        if self.n < self.transform_min_n {
            return None;
        }
        let span = self.model.tau_j().min(self.model.j_upper());
        self.model.j_tail_exponent().map(|e| endpoint_window(self.nf(), e, span))
    }

    /// `∫_a^b phi(t) dU(t)` with `dU = Ḡ dF*`.
    fn integrate_unc<F: Fn(f64) -> f64>(&self, phi: F, a: f64, b: f64, breaks: &[f64]) -> Result<Integral> {
        let m = &self.model;
        let lo = a.max(m.lifetime().left_endpoint());
        let hi = b.min(m.j_upper());
        if !(hi > lo) {
            return Ok(Integral::ZERO);
        }
        let mut pts = m.support_breaks();
        pts.extend_from_slice(breaks);
        let window = if hi >= m.j_upper() { self.window() } else { None };
        integrate_toward_endpoint(|t| phi(t) * m.unc_density(t), lo, hi, window, &pts, &self.cfg)
    }

    /// `1 - K(t)` for `K(t) = ∫_t^y F̄* dG + H(t)`, i.e. the probability an
    /// observation is uncensored above `t` or censored above `y >= t`.
    fn escape_prob(&self, t: f64, y: f64) -> f64 {
        let m = &self.model;
        m.cens_mass(y.min(m.h_upper()), m.h_upper()) + m.unc_mass(t, m.j_upper())
    }

    /// Probability that all `n` observations are censored, `(∫ F̄* dG)^n`.
    pub fn all_censored_prob(&self) -> f64 {
        pow_prob(self.model.censored_prob(), self.nf())
    }

    /// `P(M(n) <= x) = H(x)^n`.
    pub fn m_cdf(&self, x: f64) -> Result<CdfValue> {
        check_arg("x", x)?;
        Ok(CdfValue::exact(pow_one_minus(self.model.h_sf(x), self.nf())))
    }

    /// `P(M_u(n) <= t) = J(t)^n`.
    pub fn mu_cdf(&self, t: f64) -> Result<CdfValue> {
        check_arg("t", t)?;
        if t >= self.model.tau_j() {
            return Ok(CdfValue::exact(1.0));
        }
        Ok(CdfValue::exact(pow_one_minus(self.model.j_sf(t), self.nf())))
    }

    /// `P(M_u(n) <= t, M(n) <= x)`.
    pub fn joint_mu_m(&self, t: f64, x: f64) -> Result<CdfValue> {
        check_arg("t", t)?;
        check_arg("x", x)?;
        let n = self.nf();
        let m = &self.model;
        let value = if x <= t {
            // every observation, censored or not, lies below x
            pow_one_minus(m.h_sf(x), n)
        } else if t == 0.0 {
            pow_prob(m.cens_mass(0.0, x), n)
        } else {
            pow_one_minus(self.escape_prob(t, x), n)
        };
        Ok(CdfValue::exact(value))
    }

    /// Integrand-level mass of `{M_u(n) = M(n) > 0}`.
    pub fn diff_atom(&self) -> Result<CdfValue> {
        self.diff_cdf(0.0)
    }

    /// `P(M(n) - M_u(n) <= u)`.
    pub fn diff_cdf(&self, u: f64) -> Result<CdfValue> {
        check_arg("u", u)?;
        let m = &self.model;
        let top = m.h_upper();
        if u >= top {
            return Ok(CdfValue::exact(1.0));
        }
        let n = self.nf();
        let phi = |t: f64| n * pow_one_minus(self.escape_prob(t, t + u), n - 1.0);
        let r = self.integrate_unc(phi, 0.0, m.tau_j(), &[top - u])?;
        let all_censored = pow_prob(m.cens_mass(0.0, u), n);
        Ok(CdfValue::from_integral(r, all_censored))
    }

    /// `n ∫ J^(n-1) dU`, which must equal `P(M_u(n) > 0) = 1 - J(0)^n`.
    pub fn uncensored_max_mass(&self) -> Result<Integral> {
        let n = self.nf();
        let m = &self.model;
        self.integrate_unc(|t| n * pow_one_minus(m.j_sf(t), n - 1.0), 0.0, m.tau_j(), &[])
    }

    /// `P(M_u(n) > 0) = 1 - (∫ F̄* dG)^n`, in closed form.
    pub fn prob_some_uncensored(&self) -> f64 {
        let c0 = self.model.censored_prob();
        if c0 <= 0.0 {
            1.0
        } else {
            -(self.nf() * c0.ln()).exp_m1()
        }
    }

    /// `P(M(n) <= v M_u(n) | M_u(n) > 0)`.
    pub fn ratio_cdf(&self, v: f64) -> Result<CdfValue> {
        check_arg("v", v)?;
        if v < 1.0 {
            return Ok(CdfValue::exact(0.0));
        }
        let denom = self.prob_some_uncensored();
        if !(denom >= MIN_DENOMINATOR) {
            return Err(Error::DegenerateModel(format!(
                "P(M_u(n) > 0) = {denom:e}: uncensored observations are essentially impossible"
            )));
        }
        let m = &self.model;
        let n = self.nf();
        let top = m.h_upper();
        let phi = |t: f64| n * pow_one_minus(self.escape_prob(t, t * v), n - 1.0);
        let r = self.integrate_unc(phi, 0.0, m.tau_j(), &[top / v])?;
        Ok(CdfValue {
            value: (r.value / denom).clamp(0.0, 1.0),
            error_estimate: r.error / denom,
        })
    }

    /// `P(M_u(n) <= t, N_c^>(M_u(n)) = r)`: exactly `r` censored times exceed
    /// the largest uncensored one.
    pub fn joint_mu_ncgt(&self, t: f64, r: u64) -> Result<CdfValue> {
        check_arg("t", t)?;
        let m = &self.model;
        if t > m.tau_h() {
            return Err(Error::Domain(format!("t = {t} exceeds tau_H = {}", m.tau_h())));
        }
        if r >= self.n {
            return Err(Error::Domain(format!("r = {r} must be below n = {}", self.n)));
        }
        let below = (self.n - r - 1) as f64;
        let ln_coef = self.nf().ln() + ln_binomial(self.n - 1, r);
        let top = m.h_upper();
        let phi = |y: f64| {
            let mut log = ln_coef;
            if r > 0 {
                log += r as f64 * m.cens_mass(y, top).ln();
            }
            if below > 0.0 {
                log += below * (-m.h_sf(y)).ln_1p();
            }
            log.exp()
        };
        let r = self.integrate_unc(phi, 0.0, t, &[])?;
        Ok(CdfValue::from_integral(r, 0.0))
    }

    /// Multinomial law of `(N_c^>, N_c^<, N_u^<)` at `M_u(n) = t`.
    pub fn counts_pmf(&self, t: f64, r: u64, s: u64, k: u64) -> Result<f64> {
        if r + s + k != self.n - 1 {
            return Err(Error::Domain(format!(
                "counts must add to n - 1 = {}, got {r} + {s} + {k}",
                self.n - 1
            )));
        }
        let (a, b, c) = self.model.p_functions(t)?;
        Ok(multinomial_pmf(&[r, s, k], &[a, b, c]))
    }

    /// `P(N_c^> = r | M_u(n) = t, N_c = l)`: Binomial(l, pc_plus(t)).
    pub fn ncgt_given_nc_pmf(&self, t: f64, l: u64, r: u64) -> Result<f64> {
        if !(r <= l && l < self.n) {
            return Err(Error::Domain(format!(
                "need r <= l <= n - 1, got r = {r}, l = {l}, n = {}",
                self.n
            )));
        }
        if !(t > 0.0 && t < self.model.tau_h()) {
            return Err(Error::Domain(format!("t = {t} must lie in (0, tau_H)")));
        }
        Ok(binomial_pmf(l, r, self.model.pc_plus(t)?))
    }

    /// Quantile of `M`, `M_u` or `M - M_u` at level `prob`. Atoms at zero
    /// (all censored for `M_u`, `M = M_u` for the difference) return 0.
    pub fn quantile(&self, stat: Statistic, prob: f64) -> Result<f64> {
        if !(prob > 0.0 && prob < 1.0) {
            return Err(Error::Domain(format!("probability level must lie in (0, 1), got {prob}")));
        }
        let m = &self.model;
        let (atom, hi) = match stat {
            Statistic::M => (0.0, m.h_upper()),
            Statistic::Mu => (self.all_censored_prob(), m.tau_j().min(m.j_upper())),
            Statistic::Diff => (self.diff_cdf(0.0)?.value, m.h_upper()),
        };
        if prob <= atom {
            return Ok(0.0);
        }
        let cdf = |x: f64| -> Result<f64> {
            Ok(match stat {
                Statistic::M => self.m_cdf(x)?.value,
                Statistic::Mu => self.mu_cdf(x)?.value,
                Statistic::Diff => self.diff_cdf(x)?.value,
            })
        };
        invert_monotone(cdf, prob, 0.0, hi)
    }

    /// Dispatches an [`ExactQuery`].
    pub fn evaluate(&self, query: &ExactQuery) -> Result<CdfValue> {
        match *query {
            ExactQuery::M { x } => self.m_cdf(x),
            ExactQuery::Mu { t } => self.mu_cdf(t),
            ExactQuery::JointMuM { t, x } => self.joint_mu_m(t, x),
            ExactQuery::JointMuNcGt { t, r } => self.joint_mu_ncgt(t, r),
            ExactQuery::Diff { u } => self.diff_cdf(u),
            ExactQuery::Ratio { v } => self.ratio_cdf(v),
            ExactQuery::CountsPmf { t, r, s, k } => self.counts_pmf(t, r, s, k).map(CdfValue::exact),
            ExactQuery::NcGtGivenNc { t, l, r } => self.ncgt_given_nc_pmf(t, l, r).map(CdfValue::exact),
            ExactQuery::AllCensoredObsCdf { ref t } => {
                if t.len() as u64 != self.n {
                    return Err(Error::Domain(format!(
                        "expected {} censored times, got {}",
                        self.n,
                        t.len()
                    )));
                }
                all_censored_obs_cdf(&self.model, t).map(CdfValue::exact)
            }
        }
    }
}

/// Joint cdf of the `n = t.len()` observed times given that all are censored.
pub fn all_censored_obs_cdf(model: &CureModel, t: &[f64]) -> Result<f64> {
    if t.is_empty() {
        return Err(Error::Domain("need at least one time".into()));
    }
    let c0 = model.censored_prob();
    if !(c0 > 0.0) {
        return Err(Error::DegenerateModel("all-censored event has probability zero".into()));
    }
    let mut value = 1.0;
    for &ti in t {
        check_arg("t", ti)?;
        value *= (model.cens_mass(0.0, ti) / c0).min(1.0);
    }
    Ok(value)
}

#[cfg(test)]
mod tests;
