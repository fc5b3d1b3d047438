//! The `Q_n` test for sufficient follow-up.
//!
//! `Q_n` is the fraction of uncensored times strictly above `2 M_u(n) - M(n)`.
//! Large values indicate that follow-up extends past the lifetimes of the
//! susceptibles. Under a fully specified null model (`tau_G < tau_F`) the
//! exact law of `Q_n` is obtained by integrating the conditional law of the
//! count given `(M_u(n), M(n)) = (t, x)` against the joint law of the two
//! maxima, which has three parts:
//!
//! * an absolutely continuous part on `{0 < t < x}` with density
//!   `n(n-1) dU(t) dC(x) (H(t) + C(t, x))^(n-2)`,
//! * a diagonal part on `{t = x}` with density `n H(t)^(n-1) dU(t)`,
//! * the all-censored atom `(∫ F̄* dG)^n`.
//!
//! Given `t < x`, the `n - 2` observations other than the two maxima are iid
//! on `{T < t} ∪ {censored in (t, x)}`, so `n Q_n = 1 + Binomial(n - 2, r)`
//! with `r = U(max(2t - x, 0), t) / (H(t) + C(t, x))`. On the diagonal and on
//! the all-censored atom `Q_n = 0`.

mod data;

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::sync::Mutex;

use crate::distmodel::CureModel;
use crate::error::{Error, Result};
use crate::exactdist::{CdfValue, TRANSFORM_MIN_N};
use crate::montecarlo::summarize;
use crate::quadrature::{
    endpoint_window, integrate_toward_endpoint, pow_one_minus, pow_prob, Integral, QuadratureConfig,
};
use crate::special::{binomial_cdf, binomial_pmf};

pub use data::{ingest_csv, Dataset};

/// Probability that an observation is uncensored and above `w`,
/// `∫_{max(w, 0)}^{tau_H} Ḡ dF*`.
pub fn pi(model: &CureModel, w: f64) -> Result<f64> {
    if w.is_nan() {
        return Err(Error::Domain("pi needs a numeric argument".into()));
    }
    if w >= model.tau_h() {
        return Ok(0.0);
    }
    Ok(model.unc_mass(w.max(0.0), model.j_upper()))
}

fn check_pair(model: &CureModel, t: f64, x: f64) -> Result<()> {
    if !(t > 0.0 && t <= x && x <= model.tau_h()) {
        return Err(Error::Domain(format!(
            "need 0 < t <= x <= tau_H = {}, got t = {t}, x = {x}",
            model.tau_h()
        )));
    }
    Ok(())
}

/// `Binomial(n, pi(2t - x))` pmf at `j`: the conditional count law of `n Q_n`
/// given `(M_u(n), M(n)) = (t, x)` in its binomial approximation, which
/// treats all `n` observations as free. [`QnNullLaw`] uses the exact
/// conditional law instead.
pub fn qn_conditional_pmf(model: &CureModel, n: u64, t: f64, x: f64, j: u64) -> Result<f64> {
    check_pair(model, t, x)?;
    if j > n {
        return Err(Error::Domain(format!("need 0 <= j <= n = {n}, got {j}")));
    }
    Ok(binomial_pmf(n, j, pi(model, 2.0 * t - x)?))
}

/// `P(n Q_n = j | M_u(n) = t, M(n) = x)` under the model.
pub fn qn_exact_conditional_pmf(model: &CureModel, n: u64, t: f64, x: f64, j: u64) -> Result<f64> {
    check_pair(model, t, x)?;
    if j > n {
        return Err(Error::Domain(format!("need 0 <= j <= n = {n}, got {j}")));
    }
    if t == x || n < 2 {
        return Ok(if j == 0 { 1.0 } else { 0.0 });
    }
    if j == 0 {
        return Ok(0.0);
    }
    Ok(binomial_pmf(n - 2, j - 1, split_ratio(model, t, x)))
}

/// Probability that one of the free observations counts towards `Q_n`,
/// given `(M_u(n), M(n)) = (t, x)` with `t < x`.
fn split_ratio(model: &CureModel, t: f64, x: f64) -> f64 {
    let s = model.h_cdf(t) + model.cens_mass(t, x);
    if s <= 0.0 {
        return 0.0;
    }
    (model.unc_mass((2.0 * t - x).max(0.0), t) / s).clamp(0.0, 1.0)
}

/// Masses of the three parts of the joint law of `(M_u(n), M(n))`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct QnMasses {
    pub continuous: f64,
    pub diagonal: f64,
    pub atom: f64,
    pub error_estimate: f64,
}

impl QnMasses {
    pub fn total(&self) -> f64 {
        self.continuous + self.diagonal + self.atom
    }
}

/// Exact null law of `Q_n` for one `(model, n)` pair, with the cdf values
/// cached by count.
#[derive(Debug)]
pub struct QnNullLaw {
    model: CureModel,
    n: u64,
    cfg: QuadratureConfig,
    cache: Mutex<HashMap<u64, CdfValue>>,
}

impl QnNullLaw {
    pub fn new(model: &CureModel, n: u64, cfg: QuadratureConfig) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("sample size n must be at least 1".into()));
        }
        cfg.validate()?;
        Ok(Self { model: model.clone(), n, cfg, cache: Mutex::new(HashMap::new()) })
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

    fn outer_window(&self) -> Option<f64> {
        if self.n < TRANSFORM_MIN_N {
            return None;
        }
        let m = &self.model;
        let span = m.tau_j().min(m.j_upper());
        m.j_tail_exponent().map(|e| endpoint_window(self.nf(), e, span))
    }

    fn inner_window(&self, t: f64) -> Option<f64> {
        if self.n < TRANSFORM_MIN_N {
            return None;
        }
        let m = &self.model;
        m.h_tail_exponent().map(|e| endpoint_window(self.nf(), e, m.h_upper() - t))
    }

    /// `∫ phi(t) dU(t)` over the support of `M_u(n)`.
    fn integrate_outer<F: Fn(f64) -> f64>(&self, phi: F) -> Result<Integral> {
        let m = &self.model;
        let lo = m.lifetime().left_endpoint().max(0.0);
        let hi = m.tau_j().min(m.j_upper());
        if !(hi > lo) {
            return Ok(Integral::ZERO);
        }
        let breaks = m.support_breaks();
        integrate_toward_endpoint(|t| phi(t) * m.unc_density(t), lo, hi, self.outer_window(), &breaks, &self.cfg)
    }

    /// `∫∫_{t < x} n(n-1) (H(t) + C(t, x))^(n-2) w(t, x) dC(x) dU(t)`.
    fn integrate_off_diagonal<W: Fn(f64, f64) -> f64>(&self, w: W) -> Result<Integral> {
        if self.n < 2 {
            return Ok(Integral::ZERO);
        }
        let m = &self.model;
        let top = m.h_upper();
        let exponent = self.nf() - 2.0;
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let inner_error = Cell::new(0.0f64);
        let inner = |t: f64| -> f64 {
            if failure.borrow().is_some() || t >= top {
                return 0.0;
            }
            let mut breaks = m.support_breaks();
            breaks.push(2.0 * t);
            let f = |x: f64| {
                let escape = m.cens_mass(x.min(top), top) + m.unc_mass(t, m.j_upper());
                pow_one_minus(escape, exponent) * w(t, x) * m.cens_density(x)
            };
            match integrate_toward_endpoint(f, t, top, self.inner_window(t), &breaks, &self.cfg) {
                Ok(r) => {
                    inner_error.set(inner_error.get().max(r.error));
                    r.value
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        };
        let scale = self.nf() * (self.nf() - 1.0);
        let outer = self.integrate_outer(|t| scale * inner(t));
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let outer = outer?;
        Ok(Integral { value: outer.value, error: outer.error + scale * inner_error.get() })
    }

    /// `∫ n H(t)^(n-1) w(t) dU(t)`.
    fn integrate_diagonal<W: Fn(f64) -> f64>(&self, w: W) -> Result<Integral> {
        let n = self.nf();
        let m = &self.model;
        self.integrate_outer(|t| n * pow_one_minus(m.h_sf(t), n - 1.0) * w(t))
    }

    fn atom(&self) -> f64 {
        pow_prob(self.model.censored_prob(), self.nf())
    }

    /// The three parts of the joint law of `(M_u(n), M(n))`, each computed
    /// by its own integral; they must add to 1.
    pub fn masses(&self) -> Result<QnMasses> {
        let cont = self.integrate_off_diagonal(|_, _| 1.0)?;
        let diag = self.integrate_diagonal(|_| 1.0)?;
        Ok(QnMasses {
            continuous: cont.value,
            diagonal: diag.value,
            atom: self.atom(),
            error_estimate: cont.error + diag.error,
        })
    }

    /// `P(n Q_n <= k)`.
    pub fn cdf_count(&self, k: i64) -> Result<CdfValue> {
        if k < 0 {
            return Ok(CdfValue { value: 0.0, error_estimate: 0.0 });
        }
        let k = k as u64;
        if k >= self.n {
            return Ok(CdfValue { value: 1.0, error_estimate: 0.0 });
        }
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(&k) {
            return Ok(*v);
        }
        let zero_part = self.integrate_diagonal(|_| 1.0)?;
        let mut value = zero_part.value + self.atom();
        let mut error = zero_part.error;
        if k >= 1 {
            let n2 = self.n - 2;
            let m = &self.model;
            let cont = self.integrate_off_diagonal(|t, x| binomial_cdf(n2, k as i64 - 1, split_ratio(m, t, x)))?;
            value += cont.value;
            error += cont.error;
        }
        let v = CdfValue { value: value.clamp(0.0, 1.0), error_estimate: error };
        self.cache.lock().expect("cache poisoned").insert(k, v);
        Ok(v)
    }

    /// `P(Q_n <= q)`.
    pub fn cdf(&self, q: f64) -> Result<CdfValue> {
        if q.is_nan() {
            return Err(Error::Domain("q must be a number".into()));
        }
        self.cdf_count(count_floor(q, self.n))
    }

    /// Smallest count `k` with `P(n Q_n <= k) >= 1 - alpha`.
    pub fn critical_count(&self, alpha: f64) -> Result<u64> {
        check_alpha(alpha)?;
        let (mut lo, mut hi) = (0u64, self.n);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.cdf_count(mid as i64)?.value >= 1.0 - alpha {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(lo)
    }

    /// Smallest grid value `q = k / n` with `P(Q_n <= q) >= 1 - alpha`.
    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        Ok(self.critical_count(alpha)? as f64 / self.nf())
    }

    /// `P(n Q_n >= count)` under the null.
    pub fn upper_tail(&self, count: u64) -> Result<f64> {
        Ok((1.0 - self.cdf_count(count as i64 - 1)?.value).clamp(0.0, 1.0))
    }

    /// Test decision for an observed `Q_n` on a sample of this law's size.
    pub fn decide(&self, q_observed: f64, alpha: f64) -> Result<FollowupResult> {
        let count = count_round(q_observed, self.n)?;
        let critical = self.critical_count(alpha)?;
        let decision = if count > critical { Decision::RejectH0 } else { Decision::FailToReject };
        Ok(FollowupResult {
            n: self.n,
            q_observed,
            critical_value: critical as f64 / self.nf(),
            p_value_bound: self.upper_tail(count)?,
            alpha,
            decision,
            null_model: self.model.to_string(),
        })
    }
}

/// `floor(n q)` with a guard against `q = j / n` rounding below `j`.
fn count_floor(q: f64, n: u64) -> i64 {
    (q * n as f64 + 1e-9).floor() as i64
}

fn count_round(q: f64, n: u64) -> Result<u64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("Q_n must lie in [0, 1], got {q}")));
    }
    Ok(((q * n as f64).round() as u64).min(n))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 0.5], got {alpha}")));
    }
    Ok(())
}

/// `P(Q_n <= q)` under `model` for samples of size `n`.
pub fn qn_null_cdf(model: &CureModel, n: u64, q: f64) -> Result<CdfValue> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("q must lie in [0, 1], got {q}")));
    }
    QnNullLaw::new(model, n, QuadratureConfig::default())?.cdf(q)
}

/// `P(Q_n <= q)` computed with the binomial approximation
/// [`qn_conditional_pmf`] in place of the exact conditional count law, for
/// comparison with [`qn_null_cdf`].
pub fn qn_null_cdf_binomial_form(model: &CureModel, n: u64, q: f64) -> Result<CdfValue> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("q must lie in [0, 1], got {q}")));
    }
    let law = QnNullLaw::new(model, n, QuadratureConfig::default())?;
    let k = count_floor(q, n);
    let weight = |w: f64| binomial_cdf(n, k, pi(model, w).unwrap_or(0.0));
    let cont = law.integrate_off_diagonal(|t, x| weight(2.0 * t - x))?;
    let diag = law.integrate_diagonal(weight)?;
    Ok(CdfValue {
        value: (cont.value + diag.value + law.atom()).clamp(0.0, 1.0),
        error_estimate: cont.error + diag.error,
    })
}

/// Outcome of the test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Decision {
    /// Follow-up is judged sufficient.
    #[serde(rename = "reject-H0")]
    RejectH0,
    #[serde(rename = "fail-to-reject")]
    FailToReject,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::RejectH0 => "reject-H0",
            Decision::FailToReject => "fail-to-reject",
        }
    }
}

/// Result of the sufficient-follow-up test.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FollowupResult {
    pub n: u64,
    pub q_observed: f64,
    pub critical_value: f64,
    /// `P(Q_n >= q_observed)` under the null.
    pub p_value_bound: f64,
    pub alpha: f64,
    pub decision: Decision,
    pub null_model: String,
}

impl FollowupResult {
    /// `key=value` lines for scripts.
    pub fn key_value_lines(&self) -> String {
        format!(
            "q_observed={}\ncritical_value={}\np_value_bound={}\ndecision={}\n",
            self.q_observed,
            self.critical_value,
            self.p_value_bound,
            self.decision.as_str()
        )
    }
}

impl std::fmt::Display for FollowupResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Sufficient follow-up test (Q_n)")?;
        writeln!(f, "  null model:      {}", self.null_model)?;
        writeln!(f, "  n:               {}", self.n)?;
        writeln!(f, "  alpha:           {}", self.alpha)?;
        writeln!(f, "  Q_n observed:    {:.6}", self.q_observed)?;
        writeln!(f, "  critical value:  {:.6}", self.critical_value)?;
        writeln!(f, "  p-value bound:   {:.6}", self.p_value_bound)?;
        write!(f, "  decision:        {}", self.decision.as_str())
    }
}

/// Tests `H0: tau_G < tau_F` (insufficient follow-up) against sufficient
/// follow-up, rejecting when the observed `Q_n` exceeds the `1 - alpha`
/// quantile of its law under `null_model`.
pub fn test_sufficient_followup(data: &Dataset, null_model: &CureModel, alpha: f64) -> Result<FollowupResult> {
    let e = null_model.endpoints();
    if !(e.tau_g < e.tau_f) {
        return Err(Error::Misuse(format!(
            "the null model must have tau_G < tau_F (insufficient follow-up), got tau_G = {}, tau_F = {}",
            e.tau_g, e.tau_f
        )));
    }
    check_alpha(alpha)?;
    let summary = summarize(&data.records)?;
    let law = QnNullLaw::new(null_model, data.records.len() as u64, QuadratureConfig::default())?;
    law.decide(summary.q_n, alpha)
}
