use crate::error::{Error, Result};

/// Slack allowed above 1 before a "probability" is treated as a broken cdf.
const PROB_SLACK: f64 = 1e-12;

/// `base^exponent` for a probability `base`, evaluated as
/// `exp(exponent * ln(base))` with `base = 0` handled exactly.
pub fn log_pow_integrand_guard(base: f64, exponent: u64) -> Result<f64> {
    if !(0.0..=1.0 + PROB_SLACK).contains(&base) {
        return Err(Error::Domain(format!(
            "probability power base {base} outside [0, 1]"
        )));
    }
    Ok(pow_prob(base, exponent as f64))
}

/// Unchecked core of [`log_pow_integrand_guard`]; clamps `base` into `[0, 1]`.
#[inline]
pub(crate) fn pow_prob(base: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        return 1.0;
    }
    if base <= 0.0 {
        return 0.0;
    }
    if base >= 1.0 {
        return 1.0;
    }
    (exponent * base.ln()).exp()
}

/// `(1 - complement)^exponent` without forming `1 - complement`.
#[inline]
pub(crate) fn pow_one_minus(complement: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        return 1.0;
    }
    if complement <= 0.0 {
        return 1.0;
    }
    if complement >= 1.0 {
        return 0.0;
    }
    (exponent * (-complement).ln_1p()).exp()
}
