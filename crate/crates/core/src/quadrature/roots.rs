use crate::error::{Error, Result};

/// Target accuracy on `|F(x) - target|`.
pub const INVERT_VALUE_TOL: f64 = 1e-7;
/// Final bracket width relative to the initial one.
pub const INVERT_WIDTH_REL_TOL: f64 = 1e-6;

const BRACKET_SLACK: f64 = 1e-12;
const MAX_ITER: usize = 200;

/// Solves `F(x) = target` for a nondecreasing `F` on `[lo, hi]` by bisection,
/// finishing with one secant (regula falsi) step inside the final bracket.
///
/// `F` may fail (it usually wraps a quadrature); failures propagate.
pub fn invert_monotone<F>(mut f: F, target: f64, lo: f64, hi: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo <= hi) {
        return Err(Error::Domain(format!("empty bracket [{lo}, {hi}]")));
    }
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;
    if target < f_lo - BRACKET_SLACK || target > f_hi + BRACKET_SLACK {
        return Err(Error::Bracket { target, lo, hi, f_lo, f_hi });
    }
    if (f_lo - target).abs() <= BRACKET_SLACK {
        return Ok(lo);
    }
    let width_tol = INVERT_WIDTH_REL_TOL * (hi - lo);
    let (mut a, mut b) = (lo, hi);
    for _ in 0..MAX_ITER {
        let width_ok = b - a <= width_tol;
        let value_ok = (f_hi - target).abs() <= INVERT_VALUE_TOL
            || (f_lo - target).abs() <= INVERT_VALUE_TOL;
        if width_ok && value_ok {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid)?;
        if fm < target {
            a = mid;
            f_lo = fm;
        } else {
            b = mid;
            f_hi = fm;
        }
    }

    let mut best = if (f_hi - target).abs() <= (target - f_lo).abs() {
        (b, f_hi)
    } else {
        (a, f_lo)
    };
    if f_hi > f_lo {
        let x = a + (target - f_lo) * (b - a) / (f_hi - f_lo);
        if x > a && x < b {
            let fx = f(x)?;
            if (fx - target).abs() < (best.1 - target).abs() {
                best = (x, fx);
            }
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let x = invert_monotone(Ok, 0.95, 0.0, 1.0).unwrap();
        assert!((x - 0.95).abs() < 1e-9);
    }

    #[test]
    fn square() {
        let x = invert_monotone(|x| Ok(x * x), 0.25, 0.0, 1.0).unwrap();
        assert!((x - 0.5).abs() < 1e-7);
    }

    #[test]
    fn out_of_bracket() {
        let r = invert_monotone(Ok, 1.5, 0.0, 1.0);
        assert!(matches!(r, Err(Error::Bracket { .. })));
    }

    #[test]
    fn target_at_left_end() {
        assert_eq!(invert_monotone(|x| Ok(x * x), 0.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn jump_returns_location() {
        let x = invert_monotone(|x| Ok(if x < 0.3 { 0.0 } else { 1.0 }), 0.5, 0.0, 1.0).unwrap();
        assert!((x - 0.3).abs() < 2e-6);
    }

    proptest::proptest! {
        #[test]
        fn cubic_inverse(t in 0.0f64..1.0) {
            let x = invert_monotone(|x| Ok(x * x * x), t, 0.0, 1.0).unwrap();
            proptest::prop_assert!((x * x * x - t).abs() <= INVERT_VALUE_TOL);
        }
    }
}
