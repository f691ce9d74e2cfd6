//! Safeguarded scalar root finding: regula falsi (Illinois variant) on a
//! sign-changing bracket with a bisection fallback.

use crate::error::{PricingError, Result};

/// Stopping rule for [`solve_bracketed`].
#[derive(Debug, Clone, Copy)]
pub struct RootTolerance {
    /// Absolute tolerance on the bracket width.
    pub x_abs: f64,
    /// Relative tolerance on the bracket width.
    pub x_rel: f64,
    /// Stop as soon as `|f(x)| <= f_abs`.
    pub f_abs: f64,
    pub max_iter: usize,
}

impl Default for RootTolerance {
    fn default() -> Self {
        RootTolerance {
            x_abs: 1e-15,
            x_rel: 1e-14,
            f_abs: 0.0,
            max_iter: 300,
        }
    }
}

/// Finds a root of `f` inside `[lo, hi]`. `f(lo)` and `f(hi)` must differ in sign
/// (or one of them must vanish).
pub fn solve_bracketed<F>(mut f: F, lo: f64, hi: f64, tol: RootTolerance) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if !fa.is_finite() || !fb.is_finite() {
        return Err(PricingError::NaNEncountered(format!("root bracket [{a}, {b}]")));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(PricingError::NoRoot(format!(
            "no sign change on [{a}, {b}]: f = ({fa:e}, {fb:e})"
        )));
    }
    // side: -1 if the last update replaced `a`, +1 if it replaced `b`
    let mut side = 0i8;
    for iter in 0..tol.max_iter {
        let width = b - a;
        if width <= tol.x_abs + tol.x_rel * a.abs().max(b.abs()) {
            break;
        }
        // alternate false position with plain bisection so the bracket always shrinks
        let mut x = if iter % 3 == 2 {
            0.5 * (a + b)
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x)?;
        if !fx.is_finite() {
            return Err(PricingError::NaNEncountered(format!("root iterate x = {x}")));
        }
        if fx == 0.0 || fx.abs() <= tol.f_abs {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// Grows a bracket around `start > 0` geometrically (factors `2^±k`, `k <= max_doublings`)
/// until `f` changes sign. Returns `(lo, hi)` with a sign change.
pub fn geometric_bracket<F>(mut f: F, start: f64, max_doublings: u32) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(start > 0.0 && start.is_finite()) {
        return Err(PricingError::NonPositiveInput(format!("bracket start {start}")));
    }
    let f0 = f(start)?;
    if f0 == 0.0 {
        return Ok((start, start));
    }
    let mut lo = start;
    let mut hi = start;
    for _ in 0..max_doublings {
        lo *= 0.5;
        hi *= 2.0;
        let flo = f(lo)?;
        if flo == 0.0 || flo.signum() != f0.signum() {
            return Ok((lo, lo * 2.0));
        }
        let fhi = f(hi)?;
        if fhi == 0.0 || fhi.signum() != f0.signum() {
            return Ok((hi * 0.5, hi));
        }
    }
    Err(PricingError::NoRoot(format!(
        "no sign change within [{start} * 2^-{max_doublings}, {start} * 2^{max_doublings}]"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let r = solve_bracketed(|x| Ok(x * x * x - 2.0), 0.0, 3.0, RootTolerance::default()).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_bracket_without_sign_change() {
        let err = solve_bracketed(|x| Ok(x * x + 1.0), -1.0, 1.0, RootTolerance::default());
        assert!(matches!(err, Err(PricingError::NoRoot(_))));
    }

    #[test]
    fn geometric_bracket_grows_both_ways() {
        let (lo, hi) = geometric_bracket(|x| Ok(x.ln() - 10.0), 1.0, 60).unwrap();
        assert!(lo < 10f64.exp() && hi >= 10f64.exp());
        let (lo, hi) = geometric_bracket(|x| Ok(x - 1e-3), 1.0, 60).unwrap();
        assert!(lo <= 1e-3 && hi > 1e-3);
        assert!(geometric_bracket(|_| Ok(1.0), 1.0, 10).is_err());
    }
}
