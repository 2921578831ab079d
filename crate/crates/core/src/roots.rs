//! Scalar root bracketing shared by the transcendental solvers.

use crate::error::{Result, SpectraError};

/// Bisect `f` on `[lo, hi]` until the bracket is narrower than `width`
/// (or stops shrinking in floating point). `f(lo)` and `f(hi)` must differ
/// in sign; an exact zero at either end is returned immediately.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, width: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(SpectraError::NoBracket { lo, hi });
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= width || mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisection to a relative bracket width of 1e-14 followed by `steps` Newton
/// updates. A Newton step that leaves the original bracket or increases the
/// residual is discarded.
pub fn bisect_newton<F, D>(f: F, df: D, lo: f64, hi: f64, steps: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = bisect(&f, lo, hi, 1e-14 * (hi - lo))?;
    for _ in 0..steps {
        let fx = f(x);
        let d = df(x);
        if fx == 0.0 || d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - fx / d;
        if !(lo..=hi).contains(&next) || f(next).abs() > fx.abs() {
            break;
        }
        x = next;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bisect_rejects_same_sign() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(SpectraError::NoBracket { .. })
        ));
    }

    #[test]
    fn newton_polish_reaches_machine_precision() {
        let r = bisect_newton(|x| x.cos() - x, |x| -x.sin() - 1.0, 0.0, 1.0, 3).unwrap();
        assert!((r.cos() - r).abs() < 1e-15);
    }
}
