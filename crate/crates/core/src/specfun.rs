//! Modified Bessel functions of the first kind at half-integer order.
//!
//! Values are returned in log-scaled form because `I_ν(x)` underflows for the
//! channel range of the Dirac ball (ν ≈ 300 at x ≈ 1). Ratios
//! `I_ν / I_{ν+1}` come from Gauss' continued fraction evaluated with the
//! modified Lentz algorithm, and lower orders are reached by the downward
//! ratio recurrence, which is the stable direction for `I`.

use std::fmt;

use crate::error::{domain, Result};

const LENTZ_TINY: f64 = 1e-300;
const LENTZ_EPS: f64 = 1e-15;
const LENTZ_MAX_ITER: usize = 200_000;

/// A half-integer order ν stored as `2ν`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfIntOrder {
    twice_order: i32,
}

impl HalfIntOrder {
    /// `twice_order` must be odd and at least −1.
    pub fn new(twice_order: i32) -> Result<Self> {
        if twice_order % 2 == 0 {
            return domain(format!("order 2ν = {twice_order} is not a half-integer"));
        }
        if twice_order < -1 {
            return domain(format!("order 2ν = {twice_order} below −1"));
        }
        Ok(Self { twice_order })
    }

    /// The order `κ − 1/2` attached to a Dirac channel with `κ ≥ 1`.
    pub fn below_kappa(kappa: u32) -> Self {
        Self { twice_order: 2 * kappa as i32 - 1 }
    }

    /// The order `κ + 1/2` attached to a Dirac channel with `κ ≥ 0`.
    pub fn above_kappa(kappa: u32) -> Self {
        Self { twice_order: 2 * kappa as i32 + 1 }
    }

    pub fn twice_order(self) -> i32 {
        self.twice_order
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice_order) / 2.0
    }

    /// The order one higher.
    pub fn succ(self) -> Self {
        Self { twice_order: self.twice_order + 2 }
    }
}

impl fmt::Display for HalfIntOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2", self.twice_order)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

/// A real number stored as `sign · exp(log_magnitude)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScaledValue {
    pub log_magnitude: f64,
    pub sign: Sign,
}

impl LogScaledValue {
    pub fn zero() -> Self {
        Self { log_magnitude: f64::NEG_INFINITY, sign: Sign::Zero }
    }

    pub fn positive(log_magnitude: f64) -> Self {
        Self { log_magnitude, sign: Sign::Positive }
    }

    /// Plain `f64`; may underflow to zero or overflow to infinity.
    pub fn to_f64(self) -> f64 {
        match self.sign {
            Sign::Zero => 0.0,
            Sign::Positive => self.log_magnitude.exp(),
            Sign::Negative => -self.log_magnitude.exp(),
        }
    }
}

/// `ln sinh x` for `x > 0` without overflow.
fn ln_sinh(x: f64) -> f64 {
    if x < 20.0 {
        x.sinh().ln()
    } else {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    }
}

/// `ln I_{1/2}(x) = ½ ln(2/(πx)) + ln sinh x`.
fn ln_i_half(x: f64) -> f64 {
    0.5 * (2.0 / (std::f64::consts::PI * x)).ln() + ln_sinh(x)
}

fn check_argument(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("Bessel argument must be positive and finite, got {x}"));
    }
    Ok(())
}

/// `I_{ν+1}(x) / I_ν(x)` by the continued fraction
/// `1 / (b₁ + 1 / (b₂ + …))` with `b_k = 2(ν+k)/x`.
fn upper_ratio_cf(nu: f64, x: f64) -> f64 {
    let mut f = LENTZ_TINY;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..=LENTZ_MAX_ITER {
        let b = 2.0 * (nu + k as f64) / x;
        d = b + d;
        if d == 0.0 {
            d = LENTZ_TINY;
        }
        c = b + 1.0 / c;
        if c == 0.0 {
            c = LENTZ_TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < LENTZ_EPS {
            break;
        }
    }
    f
}

/// `I_ν(x) / I_{ν+1}(x)` for `x > 0`.
pub fn bessel_ratio(order: HalfIntOrder, x: f64) -> Result<f64> {
    check_argument(x)?;
    Ok(1.0 / upper_ratio_cf(order.value(), x))
}

/// `I_ν(x)` in log-scaled form.
///
/// Anchored on `I_{1/2}(x) = √(2/(πx)) sinh x`; the ratios
/// `I_μ / I_{μ+1}` for `μ = ν−1, …, 1/2` are obtained from one continued
/// fraction at the top order and the recurrence
/// `I_{μ−1}/I_μ = 2μ/x + I_{μ+1}/I_μ`.
pub fn bessel_i_half(order: HalfIntOrder, x: f64) -> Result<LogScaledValue> {
    check_argument(x)?;
    let base = ln_i_half(x);
    let steps = (order.twice_order() - 1) / 2;
    if steps < 0 {
        // I_{−1/2} / I_{1/2} = 1/x + I_{3/2}/I_{1/2}
        let down = 1.0 / x + upper_ratio_cf(0.5, x);
        return Ok(LogScaledValue::positive(base + down.ln()));
    }
    if steps == 0 {
        return Ok(LogScaledValue::positive(base));
    }
    // ratio I_μ / I_{μ+1} for μ = ν − 1, walked down to μ = 1/2
    let mut mu = order.value() - 1.0;
    let mut ratio = 1.0 / upper_ratio_cf(mu, x);
    let mut log_acc = 0.0;
    let mut prod = 1.0;
    for step in 0..steps {
        prod *= ratio;
        if prod > 1e200 {
            log_acc += prod.ln();
            prod = 1.0;
        }
        if step + 1 < steps {
            ratio = 2.0 * mu / x + 1.0 / ratio;
            mu -= 1.0;
        }
    }
    Ok(LogScaledValue::positive(base - (log_acc + prod.ln())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn order(twice: i32) -> HalfIntOrder {
        HalfIntOrder::new(twice).unwrap()
    }

    fn closed_i(twice: i32, x: f64) -> f64 {
        let pre = (2.0 / (PI * x)).sqrt();
        match twice {
            -1 => pre * x.cosh(),
            1 => pre * x.sinh(),
            3 => pre * (x.cosh() - x.sinh() / x),
            5 => pre * ((1.0 + 3.0 / (x * x)) * x.sinh() - 3.0 * x.cosh() / x),
            _ => unreachable!(),
        }
    }

    /// Power series in log space with all-positive terms; exact half-integer Γ.
    fn series_ln_i(twice: i32, x: f64) -> f64 {
        let nu = f64::from(twice) / 2.0;
        // ln Γ(ν+1) for half-integer ν ≥ 1/2: Γ(1/2)=√π, Γ(z+1)=zΓ(z)
        let mut ln_gamma = 0.5 * PI.ln();
        let mut z = 0.5;
        while z < nu + 1.0 - 1e-9 {
            ln_gamma += z.ln();
            z += 1.0;
        }
        let q = x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0;
        let mut offset = 0.0;
        loop {
            k += 1.0;
            term *= q / (k * (nu + k));
            sum += term;
            if term < 1e-18 * sum && k > q.sqrt() {
                break;
            }
            if sum > 1e200 {
                sum *= 1e-200;
                term *= 1e-200;
                offset += 200.0 * 10f64.ln();
            }
        }
        nu * (x / 2.0).ln() - ln_gamma + sum.ln() + offset
    }

    #[test]
    fn rejects_bad_orders_and_arguments() {
        assert!(HalfIntOrder::new(2).is_err());
        assert!(HalfIntOrder::new(-3).is_err());
        assert!(bessel_i_half(order(1), 0.0).is_err());
        assert!(bessel_i_half(order(1), -1.0).is_err());
        assert!(bessel_ratio(order(1), f64::NAN).is_err());
    }

    #[test]
    fn low_orders_match_closed_forms() {
        let i12 = bessel_i_half(order(1), 1.0).unwrap().to_f64();
        let i32_ = bessel_i_half(order(3), 1.0).unwrap().to_f64();
        assert!((i12 - 0.937_674_888_245_488).abs() < 1e-12);
        assert!((i32_ - 0.293_525_326_347_479).abs() < 1e-12);
        let r = bessel_ratio(order(1), 1.0).unwrap();
        assert!((r - 0.937_674_888_245_488 / 0.293_525_326_347_479).abs() < 1e-11);
        assert!((r - 3.194528).abs() < 1e-6);
    }

    #[test]
    fn closed_form_agreement_on_grid() {
        for twice in [-1, 1, 3, 5] {
            for i in 0..100 {
                let x = 0.1 + (50.0 - 0.1) * f64::from(i) / 99.0;
                let got = bessel_i_half(order(twice), x).unwrap().log_magnitude;
                let want = closed_i(twice, x).ln();
                assert!((got - want).abs() < 1e-10, "2ν={twice} x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn small_argument_limit() {
        let x = 1e-8;
        let got = bessel_i_half(order(1), x).unwrap().to_f64();
        let want = (2.0 * x / PI).sqrt() * (1.0 + x * x / 6.0);
        assert!((got / want - 1.0).abs() < 1e-14);
        let r = bessel_ratio(order(1), 0.01).unwrap();
        // I_ν/I_{ν+1} ≈ 2(ν+1)/x · (1 + x²/(4(ν+1)(ν+2)))
        assert!((r - 300.0).abs() < 0.01, "{r}");
        assert!(r > 300.0);
    }

    #[test]
    fn large_argument_ratio() {
        let r = bessel_ratio(order(1), 100.0).unwrap();
        // 1 / (coth 100 − 1/100)
        let want = 1.0 / (1.0 / 100f64.tanh() - 0.01);
        assert!((r - want).abs() < 1e-12 * want);
        assert!((r - 1.010101).abs() < 1e-6);
    }

    #[test]
    fn agrees_with_power_series_across_channel_range() {
        let xs = [1e-6, 1e-3, 0.5, 1.0, 7.5, 40.0, 150.0, 700.0];
        for twice in [1, 3, 21, 101, 201, 401] {
            for &x in &xs {
                let got = bessel_i_half(order(twice), x).unwrap().log_magnitude;
                let want = series_ln_i(twice, x);
                // relative accuracy of I is the absolute accuracy of ln I
                assert!((got - want).abs() < 1e-12, "2ν={twice} x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn recurrence_residual() {
        for twice in [1, 3, 9, 41, 201] {
            for &x in &[0.05, 1.0, 3.0, 25.0, 300.0] {
                let nu = f64::from(twice) / 2.0;
                let lo = bessel_i_half(order(twice - 2), x).unwrap().log_magnitude;
                let mid = bessel_i_half(order(twice), x).unwrap().log_magnitude;
                let hi = bessel_i_half(order(twice + 2), x).unwrap().log_magnitude;
                let residual =
                    1.0 - (hi - lo).exp() - 2.0 * nu / x * (mid - lo).exp();
                assert!(residual.abs() < 1e-9, "2ν={twice} x={x}: {residual}");
            }
        }
    }

    #[test]
    fn ratio_consistent_with_log_values() {
        for twice in [1, 5, 33, 301] {
            for &x in &[1e-4, 0.3, 2.0, 60.0] {
                let r = bessel_ratio(order(twice), x).unwrap();
                let a = bessel_i_half(order(twice), x).unwrap().log_magnitude;
                let b = bessel_i_half(order(twice + 2), x).unwrap().log_magnitude;
                assert!((r * (b - a).exp() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn huge_order_small_argument_stays_finite() {
        let v = bessel_i_half(order(601), 1.0).unwrap();
        assert_eq!(v.sign, Sign::Positive);
        assert!(v.log_magnitude.is_finite());
        assert_eq!(v.to_f64(), 0.0); // underflows as a plain double
    }
}
