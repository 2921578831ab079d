//! Radial components and charge density of a gap level.

use std::f64::consts::PI;

use serde::Serialize;

use super::{check_gap, DiracBallProblem, EdgeLevel, Family};
use crate::error::{domain, Result};
use crate::specfun::{bessel_i_half, HalfIntOrder, Sign};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub r_grid: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    /// `φ₁² + φ₂²`.
    pub density: Vec<f64>,
}

/// `(ln|φ₁|, ln|φ₂|)` at radius `r`, unnormalized.
fn log_components(p: &DiracBallProblem, level: &EdgeLevel, r: f64) -> Result<(f64, f64)> {
    let e = level.energy;
    let nu = ((p.m - e) * (p.m + e)).sqrt();
    let kappa = level.channel.kappa;
    let (o1, o2) = match level.channel.family {
        Family::Primary => (HalfIntOrder::below_kappa(kappa), HalfIntOrder::above_kappa(kappa)),
        Family::Swapped => (HalfIntOrder::above_kappa(kappa), HalfIntOrder::below_kappa(kappa)),
    };
    let log_i = |o: HalfIntOrder| -> Result<f64> {
        let v = bessel_i_half(o, nu * r)?;
        Ok(if v.sign == Sign::Zero { f64::NEG_INFINITY } else { v.log_magnitude })
    };
    let half_ln_r = 0.5 * r.ln();
    Ok((
        0.5 * (p.m + e).ln() + log_i(o1)? - half_ln_r,
        0.5 * (p.m - e).ln() + log_i(o2)? - half_ln_r,
    ))
}

/// Components on `r_i = R0·i/n`, `i = 1..=n`, normalized so that
/// `∫₀^{R0} (φ₁² + φ₂²) r² dr = 1` by the trapezoid rule (the integrand
/// vanishes at the origin).
pub fn radial_profile(p: &DiracBallProblem, level: &EdgeLevel, n_points: usize) -> Result<RadialProfile> {
    check_gap(p, level.energy)?;
    if n_points < 2 {
        return domain("radial profile needs at least 2 points");
    }
    let r_grid: Vec<f64> = (1..=n_points).map(|i| p.r0 * i as f64 / n_points as f64).collect();
    let logs = r_grid
        .iter()
        .map(|&r| log_components(p, level, r))
        .collect::<Result<Vec<_>>>()?;
    let shift = logs.iter().map(|&(a, b)| a.max(b)).fold(f64::NEG_INFINITY, f64::max);
    let mut phi1: Vec<f64> = logs.iter().map(|&(a, _)| (a - shift).exp()).collect();
    let mut phi2: Vec<f64> = logs.iter().map(|&(_, b)| (b - shift).exp()).collect();

    let h = p.r0 / n_points as f64;
    let integrand: Vec<f64> = (0..n_points)
        .map(|i| (phi1[i] * phi1[i] + phi2[i] * phi2[i]) * r_grid[i] * r_grid[i])
        .collect();
    let mut norm = 0.5 * h * integrand[0];
    for w in integrand.windows(2) {
        norm += 0.5 * h * (w[0] + w[1]);
    }
    let scale = 1.0 / norm.sqrt();
    phi1.iter_mut().for_each(|x| *x *= scale);
    phi2.iter_mut().for_each(|x| *x *= scale);
    let density = phi1.iter().zip(&phi2).map(|(a, b)| a * a + b * b).collect();
    Ok(RadialProfile { r_grid, phi1, phi2, density })
}

/// `density(R0) / density(0⁺)`, normalization-free. Infinite for `j > 1/2`,
/// where the density vanishes at the origin.
pub fn edge_density_ratio(p: &DiracBallProblem, level: &EdgeLevel) -> Result<f64> {
    check_gap(p, level.energy)?;
    if level.channel.kappa > 1 {
        return Ok(f64::INFINITY);
    }
    let e = level.energy;
    let nu = ((p.m - e) * (p.m + e)).sqrt();
    let (a, b) = log_components(p, level, p.r0)?;
    let at_edge = (2.0 * a).exp() + (2.0 * b).exp();
    // I_{1/2}(x)² / r → 2ν/π as r → 0 for the leading component
    let leading = match level.channel.family {
        Family::Primary => p.m + e,
        Family::Swapped => p.m - e,
    };
    Ok(at_edge / (leading * 2.0 * nu / PI))
}
