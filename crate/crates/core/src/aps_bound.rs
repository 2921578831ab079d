//! Trial-state bound for edge states of the Dirac operator under APS
//! boundary conditions, and the pieces it is built from.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::quadrature::integrate_to_infinity;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApsInput {
    /// `Λ > 0`, with `−Λ` the boundary eigenvalue of `K(m)`.
    pub lambda: f64,
    pub m: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub sigma_max: f64,
    /// `‖ξ‖²` over the boundary.
    pub xi_norm_sq: f64,
}

impl ApsInput {
    pub fn new(lambda: f64, m: f64, epsilon: f64, delta: f64, sigma_max: f64, xi_norm_sq: f64) -> Result<Self> {
        if !(lambda > 0.0 && m > 0.0 && epsilon > 0.0 && xi_norm_sq > 0.0) {
            return domain("Λ, m, ε and ‖ξ‖² must be positive");
        }
        if !(0.0..1.0).contains(&delta) {
            return domain(format!("δ must lie in [0, 1), got {delta}"));
        }
        if !(sigma_max >= 0.0) {
            return domain(format!("σ_max must be nonnegative, got {sigma_max}"));
        }
        Ok(ApsInput { lambda, m, epsilon, delta, sigma_max, xi_norm_sq })
    }
}

/// Right side of `⟨ξ, −Δ_θ ξ⟩ ≤ (Λ² − m² + σ_max)‖ξ‖²`.
pub fn xi_bound(inp: &ApsInput) -> f64 {
    (inp.lambda * inp.lambda - inp.m * inp.m + inp.sigma_max) * inp.xi_norm_sq
}

/// `(1+δ)‖ξ‖²[Λ(1/2 + π²/(16ε²Λ²) − 1/(1+δ)) + (Λ² − m² + σ_max)ε]`.
/// Negative values certify an edge state.
pub fn theorem_bound(inp: &ApsInput) -> f64 {
    let ApsInput { lambda, m, epsilon, delta, sigma_max, xi_norm_sq } = *inp;
    let bracket = lambda * (0.5 + PI * PI / (16.0 * epsilon * epsilon * lambda * lambda) - 1.0 / (1.0 + delta))
        + (lambda * lambda - m * m + sigma_max) * epsilon;
    (1.0 + delta) * xi_norm_sq * bracket
}

pub fn ansatz_k(lambda: f64, epsilon: f64) -> Result<f64> {
    if !(lambda > 0.0 && epsilon > 0.0) {
        return domain("Λ and ε must be positive");
    }
    Ok(-2.0 * epsilon * lambda / PI)
}

/// Radial trial profile `exp(k·tan(π(R0 − r)/(2ε)))` on `(R0 − ε, R0]`,
/// zero elsewhere.
pub fn ansatz_profile(lambda: f64, epsilon: f64, r0: f64, r_grid: &[f64]) -> Result<Vec<f64>> {
    let k = ansatz_k(lambda, epsilon)?;
    Ok(r_grid
        .iter()
        .map(|&r| {
            if r > r0 || r <= r0 - epsilon {
                0.0
            } else {
                (k * (PI / (2.0 * epsilon) * (r0 - r)).tan()).exp()
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralCheck {
    pub lhs: f64,
    pub rhs: f64,
}

/// `∫₀^{π/2} (1 + tan²t)² e^{−2k tan t} dt` against `1/(2k) + 1/(4k³)`.
pub fn integral_identity_check(k: f64) -> Result<IntegralCheck> {
    if !(k > 0.0) {
        return domain(format!("integral diverges for k = {k}"));
    }
    let lhs = integrate_to_infinity(|u: f64| (1.0 + u * u) * (-2.0 * k * u).exp(), 0.0, 1e-12, 1e-300)?;
    let rhs = 1.0 / (2.0 * k) + 1.0 / (4.0 * k * k * k);
    Ok(IntegralCheck { lhs, rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereSpec {
    pub n: u32,
    pub rho: f64,
    pub l: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereEigen {
    pub dirac_pair: (f64, f64),
    pub lowest_connection: f64,
}

pub fn sphere_helpers(s: &SphereSpec) -> Result<SphereEigen> {
    if s.n < 1 || !(s.rho > 0.0) {
        return domain("sphere needs n ≥ 1 and ρ > 0");
    }
    let n = f64::from(s.n);
    let ev = (f64::from(s.l) + n / 2.0) / s.rho;
    Ok(SphereEigen { dirac_pair: (ev, -ev), lowest_connection: n / (4.0 * s.rho * s.rho) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    Certificate,
    NoCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub epsilon: f64,
    pub status: CertificateStatus,
    /// `[Λ_lo, Λ_hi]` grid range where the bound is negative.
    pub window: Option<(f64, f64)>,
    pub min_bound: f64,
    pub argmin_lambda: f64,
}

pub const SCAN_POINTS: usize = 2001;

/// For each `ε`, the bound over a log grid `Λ ∈ [10⁻³m, 10m]` with `‖ξ‖² = 1`.
pub fn threshold_scan(m: f64, sigma_max: f64, epsilon_grid: &[f64], delta: f64) -> Result<Vec<ThresholdRow>> {
    if epsilon_grid.is_empty() {
        return domain("empty ε grid");
    }
    let lambdas: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| m * 1e-3 * 1e4f64.powf(i as f64 / (SCAN_POINTS - 1) as f64))
        .collect();
    epsilon_grid
        .par_iter()
        .map(|&eps| {
            let mut lo: Option<f64> = None;
            let mut hi: Option<f64> = None;
            let mut best = (f64::INFINITY, f64::NAN);
            for &lambda in &lambdas {
                let b = theorem_bound(&ApsInput::new(lambda, m, eps, delta, sigma_max, 1.0)?);
                if b < best.0 {
                    best = (b, lambda);
                }
                if b < 0.0 {
                    lo.get_or_insert(lambda);
                    hi = Some(lambda);
                }
            }
            let window = lo.zip(hi);
            Ok(ThresholdRow {
                epsilon: eps,
                status: if window.is_some() { CertificateStatus::Certificate } else { CertificateStatus::NoCertificate },
                window,
                min_bound: best.0,
                argmin_lambda: best.1,
            })
        })
        .collect()
}
