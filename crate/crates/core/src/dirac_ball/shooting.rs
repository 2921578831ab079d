//! Independent route to the gap levels: integrate the coupled first-order
//! radial system outward from near the origin and test the boundary
//! condition at `R0`.
//!
//! The system is
//!
//! ```text
//! φ₁' = (κ−1)/r · φ₁ + (E+m) φ₂
//! φ₂' = −(κ+1)/r · φ₂ + (m−E) φ₁
//! ```
//!
//! with `κ → −κ` for the swapped family. It is integrated in `t = ln r`
//! for the regular parts `u = φ / r^{power}`, so the leading component
//! starts at 1 and the other at its series value.

use rayon::prelude::*;
use serde::Serialize;

use super::{check_gap, sign_brackets, solve_channel, uniform_grid, Channel, DiracBallProblem, Family, BASE_PANELS};
use crate::error::{Result, SpectraError};
use crate::roots::bisect;

const START_FRACTION: f64 = 1e-6;
const STEP_TOL: f64 = 1e-13;
const MAX_STEPS: usize = 200_000;

/// `(du_lead/dt, du_sub/dt)` for leading and subleading regular parts.
fn rhs(two_k1: f64, r2: f64, lead_coupling: f64, sub_coupling: f64, y: [f64; 2]) -> [f64; 2] {
    [r2 * lead_coupling * y[1], -two_k1 * y[1] + sub_coupling * y[0]]
}

fn rk4(two_k1: f64, lc: f64, sc: f64, t: f64, h: f64, y: [f64; 2]) -> [f64; 2] {
    let f = |t: f64, y: [f64; 2]| rhs(two_k1, (2.0 * t).exp(), lc, sc, y);
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
    let k3 = f(t + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
    let k4 = f(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Direction of `(φ₁(R0), φ₂(R0))` as a unit vector.
pub fn shooting_boundary(p: &DiracBallProblem, ch: &Channel, e: f64) -> Result<(f64, f64)> {
    check_gap(p, e)?;
    let two_k1 = f64::from(2 * ch.kappa + 1);
    let nu2 = (p.m - e) * (p.m + e);
    // leading component carries r^{κ−1}, the other r^κ
    let (lead_coupling, sub_coupling) = match ch.family {
        Family::Primary => (e + p.m, p.m - e),
        Family::Swapped => (p.m - e, e + p.m),
    };
    let r_start = START_FRACTION * p.r0;
    let s2 = nu2 * r_start * r_start;
    let mut y = [
        1.0 + s2 / (2.0 * two_k1),
        sub_coupling / two_k1 * (1.0 + s2 / (2.0 * (two_k1 + 2.0))),
    ];
    // t is measured from ln R0 so r² = R0²·e^{2t}
    let scale = p.r0 * p.r0;
    let (lc, sc) = (lead_coupling * scale, sub_coupling);
    let mut t = START_FRACTION.ln();
    let t_end: f64 = 0.0;
    let mut h: f64 = 1e-2;
    let mut steps = 0;
    while t < t_end {
        h = h.min(t_end - t);
        let full = rk4(two_k1, lc, sc, t, h, y);
        let half = rk4(two_k1, lc, sc, t, 0.5 * h, y);
        let fine = rk4(two_k1, lc, sc, t + 0.5 * h, 0.5 * h, half);
        let norm = fine[0].hypot(fine[1]);
        let err = (fine[0] - full[0]).hypot(fine[1] - full[1]) / (15.0 * norm);
        if !err.is_finite() {
            return Err(SpectraError::IntegrationFailure {
                r: p.r0 * t.exp(),
                reason: format!("non-finite state at E = {e}, κ = {}", ch.kappa),
            });
        }
        if err <= STEP_TOL {
            t += h;
            // renormalize: only the direction is needed at the boundary
            y = [fine[0] / norm, fine[1] / norm];
            h *= (0.9 * (STEP_TOL / err.max(1e-300)).powf(0.2)).min(4.0);
        } else {
            h *= (0.9 * (STEP_TOL / err).powf(0.2)).max(0.1);
        }
        steps += 1;
        if steps > MAX_STEPS {
            return Err(SpectraError::IntegrationFailure {
                r: p.r0 * t.exp(),
                reason: format!("step limit reached at E = {e}, κ = {}, h = {h:e}", ch.kappa),
            });
        }
    }
    // φ_lead = u_lead·R0^{κ−1}, φ_sub = u_sub·R0^κ; drop the common R0^{κ−1}
    let (lead, sub) = (y[0], y[1] * p.r0);
    let (phi1, phi2) = match ch.family {
        Family::Primary => (lead, sub),
        Family::Swapped => (sub, lead),
    };
    let n = phi1.hypot(phi2);
    Ok((phi1 / n, phi2 / n))
}

fn mismatch(log_target: f64, (phi1, phi2): (f64, f64)) -> f64 {
    phi1 * (-log_target).exp() - phi2
}

/// Boundary mismatch `M = (φ₁/G − φ₂)/|φ|` at `R0`. It has the sign of
/// `F(E) − G`.
pub fn shooting_oracle(p: &DiracBallProblem, ch: &Channel, e: f64) -> Result<f64> {
    Ok(mismatch(p.log_target(), shooting_boundary(p, ch, e)?))
}

/// Boundary directions on the uniform gap grid; they do not depend on `α`,
/// so one scan serves every boundary condition.
#[derive(Debug, Clone)]
pub struct ShootingScan {
    problem: DiracBallProblem,
    channel: Channel,
    grid: Vec<f64>,
    boundary: Vec<(f64, f64)>,
}

impl ShootingScan {
    pub fn new(p: &DiracBallProblem, ch: &Channel, panels: usize) -> Result<Self> {
        let (lo, hi) = p.gap_interval();
        let grid = uniform_grid(lo, hi, panels);
        let boundary = grid
            .par_iter()
            .map(|&e| shooting_boundary(p, ch, e))
            .collect::<Result<Vec<_>>>()?;
        Ok(ShootingScan { problem: *p, channel: *ch, grid, boundary })
    }

    /// Roots of `M` for the boundary condition at `alpha`.
    pub fn roots(&self, alpha: f64) -> Result<Vec<f64>> {
        let p = self.problem.with_alpha(alpha);
        let target = p.log_target();
        let values: Vec<f64> = self.boundary.iter().map(|&b| mismatch(target, b)).collect();
        sign_brackets(&values, &self.grid)
            .into_par_iter()
            .map(|(a, b)| {
                if a == b {
                    return Ok(a);
                }
                let ch = self.channel;
                bisect(|e| shooting_oracle(&p, &ch, e).unwrap_or(f64::NAN), a, b, 1e-13 * p.m)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteComparison {
    pub channel: Channel,
    pub alpha: f64,
    pub bessel: Vec<f64>,
    pub shooting: Vec<f64>,
    /// Largest `|E_bessel − E_shooting|` over paired roots; infinite when
    /// the root counts differ.
    pub max_difference: f64,
    pub agree: bool,
}

/// Gap levels from both routes for every `α` in `alphas`.
pub fn compare_routes(p: &DiracBallProblem, ch: &Channel, alphas: &[f64], tol: f64) -> Result<Vec<RouteComparison>> {
    let scan = ShootingScan::new(p, ch, BASE_PANELS)?;
    alphas
        .iter()
        .map(|&alpha| {
            let bessel: Vec<f64> = solve_channel(&p.with_alpha(alpha), ch)?.iter().map(|l| l.energy).collect();
            let shooting = scan.roots(alpha)?;
            let max_difference = if bessel.len() == shooting.len() {
                bessel.iter().zip(&shooting).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            } else {
                f64::INFINITY
            };
            Ok(RouteComparison {
                channel: *ch,
                alpha,
                bessel,
                shooting,
                max_difference,
                agree: max_difference <= tol,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac_ball::{log_spectral_function, zero_mode_alpha, Convention};
    use crate::specfun::{bessel_i_half, HalfIntOrder};

    fn ball(alpha: f64) -> DiracBallProblem {
        DiracBallProblem::new(1.0, 1.0, alpha, Convention::FigureCalibrated).unwrap()
    }

    #[test]
    fn boundary_ratio_matches_bessel_form() {
        for family in [Family::Primary, Family::Swapped] {
            for kappa in [1, 2, 5, 11] {
                let ch = Channel::new(kappa, family).unwrap();
                for &(m, r0) in &[(1.0, 1.0), (3.0, 0.7), (0.4, 2.0)] {
                    let p = DiracBallProblem::new(m, r0, 0.0, Convention::FigureCalibrated).unwrap();
                    for &frac in &[-0.99, -0.5, 0.0, 0.6, 0.999] {
                        let e = frac * m;
                        let (a, b) = shooting_boundary(&p, &ch, e).unwrap();
                        let shot = (a / b).ln();
                        let exact = log_spectral_function(&p, &ch, e).unwrap();
                        assert!((shot - exact).abs() < 1e-9, "{family:?} κ={kappa} E={e}: {shot} vs {exact}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_mode_mismatch_vanishes() {
        let ch = Channel::primary(1);
        let alpha = zero_mode_alpha(&ball(0.0), &ch).unwrap();
        assert!(shooting_oracle(&ball(alpha), &ch, 0.0).unwrap().abs() < 1e-8);
        let ch2 = Channel::primary(2);
        let alpha2 = zero_mode_alpha(&ball(0.0), &ch2).unwrap();
        assert!(shooting_oracle(&ball(alpha2), &ch2, 0.0).unwrap().abs() < 1e-8);
    }

    #[test]
    fn mismatch_sign_tracks_spectral_function() {
        let ch = Channel::primary(1);
        for i in 0..40 {
            let alpha = -1.0 + 0.1 * f64::from(i);
            let p = ball(alpha);
            let f = log_spectral_function(&p, &ch, 0.5).unwrap() - p.log_target();
            let m = shooting_oracle(&p, &ch, 0.5).unwrap();
            if f.abs() > 1e-9 {
                assert_eq!(f.signum(), m.signum(), "α={alpha}");
            }
        }
    }

    #[test]
    fn closed_form_solves_first_order_system() {
        // I'_μ(x) = I_{μ−1}(x) − (μ/x) I_μ(x), with the components built from
        // the regular Bessel solution
        let (m, e, kappa) = (1.3f64, 0.4f64, 3u32);
        let nu = ((m - e) * (m + e)).sqrt();
        let i = |twice: i32, x: f64| bessel_i_half(HalfIntOrder::new(twice).unwrap(), x).unwrap().to_f64();
        let k = f64::from(kappa);
        let lo = 2 * kappa as i32 - 1;
        let hi = lo + 2;
        let phi = |twice: i32, c: f64, r: f64| c.sqrt() * i(twice, nu * r) / r.sqrt();
        let dphi = |twice: i32, c: f64, r: f64| {
            let mu = f64::from(twice) / 2.0;
            let x = nu * r;
            let di = i(twice - 2, x) - mu / x * i(twice, x);
            c.sqrt() * (nu * di / r.sqrt() - 0.5 * i(twice, x) / r.powf(1.5))
        };
        for n in 1..=200 {
            let r = f64::from(n) / 200.0;
            let (p1, p2) = (phi(lo, m + e, r), phi(hi, m - e, r));
            let (d1, d2) = (dphi(lo, m + e, r), dphi(hi, m - e, r));
            let res1 = d1 + (1.0 - k) / r * p1 - (e + m) * p2;
            let res2 = -d2 - (1.0 + k) / r * p2 + (m - e) * p1;
            let scale = d1.abs() + (k / r) * p1.abs() + (e + m) * p2.abs();
            assert!(res1.abs() <= 1e-9 * scale, "r={r}: {res1}");
            assert!(res2.abs() <= 1e-9 * (d2.abs() + (k / r) * p2.abs() + (m - e) * p1.abs()));
        }
    }

    #[test]
    fn routes_agree_on_low_channels() {
        for kappa in [1, 2, 4] {
            let ch = Channel::primary(kappa);
            for cmp in compare_routes(&ball(0.0), &ch, &[0.5, 1.0, 2.0, 3.0], 1e-8).unwrap() {
                assert!(cmp.agree, "{cmp:?}");
            }
        }
    }

    #[test]
    fn rejects_energies_outside_gap() {
        assert!(shooting_oracle(&ball(1.0), &Channel::primary(1), 1.0).is_err());
    }
}
