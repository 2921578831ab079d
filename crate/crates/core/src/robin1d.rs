//! The reduced interval problem `−φ'' = Eφ` on `[0, ε]` with `φ'(0) = 0`
//! and `φ'(ε) = c φ(ε)`.
//!
//! For `c > 0` there is exactly one negative eigenvalue `−κ²` with
//! `κ tanh(εκ) = c`, and positive eigenvalues `k_n²` with
//! `k_n tan(εk_n) = −c`, one in each interval `((2n−1)π/(2ε), nπ/ε)`.

use std::f64::consts::PI;

use crate::error::{domain, Result, SpectraError};
use crate::roots::{bisect, bisect_newton};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinProblem {
    epsilon: f64,
    c: f64,
}

impl RobinProblem {
    pub fn new(epsilon: f64, c: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return domain(format!("interval width must be positive, got {epsilon}"));
        }
        if !c.is_finite() {
            return domain(format!("Robin constant must be finite, got {c}"));
        }
        Ok(Self { epsilon, c })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    fn require_positive_c(&self) -> Result<()> {
        if self.c > 0.0 {
            Ok(())
        } else {
            domain(format!("Robin constant must be positive, got {}", self.c))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootKind {
    /// Negative eigenvalue `−κ²`.
    Edge,
    /// Positive eigenvalue `k²`.
    Bulk,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralRoot {
    pub kind: RootKind,
    /// `κ` for the edge mode, `k_n` for bulk modes.
    pub value: f64,
    /// Bulk ordinal starting at 1; 0 for the edge mode.
    pub index: usize,
    /// Absolute residual of the defining equation at `value`.
    pub residual: f64,
}

impl SpectralRoot {
    pub fn eigenvalue(&self) -> f64 {
        match self.kind {
            RootKind::Edge => -self.value * self.value,
            RootKind::Bulk => self.value * self.value,
        }
    }
}

fn edge_equation(p: &RobinProblem, kappa: f64) -> f64 {
    kappa * (p.epsilon * kappa).tanh() - p.c
}

/// The negative mode, present only for `c > 0`.
///
/// The root is bracketed by `[κ_M(c), κ_m(c)]`, bisected and then polished
/// with Newton steps.
pub fn solve_edge_mode(p: &RobinProblem) -> Option<SpectralRoot> {
    if p.c <= 0.0 {
        return None;
    }
    let f = |k: f64| edge_equation(p, k);
    let df = |k: f64| {
        let t = (p.epsilon * k).tanh();
        t + p.epsilon * k * (1.0 - t * t)
    };
    let mut lo = kappa_big_m_formula(p);
    let mut hi = kappa_m_formula(p);
    if !(f(lo) <= 0.0 && f(hi) >= 0.0) {
        // rounding at the bracket ends; fall back to a plain enclosure
        lo = 0.0;
        hi = hi.max(p.c).max(1.0 / p.epsilon);
        while f(hi) < 0.0 {
            hi *= 2.0;
        }
    }
    let kappa = bisect_newton(f, df, lo, hi, 3).expect("edge bracket has a sign change");
    Some(SpectralRoot { kind: RootKind::Edge, value: kappa, index: 0, residual: f(kappa).abs() })
}

/// Bulk equation in the pole-free form `k sin(εk) + c cos(εk)`, which shares
/// its zeros with `k tan(εk) + c` inside each bracket.
fn bulk_equation(p: &RobinProblem, k: f64) -> f64 {
    let (s, c) = (p.epsilon * k).sin_cos();
    k * s + p.c * c
}

/// The first `n_max` positive roots of `k tan(εk) = −c`, ascending.
pub fn solve_bulk_modes(p: &RobinProblem, n_max: usize) -> Result<Vec<SpectralRoot>> {
    if p.c <= 0.0 {
        return Err(SpectraError::UnsupportedRegime(format!(
            "bulk bracketing assumes c > 0, got c = {}",
            p.c
        )));
    }
    (1..=n_max)
        .map(|n| {
            let lo = (2 * n - 1) as f64 * PI / (2.0 * p.epsilon);
            let hi = n as f64 * PI / p.epsilon;
            let k = bisect(|k| bulk_equation(p, k), lo, hi, 0.0)?;
            Ok(SpectralRoot {
                kind: RootKind::Bulk,
                value: k,
                index: n,
                residual: bulk_equation(p, k).abs(),
            })
        })
        .collect()
}

fn kappa_m_formula(p: &RobinProblem) -> f64 {
    let x = p.epsilon * p.c;
    let a = 0.1 + x / x.tanh();
    a * a.tanh() / p.epsilon
}

fn kappa_big_m_formula(p: &RobinProblem) -> f64 {
    p.c * (p.epsilon * p.c).tanh()
}

/// Analytic upper bound on `κ`:
/// `(1/ε)(1/10 + εc/tanh εc) tanh(1/10 + εc/tanh εc)`.
pub fn kappa_m(p: &RobinProblem) -> Result<f64> {
    p.require_positive_c()?;
    Ok(kappa_m_formula(p))
}

/// Analytic lower bound on `κ`: `c tanh(εc)`.
#[allow(non_snake_case)]
pub fn kappa_M(p: &RobinProblem) -> Result<f64> {
    p.require_positive_c()?;
    Ok(kappa_big_m_formula(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaRegime {
    LargeEc,
    SmallEc,
    Intermediate,
}

/// Closed-form approximation of `κ` in the two limiting regimes
/// (`εc ≥ 10`: `κ ≈ c`; `εc ≤ 0.01`: `κ ≈ √(c/ε)`), the exact root otherwise.
pub fn asymptotic_kappa(p: &RobinProblem) -> Result<(KappaRegime, f64)> {
    p.require_positive_c()?;
    let x = p.epsilon * p.c;
    if x >= 10.0 {
        Ok((KappaRegime::LargeEc, p.c))
    } else if x <= 0.01 {
        Ok((KappaRegime::SmallEc, (p.c / p.epsilon).sqrt()))
    } else {
        let root = solve_edge_mode(p).expect("c > 0 has an edge mode");
        Ok((KappaRegime::Intermediate, root.value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prob(eps: f64, c: f64) -> RobinProblem {
        RobinProblem::new(eps, c).unwrap()
    }

    /// Plain bisection of κ tanh(εκ) − c on [0, c + 1/ε + 1], independent of
    /// the analytic bracket used by the solver.
    fn oracle_kappa(eps: f64, c: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, c + 1.0 / eps + 1.0);
        while hi - lo > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if mid * (eps * mid).tanh() - c < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    #[test]
    fn rejects_invalid_problems() {
        assert!(RobinProblem::new(0.0, 1.0).is_err());
        assert!(RobinProblem::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn edge_mode_examples() {
        let k = solve_edge_mode(&prob(1.0, 1.0)).unwrap();
        assert_eq!(k.kind, RootKind::Edge);
        assert!((k.value - 1.199679).abs() < 1e-6);
        assert!((k.value - oracle_kappa(1.0, 1.0)).abs() < 1e-11);
        assert!(solve_edge_mode(&prob(1.0, 0.0)).is_none());
        assert!(solve_edge_mode(&prob(1.0, -2.0)).is_none());
        let big = solve_edge_mode(&prob(1.0, 100.0)).unwrap();
        assert!((big.value / 100.0 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn bulk_examples() {
        let r = solve_bulk_modes(&prob(1.0, 1.0), 1).unwrap();
        assert!((r[0].value - 2.798386).abs() < 1e-6);
        let tiny = solve_bulk_modes(&prob(1.0, 1e-6), 1).unwrap();
        assert!(tiny[0].value > PI / 2.0 && tiny[0].value < PI);
        // c → 0 approaches the Neumann root k = π from below: k ≈ π − c/π
        assert!((tiny[0].value - (PI - 1e-6 / PI)).abs() < 1e-11);
        let two = solve_bulk_modes(&prob(2.0, 1.0), 2).unwrap();
        let k2 = two[1].value;
        assert!(k2 > 3.0 * PI / 4.0 && k2 < PI);
        assert!((k2 * (2.0 * k2).tan() + 1.0).abs() < 1e-12);
        assert!(matches!(
            solve_bulk_modes(&prob(1.0, 0.0), 3),
            Err(SpectraError::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn bound_examples() {
        assert!((kappa_m(&prob(1.0, 1.0)).unwrap() - 1.254_968_855).abs() < 1e-9);
        let a: f64 = 1.1;
        assert!((kappa_m(&prob(1.0, 1e-9)).unwrap() - a * a.tanh()).abs() < 1e-12);
        assert!((kappa_m(&prob(1.0, 100.0)).unwrap() - 100.1).abs() < 1e-9);
        assert!((kappa_M(&prob(1.0, 1.0)).unwrap() - 0.7615942).abs() < 1e-7);
        assert!((kappa_M(&prob(1.0, 1e-4)).unwrap() - 1e-8).abs() < 1e-15);
        assert!((kappa_M(&prob(0.1, 10.0)).unwrap() - 7.615942).abs() < 1e-6);
        assert!(kappa_m(&prob(1.0, 0.0)).is_err());
        assert!(kappa_M(&prob(1.0, -1.0)).is_err());
    }

    #[test]
    fn asymptotic_examples() {
        assert_eq!(asymptotic_kappa(&prob(1.0, 100.0)).unwrap(), (KappaRegime::LargeEc, 100.0));
        let (reg, v) = asymptotic_kappa(&prob(1.0, 1e-4)).unwrap();
        assert_eq!(reg, KappaRegime::SmallEc);
        assert!((v - 0.01).abs() < 1e-15);
        let (reg, v) = asymptotic_kappa(&prob(1.0, 1.0)).unwrap();
        assert_eq!(reg, KappaRegime::Intermediate);
        assert!((v - 1.199679).abs() < 1e-6);
    }

    #[test]
    fn asymptotic_convergence() {
        let k = solve_edge_mode(&prob(1.0, 100.0)).unwrap().value;
        assert!((k / 100.0 - 1.0).abs() <= 1e-3);
        let k = solve_edge_mode(&prob(1.0, 1e-4)).unwrap().value;
        assert!((k / 1e-4f64.sqrt() - 1.0).abs() <= 1e-2);
    }

    #[test]
    fn sandwich_on_grid() {
        for eps in [0.1, 1.0, 10.0] {
            for c in log_grid(1e-3, 1e3, 61) {
                let p = prob(eps, c);
                let k = solve_edge_mode(&p).unwrap().value;
                let lo = kappa_M(&p).unwrap();
                let hi = kappa_m(&p).unwrap();
                assert!(lo <= k && k < hi, "eps={eps} c={c}: {lo} {k} {hi}");
                // κ − c tanh(εc) ≈ 2c·e^{−2εc} is below double resolution past εc ≈ 18
                if eps * c < 15.0 {
                    assert!(lo < k, "eps={eps} c={c}");
                }
            }
        }
    }

    #[test]
    fn residuals_and_brackets_on_grid() {
        for eps in [0.5, 1.0, 3.0] {
            for c in log_grid(1e-2, 1e2, 25) {
                let p = prob(eps, c);
                let k = solve_edge_mode(&p).unwrap();
                assert!(k.residual <= 1e-12 * c.max(1.0));
                let bulk = solve_bulk_modes(&p, 6).unwrap();
                for (i, r) in bulk.iter().enumerate() {
                    let n = (i + 1) as f64;
                    assert!(r.value > (2.0 * n - 1.0) * PI / (2.0 * eps));
                    assert!(r.value < n * PI / eps);
                    assert!(r.residual <= 1e-12 * c.max(1.0) * r.value.max(1.0));
                }
                assert!(bulk.windows(2).all(|w| w[0].value < w[1].value));
            }
        }
    }

    proptest! {
        #[test]
        fn kappa_increasing_in_c(eps in 0.05f64..20.0, c in 1e-3f64..1e3, f in 1.001f64..3.0) {
            let a = solve_edge_mode(&prob(eps, c)).unwrap().value;
            let b = solve_edge_mode(&prob(eps, c * f)).unwrap().value;
            prop_assert!(b > a);
        }

        #[test]
        fn edge_root_matches_oracle(eps in 0.05f64..20.0, c in 1e-3f64..1e3) {
            let k = solve_edge_mode(&prob(eps, c)).unwrap().value;
            let o = oracle_kappa(eps, c);
            prop_assert!((k - o).abs() <= 1e-10 * o.max(1.0));
        }
    }
}
