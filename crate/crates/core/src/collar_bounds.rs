//! Lower and upper bounds for the collar problem assembled from the interval
//! solver: the global lower bound `−μ₀²`, the edge-state certificate
//! `−κ_M(μ̲/(1+δ))²`, their asymptotic forms and the gauge-field constant.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, Result, SpectraError};
use crate::robin1d::{kappa_M, kappa_m, solve_edge_mode, RobinProblem};

const DELTA_GRID_POINTS: usize = 10_000;

/// Radial volume weight `√|g̃(r)|` up to a θ-independent factor.
#[derive(Clone)]
pub struct WeightFunction {
    name: String,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl WeightFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), eval: Arc::new(f) }
    }

    /// Constant weight (flat collar).
    pub fn flat() -> Self {
        Self::new("flat", |_| 1.0)
    }

    /// `r^{d−1}`, the radial weight of a `d`-ball.
    pub fn ball(d: u32) -> Self {
        let p = d.saturating_sub(1) as i32;
        Self::new(format!("ball{d}"), move |r: f64| r.powi(p))
    }

    /// Piecewise-linear interpolation of `(r, w)` samples; constant beyond the
    /// end points.
    pub fn from_table(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return domain("weight table needs at least two samples");
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return domain("weight table radii must be strictly increasing");
        }
        if samples.iter().any(|&(_, w)| !(w > 0.0)) {
            return domain("weight table values must be positive");
        }
        Ok(Self::new("table", move |r: f64| {
            let i = samples.partition_point(|&(x, _)| x <= r);
            if i == 0 {
                return samples[0].1;
            }
            if i == samples.len() {
                return samples[samples.len() - 1].1;
            }
            let (x0, y0) = samples[i - 1];
            let (x1, y1) = samples[i];
            y0 + (y1 - y0) * (r - x0) / (x1 - x0)
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.eval)(r)
    }
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction").field("name", &self.name).finish()
    }
}

/// Collar data: boundary radius, collar width, metric pinch and the extremes
/// of the Robin function `μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollarGeometry {
    pub r0: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub mu_bar: f64,
    pub mu_under: f64,
}

impl CollarGeometry {
    /// `δ = 0` is accepted as the flat-metric limit.
    pub fn new(r0: f64, epsilon: f64, delta: f64, mu_bar: f64, mu_under: f64) -> Result<Self> {
        if !(r0 > 0.0) || !(epsilon > 0.0) || !(epsilon < r0) {
            return domain(format!("need 0 < ε < R0, got ε = {epsilon}, R0 = {r0}"));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(SpectraError::CollarTooWide { delta });
        }
        if !(mu_under <= mu_bar) || !mu_bar.is_finite() || !mu_under.is_finite() {
            return domain(format!("need μ̲ ≤ μ̄, got μ̲ = {mu_under}, μ̄ = {mu_bar}"));
        }
        Ok(Self { r0, epsilon, delta, mu_bar, mu_under })
    }

    /// Geometry whose `δ` is measured from `w` by [`compute_delta`].
    pub fn from_weight(
        w: &WeightFunction,
        r0: f64,
        epsilon: f64,
        mu_bar: f64,
        mu_under: f64,
    ) -> Result<Self> {
        let delta = compute_delta(w, r0, epsilon)?;
        Self::new(r0, epsilon, delta, mu_bar, mu_under)
    }

    pub fn inner_radius(&self) -> f64 {
        self.r0 - self.epsilon
    }
}

/// `δ = max_{r ∈ [R0−ε, R0]} |√(w(r)/w(R0)) − 1|` on a 10⁴-point grid.
pub fn compute_delta(w: &WeightFunction, r0: f64, epsilon: f64) -> Result<f64> {
    if !(r0 > 0.0) || !(epsilon > 0.0) || !(epsilon < r0) {
        return domain(format!("need 0 < ε < R0, got ε = {epsilon}, R0 = {r0}"));
    }
    let w0 = w.eval(r0);
    if !(w0 > 0.0) {
        return domain(format!("weight must be positive at R0, got {w0}"));
    }
    let a = r0 - epsilon;
    let mut delta: f64 = 0.0;
    for i in 0..DELTA_GRID_POINTS {
        let r = if i + 1 == DELTA_GRID_POINTS {
            r0
        } else {
            a + epsilon * i as f64 / (DELTA_GRID_POINTS - 1) as f64
        };
        let wr = w.eval(r);
        if !(wr > 0.0) {
            return domain(format!("weight must be positive on the collar, got w({r}) = {wr}"));
        }
        delta = delta.max(((wr / w0).sqrt() - 1.0).abs());
    }
    if delta >= 1.0 {
        return Err(SpectraError::CollarTooWide { delta });
    }
    Ok(delta)
}

/// `μ₀ = κ_m(μ̄/(1−δ))`; the operator satisfies `⟨Φ,−ΔΦ⟩ ≥ −μ₀²‖Φ‖²`.
/// Zero when `μ̄ ≤ 0`.
pub fn lower_bound_mu0(geom: &CollarGeometry) -> f64 {
    if geom.mu_bar <= 0.0 {
        return 0.0;
    }
    let p = RobinProblem::new(geom.epsilon, geom.mu_bar / (1.0 - geom.delta))
        .expect("validated geometry");
    kappa_m(&p).expect("positive Robin constant")
}

/// `−κ_M(μ̲/(1+δ))²`, a negative upper bound on the Rayleigh quotient of the
/// trial edge state. `None` when `μ̲ ≤ 0` (no certificate).
pub fn upper_bound_edge(geom: &CollarGeometry) -> Option<f64> {
    if geom.mu_under <= 0.0 {
        return None;
    }
    let p = RobinProblem::new(geom.epsilon, geom.mu_under / (1.0 + geom.delta))
        .expect("validated geometry");
    let k = kappa_M(&p).expect("positive Robin constant");
    Some(-k * k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CollarRegime {
    Large,
    Small,
    Intermediate,
}

impl fmt::Display for CollarRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CollarRegime::Large => "large",
            CollarRegime::Small => "small",
            CollarRegime::Intermediate => "intermediate",
        };
        f.write_str(s)
    }
}

/// Cutoffs on `μR0` separating the asymptotic regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeThresholds {
    /// `μ̲·R0` at or above which the large regime applies.
    pub large: f64,
    /// `μ̄·R0` at or below which the small regime applies.
    pub small: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self { large: 10.0, small: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichReport {
    pub lower: f64,
    pub upper: f64,
    pub regime: CollarRegime,
    /// Large regime: `(−μ̄², −μ̲²)`. Small regime:
    /// `(−μ̄/(ε(1−δ)), −μ̲/(ε(1+δ)))`.
    pub asymptotic: Option<BoundPair>,
}

pub fn sandwich_report(geom: &CollarGeometry, thresholds: RegimeThresholds) -> Result<SandwichReport> {
    let upper = upper_bound_edge(geom).ok_or_else(|| {
        SpectraError::Domain(format!("no edge certificate for μ̲ = {}", geom.mu_under))
    })?;
    let mu0 = lower_bound_mu0(geom);
    let lower = -mu0 * mu0;
    let (regime, asymptotic) = if geom.mu_under * geom.r0 >= thresholds.large {
        let pair = BoundPair { lower: -geom.mu_bar * geom.mu_bar, upper: -geom.mu_under * geom.mu_under };
        (CollarRegime::Large, Some(pair))
    } else if geom.mu_bar * geom.r0 <= thresholds.small && geom.epsilon < geom.r0 {
        let pair = BoundPair {
            lower: -geom.mu_bar / (geom.epsilon * (1.0 - geom.delta)),
            upper: -geom.mu_under / (geom.epsilon * (1.0 + geom.delta)),
        };
        (CollarRegime::Small, Some(pair))
    } else {
        (CollarRegime::Intermediate, None)
    };
    Ok(SandwichReport { lower, upper, regime, asymptotic })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaugeBoundInput {
    pub k_bar: f64,
    pub lambda_min: f64,
    pub lambda_tilde_max: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl GaugeBoundInput {
    pub fn new(k_bar: f64, lambda_min: f64, lambda_tilde_max: f64, delta: f64, epsilon: f64) -> Result<Self> {
        if !(k_bar >= 0.0) || !(lambda_min > 0.0) || !(lambda_tilde_max > 0.0) || !(epsilon > 0.0) {
            return domain("gauge bound needs K̄ ≥ 0 and positive λ_min, λ̃_max, ε");
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(SpectraError::CollarTooWide { delta });
        }
        Ok(Self { k_bar, lambda_min, lambda_tilde_max, delta, epsilon })
    }
}

/// Gauge-field lower-bound constant. The operator satisfies
/// `⟨A,−ΔA⟩ ≥ −C‖A‖²`; `squared` is `κ(c)²` (dimensionally matching the
/// scalar bound) and `first_power` is `κ(c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaugeBound {
    pub robin_constant: f64,
    pub first_power: f64,
    pub squared: f64,
}

/// Robin constant `c = K̄ λ̃_max / (λ_min (1−δ))` fed to the interval solver.
pub fn gauge_bound_c(inp: &GaugeBoundInput) -> GaugeBound {
    let c = inp.k_bar * inp.lambda_tilde_max / (inp.lambda_min * (1.0 - inp.delta));
    if c <= 0.0 {
        return GaugeBound { robin_constant: 0.0, first_power: 0.0, squared: 0.0 };
    }
    let p = RobinProblem::new(inp.epsilon, c).expect("validated input");
    let kappa = solve_edge_mode(&p).expect("c > 0").value;
    GaugeBound { robin_constant: c, first_power: kappa, squared: kappa * kappa }
}
