//! Chiral-bag Dirac spectrum on the 3-ball.
//!
//! Inside the mass gap the regular radial solutions are modified Bessel
//! functions and the boundary condition reduces, per channel, to
//! `F(E) = G(α)` with
//!
//! ```text
//! F(E) = √((m+E)/(m−E)) · I_{κ−1/2}(z) / I_{κ+1/2}(z),   z = R0·√(m² − E²)
//! ```
//!
//! `F` is the boundary ratio `φ₁(R0)/φ₂(R0)`. For the swapped family
//! (`κ → −κ` in the radial system) the Bessel orders trade places and
//! `F_s(E) = 1/F(−E)`. All comparisons are done on `ln F − ln G`.

mod count;
mod profile;
mod shooting;

pub use count::{
    calibrate_counts, count_edge_levels, enumerate_levels, CountCalibration, CountConvention,
    Counting, Families, REFERENCE_COUNTS,
};
pub use profile::{edge_density_ratio, radial_profile, RadialProfile};
pub use shooting::{
    compare_routes, shooting_boundary, shooting_oracle, RouteComparison, ShootingScan,
};

use std::fmt;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::roots::bisect;
use crate::specfun::{bessel_ratio, HalfIntOrder};

/// Sign convention tying `α` to the boundary ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `F = e^{−α}`.
    PaperLiteral,
    /// `F = e^{+α}`: the zero mode at `mR0 = 1` sits at `α = +1.16144` and
    /// edge states need `α > 0`.
    #[default]
    FigureCalibrated,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::PaperLiteral => "paper_literal",
            Convention::FigureCalibrated => "figure_calibrated",
        }
    }

    /// `ln G` for a given `α`.
    pub fn log_target(self, alpha: f64) -> f64 {
        match self {
            Convention::PaperLiteral => -alpha,
            Convention::FigureCalibrated => alpha,
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiracBallProblem {
    pub m: f64,
    pub r0: f64,
    pub alpha: f64,
    pub convention: Convention,
}

impl DiracBallProblem {
    pub fn new(m: f64, r0: f64, alpha: f64, convention: Convention) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) || !(r0 > 0.0 && r0.is_finite()) {
            return domain(format!("need m > 0 and R0 > 0, got m = {m}, R0 = {r0}"));
        }
        if !alpha.is_finite() {
            return domain(format!("α must be finite, got {alpha}"));
        }
        Ok(DiracBallProblem { m, r0, alpha, convention })
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        DiracBallProblem { alpha, ..*self }
    }

    pub fn log_target(&self) -> f64 {
        self.convention.log_target(self.alpha)
    }

    /// Scan interval `(−m + 10⁻⁹m, m − 10⁻⁹m)`.
    pub fn gap_interval(&self) -> (f64, f64) {
        let pad = 1e-9 * self.m;
        (-self.m + pad, self.m - pad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Primary,
    Swapped,
}

/// Partial wave `j = κ − 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Channel {
    pub kappa: u32,
    pub family: Family,
}

impl Channel {
    pub fn new(kappa: u32, family: Family) -> Result<Self> {
        if kappa == 0 {
            return domain("κ must be at least 1");
        }
        Ok(Channel { kappa, family })
    }

    pub fn primary(kappa: u32) -> Self {
        Channel { kappa: kappa.max(1), family: Family::Primary }
    }

    pub fn j(&self) -> f64 {
        f64::from(self.kappa) - 0.5
    }

    pub fn degeneracy(&self) -> u32 {
        2 * self.kappa
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeLevel {
    pub energy: f64,
    pub channel: Channel,
    pub degeneracy: u32,
    /// `|F(E)/G − 1|`.
    pub residual: f64,
}

fn check_gap(p: &DiracBallProblem, e: f64) -> Result<()> {
    if !(e.abs() < p.m) {
        return domain(format!("energy {e} outside the gap (−{m}, {m})", m = p.m));
    }
    Ok(())
}

/// `ln F(E)` for the channel's family.
pub fn log_spectral_function(p: &DiracBallProblem, ch: &Channel, e: f64) -> Result<f64> {
    check_gap(p, e)?;
    let z = p.r0 * ((p.m - e) * (p.m + e)).sqrt();
    let prefactor = 0.5 * ((p.m + e).ln() - (p.m - e).ln());
    let ln_ratio = bessel_ratio(HalfIntOrder::below_kappa(ch.kappa), z)?.ln();
    Ok(match ch.family {
        Family::Primary => prefactor + ln_ratio,
        Family::Swapped => prefactor - ln_ratio,
    })
}

pub fn spectral_function(p: &DiracBallProblem, ch: &Channel, e: f64) -> Result<f64> {
    Ok(log_spectral_function(p, ch, e)?.exp())
}

/// Limits of `ln F` at `E → −m⁺` and `E → m⁻`.
pub fn log_endpoint_limits(p: &DiracBallProblem, ch: &Channel) -> (f64, f64) {
    // small-argument ratio (2κ+1)/z against the √-prefactor
    let l = (f64::from(2 * ch.kappa + 1) / (2.0 * p.m * p.r0)).ln();
    match ch.family {
        Family::Primary => (l, f64::INFINITY),
        Family::Swapped => (f64::NEG_INFINITY, -l),
    }
}

pub const BASE_PANELS: usize = 1024;
const MAX_PANELS: usize = 1 << 16;

/// Sign-change brackets of `g` on `n` uniform panels over `[lo, hi]`.
pub(crate) fn sign_brackets(values: &[f64], grid: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 0..values.len() - 1 {
        let (a, b) = (values[i], values[i + 1]);
        if a == 0.0 {
            out.push((grid[i], grid[i]));
        } else if a.signum() != b.signum() && b != 0.0 {
            out.push((grid[i], grid[i + 1]));
        }
    }
    if values[values.len() - 1] == 0.0 {
        let x = grid[grid.len() - 1];
        out.push((x, x));
    }
    out
}

pub(crate) fn uniform_grid(lo: f64, hi: f64, panels: usize) -> Vec<f64> {
    (0..=panels)
        .map(|i| lo + (hi - lo) * i as f64 / panels as f64)
        .collect()
}

/// Roots of `g` on `[lo, hi]`: sign changes on `BASE_PANELS` panels, panel
/// count doubled until the number of brackets is unchanged over two
/// refinements, then bisection to `width`.
pub(crate) fn scan_roots<G>(g: G, lo: f64, hi: f64, width: f64) -> Result<Vec<f64>>
where
    G: Fn(f64) -> Result<f64>,
{
    let brackets_at = |panels: usize| -> Result<Vec<(f64, f64)>> {
        let grid = uniform_grid(lo, hi, panels);
        let values = grid.iter().map(|&x| g(x)).collect::<Result<Vec<f64>>>()?;
        Ok(sign_brackets(&values, &grid))
    };
    let mut panels = BASE_PANELS;
    let mut history = vec![brackets_at(panels)?];
    while panels < MAX_PANELS {
        panels *= 2;
        history.push(brackets_at(panels)?);
        let n = history.len();
        if n >= 3
            && history[n - 1].len() == history[n - 2].len()
            && history[n - 2].len() == history[n - 3].len()
        {
            break;
        }
    }
    let finest = history.pop().expect("at least one scan");
    finest
        .into_iter()
        .map(|(a, b)| {
            if a == b {
                Ok(a)
            } else {
                bisect(|x| g(x).unwrap_or(f64::NAN), a, b, width)
            }
        })
        .collect()
}

/// All levels of one channel in the gap, ascending.
pub fn solve_channel(p: &DiracBallProblem, ch: &Channel) -> Result<Vec<EdgeLevel>> {
    let target = p.log_target();
    let (lo, hi) = p.gap_interval();
    let roots = scan_roots(|e| Ok(log_spectral_function(p, ch, e)? - target), lo, hi, 1e-15 * p.m)?;
    roots
        .into_iter()
        .map(|e| {
            let residual = (log_spectral_function(p, ch, e)? - target).exp_m1().abs();
            Ok(EdgeLevel { energy: e, channel: *ch, degeneracy: ch.degeneracy(), residual })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSide {
    /// Levels exist for `α` above the threshold.
    Above,
    /// Levels exist for `α` below the threshold.
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExistenceThreshold {
    pub alpha: f64,
    pub side: ThresholdSide,
    /// Whether `F` was strictly increasing on the scan grid. When it is
    /// not, the threshold comes from the scanned extremum of `F`.
    pub monotone: bool,
}

impl ExistenceThreshold {
    pub fn admits(&self, alpha: f64) -> bool {
        match self.side {
            ThresholdSide::Above => alpha > self.alpha,
            ThresholdSide::Below => alpha < self.alpha,
        }
    }
}

/// The `α` at which a level enters the gap through the finite end of the
/// range of `F`.
pub fn existence_threshold(p: &DiracBallProblem, ch: &Channel) -> Result<ExistenceThreshold> {
    let (lo, hi) = p.gap_interval();
    let grid = uniform_grid(lo, hi, BASE_PANELS);
    let values = grid
        .iter()
        .map(|&e| log_spectral_function(p, ch, e))
        .collect::<Result<Vec<f64>>>()?;
    let monotone = values.windows(2).all(|w| w[1] > w[0]);
    let (lim_lo, lim_hi) = log_endpoint_limits(p, ch);
    // the finite end of ln F's range, in terms of ln G
    let (edge, g_above) = match ch.family {
        Family::Primary => {
            let inf = if monotone { lim_lo } else { values.iter().cloned().fold(lim_lo, f64::min) };
            (inf, true)
        }
        Family::Swapped => {
            let sup = if monotone { lim_hi } else { values.iter().cloned().fold(lim_hi, f64::max) };
            (sup, false)
        }
    };
    // ln G = ±α
    let (alpha, side) = match (p.convention, g_above) {
        (Convention::FigureCalibrated, true) => (edge, ThresholdSide::Above),
        (Convention::FigureCalibrated, false) => (edge, ThresholdSide::Below),
        (Convention::PaperLiteral, true) => (-edge, ThresholdSide::Below),
        (Convention::PaperLiteral, false) => (-edge, ThresholdSide::Above),
    };
    Ok(ExistenceThreshold { alpha, side, monotone })
}

/// The `α` for which `E = 0` solves the channel condition.
pub fn zero_mode_alpha(p: &DiracBallProblem, ch: &Channel) -> Result<f64> {
    let ln_f0 = log_spectral_function(p, ch, 0.0)?;
    Ok(match p.convention {
        Convention::FigureCalibrated => ln_f0,
        Convention::PaperLiteral => -ln_f0,
    })
}
