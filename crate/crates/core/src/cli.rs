//! Command-line front end: figure datasets, bounds reports and the
//! cross-validation suites.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::aps_bound::{ansatz_profile, integral_identity_check, theorem_bound, ApsInput};
use crate::collar_bounds::{
    gauge_bound_c, lower_bound_mu0, sandwich_report, upper_bound_edge, CollarGeometry, GaugeBoundInput,
    RegimeThresholds, WeightFunction,
};
use crate::dirac_ball::{
    calibrate_counts, compare_routes, edge_density_ratio, enumerate_levels, existence_threshold,
    radial_profile, shooting_oracle, solve_channel, zero_mode_alpha, Channel, Convention, Counting,
    DiracBallProblem, Families, Family, REFERENCE_COUNTS,
};
use crate::error::SpectraError;
use crate::fd_oracle::{
    build_interval, build_radial, convergence_study, convergence_study_nth, eigenvector, lowest_eigenvalues,
    mass_fraction_beyond, sturm_count, DiscreteProblem,
};
use crate::robin1d::{kappa_M, kappa_m, solve_bulk_modes, solve_edge_mode, RobinProblem};

pub const THREADS_ENV: &str = "EDGE_SPECTRA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "edge-spectra", version, about = "Edge-state spectra for Robin and chiral boundary conditions")]
pub struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Significant digits for CSV numbers.
    #[arg(long, default_value_t = 9, global = true, value_parser = clap::value_parser!(u32).range(1..=17))]
    pub precision: u32,
    /// Worker threads (default: EDGE_SPECTRA_THREADS, then the processor count).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact edge root and its analytic bounds over a range of Robin constants.
    Fig2(Fig2Args),
    /// Radial profile and density of the lowest j = 1/2 gap level.
    Fig3(Fig3Args),
    /// Number of gap levels for a list of chiral angles.
    Fig4(Fig4Args),
    /// Run the cross-validation suites.
    Validate(ValidateArgs),
    /// Collar bounds for a weighted radial geometry.
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Fig2Args {
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub c_min: f64,
    #[arg(long, default_value_t = 4.0)]
    pub c_max: f64,
    #[arg(long, default_value_t = 80)]
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    PaperLiteral,
    FigureCalibrated,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::PaperLiteral => Convention::PaperLiteral,
            ConventionArg::FigureCalibrated => Convention::FigureCalibrated,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Fig3Args {
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,
    /// Chiral angle; defaults to the j = 1/2 zero mode of (m, R0).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub n_points: usize,
    #[arg(long, value_enum, default_value_t = ConventionArg::FigureCalibrated)]
    pub convention: ConventionArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CountingArg {
    Levels,
    DegeneracyWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamiliesArg {
    PrimaryOnly,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct Fig4Args {
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 3.0, 4.0, 5.0], allow_hyphen_values = true)]
    pub alphas: Vec<f64>,
    #[arg(long, value_enum, default_value_t = CountingArg::Levels)]
    pub counting: CountingArg,
    #[arg(long, value_enum, default_value_t = FamiliesArg::PrimaryOnly)]
    pub families: FamiliesArg,
    #[arg(long, value_enum, default_value_t = ConventionArg::FigureCalibrated)]
    pub convention: ConventionArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Robin,
    Dirac,
    Aps,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Finest grid used by the finite-difference checks.
    #[arg(long, default_value_t = 4000)]
    pub grid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightArg {
    Flat,
    Ball2,
    Ball3,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum, default_value_t = WeightArg::Ball3)]
    pub weight: WeightArg,
    /// Two-column `r, w` file for `--weight table`.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Overrides the metric pinch computed from the weight.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub mu_bar: f64,
    /// Defaults to `--mu-bar`.
    #[arg(long, allow_hyphen_values = true)]
    pub mu_under: Option<f64>,
    /// Also solve the weighted radial problem and check the enclosure.
    #[arg(long)]
    pub fd: bool,
    #[arg(long, default_value_t = 4000)]
    pub n: usize,
    #[arg(long)]
    pub k_bar: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_tilde_max: f64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("validation failed: {0}")]
    ValidationFailed(String),
    #[error("{0}")]
    EmptyResult(String),
    #[error("{0}")]
    Geometry(String),
    #[error(transparent)]
    Solver(SpectraError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ValidationFailed(_) | CliError::Solver(_) | CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::EmptyResult(_) => 3,
            CliError::Geometry(_) => 4,
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::CollarTooWide { .. } => CliError::Geometry(e.to_string()),
            SpectraError::Domain(msg) => CliError::Usage(msg),
            other => CliError::Solver(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// `|measured − expected| ≤ tolerance`.
    fn near(name: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        Check { name: name.into(), measured, tolerance, pass: (measured - expected).abs() <= tolerance }
    }

    fn flag(name: impl Into<String>, measured: f64, pass: bool) -> Self {
        Check { name: name.into(), measured, tolerance: 0.0, pass }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

/// Output of one command, renderable as CSV or JSON.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub config: Vec<(String, Value)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub results: Value,
    pub checks: Vec<Check>,
}

/// `x` to `digits` significant digits; scientific notation outside
/// `[1e-6, 1e6)`.
pub fn format_number(x: f64, digits: u32) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let digits = digits.max(1) as usize;
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("exponent digits");
    if !(-6..6).contains(&exp) {
        return sci;
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

fn render_cell(c: &Cell, digits: u32) -> String {
    match c {
        Cell::Num(x) => format_number(*x, digits),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn render_scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Dataset {
    pub fn to_csv(&self, digits: u32) -> String {
        let mut out = String::new();
        for (k, v) in &self.config {
            out.push_str(&format!("# {k}: {}\n", render_scalar(v)));
        }
        for c in &self.checks {
            out.push_str(&format!(
                "# check {}: measured {} tolerance {} {}\n",
                c.name,
                format_number(c.measured, digits),
                format_number(c.tolerance, digits),
                if c.pass { "pass" } else { "FAIL" }
            ));
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| render_cell(c, digits)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let config: serde_json::Map<String, Value> = self.config.iter().cloned().collect();
        let doc = json!({ "config": config, "results": self.results, "checks": self.checks });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn config(command: &str, pairs: Vec<(&str, Value)>) -> Vec<(String, Value)> {
    let mut out = vec![("command".to_string(), Value::from(command))];
    out.extend(pairs.into_iter().map(|(k, v)| (k.to_string(), v)));
    out
}

pub fn cmd_fig2(a: &Fig2Args) -> Result<Dataset, CliError> {
    if !(a.c_min > 0.0 && a.c_min < a.c_max) {
        return Err(CliError::Usage(format!("need 0 < c_min < c_max, got {} and {}", a.c_min, a.c_max)));
    }
    if a.n_points < 2 {
        return Err(CliError::Usage("need at least 2 points".into()));
    }
    if !(a.epsilon > 0.0) {
        return Err(CliError::Usage(format!("ε must be positive, got {}", a.epsilon)));
    }
    let mut rows = Vec::with_capacity(a.n_points);
    let mut records = Vec::with_capacity(a.n_points);
    let mut strict = true;
    for i in 0..a.n_points {
        let c = a.c_min + (a.c_max - a.c_min) * i as f64 / (a.n_points - 1) as f64;
        let p = RobinProblem::new(a.epsilon, c)?;
        let exact = solve_edge_mode(&p).ok_or_else(|| CliError::Solver(SpectraError::NoBracket { lo: 0.0, hi: c }))?.value;
        let upper = kappa_m(&p)?;
        let lower = kappa_M(&p)?;
        strict &= lower < exact && exact < upper;
        rows.push(vec![Cell::Num(c), Cell::Num(exact), Cell::Num(upper), Cell::Num(lower)]);
        records.push(json!({ "c": c, "kappa_exact": exact, "kappa_m": upper, "kappa_M": lower }));
    }
    Ok(Dataset {
        config: config(
            "fig2",
            vec![
                ("epsilon", a.epsilon.into()),
                ("c_min", a.c_min.into()),
                ("c_max", a.c_max.into()),
                ("n_points", a.n_points.into()),
            ],
        ),
        header: ["c", "kappa_exact", "kappa_m", "kappa_M"].map(String::from).to_vec(),
        rows,
        results: Value::Array(records),
        checks: vec![Check::flag("sandwich_strict", a.n_points as f64, strict)],
    })
}

pub fn cmd_fig3(a: &Fig3Args) -> Result<Dataset, CliError> {
    let convention = Convention::from(a.convention);
    let base = DiracBallProblem::new(a.m, a.r0, 0.0, convention)?;
    let ch = Channel::primary(1);
    let alpha = match a.alpha {
        Some(x) => x,
        None => zero_mode_alpha(&base, &ch)?,
    };
    let p = base.with_alpha(alpha);
    let levels = solve_channel(&p, &ch)?;
    let level = *levels.first().ok_or_else(|| {
        CliError::EmptyResult(format!(
            "no j = 1/2 gap level for m = {}, R0 = {}, α = {alpha} ({convention})",
            a.m, a.r0
        ))
    })?;
    if a.n_points < 2 {
        return Err(CliError::Usage("need at least 2 points".into()));
    }
    let prof = radial_profile(&p, &level, a.n_points)?;
    let ratio = edge_density_ratio(&p, &level)?;
    let rows = (0..prof.r_grid.len())
        .map(|i| {
            vec![Cell::Num(prof.r_grid[i]), Cell::Num(prof.phi1[i]), Cell::Num(prof.phi2[i]), Cell::Num(prof.density[i])]
        })
        .collect();
    let shoot = shooting_oracle(&p, &ch, level.energy)?;
    Ok(Dataset {
        config: config(
            "fig3",
            vec![
                ("m", a.m.into()),
                ("R0", a.r0.into()),
                ("alpha", alpha.into()),
                ("n_points", a.n_points.into()),
                ("convention", convention.name().into()),
                ("energy", level.energy.into()),
                ("density_ratio", ratio.into()),
            ],
        ),
        header: ["r", "phi1", "phi2", "density"].map(String::from).to_vec(),
        rows,
        results: json!({ "level": level, "density_ratio": ratio, "profile": prof }),
        checks: vec![Check::near("shooting_mismatch_at_level", shoot, 0.0, 1e-8)],
    })
}

pub fn cmd_fig4(a: &Fig4Args) -> Result<Dataset, CliError> {
    let convention = Convention::from(a.convention);
    let counting = match a.counting {
        CountingArg::Levels => Counting::Levels,
        CountingArg::DegeneracyWeighted => Counting::DegeneracyWeighted,
    };
    let families = match a.families {
        FamiliesArg::PrimaryOnly => Families::PrimaryOnly,
        FamiliesArg::Both => Families::Both,
    };
    if a.alphas.is_empty() {
        return Err(CliError::Usage("empty α list".into()));
    }
    let reference_applies = (a.m * a.r0 - 1.0).abs() < 1e-12;
    let mut rows = Vec::new();
    let mut per_alpha = Vec::new();
    let mut counts = Vec::new();
    for &alpha in &a.alphas {
        let p = DiracBallProblem::new(a.m, a.r0, alpha, convention)?;
        let levels = enumerate_levels(&p, families)?;
        let count: u64 = match counting {
            Counting::Levels => levels.len() as u64,
            Counting::DegeneracyWeighted => levels.iter().map(|l| u64::from(l.degeneracy)).sum(),
        };
        counts.push(count);
        let reference = REFERENCE_COUNTS
            .iter()
            .find(|r| reference_applies && r.0 == alpha)
            .map(|r| r.1);
        let (ref_cell, mismatch_cell) = match reference {
            Some(r) => (Cell::Int(r as i64), Cell::Text((r != count).to_string())),
            None => (Cell::Empty, Cell::Empty),
        };
        rows.push(vec![Cell::Num(alpha), Cell::Int(count as i64), ref_cell, mismatch_cell]);
        let breakdown: Vec<Value> = levels
            .iter()
            .map(|l| {
                json!({
                    "family": l.channel.family,
                    "j": l.channel.j(),
                    "E": l.energy,
                    "degeneracy": l.degeneracy,
                    "residual": l.residual,
                })
            })
            .collect();
        per_alpha.push(json!({ "alpha": alpha, "count": count, "reference": reference, "levels": breakdown }));
    }
    let ascending = a.alphas.windows(2).all(|w| w[0] <= w[1]);
    let monotone = !ascending || counts.windows(2).all(|w| w[0] <= w[1]);
    let calibration = if reference_applies { Some(calibrate_counts(a.m, a.r0)?) } else { None };
    Ok(Dataset {
        config: config(
            "fig4",
            vec![
                ("m", a.m.into()),
                ("R0", a.r0.into()),
                ("alphas", json!(a.alphas)),
                ("counting", json!(counting)),
                ("families", json!(families)),
                ("convention", convention.name().into()),
            ],
        ),
        header: ["alpha", "count", "reference_count", "mismatch"].map(String::from).to_vec(),
        rows,
        results: json!({ "counts": per_alpha, "calibration": calibration }),
        checks: vec![Check::flag("counts_nondecreasing", counts.len() as f64, monotone)],
    })
}

fn robin_checks(grid: usize) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let grids: Vec<usize> = [8, 4, 2, 1].iter().map(|d| grid / d).collect();
    if grids[0] < 3 {
        return Err(CliError::Usage(format!("grid {grid} too coarse")));
    }
    let p = RobinProblem::new(1.0, 1.0)?;
    let kappa = solve_edge_mode(&p).expect("c > 0").value;
    let report = convergence_study(&DiscreteProblem::Interval(p.clone()), &grids)?;
    checks.push(Check::near("robin.order", report.estimated_order.unwrap_or(f64::NAN), 2.0, 0.2));
    checks.push(Check::near(
        "robin.extrapolated_vs_minus_kappa_sq",
        report.extrapolated.unwrap_or(f64::NAN),
        -kappa * kappa,
        1e-6,
    ));
    let mut worst_edge: f64 = 0.0;
    let mut worst_bulk: f64 = 0.0;
    for &eps in &[0.5, 1.0, 2.0] {
        for &c in &[0.5, 1.0, 2.0, 5.0] {
            let q = RobinProblem::new(eps, c)?;
            let k = solve_edge_mode(&q).expect("c > 0").value;
            let k1 = solve_bulk_modes(&q, 1)?[0].value;
            let problem = DiscreteProblem::Interval(q);
            let edge = convergence_study(&problem, &grids)?.extrapolated.unwrap_or(f64::NAN);
            let bulk = convergence_study_nth(&problem, &grids, 1)?.extrapolated.unwrap_or(f64::NAN);
            worst_edge = worst_edge.max(((edge + k * k) / (k * k)).abs());
            worst_bulk = worst_bulk.max(((bulk - k1 * k1) / (k1 * k1)).abs());
        }
    }
    checks.push(Check::near("robin.oracle_grid_edge_rel", worst_edge, 0.0, 1e-6));
    checks.push(Check::near("robin.oracle_grid_bulk_rel", worst_bulk, 0.0, 1e-5));
    for &c in &[-5.0, -0.5, 0.0, 0.5, 1.0, 10.0] {
        let t = build_interval(&RobinProblem::new(1.0, c)?, 500)?;
        // c = 0 has an exact zero mode, counted below a tiny negative shift
        let n = sturm_count(&t, -1e-9);
        let want = usize::from(c > 0.0);
        checks.push(Check::flag(format!("robin.negative_count_c={c}"), n as f64, n == want));
    }
    let t = build_interval(&RobinProblem::new(1.0, 10.0)?, 2000)?;
    let ev = lowest_eigenvalues(&t, 1)?[0];
    let frac = mass_fraction_beyond(&t, &eigenvector(&t, ev), 0.8);
    checks.push(Check::flag("robin.localization_outer_20pct", frac, frac >= 0.9));
    let w = WeightFunction::ball(3);
    let geom = CollarGeometry::from_weight(&w, 1.0, 0.1, 1.0, 1.0)?;
    let radial = lowest_eigenvalues(&build_radial(&w, &geom, 1.0, None, grid)?, 1)?[0];
    let lower = -lower_bound_mu0(&geom).powi(2);
    let upper = upper_bound_edge(&geom).unwrap_or(f64::NAN);
    checks.push(Check::flag("robin.ball3_enclosure", radial, lower <= radial && radial <= upper));
    let mut strict = true;
    for i in 0..80 {
        let c = 0.05 + (4.0 - 0.05) * f64::from(i) / 79.0;
        let q = RobinProblem::new(1.0, c)?;
        let k = solve_edge_mode(&q).expect("c > 0").value;
        strict &= kappa_M(&q)? < k && k < kappa_m(&q)?;
    }
    checks.push(Check::flag("robin.fig2_sandwich", 80.0, strict));
    Ok(checks)
}

/// Channels up to `j = 21/2`.
const ROUTE_KAPPA_MAX: u32 = 11;

fn dirac_checks() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let base = DiracBallProblem::new(1.0, 1.0, 0.0, Convention::FigureCalibrated)?;
    let ch = Channel::primary(1);
    let alpha = zero_mode_alpha(&base, &ch)?;
    checks.push(Check::near("dirac.zero_mode_alpha", alpha, 1.16144, 1e-5));
    let level = solve_channel(&base.with_alpha(alpha), &ch)?;
    let e0 = level.first().map_or(f64::NAN, |l| l.energy);
    checks.push(Check::near("dirac.zero_mode_energy", e0, 0.0, 1e-6));
    let m0 = shooting_oracle(&base.with_alpha(alpha), &ch, 0.0)?;
    checks.push(Check::near("dirac.zero_mode_shooting_mismatch", m0, 0.0, 1e-8));
    let thr = existence_threshold(&base, &ch)?;
    checks.push(Check::near("dirac.threshold_j1/2", thr.alpha, 1.5f64.ln(), 1e-6));

    let alphas = [0.5, 1.0, 2.0, 3.0];
    let mut worst: f64 = 0.0;
    for family in [Family::Primary, Family::Swapped] {
        for kappa in 1..=ROUTE_KAPPA_MAX {
            let c = Channel::new(kappa, family)?;
            for cmp in compare_routes(&base, &c, &alphas, 1e-8 * base.m)? {
                worst = worst.max(cmp.max_difference);
            }
        }
    }
    checks.push(Check::near("dirac.two_route_max_difference", worst, 0.0, 1e-8 * base.m));
    Ok(checks)
}

fn aps_checks() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let b = theorem_bound(&ApsInput::new(10.0, 10.0, 1.0, 0.1, 0.0, 1.0)?);
    checks.push(Check::near("aps.theorem_bound", b, -4.432146, 1e-6));
    for &k in &[0.25, 0.5, 1.0, 2.0, 4.0] {
        let c = integral_identity_check(k)?;
        checks.push(Check::near(format!("aps.integral_identity_k={k}"), c.lhs, c.rhs, 1e-8 * c.rhs));
    }
    let (lambda, eps, r0) = (10.0, 1.0, 2.0);
    let h = 1e-4 * eps;
    let f = ansatz_profile(lambda, eps, r0, &[r0, r0 - h, r0 - 2.0 * h, r0 - 3.0 * h])?;
    let slope = (11.0 * f[0] - 18.0 * f[1] + 9.0 * f[2] - 2.0 * f[3]) / (6.0 * h);
    checks.push(Check::near("aps.profile_slope_rel", slope / lambda, 1.0, 1e-6));
    Ok(checks)
}

pub fn cmd_validate(a: &ValidateArgs) -> Result<Dataset, CliError> {
    let mut checks = Vec::new();
    if matches!(a.suite, Suite::Robin | Suite::All) {
        checks.extend(robin_checks(a.grid)?);
    }
    if matches!(a.suite, Suite::Dirac | Suite::All) {
        checks.extend(dirac_checks()?);
    }
    if matches!(a.suite, Suite::Aps | Suite::All) {
        checks.extend(aps_checks()?);
    }
    let suite = format!("{:?}", a.suite).to_lowercase();
    let rows = checks
        .iter()
        .map(|c| vec![Cell::Text(c.name.clone()), Cell::Num(c.measured), Cell::Num(c.tolerance), Cell::Text(c.pass.to_string())])
        .collect();
    let passed = checks.iter().filter(|c| c.pass).count();
    Ok(Dataset {
        config: config("validate", vec![("suite", suite.into()), ("grid", a.grid.into())]),
        header: ["name", "measured", "tolerance", "pass"].map(String::from).to_vec(),
        rows,
        results: json!({ "passed": passed, "total": checks.len() }),
        checks,
    })
}

fn read_table(path: &PathBuf) -> Result<Vec<(f64, f64)>, CliError> {
    let text = fs::read_to_string(path)?;
    let mut points = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let parsed: Option<Vec<f64>> = fields.iter().map(|s| s.parse().ok()).collect();
        match parsed.as_deref() {
            Some([r, w]) => points.push((*r, *w)),
            // a non-numeric first line is a header
            _ if n == 0 => continue,
            _ => return Err(CliError::Usage(format!("{}:{}: expected two numbers", path.display(), n + 1))),
        }
    }
    Ok(points)
}

pub fn cmd_bounds(a: &BoundsArgs) -> Result<Dataset, CliError> {
    let weight = match a.weight {
        WeightArg::Flat => WeightFunction::flat(),
        WeightArg::Ball2 => WeightFunction::ball(2),
        WeightArg::Ball3 => WeightFunction::ball(3),
        WeightArg::Table => {
            let path = a.table.as_ref().ok_or_else(|| CliError::Usage("--weight table needs --table".into()))?;
            WeightFunction::from_table(read_table(path)?)?
        }
    };
    let mu_under = a.mu_under.unwrap_or(a.mu_bar);
    let geom = match a.delta {
        Some(d) => CollarGeometry::new(a.r0, a.epsilon, d, a.mu_bar, mu_under)?,
        None => CollarGeometry::from_weight(&weight, a.r0, a.epsilon, a.mu_bar, mu_under)?,
    };
    let mu0 = lower_bound_mu0(&geom);
    let upper = upper_bound_edge(&geom);
    let sandwich = sandwich_report(&geom, RegimeThresholds::default()).ok();
    let mut results = serde_json::Map::new();
    results.insert("geometry".into(), json!(geom));
    results.insert("mu0".into(), json!(mu0));
    results.insert("lower".into(), json!(-mu0 * mu0));
    results.insert("upper_edge".into(), json!(upper));
    results.insert("edge_certificate".into(), json!(upper.is_some()));
    results.insert("regime".into(), json!(sandwich.as_ref().map(|s| s.regime)));
    results.insert("asymptotic".into(), json!(sandwich.as_ref().and_then(|s| s.asymptotic)));
    let mut checks = Vec::new();
    let mut rows = vec![
        vec![Cell::Text("delta".into()), Cell::Num(geom.delta)],
        vec![Cell::Text("mu0".into()), Cell::Num(mu0)],
        vec![Cell::Text("lower".into()), Cell::Num(-mu0 * mu0)],
        vec![Cell::Text("upper_edge".into()), upper.map_or(Cell::Empty, Cell::Num)],
        vec![
            Cell::Text("regime".into()),
            sandwich.as_ref().map_or(Cell::Empty, |s| Cell::Text(s.regime.to_string())),
        ],
    ];
    if a.fd {
        if (geom.mu_bar - geom.mu_under).abs() > 0.0 {
            return Err(CliError::Usage("the FD enclosure needs constant Robin data (mu_under = mu_bar)".into()));
        }
        let t = build_radial(&weight, &geom, geom.mu_bar, None, a.n)?;
        let ev = lowest_eigenvalues(&t, 1)?[0];
        let inside = -mu0 * mu0 <= ev && upper.map_or(true, |u| ev <= u);
        results.insert("fd_lowest".into(), json!(ev));
        results.insert("fd_enclosure".into(), json!(inside));
        rows.push(vec![Cell::Text("fd_lowest".into()), Cell::Num(ev)]);
        checks.push(Check::flag("fd_enclosure", ev, inside));
    }
    if let Some(k_bar) = a.k_bar {
        let g = gauge_bound_c(&GaugeBoundInput::new(k_bar, a.lambda_min, a.lambda_tilde_max, geom.delta, geom.epsilon)?);
        results.insert("gauge".into(), json!(g));
        rows.push(vec![Cell::Text("gauge_robin_constant".into()), Cell::Num(g.robin_constant)]);
        rows.push(vec![Cell::Text("gauge_first_power".into()), Cell::Num(g.first_power)]);
        rows.push(vec![Cell::Text("gauge_squared".into()), Cell::Num(g.squared)]);
    }
    Ok(Dataset {
        config: config(
            "bounds",
            vec![
                ("weight", weight.name().into()),
                ("R0", a.r0.into()),
                ("epsilon", a.epsilon.into()),
                ("delta", json!(a.delta)),
                ("mu_bar", a.mu_bar.into()),
                ("mu_under", mu_under.into()),
                ("fd", a.fd.into()),
                ("n", a.n.into()),
            ],
        ),
        header: vec!["quantity".into(), "value".into()],
        rows,
        results: Value::Object(results),
        checks,
    })
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag {
        return if n == 0 { Err(CliError::Usage("--threads must be positive".into())) } else { Ok(Some(n)) };
    }
    match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        },
        Err(_) => Ok(None),
    }
}

/// Execute a parsed command and write its output.
pub fn execute(cli: &Cli) -> Result<Dataset, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(cli.threads)? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let data = pool.install(|| match &cli.command {
        Command::Fig2(a) => cmd_fig2(a),
        Command::Fig3(a) => cmd_fig3(a),
        Command::Fig4(a) => cmd_fig4(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Bounds(a) => cmd_bounds(a),
    })?;
    let text = match cli.format {
        Format::Csv => data.to_csv(cli.precision),
        Format::Json => data.to_json(),
    };
    match &cli.output {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    if matches!(cli.command, Command::Validate(_)) && !data.all_pass() {
        let failed: Vec<&str> = data.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        return Err(CliError::ValidationFailed(failed.join(", ")));
    }
    Ok(data)
}

/// Parse `args`, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("edge-spectra: {e}");
            e.exit_code()
        }
    }
}
