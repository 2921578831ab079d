//! Finite-difference oracle: the interval and weighted-radial Robin problems
//! discretised as symmetric tridiagonal matrices and solved by Sturm-sequence
//! bisection.
//!
//! The scheme is the conservative three-point stencil with half cells at
//! both end points. Neumann at the inner end and Robin `u' = μu` at the outer
//! end are eliminated through second-order ghost points, giving a
//! generalised problem `A u = λ B u` with `A` symmetric and `B` the diagonal
//! lumped mass. The similarity `v = B^{1/2} u` turns it into the symmetric
//! tridiagonal `B^{-1/2} A B^{-1/2}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::collar_bounds::{CollarGeometry, WeightFunction};
use crate::error::{domain, Result};
use crate::robin1d::RobinProblem;

const EIGEN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    /// Grid spacing.
    pub h: f64,
    /// Node positions.
    pub nodes: Vec<f64>,
    /// Lumped mass `B`; eigenvectors of the symmetric form map back to nodal
    /// values through `u = v / √B`.
    pub mass: Vec<f64>,
    pub meta: String,
}

impl TridiagonalOperator {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.offdiag[i - 1].abs();
            }
            if i + 1 < n {
                r += self.offdiag[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }
}

/// Assemble `B^{-1/2} A B^{-1/2}` from node weights, mid-point weights and a
/// potential sampled at the nodes.
fn assemble(
    nodes: Vec<f64>,
    h: f64,
    w_node: &[f64],
    w_mid: &[f64],
    potential: &[f64],
    robin: f64,
    meta: String,
) -> TridiagonalOperator {
    let n = nodes.len();
    let mut mass: Vec<f64> = w_node.iter().map(|w| h * w).collect();
    mass[0] *= 0.5;
    mass[n - 1] *= 0.5;

    let mut stiff_diag = vec![0.0; n];
    for i in 0..n - 1 {
        let flux = w_mid[i] / h;
        stiff_diag[i] += flux;
        stiff_diag[i + 1] += flux;
    }
    stiff_diag[n - 1] -= robin * w_node[n - 1];

    let diag = (0..n)
        .map(|i| stiff_diag[i] / mass[i] + potential[i])
        .collect();
    let offdiag = (0..n - 1)
        .map(|i| -(w_mid[i] / h) / (mass[i] * mass[i + 1]).sqrt())
        .collect();
    TridiagonalOperator { diag, offdiag, h, nodes, mass, meta }
}

/// `−φ''` on `[0, ε]` with `φ'(0) = 0`, `φ'(ε) = cφ(ε)`, on `n` nodes.
pub fn build_interval(p: &RobinProblem, n: usize) -> Result<TridiagonalOperator> {
    if n < 3 {
        return domain(format!("need at least 3 nodes, got {n}"));
    }
    let eps = p.epsilon();
    let h = eps / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n).map(|i| eps * i as f64 / (n - 1) as f64).collect();
    let ones = vec![1.0; n];
    let zeros = vec![0.0; n];
    let meta = format!("interval eps={eps} c={} n={n}", p.c());
    Ok(assemble(nodes, h, &ones, &ones[..n - 1], &zeros, p.c(), meta))
}

/// `−(1/w)(w u')' + V(r) u` on `[R0−ε, R0]`, Neumann inside, `u'(R0) = μ u(R0)`.
pub fn build_radial(
    w: &WeightFunction,
    geom: &CollarGeometry,
    mu: f64,
    angular: Option<&(dyn Fn(f64) -> f64 + Sync)>,
    n: usize,
) -> Result<TridiagonalOperator> {
    if n < 3 {
        return domain(format!("need at least 3 nodes, got {n}"));
    }
    let a = geom.inner_radius();
    let eps = geom.epsilon;
    let h = eps / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n).map(|i| a + eps * i as f64 / (n - 1) as f64).collect();
    let w_node: Vec<f64> = nodes.iter().map(|&r| w.eval(r)).collect();
    let w_mid: Vec<f64> = nodes.windows(2).map(|p| w.eval(0.5 * (p[0] + p[1]))).collect();
    if w_node.iter().chain(&w_mid).any(|&x| !(x > 0.0)) {
        return domain("weight must be positive on the collar");
    }
    let potential: Vec<f64> = match angular {
        Some(v) => nodes.iter().map(|&r| v(r)).collect(),
        None => vec![0.0; n],
    };
    if potential.iter().any(|v| !(*v >= 0.0)) {
        return domain("angular term must be nonnegative");
    }
    let meta = format!(
        "radial weight={} R0={} eps={eps} mu={mu} angular={} n={n}",
        w.name(),
        geom.r0,
        angular.is_some()
    );
    Ok(assemble(nodes, h, &w_node, &w_mid, &potential, mu, meta))
}

/// Number of eigenvalues strictly below `x` (LDLᵀ pivot signs).
pub fn sturm_count(t: &TridiagonalOperator, x: f64) -> usize {
    let mut count = 0;
    let mut q = t.diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..t.diag.len() {
        let prev = if q == 0.0 { f64::MIN_POSITIVE } else { q };
        q = (t.diag[i] - x) - t.offdiag[i - 1] * t.offdiag[i - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect_eigenvalue(t: &TridiagonalOperator, index: usize, mut lo: f64, mut hi: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        let tol = EIGEN_TOL * mid.abs().max(1.0);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return mid;
        }
        if sturm_count(t, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// The `k` smallest eigenvalues, ascending.
pub fn lowest_eigenvalues(t: &TridiagonalOperator, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > t.len() {
        return domain(format!("requested {k} eigenvalues of a {}×{} matrix", t.len(), t.len()));
    }
    let (lo, hi) = t.gershgorin();
    let pad = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
    let (lo, hi) = (lo - pad, hi + pad);
    Ok((0..k).into_par_iter().map(|i| bisect_eigenvalue(t, i, lo, hi)).collect())
}

/// Solve `(T − σ) x = b` by the Thomas algorithm.
fn shifted_solve(t: &TridiagonalOperator, sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let guard = |x: f64| if x.abs() < 1e-300 { 1e-300_f64.copysign(x) } else { x };
    let mut denom = guard(t.diag[0] - sigma);
    if n > 1 {
        c[0] = t.offdiag[0] / denom;
    }
    d[0] = b[0] / denom;
    for i in 1..n {
        denom = guard(t.diag[i] - sigma - t.offdiag[i - 1] * c[i - 1]);
        if i + 1 < n {
            c[i] = t.offdiag[i] / denom;
        }
        d[i] = (b[i] - t.offdiag[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

/// Unit eigenvector of the symmetric form for an isolated eigenvalue, by
/// inverse iteration. Signs are fixed so the last component is nonnegative.
pub fn eigenvector(t: &TridiagonalOperator, eigenvalue: f64) -> Vec<f64> {
    let n = t.len();
    let sigma = eigenvalue - 1e-10 * eigenvalue.abs().max(1.0);
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..4 {
        let mut x = shifted_solve(t, sigma, &v);
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        x.iter_mut().for_each(|a| *a /= norm);
        v = x;
    }
    if v[n - 1] < 0.0 {
        v.iter_mut().for_each(|a| *a = -*a);
    }
    v
}

/// Fraction of `Σ v_i²` carried by nodes with position `≥ from`.
pub fn mass_fraction_beyond(t: &TridiagonalOperator, v: &[f64], from: f64) -> f64 {
    let total: f64 = v.iter().map(|a| a * a).sum();
    let outer: f64 = t
        .nodes
        .iter()
        .zip(v)
        .filter(|(x, _)| **x >= from)
        .map(|(_, a)| a * a)
        .sum();
    outer / total
}

/// A continuous problem that can be discretised at any resolution.
#[derive(Clone)]
pub enum DiscreteProblem {
    Interval(RobinProblem),
    Radial { weight: WeightFunction, geometry: CollarGeometry, mu: f64 },
}

impl DiscreteProblem {
    pub fn discretize(&self, n: usize) -> Result<TridiagonalOperator> {
        match self {
            DiscreteProblem::Interval(p) => build_interval(p, n),
            DiscreteProblem::Radial { weight, geometry, mu } => {
                build_radial(weight, geometry, *mu, None, n)
            }
        }
    }

    fn width(&self) -> f64 {
        match self {
            DiscreteProblem::Interval(p) => p.epsilon(),
            DiscreteProblem::Radial { geometry, .. } => geometry.epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceStatus {
    Conclusive,
    /// Successive differences vanish or change sign.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub grid_sizes: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    pub estimated_order: Option<f64>,
    pub extrapolated: Option<f64>,
    pub status: ConvergenceStatus,
}

/// Lowest eigenvalue on each grid, observed order from the three finest
/// grids and the Richardson-extrapolated limit.
///
/// The order uses the actual spacing ratio `h_N / h_{2N}` (slightly above 2
/// because `N` counts nodes), which reduces to `log₂` of the difference
/// ratio for exact halving.
pub fn convergence_study(problem: &DiscreteProblem, grids: &[usize]) -> Result<ConvergenceReport> {
    convergence_study_nth(problem, grids, 0)
}

/// [`convergence_study`] for the eigenvalue with zero-based `index`.
pub fn convergence_study_nth(
    problem: &DiscreteProblem,
    grids: &[usize],
    index: usize,
) -> Result<ConvergenceReport> {
    if grids.len() < 3 {
        return domain("convergence study needs at least three grids");
    }
    if grids.windows(2).any(|g| g[1] < 2 * g[0]) {
        return domain("each grid must at least double the previous one");
    }
    let eigenvalues = grids
        .par_iter()
        .map(|&n| {
            let t = problem.discretize(n)?;
            Ok(lowest_eigenvalues(&t, index + 1)?[index])
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = eigenvalues.len();
    let (l0, l1, l2) = (eigenvalues[m - 3], eigenvalues[m - 2], eigenvalues[m - 1]);
    let (d1, d2) = (l0 - l1, l1 - l2);
    let spacing = |n: usize| problem.width() / (n - 1) as f64;
    let ratio = spacing(grids[m - 2]) / spacing(grids[m - 1]);
    // differences at the bisection tolerance are noise, not convergence
    let floor = 10.0 * EIGEN_TOL * l2.abs().max(1.0);
    let conclusive = eigenvalues
        .windows(2)
        .map(|w| w[0] - w[1])
        .all(|d| d.abs() > floor && d.signum() == d1.signum());
    if !conclusive {
        return Ok(ConvergenceReport {
            grid_sizes: grids.to_vec(),
            eigenvalues,
            estimated_order: None,
            extrapolated: None,
            status: ConvergenceStatus::Inconclusive,
        });
    }
    let order = (d1 / d2).ln() / ratio.ln();
    let extrapolated = l2 - d2 / (ratio.powf(order) - 1.0);
    Ok(ConvergenceReport {
        grid_sizes: grids.to_vec(),
        eigenvalues,
        estimated_order: Some(order),
        extrapolated: Some(extrapolated),
        status: ConvergenceStatus::Conclusive,
    })
}
