//! Channel enumeration and level counting.

use rayon::prelude::*;
use serde::Serialize;

use super::{existence_threshold, solve_channel, Channel, Convention, DiracBallProblem, EdgeLevel, Family};
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Counting {
    Levels,
    /// Each level weighted by its `2j + 1` degeneracy.
    DegeneracyWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Families {
    PrimaryOnly,
    Both,
}

/// Published level counts at `mR0 = 1`, keyed by `α`.
pub const REFERENCE_COUNTS: [(f64, u64); 5] = [(1.0, 3), (2.0, 11), (3.0, 18), (4.0, 35), (5.0, 98)];

/// Channels after the first empty, below-threshold one that are still probed.
const PROBE_CHANNELS: u32 = 3;
const CHUNK: u32 = 8;
const MAX_KAPPA: u32 = 100_000;

fn enumerate_family(p: &DiracBallProblem, family: Family) -> Result<Vec<EdgeLevel>> {
    let mut levels = Vec::new();
    let mut quiet = 0;
    let mut next = 1;
    while next <= MAX_KAPPA {
        let chunk: Vec<(bool, Vec<EdgeLevel>)> = (next..next + CHUNK)
            .into_par_iter()
            .map(|kappa| {
                let ch = Channel::new(kappa, family)?;
                let admits = existence_threshold(p, &ch)?.admits(p.alpha);
                Ok((admits, solve_channel(p, &ch)?))
            })
            .collect::<Result<_>>()?;
        for (admits, found) in chunk {
            if !admits && found.is_empty() {
                quiet += 1;
            } else {
                quiet = 0;
            }
            levels.extend(found);
            if quiet > PROBE_CHANNELS {
                return Ok(levels);
            }
        }
        next += CHUNK;
    }
    domain(format!("channel enumeration did not terminate below κ = {MAX_KAPPA}"))
}

/// Every gap level, ordered by family, then `j`, then energy.
pub fn enumerate_levels(p: &DiracBallProblem, families: Families) -> Result<Vec<EdgeLevel>> {
    let mut levels = enumerate_family(p, Family::Primary)?;
    if families == Families::Both {
        levels.extend(enumerate_family(p, Family::Swapped)?);
    }
    Ok(levels)
}

fn tally(levels: &[EdgeLevel], counting: Counting) -> u64 {
    match counting {
        Counting::Levels => levels.len() as u64,
        Counting::DegeneracyWeighted => levels.iter().map(|l| u64::from(l.degeneracy)).sum(),
    }
}

pub fn count_edge_levels(p: &DiracBallProblem, counting: Counting, families: Families) -> Result<u64> {
    Ok(tally(&enumerate_levels(p, families)?, counting))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountConvention {
    pub convention: Convention,
    pub counting: Counting,
    pub families: Families,
    /// Counts in the order of `REFERENCE_COUNTS`.
    pub counts: Vec<u64>,
    pub matches_reference: bool,
}

/// Machine-readable outcome of trying every counting convention against
/// the reference sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountCalibration {
    pub m: f64,
    pub r0: f64,
    pub alphas: Vec<f64>,
    pub reference: Vec<u64>,
    pub candidates: Vec<CountConvention>,
    /// Index into `candidates` of the locked convention, if one matched.
    pub locked: Option<usize>,
    /// Per-`α` mismatch of the primary-only level count under the figure
    /// convention, reported when nothing matched.
    pub discrepancies: Vec<CountDiscrepancy>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountDiscrepancy {
    pub alpha: f64,
    pub reference: u64,
    pub computed: u64,
}

pub fn calibrate_counts(m: f64, r0: f64) -> Result<CountCalibration> {
    let alphas: Vec<f64> = REFERENCE_COUNTS.iter().map(|r| r.0).collect();
    let reference: Vec<u64> = REFERENCE_COUNTS.iter().map(|r| r.1).collect();
    let mut candidates = Vec::new();
    for convention in [Convention::FigureCalibrated, Convention::PaperLiteral] {
        let per_alpha = alphas
            .iter()
            .map(|&a| {
                let p = DiracBallProblem::new(m, r0, a, convention)?;
                let primary = enumerate_family(&p, Family::Primary)?;
                let swapped = enumerate_family(&p, Family::Swapped)?;
                Ok((primary, swapped))
            })
            .collect::<Result<Vec<_>>>()?;
        for families in [Families::PrimaryOnly, Families::Both] {
            for counting in [Counting::Levels, Counting::DegeneracyWeighted] {
                let counts: Vec<u64> = per_alpha
                    .iter()
                    .map(|(primary, swapped)| {
                        let mut n = tally(primary, counting);
                        if families == Families::Both {
                            n += tally(swapped, counting);
                        }
                        n
                    })
                    .collect();
                let matches_reference = counts == reference;
                candidates.push(CountConvention { convention, counting, families, counts, matches_reference });
            }
        }
    }
    let locked = candidates.iter().position(|c| c.matches_reference);
    let discrepancies = if locked.is_some() {
        Vec::new()
    } else {
        let base = &candidates[0];
        alphas
            .iter()
            .zip(&reference)
            .zip(&base.counts)
            .filter(|((_, r), c)| r != c)
            .map(|((&alpha, &reference), &computed)| CountDiscrepancy { alpha, reference, computed })
            .collect()
    };
    Ok(CountCalibration { m, r0, alphas, reference, candidates, locked, discrepancies })
}
