//! Syntactic, configuration, trace and semantic distances.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{Location, Program};
use crate::sketcher::HoleAssignment;
use crate::tracer::{Configuration, Manipulation, SlotConstraint, Trace};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub struct Cost {
    pub syntactic: u64,
    pub semantic: u64,
    pub total: u64,
}

impl Cost {
    pub fn new(syntactic: u64, semantic: u64) -> Self {
        Cost {
            syntactic,
            semantic,
            total: aggregate(syntactic, semantic),
        }
    }
}

pub fn aggregate(syntactic: u64, semantic: u64) -> u64 {
    syntactic + semantic
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("assignments cover {0} and {1} holes")]
pub struct DomainMismatch(pub usize, pub usize);

pub fn syntactic_distance(
    a: &HoleAssignment,
    original: &HoleAssignment,
) -> Result<u64, DomainMismatch> {
    if a.0.len() != original.0.len() {
        return Err(DomainMismatch(a.0.len(), original.0.len()));
    }
    Ok(syntactic_slice(&a.0, &original.0))
}

pub(crate) fn syntactic_slice(a: &[i64], original: &[i64]) -> u64 {
    a.iter().zip(original).map(|(x, y)| x.abs_diff(*y)).sum()
}

/// Slot indices of the variables a distance looks at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tracked(pub Vec<usize>);

impl Tracked {
    pub fn all(vars: &[String]) -> Self {
        Tracked((0..vars.len()).collect())
    }

    /// Every slot except those named in `excluded`.
    pub fn excluding(vars: &[String], excluded: &[&str]) -> Self {
        Tracked(
            vars.iter()
                .enumerate()
                .filter(|(_, n)| !excluded.contains(&n.as_str()))
                .map(|(i, _)| i)
                .collect(),
        )
    }

    pub fn named(vars: &[String], names: &[&str]) -> Self {
        Tracked(
            vars.iter()
                .enumerate()
                .filter(|(_, n)| names.contains(&n.as_str()))
                .map(|(i, _)| i)
                .collect(),
        )
    }
}

/// `(ℓ ≠ ℓ') + #{w tracked : ν(w) ≠ ν'(w)}`.
pub fn config_distance(a: &Configuration, b: &Configuration, tracked: &Tracked) -> u64 {
    let loc = u64::from(a.location != b.location);
    loc + tracked
        .0
        .iter()
        .filter(|&&s| a.values[s] != b.values[s])
        .count() as u64
}

/// Pairwise distance over the common prefix plus the length difference.
pub fn trace_distance(a: &[Configuration], b: &[Configuration], tracked: &Tracked) -> u64 {
    let common: u64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| config_distance(x, y, tracked))
        .sum();
    common + a.len().abs_diff(b.len()) as u64
}

/// What a candidate trace has to reach, and how its prefix is compared.
#[derive(Debug, Clone)]
pub struct Target {
    pub location: Location,
    pub constraint: SlotConstraint,
    pub tracked: Tracked,
}

impl Target {
    /// Tracks every variable except inputs and manipulated ones. `None` when
    /// the manipulation names a variable the layout lacks.
    pub fn new(
        program: &Program,
        vars: &[String],
        location: Location,
        manipulation: &Manipulation,
    ) -> Option<Self> {
        let mut excluded = manipulation.manipulated_vars();
        excluded.extend(program.entry_fn().params.iter().map(|(n, _)| n.as_str()));
        Some(Target {
            location,
            constraint: SlotConstraint::new(vars, &manipulation.values)?,
            tracked: Tracked::excluding(vars, &excluded),
        })
    }
}

/// Minimum over satisfying indices `j` of the distance between
/// `original_prefix` and `candidate[0..=j]`, with the minimizing `j`
/// (the earliest on ties). `None` when no index satisfies the target.
pub fn semantic_distance_with(
    original_prefix: &[Configuration],
    candidate: &[Configuration],
    target: &Target,
) -> Option<(u64, usize)> {
    let k = original_prefix.len();
    let mut pairwise = 0u64;
    let mut best: Option<(u64, usize)> = None;
    for (j, c) in candidate.iter().enumerate() {
        if j < k {
            pairwise += config_distance(&original_prefix[j], c, &target.tracked);
        }
        if c.location == target.location && target.constraint.holds(&c.values) {
            let len_diff = (j + 1).abs_diff(k) as u64;
            let d = pairwise + len_diff;
            if best.is_none_or(|(b, _)| d < b) {
                best = Some((d, j));
            }
        }
    }
    best
}

/// Semantic distance of `candidate` for `manipulation`, where
/// `original_prefix` is the original trace up to the manipulated index.
pub fn semantic_distance(
    program: &Program,
    original_prefix: &Trace,
    manipulation: &Manipulation,
    candidate: &Trace,
    location: Location,
) -> Option<(u64, usize)> {
    let target = Target::new(program, &candidate.vars, location, manipulation)?;
    semantic_distance_with(&original_prefix.configs, &candidate.configs, &target)
}
