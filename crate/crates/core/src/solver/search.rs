//! Enumeration of hole assignments by increasing syntactic distance.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use super::eval::{Evaluator, RankKey, Scored};
use crate::sketcher::{HoleKind, SketchedProgram};

/// A scored candidate and its rank.
#[derive(Debug, Clone)]
pub struct Found {
    pub assignment: Vec<i64>,
    pub scored: Scored,
    pub key: RankKey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exhausted {
    /// Every assignment in the box was considered.
    Domain,
    /// The next distance level did not fit in the candidate budget.
    Budget,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub best: Option<Found>,
    pub evaluated: u64,
    /// Why the step ended without a result, when it did.
    pub exhausted: Exhausted,
}

/// Values other than the original one a hole may take in the box `bound`,
/// with their distance from the original.
fn alternatives(kind: HoleKind, original: i64, bound: i64) -> Vec<(i64, u64)> {
    let range = match kind {
        HoleKind::Coeff => -1..=1,
        HoleKind::Const => -bound..=bound,
    };
    let mut v: Vec<(i64, u64)> = range
        .filter(|&x| x != original)
        .map(|x| (x, x.abs_diff(original)))
        .collect();
    v.sort_by_key(|&(x, d)| (d, x));
    v
}

/// Number of assignments at distance exactly `d`, as a polynomial product
/// over holes. Saturates.
fn level_size(alts: &[Vec<(i64, u64)>], d: u64) -> u64 {
    let d = d as usize;
    let mut poly = vec![0u64; d + 1];
    poly[0] = 1;
    for a in alts {
        let mut next = poly.clone();
        for (i, &c) in poly.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &(_, t) in a {
                let j = i + t as usize;
                if j <= d {
                    next[j] = next[j].saturating_add(c);
                }
            }
        }
        poly = next;
    }
    poly[d]
}

/// One step of the bound schedule.
pub struct Step<'s> {
    pub bound: i64,
    /// Bound of the previous step; assignments inside it were already tried.
    pub previous: Option<i64>,
    pub budget: u64,
    /// Candidates with a total cost below this are skipped.
    pub floor: u64,
    pub accept: &'s (dyn Fn(&[i64]) -> bool + Sync),
}

struct Space {
    alts: Vec<Vec<(i64, u64)>>,
    /// Per hole, values that lie outside the previous box.
    is_new: Vec<Vec<bool>>,
    suffix_max: Vec<u64>,
    original: Vec<i64>,
}

impl Space {
    fn new(sketched: &SketchedProgram, bound: i64, previous: Option<i64>) -> Self {
        let alts: Vec<_> = sketched
            .holes
            .iter()
            .map(|h| alternatives(h.kind, h.original, bound))
            .collect();
        let is_new = sketched
            .holes
            .iter()
            .zip(&alts)
            .map(|(h, a)| {
                a.iter()
                    .map(|&(x, _)| {
                        h.kind == HoleKind::Const && previous.is_some_and(|p| x.abs() > p)
                    })
                    .collect()
            })
            .collect();
        let mut suffix_max = vec![0u64; alts.len() + 1];
        for i in (0..alts.len()).rev() {
            let m = alts[i].iter().map(|&(_, d)| d).max().unwrap_or(0);
            suffix_max[i] = suffix_max[i + 1] + m;
        }
        Space {
            alts,
            is_new,
            suffix_max,
            original: sketched.original_assignment().0,
        }
    }

    fn max_distance(&self) -> u64 {
        self.suffix_max[0]
    }

    /// Assignments at distance `d` not already covered by the previous box.
    fn level_size(&self, sketched: &SketchedProgram, d: u64, previous: Option<i64>) -> u64 {
        let all = level_size(&self.alts, d);
        match previous {
            None => all,
            Some(p) => {
                let old: Vec<_> = sketched
                    .holes
                    .iter()
                    .map(|h| alternatives(h.kind, h.original, p))
                    .collect();
                all - level_size(&old, d)
            }
        }
    }
}

struct Walker<'a, 'e> {
    eval: &'a Evaluator<'e>,
    space: &'a Space,
    step: &'a Step<'a>,
    need_new: bool,
    current: Vec<i64>,
    best: Option<Found>,
    evaluated: u64,
}

impl Walker<'_, '_> {
    fn visit(&mut self) {
        self.evaluated += 1;
        let Ok(scored) = self.eval.evaluate(&self.current) else {
            return;
        };
        if scored.cost.total < self.step.floor {
            return;
        }
        let key = self.eval.rank_key(&self.current, &scored);
        if self.best.as_ref().is_some_and(|b| b.key <= key) {
            return;
        }
        if !(self.step.accept)(&self.current) {
            return;
        }
        self.best = Some(Found {
            assignment: self.current.clone(),
            scored,
            key,
        });
    }

    /// Chooses further changed holes after `from` spending exactly `remaining`.
    fn walk(&mut self, from: usize, remaining: u64, has_new: bool) {
        if remaining == 0 {
            if has_new || !self.need_new {
                self.visit();
            }
            return;
        }
        for h in from..self.space.alts.len() {
            if self.space.suffix_max[h] < remaining {
                return;
            }
            for (ai, &(x, d)) in self.space.alts[h].iter().enumerate() {
                if d > remaining {
                    break;
                }
                self.current[h] = x;
                let new = has_new || self.space.is_new[h][ai];
                self.walk(h + 1, remaining - d, new);
            }
            self.current[h] = self.space.original[h];
        }
    }
}

fn merge(a: Option<Found>, b: Option<Found>) -> Option<Found> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.key < x.key { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// A schedule step searched one distance level at a time.
pub struct StepSearch<'a, 'e> {
    eval: &'a Evaluator<'e>,
    step: &'a Step<'a>,
    space: Space,
    d: u64,
    best: Option<Found>,
    evaluated: u64,
    finished: Option<Exhausted>,
}

impl<'a, 'e> StepSearch<'a, 'e> {
    pub fn new(eval: &'a Evaluator<'e>, step: &'a Step<'a>) -> Self {
        StepSearch {
            eval,
            step,
            space: Space::new(eval.sketched, step.bound, step.previous),
            d: 0,
            best: None,
            evaluated: 0,
            finished: None,
        }
    }

    pub fn is_finished(&self) -> bool {
        self.finished.is_some()
    }

    pub fn best(&self) -> Option<&Found> {
        self.best.as_ref()
    }

    /// Searches the next level unless the step is over. Levels above
    /// `ceiling` are not searched.
    pub fn run_level(&mut self, ceiling: u64) {
        if self.finished.is_some() {
            return;
        }
        let d = self.d;
        if self.best.as_ref().is_some_and(|b| d >= b.scored.cost.total)
            || d > self.space.max_distance()
            || d > ceiling
        {
            self.finished = Some(Exhausted::Domain);
            return;
        }
        self.d += 1;
        let size = self
            .space
            .level_size(self.eval.sketched, d, self.step.previous);
        if size == 0 {
            return;
        }
        if self.evaluated.saturating_add(size) > self.step.budget {
            self.finished = Some(Exhausted::Budget);
            return;
        }
        let (level_best, evaluated) = self.level(d);
        self.evaluated += evaluated;
        self.best = merge(self.best.take(), level_best);
    }

    fn level(&self, d: u64) -> (Option<Found>, u64) {
        let space = &self.space;
        let need_new = self.step.previous.is_some();
        let walker = || Walker {
            eval: self.eval,
            space,
            step: self.step,
            need_new,
            current: space.original.clone(),
            best: None,
            evaluated: 0,
        };
        if d == 0 {
            let mut w = walker();
            w.walk(0, 0, false);
            return (w.best, w.evaluated);
        }
        // Split on the first changed hole and value.
        let roots: Vec<(usize, usize)> = (0..space.alts.len())
            .flat_map(|h| (0..space.alts[h].len()).map(move |a| (h, a)))
            .filter(|&(h, a)| space.alts[h][a].1 <= d)
            .collect();
        let evaluated = AtomicU64::new(0);
        let best = roots
            .par_iter()
            .map(|&(h, a)| {
                let (x, cost) = space.alts[h][a];
                let mut w = walker();
                w.current[h] = x;
                w.walk(h + 1, d - cost, space.is_new[h][a]);
                evaluated.fetch_add(w.evaluated, Ordering::Relaxed);
                w.best
            })
            .reduce(|| None, merge);
        (best, evaluated.into_inner())
    }

    pub fn outcome(self) -> StepOutcome {
        StepOutcome {
            best: self.best,
            evaluated: self.evaluated,
            exhausted: self.finished.unwrap_or(Exhausted::Domain),
        }
    }
}

/// Searches the box of one schedule step, level by level, until the level
/// reaches the best total found.
pub fn search_step(eval: &Evaluator, step: &Step) -> StepOutcome {
    let mut s = StepSearch::new(eval, step);
    while !s.is_finished() {
        s.run_level(u64::MAX);
    }
    s.outcome()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_sizes() {
        let alts = vec![
            alternatives(HoleKind::Coeff, 1, 1),
            alternatives(HoleKind::Coeff, 0, 1),
            alternatives(HoleKind::Const, 0, 2),
        ];
        // Total box size is 3 * 3 * 5.
        let total: u64 = (0..=5).map(|d| level_size(&alts, d)).sum();
        assert_eq!(total, 45);
        assert_eq!(level_size(&alts, 0), 1);
        assert_eq!(level_size(&alts, 1), 1 + 2 + 2);
    }
}
