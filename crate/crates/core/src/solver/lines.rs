//! Single-line mode: one sketch per line, solved side by side.
//!
//! Lines advance through the bound schedule together, so a cheap repair
//! found on one line caps the levels every other line explores.

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;

use super::{
    no_repair, patch_for, result_from, solve_sketch, Evaluator, Exclusions, Exhausted, Externals,
    Found, LineStats, Outcome, RepairOptions, SearchStats, Step, StepOutcome, StepSearch, Task,
};
use crate::lang::{Line, Patch};
use crate::sketcher::{sketch, SketchedProgram};
use crate::slicer::{self, SlicedLine};

struct Prepared {
    line: Line,
    sketched: SketchedProgram,
    sliced: Option<SlicedLine>,
}

/// Evaluators of one line; fixed for the whole solve.
struct LineCtx<'a> {
    line: Line,
    sketched: &'a SketchedProgram,
    full: Evaluator<'a>,
    sliced: Option<Evaluator<'a>>,
}

#[derive(Default)]
struct LineResult {
    done: bool,
    /// Dropped when a sliced winner fails on the full program.
    use_slice: bool,
    found: Option<Found>,
    evaluated: u64,
    bound: Option<i64>,
    budget_hit: bool,
}

impl LineCtx<'_> {
    fn eval(&self, r: &LineResult) -> &Evaluator<'_> {
        match (&self.sliced, r.use_slice) {
            (Some(e), true) => e,
            _ => &self.full,
        }
    }

    fn patch_of(&self) -> impl Fn(&[i64]) -> Option<Patch> + Sync + '_ {
        |h: &[i64]| patch_for(self.sketched, h).map(|(_, p)| p)
    }

    /// Records the end of a schedule step; returns the full cost of a result.
    fn finish_step(
        &self,
        r: &mut LineResult,
        out: StepOutcome,
        bound: i64,
        options: &RepairOptions,
        exclusions: &Exclusions,
    ) -> Option<u64> {
        r.evaluated += out.evaluated;
        let Some(found) = out.best else {
            r.budget_hit = out.exhausted == Exhausted::Budget;
            r.done = r.budget_hit;
            return None;
        };
        r.done = true;
        r.bound = Some(bound);
        if !r.use_slice {
            r.found = Some(found);
            return r.found.as_ref().map(|f| f.scored.cost.total);
        }
        // Report costs on the full program.
        match self.full.evaluate(&found.assignment) {
            Ok(scored) if scored.cost.total >= exclusions.floor => {
                let key = self.full.rank_key(&found.assignment, &scored);
                r.found = Some(Found {
                    assignment: found.assignment,
                    scored,
                    key,
                });
            }
            _ => {
                // The slice misled the search; solve the full sketch instead.
                r.use_slice = false;
                let s = solve_sketch(&self.full, options, exclusions, &self.patch_of());
                r.evaluated += s.evaluated;
                r.bound = s.bound;
                r.budget_hit = s.best.is_none() && s.exhausted == Exhausted::Budget;
                r.found = s.best;
            }
        }
        r.found.as_ref().map(|f| f.scored.cost.total)
    }

    fn stats(&self, r: &LineResult) -> LineStats {
        LineStats {
            line: self.line,
            repaired: r.found.is_some(),
            cost: r.found.as_ref().map(|f| f.scored.cost.total),
            candidates: r.evaluated,
            holes: self.sketched.hole_count(),
            sliced: r.use_slice,
        }
    }
}

/// Every line searches distance level `d` before any line moves to `d + 1`,
/// and the best total found so far caps the levels still searched. The
/// outcome does not depend on how lines are scheduled on threads.
pub(crate) fn repair_lines(
    task: &Task,
    options: &RepairOptions,
    externals: Externals,
    exclusions: &Exclusions,
) -> Outcome {
    let start = Instant::now();
    let prepared: Vec<Prepared> = options
        .scope(&task.program)
        .into_iter()
        .map(|line| {
            let sketched = sketch(&task.program, &BTreeSet::from([line]));
            let sliced = (options.use_slicing && task.tests.is_empty())
                .then(|| slicer::slice_for_line(task, &sketched, line, externals))
                .flatten();
            Prepared {
                line,
                sketched,
                sliced,
            }
        })
        .collect();
    let lines: Vec<LineCtx> = prepared
        .iter()
        .map(|p| LineCtx {
            line: p.line,
            sketched: &p.sketched,
            full: Evaluator::new(&p.sketched, task, options.fuel_factor, externals),
            sliced: p
                .sliced
                .as_ref()
                .map(|s| Evaluator::new(&s.sketched, &s.task, options.fuel_factor, externals)),
        })
        .collect();
    let mut results: Vec<LineResult> = lines
        .iter()
        .map(|l| LineResult {
            use_slice: l.sliced.is_some(),
            ..LineResult::default()
        })
        .collect();

    let mut ceiling = u64::MAX;
    let mut previous = None;
    for &bound in &options.const_bound_schedule {
        let active: Vec<usize> = (0..lines.len()).filter(|&i| !results[i].done).collect();
        let accepts: Vec<_> = active
            .iter()
            .map(|&i| {
                let patch_of = lines[i].patch_of();
                move |holes: &[i64]| -> bool {
                    exclusions.rejected.is_empty()
                        || patch_of(holes).is_some_and(|p| !exclusions.rejected.contains(&p))
                }
            })
            .collect();
        let steps: Vec<Step> = active
            .iter()
            .zip(&accepts)
            .map(|(&i, accept)| Step {
                bound,
                previous,
                budget: options.max_candidates.saturating_sub(results[i].evaluated),
                floor: exclusions.floor,
                accept,
            })
            .collect();
        let mut searches: Vec<(usize, Option<StepSearch>)> = active
            .iter()
            .zip(&steps)
            .map(|(&i, step)| (i, Some(StepSearch::new(lines[i].eval(&results[i]), step))))
            .collect();
        while searches.iter().any(|(_, s)| s.is_some()) {
            searches
                .par_iter_mut()
                .filter_map(|(_, s)| s.as_mut())
                .for_each(|s| s.run_level(ceiling));
            let mut level_min = ceiling;
            for (i, slot) in searches.iter_mut() {
                if slot.as_ref().is_some_and(StepSearch::is_finished) {
                    let out = slot.take().expect("checked above").outcome();
                    let total =
                        lines[*i].finish_step(&mut results[*i], out, bound, options, exclusions);
                    level_min = level_min.min(total.unwrap_or(u64::MAX));
                }
            }
            ceiling = level_min;
        }
        previous = Some(bound);
    }

    let mut stats = SearchStats {
        candidates: results.iter().map(|r| r.evaluated).sum(),
        wall_ms: 0,
        bound: None,
        holes: lines.iter().map(|l| l.sketched.hole_count()).sum(),
        per_line: lines
            .iter()
            .zip(&results)
            .map(|(l, r)| l.stats(r))
            .collect(),
    };
    let budget_hit = results.iter().any(|r| r.found.is_none() && r.budget_hit);
    let best = lines
        .iter()
        .zip(results)
        .filter_map(|(l, r)| r.found.map(|f| (l.line, r.bound, l.sketched, f)))
        .min_by(|(la, _, _, a), (lb, _, _, b)| {
            let (ka, kb) = (&a.key, &b.key);
            (
                ka.total,
                ka.syntactic,
                ka.satisfying_index,
                la,
                &ka.assignment,
            )
                .cmp(&(
                    kb.total,
                    kb.syntactic,
                    kb.satisfying_index,
                    lb,
                    &kb.assignment,
                ))
        });
    stats.wall_ms = start.elapsed().as_millis() as u64;
    match best {
        Some((_, bound, sketched, found)) => {
            stats.bound = bound;
            Outcome::Repaired(result_from(sketched, found, stats))
        }
        None => no_repair(
            if budget_hit {
                Exhausted::Budget
            } else {
                Exhausted::Domain
            },
            stats,
        ),
    }
}
