//! Minimum-cost repair search.

mod eval;
mod lines;
mod search;

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

pub(crate) use eval::original_trace;
pub use eval::{Evaluator, Externals, Invalid, ManipulationSpec, RankKey, Scored, Task, TestSpec};
pub use search::{search_step, Exhausted, Found, Step, StepOutcome, StepSearch};

use crate::distances::Cost;
use crate::extfun::{GuessTable, Registry};
use crate::lang::{diff_programs, print_program, Line, Patch, Program};
use crate::sketcher::{instantiate, sketch, HoleAssignment, SketchedProgram};
use crate::tracer::{Manipulation, Test};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Full,
    SingleLine,
}

#[derive(Debug, Clone)]
pub struct RepairOptions {
    pub mode: Mode,
    /// Bounds on constant holes, tried in order.
    pub const_bound_schedule: Vec<i64>,
    /// Candidate fuel as a multiple of the original trace length.
    pub fuel_factor: f64,
    pub allowed_locations: Option<BTreeSet<Line>>,
    pub disallowed_locations: BTreeSet<Line>,
    /// Assignments evaluated before giving up, per sketch.
    pub max_candidates: u64,
    pub use_slicing: bool,
    pub tests: Vec<Test>,
}

impl Default for RepairOptions {
    fn default() -> Self {
        RepairOptions {
            mode: Mode::Full,
            const_bound_schedule: vec![1, 2, 4, 8, 16],
            fuel_factor: 2.0,
            allowed_locations: None,
            disallowed_locations: BTreeSet::new(),
            max_candidates: 2_000_000,
            use_slicing: true,
            tests: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OptionsError {
    #[error("the constant bound schedule must be non-empty, positive and strictly increasing")]
    Schedule,
    #[error("the fuel factor must be a positive number")]
    Fuel,
    #[error("line {0} is both allowed and disallowed")]
    Overlap(Line),
    #[error("nothing to repair against: give a manipulation or at least one test")]
    NoSpecification,
}

impl RepairOptions {
    pub fn validate(&self) -> Result<(), OptionsError> {
        let s = &self.const_bound_schedule;
        if s.is_empty() || s[0] < 1 || s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(OptionsError::Schedule);
        }
        if !(self.fuel_factor.is_finite() && self.fuel_factor > 0.0) {
            return Err(OptionsError::Fuel);
        }
        if let Some(a) = &self.allowed_locations {
            if let Some(l) = a.intersection(&self.disallowed_locations).next() {
                return Err(OptionsError::Overlap(*l));
            }
        }
        Ok(())
    }

    /// Entry-function lines the options let the search rewrite.
    pub fn scope(&self, program: &Program) -> BTreeSet<Line> {
        program
            .entry_fn()
            .locations()
            .into_iter()
            .filter(|l| {
                self.allowed_locations
                    .as_ref()
                    .is_none_or(|a| a.contains(l))
            })
            .filter(|l| !self.disallowed_locations.contains(l))
            .collect()
    }
}

/// Powers of two below `max_const`, then `max_const` itself.
pub fn bound_schedule(max_const: i64) -> Vec<i64> {
    let mut s: Vec<i64> = std::iter::successors(Some(1i64), |b| b.checked_mul(2))
        .take_while(|&b| b < max_const)
        .collect();
    s.push(max_const);
    s
}

/// Repair options as written in requests and by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptionsSpec {
    pub mode: Mode,
    /// Largest constant a hole may take.
    pub max_const: i64,
    pub fuel_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allow_lines: Option<BTreeSet<Line>>,
    pub disallow_lines: BTreeSet<Line>,
    pub slice: bool,
    pub max_candidates: u64,
}

impl Default for OptionsSpec {
    fn default() -> Self {
        let d = RepairOptions::default();
        OptionsSpec {
            mode: d.mode,
            max_const: *d.const_bound_schedule.last().expect("default schedule"),
            fuel_factor: d.fuel_factor,
            allow_lines: None,
            disallow_lines: BTreeSet::new(),
            slice: d.use_slicing,
            max_candidates: d.max_candidates,
        }
    }
}

impl OptionsSpec {
    /// The solver options, checked.
    pub fn to_options(&self, tests: Vec<Test>) -> Result<RepairOptions, OptionsError> {
        if self.max_const < 1 {
            return Err(OptionsError::Schedule);
        }
        let options = RepairOptions {
            mode: self.mode,
            const_bound_schedule: bound_schedule(self.max_const),
            fuel_factor: self.fuel_factor,
            allowed_locations: self.allow_lines.clone(),
            disallowed_locations: self.disallow_lines.clone(),
            max_candidates: self.max_candidates,
            use_slicing: self.slice,
            tests,
        };
        options.validate()?;
        Ok(options)
    }
}

/// Search results for one line in single-line mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineStats {
    pub line: Line,
    pub repaired: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<u64>,
    pub candidates: u64,
    pub holes: usize,
    pub sliced: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub candidates: u64,
    pub wall_ms: u64,
    /// Constant bound of the schedule step that produced the result.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<i64>,
    pub holes: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_line: Vec<LineStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairResult {
    pub program: Program,
    pub patch: Patch,
    pub cost: Cost,
    pub satisfying_index: Option<usize>,
    pub assignment: HoleAssignment,
    /// Guessed external results the repair relied on (empty unless guessing).
    pub guesses: GuessTable,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoRepairReason {
    Budget,
    Domain,
    /// Guess-and-verify rounds ran out.
    Iterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoRepair {
    pub reason: NoRepairReason,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Repaired(RepairResult),
    NoRepair(NoRepair),
}

impl Outcome {
    pub fn repaired(&self) -> Option<&RepairResult> {
        match self {
            Outcome::Repaired(r) => Some(r),
            Outcome::NoRepair(_) => None,
        }
    }

    pub fn stats(&self) -> &SearchStats {
        match self {
            Outcome::Repaired(r) => &r.stats,
            Outcome::NoRepair(n) => &n.stats,
        }
    }

    /// Repair-result JSON.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Outcome::Repaired(r) => json!({
                "status": "repaired",
                "patch": r.patch,
                "syntactic": r.cost.syntactic,
                "semantic": r.cost.semantic,
                "cost": r.cost.total,
                "satisfying_index": r.satisfying_index,
                "program": print_program(&r.program),
                "stats": r.stats,
            }),
            Outcome::NoRepair(n) => json!({
                "status": "no_repair",
                "reason": n.reason,
                "stats": n.stats,
            }),
        }
    }
}

/// What the search must avoid, from earlier feedback.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Exclusions {
    pub rejected: Vec<Patch>,
    /// Results must cost at least this much.
    pub floor: u64,
}

/// Solves one sketch over the whole schedule.
pub(crate) struct SketchSolve {
    pub best: Option<Found>,
    pub evaluated: u64,
    pub bound: Option<i64>,
    pub exhausted: Exhausted,
}

pub(crate) fn solve_sketch(
    eval: &Evaluator,
    options: &RepairOptions,
    exclusions: &Exclusions,
    patch_of: &(dyn Fn(&[i64]) -> Option<Patch> + Sync),
) -> SketchSolve {
    let accept = |holes: &[i64]| -> bool {
        exclusions.rejected.is_empty()
            || patch_of(holes).is_some_and(|p| !exclusions.rejected.contains(&p))
    };
    let mut evaluated = 0u64;
    let mut previous = None;
    let mut exhausted = Exhausted::Domain;
    for &bound in &options.const_bound_schedule {
        let step = Step {
            bound,
            previous,
            budget: options.max_candidates.saturating_sub(evaluated),
            floor: exclusions.floor,
            accept: &accept,
        };
        let out = search_step(eval, &step);
        evaluated += out.evaluated;
        if out.best.is_some() {
            return SketchSolve {
                best: out.best,
                evaluated,
                bound: Some(bound),
                exhausted: out.exhausted,
            };
        }
        exhausted = out.exhausted;
        if exhausted == Exhausted::Budget {
            break;
        }
        previous = Some(bound);
    }
    SketchSolve {
        best: None,
        evaluated,
        bound: None,
        exhausted,
    }
}

/// Patch of an assignment of a full-program sketch.
pub(crate) fn patch_for(sketched: &SketchedProgram, holes: &[i64]) -> Option<(Program, Patch)> {
    let program = instantiate(sketched, &HoleAssignment(holes.to_vec())).ok()?;
    let patch = diff_programs(&sketched.original, &program).ok()?;
    Some((program, patch))
}

fn result_from(sketched: &SketchedProgram, found: Found, stats: SearchStats) -> RepairResult {
    let (program, patch) =
        patch_for(sketched, &found.assignment).expect("searched assignments are in the domain");
    RepairResult {
        program,
        patch,
        cost: found.scored.cost,
        satisfying_index: found.scored.satisfying_index,
        assignment: HoleAssignment(found.assignment),
        guesses: found.scored.guesses,
        stats,
    }
}

fn no_repair(exhausted: Exhausted, stats: SearchStats) -> Outcome {
    Outcome::NoRepair(NoRepair {
        reason: match exhausted {
            Exhausted::Budget => NoRepairReason::Budget,
            Exhausted::Domain => NoRepairReason::Domain,
        },
        stats,
    })
}

/// Full mode: one sketch over every line in scope.
pub(crate) fn repair_full(
    task: &Task,
    options: &RepairOptions,
    externals: Externals,
    exclusions: &Exclusions,
) -> Outcome {
    let start = Instant::now();
    let sketched = sketch(&task.program, &options.scope(&task.program));
    let eval = Evaluator::new(&sketched, task, options.fuel_factor, externals);
    let patch_of = |h: &[i64]| patch_for(&sketched, h).map(|(_, p)| p);
    let solved = solve_sketch(&eval, options, exclusions, &patch_of);
    let stats = SearchStats {
        candidates: solved.evaluated,
        wall_ms: start.elapsed().as_millis() as u64,
        bound: solved.bound,
        holes: sketched.hole_count(),
        per_line: Vec::new(),
    };
    match solved.best {
        Some(found) => Outcome::Repaired(result_from(&sketched, found, stats)),
        None => no_repair(solved.exhausted, stats),
    }
}

pub(crate) fn repair_task(
    task: &Task,
    options: &RepairOptions,
    externals: Externals,
    exclusions: &Exclusions,
) -> Outcome {
    match options.mode {
        Mode::Full => repair_full(task, options, externals, exclusions),
        Mode::SingleLine => lines::repair_lines(task, options, externals, exclusions),
    }
}

/// Minimum-cost repair of `program` for a manipulation and/or the tests in
/// `options`, with external functions answered by the standard registry.
pub fn repair(
    program: &Program,
    manipulation: Option<&Manipulation>,
    options: &RepairOptions,
) -> Result<Outcome, OptionsError> {
    repair_with(program, manipulation, options, &Registry::standard())
}

pub fn repair_with(
    program: &Program,
    manipulation: Option<&Manipulation>,
    options: &RepairOptions,
    registry: &Registry,
) -> Result<Outcome, OptionsError> {
    options.validate()?;
    if manipulation.is_none() && options.tests.is_empty() {
        return Err(OptionsError::NoSpecification);
    }
    let task = Task::new(program, manipulation, &options.tests, registry);
    Ok(repair_task(
        &task,
        options,
        Externals::Oracle(registry),
        &Exclusions::default(),
    ))
}

/// Single-line mode regardless of `options.mode`.
pub fn repair_single_line(
    program: &Program,
    manipulation: Option<&Manipulation>,
    options: &RepairOptions,
) -> Result<Outcome, OptionsError> {
    let options = RepairOptions {
        mode: Mode::SingleLine,
        ..options.clone()
    };
    repair(program, manipulation, &options)
}

/// Scores one assignment of a sketch against a manipulation and tests.
pub fn evaluate_candidate(
    sketched: &SketchedProgram,
    assignment: &HoleAssignment,
    manipulation: Option<&Manipulation>,
    tests: &[Test],
    fuel_factor: f64,
) -> Result<Scored, Invalid> {
    let registry = Registry::standard();
    let task = Task::new(&sketched.original, manipulation, tests, &registry);
    if sketched.check(assignment).is_err() {
        return Err(Invalid::Fault {
            message: "assignment outside the hole domains".into(),
        });
    }
    Evaluator::new(sketched, &task, fuel_factor, Externals::Oracle(&registry))
        .evaluate(&assignment.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Feedback {
    /// Reject the last proposal's patch.
    Patch,
    /// Never touch this line again.
    Location { location: Line },
}

/// An interactive repair session: proposals and the user's rejections.
#[derive(Debug, Clone)]
pub struct Session {
    pub program: Program,
    pub manipulation: Option<Manipulation>,
    pub options: RepairOptions,
    pub history: Vec<Outcome>,
    pub rejected: Vec<Patch>,
    pub disallowed: BTreeSet<Line>,
    registry: Registry,
}

impl Session {
    pub fn new(
        program: Program,
        manipulation: Option<Manipulation>,
        options: RepairOptions,
        registry: Registry,
    ) -> Result<Self, OptionsError> {
        options.validate()?;
        if manipulation.is_none() && options.tests.is_empty() {
            return Err(OptionsError::NoSpecification);
        }
        Ok(Session {
            program,
            manipulation,
            options,
            history: Vec::new(),
            rejected: Vec::new(),
            disallowed: BTreeSet::new(),
            registry,
        })
    }

    fn run(&self) -> Outcome {
        let mut options = self.options.clone();
        options.disallowed_locations.extend(&self.disallowed);
        if let Some(a) = &mut options.allowed_locations {
            a.retain(|l| !self.disallowed.contains(l));
        }
        let exclusions = Exclusions {
            rejected: self.rejected.clone(),
            floor: self
                .history
                .iter()
                .filter_map(|o| o.repaired().map(|r| r.cost.total))
                .max()
                .unwrap_or(0),
        };
        if self.program.external_calls() {
            crate::extfun::cegis_with_exclusions(
                &self.program,
                self.manipulation.as_ref(),
                &options,
                &self.registry,
                &exclusions,
            )
            .outcome
        } else {
            let task = Task::new(
                &self.program,
                self.manipulation.as_ref(),
                &options.tests,
                &self.registry,
            );
            repair_task(
                &task,
                &options,
                Externals::Oracle(&self.registry),
                &exclusions,
            )
        }
    }

    /// First proposal.
    pub fn propose(&mut self) -> &Outcome {
        let o = self.run();
        self.history.push(o);
        self.history.last().expect("just pushed")
    }

    /// Applies feedback and proposes the next repair.
    pub fn next_repair(&mut self, feedback: Feedback) -> &Outcome {
        match feedback {
            Feedback::Patch => {
                if let Some(r) = self.history.last().and_then(Outcome::repaired) {
                    if !self.rejected.contains(&r.patch) {
                        self.rejected.push(r.patch.clone());
                    }
                }
            }
            Feedback::Location { location } => {
                self.disallowed.insert(location);
            }
        }
        let o = self.run();
        self.history.push(o);
        self.history.last().expect("just pushed")
    }

    pub fn last(&self) -> Option<&Outcome> {
        self.history.last()
    }
}
