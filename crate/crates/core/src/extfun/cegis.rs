//! Guess, verify, refine.

use std::collections::BTreeSet;

use serde::Serialize;

use super::table::Recorder;
use super::{verify_guesses, GuessTable, Mismatch, PartialInterpretation, Provenance, Registry};
use crate::lang::{Patch, Program};
use crate::solver::{
    repair_task, Exclusions, Externals, NoRepair, NoRepairReason, OptionsError, Outcome,
    RepairOptions, SearchStats, Task,
};
use crate::tracer::{execute_with, Fault, Manipulation, Trace, Valuation, DEFAULT_FUEL};

/// Distinct unseen calls one candidate may guess.
pub const MAX_UNSEEN: usize = 1;
pub const MAX_ITERATIONS: usize = 128;

/// Runs `program` on `initial` with the real functions and records every call.
pub fn harvest_interpretation(
    program: &Program,
    initial: &Valuation,
    registry: &Registry,
) -> Result<PartialInterpretation, Fault> {
    let mut table = PartialInterpretation::new();
    harvest_into(program, initial, registry, &mut table).map_err(|(f, _)| f)?;
    Ok(table)
}

fn harvest_into(
    program: &Program,
    initial: &Valuation,
    registry: &Registry,
    table: &mut PartialInterpretation,
) -> Result<Trace, (Fault, Trace)> {
    let mut rec = Recorder { registry, table };
    execute_with(program, initial, DEFAULT_FUEL, &mut rec).map_err(|e| (e.fault, e.partial))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Iteration {
    pub iteration: usize,
    /// Constant bound at which the candidate was found.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<i64>,
    pub guesses: GuessTable,
    pub mismatches: Vec<Mismatch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patch: Option<Patch>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CegisOutcome {
    pub outcome: Outcome,
    pub log: Vec<Iteration>,
    pub interpretation: PartialInterpretation,
}

impl CegisOutcome {
    /// Iteration log JSON.
    pub fn log_json(&self) -> serde_json::Value {
        serde_json::json!({
            "iterations": self.log,
            "interpretation": self.interpretation,
        })
    }
}

pub fn cegis_repair(
    program: &Program,
    manipulation: Option<&Manipulation>,
    options: &RepairOptions,
    registry: &Registry,
) -> Result<CegisOutcome, OptionsError> {
    options.validate()?;
    if manipulation.is_none() && options.tests.is_empty() {
        return Err(OptionsError::NoSpecification);
    }
    Ok(cegis_with_exclusions(
        program,
        manipulation,
        options,
        registry,
        &Exclusions::default(),
    ))
}

pub(crate) fn cegis_with_exclusions(
    program: &Program,
    manipulation: Option<&Manipulation>,
    options: &RepairOptions,
    registry: &Registry,
    exclusions: &Exclusions,
) -> CegisOutcome {
    let mut table = PartialInterpretation::new();
    let mut observed = BTreeSet::new();
    let inputs = manipulation
        .map(|m| &m.initial)
        .into_iter()
        .chain(options.tests.iter().map(|t| &t.input));
    for input in inputs {
        let trace = harvest_into(program, input, registry, &mut table).unwrap_or_else(|(_, t)| t);
        for c in &trace.configs {
            observed.extend(c.values.iter().flat_map(|v| v.integers()));
        }
    }
    observed.extend(table.iter().map(|(_, r, _)| r));
    let task = Task::new(program, manipulation, &options.tests, registry);

    let mut log = Vec::new();
    let mut stats = SearchStats::default();
    for iteration in 1..=MAX_ITERATIONS {
        let mut found = None;
        for &bound in &options.const_bound_schedule {
            let mut domain: BTreeSet<i64> = (-bound..=bound).collect();
            domain.extend(&observed);
            let domain: Vec<i64> = domain.into_iter().collect();
            let step = RepairOptions {
                const_bound_schedule: vec![bound],
                ..options.clone()
            };
            let externals = Externals::Guessing {
                table: &table,
                domain: &domain,
                max_unseen: MAX_UNSEEN,
            };
            let outcome = repair_task(&task, &step, externals, exclusions);
            stats.candidates += outcome.stats().candidates;
            stats.wall_ms += outcome.stats().wall_ms;
            stats.holes = outcome.stats().holes;
            match outcome {
                Outcome::Repaired(r) => {
                    found = Some((bound, r));
                    break;
                }
                Outcome::NoRepair(n) if n.reason == NoRepairReason::Budget => {
                    log.push(Iteration {
                        iteration,
                        bound: None,
                        guesses: GuessTable::default(),
                        mismatches: Vec::new(),
                        patch: None,
                    });
                    return finish(
                        Outcome::NoRepair(NoRepair {
                            reason: n.reason,
                            stats,
                        }),
                        log,
                        table,
                    );
                }
                Outcome::NoRepair(_) => {}
            }
        }
        let Some((bound, mut r)) = found else {
            log.push(Iteration {
                iteration,
                bound: None,
                guesses: GuessTable::default(),
                mismatches: Vec::new(),
                patch: None,
            });
            let n = NoRepair {
                reason: NoRepairReason::Domain,
                stats,
            };
            return finish(Outcome::NoRepair(n), log, table);
        };
        let mismatches = verify_guesses(&r.guesses, registry);
        log.push(Iteration {
            iteration,
            bound: Some(bound),
            guesses: r.guesses.clone(),
            mismatches: mismatches.clone(),
            patch: Some(r.patch.clone()),
        });
        if mismatches.is_empty() {
            stats.bound = Some(bound);
            stats.per_line = std::mem::take(&mut r.stats.per_line);
            r.stats = stats;
            return finish(Outcome::Repaired(r), log, table);
        }
        for m in mismatches {
            table.insert((m.name, m.args), m.actual, Provenance::Verified);
        }
    }
    let n = NoRepair {
        reason: NoRepairReason::Iterations,
        stats,
    };
    finish(Outcome::NoRepair(n), log, table)
}

fn finish(
    outcome: Outcome,
    log: Vec<Iteration>,
    interpretation: PartialInterpretation,
) -> CegisOutcome {
    CegisOutcome {
        outcome,
        log,
        interpretation,
    }
}
