//! Running one candidate hole assignment against the specification.

use std::cmp::Ordering;

use serde::Serialize;

use crate::distances::{
    semantic_distance_with, syntactic_slice, trace_distance, Cost, Target, Tracked,
};
use crate::extfun::{GuessEnv, GuessTable, PartialInterpretation, Registry};
use crate::lang::{Line, Location, Program};
use crate::sketcher::SketchedProgram;
use crate::tracer::{
    ExecError, Executable, ExternalEnv, ExternalFault, Fault, FaultReason, Manipulation,
    PartialValuation, Test, Trace, Valuation, Value,
};

/// The manipulation as seen by the evaluator.
#[derive(Debug, Clone)]
pub struct ManipulationSpec {
    pub initial: Valuation,
    pub index: usize,
    pub location: Location,
    pub values: PartialValuation,
    /// Trace of the unmodified program on `initial`.
    pub original: Trace,
}

impl ManipulationSpec {
    pub fn as_manipulation(&self) -> Manipulation {
        Manipulation {
            initial: self.initial.clone(),
            index: self.index,
            values: self.values.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TestSpec {
    pub test: Test,
    pub original: Trace,
}

/// Everything a candidate is judged against, for one program.
#[derive(Debug, Clone)]
pub struct Task {
    pub program: Program,
    pub manipulation: Option<ManipulationSpec>,
    pub tests: Vec<TestSpec>,
}

/// Runs the unmodified program; a fault keeps the partial trace.
pub(crate) fn original_trace(
    program: &Program,
    initial: &Valuation,
    env: &mut dyn ExternalEnv,
) -> Trace {
    match crate::tracer::execute_with(program, initial, crate::tracer::DEFAULT_FUEL, env) {
        Ok(t) => t,
        Err(e) => e.partial,
    }
}

impl Task {
    pub fn new(
        program: &Program,
        manipulation: Option<&Manipulation>,
        tests: &[Test],
        registry: &Registry,
    ) -> Task {
        let mut env = registry.clone();
        let manipulation = manipulation.map(|m| {
            let original = original_trace(program, &m.initial, &mut env);
            let location = original
                .configs
                .get(m.index)
                .map(|c| c.location)
                .unwrap_or(Location::Exit);
            ManipulationSpec {
                initial: m.initial.clone(),
                index: m.index,
                location,
                values: m.values.clone(),
                original,
            }
        });
        let tests = tests
            .iter()
            .map(|t| TestSpec {
                test: t.clone(),
                original: original_trace(program, &t.input, &mut env),
            })
            .collect();
        Task {
            program: program.clone(),
            manipulation,
            tests,
        }
    }
}

/// How external calls are answered during evaluation.
#[derive(Debug, Clone, Copy)]
pub enum Externals<'a> {
    Oracle(&'a Registry),
    /// Known pairs from the table; other calls take guessed values.
    Guessing {
        table: &'a PartialInterpretation,
        domain: &'a [i64],
        max_unseen: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Invalid {
    Fault { message: String },
    OutOfFuel,
    Unsatisfied,
    TestFailed { test: usize },
    NeedsTooManyGuesses,
}

/// A valid candidate and how it scored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scored {
    pub cost: Cost,
    pub satisfying_index: Option<usize>,
    pub guesses: GuessTable,
}

/// Ordering used when choosing among candidates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RankKey {
    pub total: u64,
    pub syntactic: u64,
    pub satisfying_index: usize,
    pub first_line: Line,
    pub assignment: Vec<i64>,
    pub guesses: GuessTable,
}

pub struct Evaluator<'a> {
    pub sketched: &'a SketchedProgram,
    exe: Executable<'a>,
    original_holes: Vec<i64>,
    task: &'a Task,
    target: Option<Target>,
    manipulation_fuel: usize,
    test_fuel: Vec<usize>,
    test_tracked: Tracked,
    externals: Externals<'a>,
}

struct RegistryEnv<'a>(&'a Registry);

impl ExternalEnv for RegistryEnv<'_> {
    fn call(&mut self, name: &str, args: &[i64]) -> Result<i64, ExternalFault> {
        self.0.apply(name, args)
    }
}

enum RunError {
    Invalid(Invalid),
    NeedGuess(String, Vec<i64>),
}

fn fuel_for(len: usize, factor: f64) -> usize {
    ((len.max(1) as f64) * factor).ceil() as usize
}

impl<'a> Evaluator<'a> {
    pub fn new(
        sketched: &'a SketchedProgram,
        task: &'a Task,
        fuel_factor: f64,
        externals: Externals<'a>,
    ) -> Self {
        let exe = Executable::new(&sketched.program);
        let vars = exe.entry_vars();
        let target = task
            .manipulation
            .as_ref()
            .and_then(|m| Target::new(&task.program, &vars, m.location, &m.as_manipulation()));
        Evaluator {
            sketched,
            original_holes: sketched.original_assignment().0,
            manipulation_fuel: task
                .manipulation
                .as_ref()
                .map(|m| fuel_for(m.original.len(), fuel_factor))
                .unwrap_or(0),
            test_fuel: task
                .tests
                .iter()
                .map(|t| fuel_for(t.original.len(), fuel_factor))
                .collect(),
            test_tracked: Tracked::all(&vars),
            exe,
            task,
            target,
            externals,
        }
    }

    pub fn original_holes(&self) -> &[i64] {
        &self.original_holes
    }

    pub fn manipulation_fuel(&self) -> usize {
        self.manipulation_fuel
    }

    /// Runs the sketched program directly with `holes` in place.
    pub fn run(
        &self,
        holes: &[i64],
        initial: &Valuation,
        fuel: usize,
        env: &mut dyn ExternalEnv,
    ) -> Result<Trace, ExecError> {
        self.exe.run(holes, initial, fuel, env)
    }

    fn checked(&self, r: Result<Trace, ExecError>) -> Result<Trace, RunError> {
        match r {
            Ok(t) if t.terminated => Ok(t),
            Ok(_) => Err(RunError::Invalid(Invalid::OutOfFuel)),
            Err(ExecError {
                fault:
                    Fault {
                        reason: FaultReason::UnknownExternal { name, args },
                        ..
                    },
                ..
            }) => Err(RunError::NeedGuess(name, args)),
            Err(e) => Err(RunError::Invalid(Invalid::Fault {
                message: e.fault.to_string(),
            })),
        }
    }

    /// Semantic distance and satisfying index under one environment.
    fn run_all(
        &self,
        holes: &[i64],
        env: &mut dyn ExternalEnv,
    ) -> Result<(u64, Option<usize>), RunError> {
        let mut semantic = 0;
        let mut index = None;
        if let Some(m) = &self.task.manipulation {
            let target = self
                .target
                .as_ref()
                .ok_or(RunError::Invalid(Invalid::Unsatisfied))?;
            let t = self.checked(self.exe.run(holes, &m.initial, self.manipulation_fuel, env))?;
            let prefix = &m.original.configs[..=m.index.min(m.original.len() - 1)];
            let (d, j) = semantic_distance_with(prefix, &t.configs, target)
                .ok_or(RunError::Invalid(Invalid::Unsatisfied))?;
            semantic += d;
            index = Some(j);
        }
        for (i, ts) in self.task.tests.iter().enumerate() {
            let t = self.checked(self.exe.run(holes, &ts.test.input, self.test_fuel[i], env))?;
            if t.output().unwrap_or(&Value::Undefined) != &ts.test.output {
                return Err(RunError::Invalid(Invalid::TestFailed { test: i }));
            }
            if ts.original.terminated {
                semantic += trace_distance(&ts.original.configs, &t.configs, &self.test_tracked);
            }
        }
        Ok((semantic, index))
    }

    /// Scores `holes`, or says why it is not a repair.
    pub fn evaluate(&self, holes: &[i64]) -> Result<Scored, Invalid> {
        let syntactic = syntactic_slice(holes, &self.original_holes);
        match self.externals {
            Externals::Oracle(reg) => {
                let mut env = RegistryEnv(reg);
                match self.run_all(holes, &mut env) {
                    Ok((semantic, index)) => Ok(Scored {
                        cost: Cost::new(syntactic, semantic),
                        satisfying_index: index,
                        guesses: GuessTable::default(),
                    }),
                    Err(RunError::Invalid(i)) => Err(i),
                    Err(RunError::NeedGuess(name, _)) => Err(Invalid::Fault {
                        message: format!("call to unregistered external function '{name}'"),
                    }),
                }
            }
            Externals::Guessing {
                table,
                domain,
                max_unseen,
            } => {
                let mut search = GuessSearch {
                    eval: self,
                    holes,
                    table,
                    domain,
                    max_unseen,
                    guesses: GuessTable::default(),
                    best: None,
                    last_invalid: Invalid::Unsatisfied,
                };
                search.dfs();
                match search.best {
                    Some((semantic, index, guesses)) => Ok(Scored {
                        cost: Cost::new(syntactic, semantic),
                        satisfying_index: index,
                        guesses,
                    }),
                    None => Err(search.last_invalid),
                }
            }
        }
    }

    pub fn rank_key(&self, holes: &[i64], scored: &Scored) -> RankKey {
        let first_line = self
            .sketched
            .holes
            .iter()
            .filter(|h| holes[h.id] != h.original)
            .map(|h| h.site.line)
            .min()
            .unwrap_or(0);
        RankKey {
            total: scored.cost.total,
            syntactic: scored.cost.syntactic,
            satisfying_index: scored.satisfying_index.unwrap_or(0),
            first_line,
            assignment: holes.to_vec(),
            guesses: scored.guesses.clone(),
        }
    }
}

/// Depth-first search over values for calls missing from the table. Each
/// distinct unseen call gets one guess; the cheapest outcome wins.
struct GuessSearch<'e, 'a> {
    eval: &'e Evaluator<'a>,
    holes: &'e [i64],
    table: &'e PartialInterpretation,
    domain: &'e [i64],
    max_unseen: usize,
    guesses: GuessTable,
    best: Option<(u64, Option<usize>, GuessTable)>,
    last_invalid: Invalid,
}

impl GuessSearch<'_, '_> {
    fn dfs(&mut self) {
        let mut env = GuessEnv {
            table: self.table,
            guesses: &self.guesses,
        };
        match self.eval.run_all(self.holes, &mut env) {
            Ok((semantic, index)) => {
                let better = match &self.best {
                    None => true,
                    Some((s, i, g)) => match semantic.cmp(s) {
                        Ordering::Less => true,
                        Ordering::Greater => false,
                        Ordering::Equal => (index, &self.guesses) < (*i, g),
                    },
                };
                if better {
                    self.best = Some((semantic, index, self.guesses.clone()));
                }
            }
            Err(RunError::Invalid(i)) => self.last_invalid = i,
            Err(RunError::NeedGuess(name, args)) => {
                if self.guesses.entries.len() >= self.max_unseen {
                    self.last_invalid = Invalid::NeedsTooManyGuesses;
                    return;
                }
                for &v in self.domain {
                    self.guesses.entries.push(((name.clone(), args.clone()), v));
                    self.dfs();
                    self.guesses.entries.pop();
                }
            }
        }
    }
}
