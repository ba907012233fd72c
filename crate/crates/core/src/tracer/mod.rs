//! Execution traces, manipulations and tests.

mod interp;
mod value;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use thiserror::Error;

pub use interp::{
    execute_with, Configuration, ExecError, Executable, ExternalEnv, ExternalFault, Fault,
    FaultReason, NoExternals, Trace,
};
pub use value::{Valuation, Value};

use crate::extfun::Registry;
use crate::lang::{Location, Program, Type, OUTPUT_VAR};

/// Fuel used for runs of the unmodified program.
pub const DEFAULT_FUEL: usize = 100_000;

/// Runs `program` with the standard external functions.
pub fn execute(program: &Program, initial: &Valuation, fuel: usize) -> Result<Trace, ExecError> {
    let mut env = Registry::standard();
    execute_with(program, initial, fuel, &mut env)
}

/// One entry of a partial valuation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expected {
    /// `?`: unconstrained.
    Any,
    Is(Value),
}

pub type PartialValuation = BTreeMap<String, Expected>;

/// `valuation ⊢ partial`: every non-`?` entry agrees.
pub fn satisfies_partial(valuation: &Valuation, partial: &PartialValuation) -> bool {
    partial.iter().all(|(name, e)| match e {
        Expected::Any => true,
        Expected::Is(v) => valuation.get(name).unwrap_or(&Value::Undefined) == v,
    })
}

/// Partial valuation resolved against a trace's slot layout.
#[derive(Debug, Clone)]
pub struct SlotConstraint(Vec<(usize, Value)>);

impl SlotConstraint {
    /// Returns `None` when a constrained variable has no slot, in which case
    /// no configuration can satisfy it unless the value is ⊥.
    pub fn new(vars: &[String], partial: &PartialValuation) -> Option<Self> {
        let mut out = Vec::new();
        for (name, e) in partial {
            if let Expected::Is(v) = e {
                match vars.iter().position(|n| n == name) {
                    Some(s) => out.push((s, v.clone())),
                    None if v.is_undefined() => {}
                    None => return None,
                }
            }
        }
        Some(SlotConstraint(out))
    }

    pub fn holds(&self, values: &[Value]) -> bool {
        self.0.iter().all(|(s, v)| &values[*s] == v)
    }
}

/// Indices `j` with `trace[j]` at `location` and satisfying `partial`.
pub fn satisfying_indices(
    trace: &Trace,
    location: Location,
    partial: &PartialValuation,
) -> Vec<usize> {
    let Some(c) = SlotConstraint::new(&trace.vars, partial) else {
        return Vec::new();
    };
    trace
        .configs
        .iter()
        .enumerate()
        .filter(|(_, cf)| cf.location == location && c.holds(&cf.values))
        .map(|(j, _)| j)
        .collect()
}

/// A direct manipulation: at index `index` of the trace from `initial`, the
/// user wants the variables in `values` to hold.
#[derive(Debug, Clone, PartialEq)]
pub struct Manipulation {
    pub initial: Valuation,
    pub index: usize,
    pub values: PartialValuation,
}

impl Manipulation {
    /// Variables pinned to a concrete value.
    pub fn manipulated_vars(&self) -> Vec<&str> {
        self.values
            .iter()
            .filter(|(_, e)| matches!(e, Expected::Is(_)))
            .map(|(n, _)| n.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Test {
    pub input: Valuation,
    pub output: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestOutcome {
    Pass,
    Fail { actual: Value },
    OutOfFuel,
    Fault(Fault),
}

impl TestOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, TestOutcome::Pass)
    }
}

pub fn test_outcome(
    program: &Program,
    test: &Test,
    fuel: usize,
    env: &mut dyn ExternalEnv,
) -> TestOutcome {
    match execute_with(program, &test.input, fuel, env) {
        Err(e) => TestOutcome::Fault(e.fault),
        Ok(t) if !t.terminated => TestOutcome::OutOfFuel,
        Ok(t) => {
            let actual = t.output().cloned().unwrap_or(Value::Undefined);
            if actual == test.output {
                TestOutcome::Pass
            } else {
                TestOutcome::Fail { actual }
            }
        }
    }
}

pub fn run_test(program: &Program, test: &Test, fuel: usize) -> bool {
    test_outcome(program, test, fuel, &mut Registry::standard()).passed()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ManipulationError {
    #[error("missing value for input variable '{0}'")]
    MissingInput(String),
    #[error("'{0}' is not a parameter of the entry function")]
    UnknownInput(String),
    #[error("input variable '{0}' cannot be manipulated")]
    InputManipulated(String),
    #[error("'{0}' is not a variable of the entry function")]
    UnknownVariable(String),
    #[error("value for '{name}': {message}")]
    BadValue { name: String, message: String },
    #[error("give exactly one of `index` and `at`")]
    Addressing,
    #[error("index {index} is outside the original trace of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("location {loc} is not visited {occurrence} time(s) in the original trace")]
    OccurrenceNotFound { loc: u32, occurrence: usize },
    #[error("the manipulation constrains no variable")]
    Empty,
    #[error("original program: {0}")]
    Fault(Fault),
}

/// Decodes a JSON object of entry-function arguments.
pub fn decode_input(
    program: &Program,
    input: &serde_json::Map<String, Json>,
) -> Result<Valuation, ManipulationError> {
    let f = program.entry_fn();
    for name in input.keys() {
        if !f.params.iter().any(|(p, _)| p == name) {
            return Err(ManipulationError::UnknownInput(name.clone()));
        }
    }
    f.params
        .iter()
        .map(|(name, ty)| {
            let j = input
                .get(name)
                .ok_or_else(|| ManipulationError::MissingInput(name.clone()))?;
            let v = Value::from_json(j, *ty).map_err(|message| ManipulationError::BadValue {
                name: name.clone(),
                message,
            })?;
            if v.is_undefined() {
                return Err(ManipulationError::MissingInput(name.clone()));
            }
            Ok((name.clone(), v))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occurrence {
    pub loc: u32,
    /// 1-based visit count.
    pub occurrence: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFile {
    pub input: serde_json::Map<String, Json>,
    pub output: Json,
}

/// On-disk manipulation format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManipulationFile {
    pub input: serde_json::Map<String, Json>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<Occurrence>,
    #[serde(default)]
    pub values: serde_json::Map<String, Json>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tests: Vec<TestFile>,
}

/// A manipulation file checked against its program.
#[derive(Debug, Clone)]
pub struct Resolved {
    /// `None` for a file that only carries tests.
    pub manipulation: Option<Manipulation>,
    pub tests: Vec<Test>,
    /// The original program's trace on the manipulation input.
    pub original: Trace,
}

pub fn decode_tests(program: &Program, tests: &[TestFile]) -> Result<Vec<Test>, ManipulationError> {
    let ret = program.entry_fn().return_type;
    tests
        .iter()
        .map(|t| {
            let input = decode_input(program, &t.input)?;
            let output = Value::from_json(&t.output, ret).map_err(|message| {
                ManipulationError::BadValue {
                    name: OUTPUT_VAR.into(),
                    message,
                }
            })?;
            Ok(Test { input, output })
        })
        .collect()
}

impl ManipulationFile {
    pub fn resolve(&self, program: &Program) -> Result<Resolved, ManipulationError> {
        let initial = decode_input(program, &self.input)?;
        let tests = decode_tests(program, &self.tests)?;
        let original = match execute(program, &initial, DEFAULT_FUEL) {
            Ok(t) => t,
            Err(e) if matches!(e.fault.reason, FaultReason::MissingInput(_)) => {
                return Err(ManipulationError::Fault(e.fault))
            }
            // A crashing run can still be manipulated up to the fault.
            Err(e) => e.partial,
        };
        let index = match (self.index, self.at) {
            (Some(k), None) => {
                if k >= original.len() {
                    return Err(ManipulationError::IndexOutOfRange {
                        index: k,
                        len: original.len(),
                    });
                }
                Some(k)
            }
            (None, Some(at)) => {
                let k = original
                    .configs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.location == Location::Line(at.loc))
                    .nth(at.occurrence.wrapping_sub(1))
                    .map(|(k, _)| k)
                    .ok_or(ManipulationError::OccurrenceNotFound {
                        loc: at.loc,
                        occurrence: at.occurrence,
                    })?;
                Some(k)
            }
            (None, None) if self.values.is_empty() && !tests.is_empty() => None,
            _ => return Err(ManipulationError::Addressing),
        };
        let manipulation = match index {
            None => None,
            Some(index) => {
                let values = decode_partial(program, &self.values)?;
                Some(Manipulation {
                    initial,
                    index,
                    values,
                })
            }
        };
        Ok(Resolved {
            manipulation,
            tests,
            original,
        })
    }
}

/// Decodes `{var: value | "?"}` against the entry function's variable types.
pub fn decode_partial(
    program: &Program,
    values: &serde_json::Map<String, Json>,
) -> Result<PartialValuation, ManipulationError> {
    let exe = Executable::new(program);
    let f = program.entry_fn();
    let names = exe.entry_vars();
    let types = exe.entry_types();
    let mut out = PartialValuation::new();
    for (name, j) in values {
        if f.params.iter().any(|(p, _)| p == name) {
            return Err(ManipulationError::InputManipulated(name.clone()));
        }
        let slot = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ManipulationError::UnknownVariable(name.clone()))?;
        let ty: Type = types[slot];
        let e = if j.as_str() == Some("?") {
            Expected::Any
        } else {
            Expected::Is(Value::from_json(j, ty).map_err(|message| {
                ManipulationError::BadValue {
                    name: name.clone(),
                    message,
                }
            })?)
        };
        out.insert(name.clone(), e);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::lang::parse_program;

    fn input(program: &Program, j: Json) -> Valuation {
        decode_input(program, j.as_object().unwrap()).unwrap()
    }

    #[test]
    fn identity_trace() {
        let p = parse_program("int id(int x){ return x; }").unwrap();
        let t = execute(&p, &input(&p, serde_json::json!({"x": 7})), 100).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.terminated);
        assert_eq!(t.output(), Some(&Value::Int(7)));
    }

    #[test]
    fn fuel_exhaustion() {
        let p = parse_program("void f(){\n  while(true){\n  }\n}").unwrap();
        let t = execute(&p, &Valuation::new(), 10).unwrap();
        assert_eq!(t.len(), 10);
        assert!(!t.terminated);
    }

    #[test]
    fn faults_keep_partial_trace() {
        let p = parse_program("int f(int[] a){\n  int y = a[3];\n  return y;\n}").unwrap();
        let e = execute(&p, &input(&p, serde_json::json!({"a": [1]})), 100).unwrap_err();
        assert_eq!(e.fault.location, Location::Line(2));
        assert!(matches!(
            e.fault.reason,
            FaultReason::IndexOutOfBounds { index: 3, len: 1 }
        ));
        assert_eq!(e.partial.len(), 1);
    }

    #[test]
    fn user_calls_are_hidden() {
        let src = "int f(int n){\n  int r = g(n);\n  return r;\n}\nint g(int k){\n  if(k <= 0)\n    return 0;\n  return k + g(k - 1);\n}";
        let p = parse_program(src).unwrap();
        let t = execute(&p, &input(&p, serde_json::json!({"n": 4})), 100).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.output(), Some(&Value::Int(10)));
    }

    #[test]
    fn occurrence_addressing() {
        let p = parse_program(corpus::LARGEST_GAP).unwrap();
        let file: ManipulationFile = serde_json::from_value(serde_json::json!({
            "input": {"x": [9, 5, 4]},
            "at": {"loc": 5, "occurrence": 2},
            "values": {"i": 0}
        }))
        .unwrap();
        let r = file.resolve(&p).unwrap();
        assert_eq!(r.manipulation.unwrap().index, 7);

        let bad: ManipulationFile = serde_json::from_value(serde_json::json!({
            "input": {"x": [9, 5, 4]},
            "index": 3,
            "values": {"x": [1]}
        }))
        .unwrap();
        assert_eq!(
            bad.resolve(&p).unwrap_err(),
            ManipulationError::InputManipulated("x".into())
        );
    }
}
