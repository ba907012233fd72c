//! Fixture helpers and property suites shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use tracefix_core::corpus;
use tracefix_core::distances::{config_distance, syntactic_distance, trace_distance, Tracked};
use tracefix_core::extfun::Registry;
use tracefix_core::lang::{diff_programs, print_program, Line, Location, Program, Type};
use tracefix_core::sketcher::{instantiate, sketch, HoleAssignment, HoleKind};
use tracefix_core::solver::{Feedback, Outcome, RepairOptions, Session};
use tracefix_core::tracer::{
    execute, satisfies_partial, satisfying_indices, Configuration, Expected, Manipulation,
    PartialValuation, Test, Trace, Valuation, Value, DEFAULT_FUEL,
};

/// Cases per property suite.
pub const CASES: u32 = 256;

/// A bundled fixture resolved against its manipulation file.
pub struct Loaded {
    pub program: Program,
    pub manipulation: Option<Manipulation>,
    pub tests: Vec<Test>,
    pub original: Trace,
}

pub fn load(name: &str) -> Loaded {
    let fx = corpus::by_name(name).unwrap_or_else(|| panic!("no fixture {name}"));
    let program = fx.program();
    let file = fx.manipulation_file().expect("fixture has a manipulation");
    let r = file.resolve(&program).expect("manipulation resolves");
    Loaded {
        program,
        manipulation: r.manipulation,
        tests: r.tests,
        original: r.original,
    }
}

pub fn int_array(items: &[i64]) -> Value {
    Value::int_array(items.iter().copied())
}

pub fn valuation(pairs: &[(&str, Value)]) -> Valuation {
    pairs
        .iter()
        .map(|(n, v)| (n.to_string(), v.clone()))
        .collect()
}

pub fn partial(pairs: &[(&str, Option<i64>)]) -> PartialValuation {
    pairs
        .iter()
        .map(|(n, v)| {
            let e = match v {
                Some(x) => Expected::Is(Value::Int(*x)),
                None => Expected::Any,
            };
            (n.to_string(), e)
        })
        .collect()
}

/// Indices of the visits to `line`, in order.
pub fn visits(trace: &Trace, line: Line) -> Vec<usize> {
    trace
        .configs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.location == Location::Line(line))
        .map(|(k, _)| k)
        .collect()
}

fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    })
}

fn run<S: Strategy>(
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner().run(&strategy, test).map_err(|e| e.to_string())
}

fn fixture_names() -> Vec<&'static str> {
    corpus::all().into_iter().map(|f| f.name).collect()
}

/// Random value for every parameter of `program`'s entry function.
fn input_strategy(program: &Program) -> impl Strategy<Value = Valuation> {
    let params: Vec<(String, Type)> = program.entry_fn().params.clone();
    let per: Vec<BoxedStrategy<(String, Value)>> = params
        .into_iter()
        .map(|(name, ty)| {
            if ty.is_array() {
                prop::collection::vec(-5i64..=5, 0..6)
                    .prop_map(move |v| (name.clone(), Value::int_array(v)))
                    .boxed()
            } else {
                (-4i64..=5)
                    .prop_map(move |x| (name.clone(), Value::Int(x)))
                    .boxed()
            }
        })
        .collect();
    per.prop_map(|pairs| pairs.into_iter().collect())
}

fn run_trace(program: &Program, input: &Valuation, fuel: usize) -> Trace {
    match execute(program, input, fuel) {
        Ok(t) => t,
        Err(e) => e.partial,
    }
}

/// Instantiating a sketch at its original assignment gives back the
/// program, and any in-domain assignment only changes scoped lines.
pub fn sketch_identity() -> Result<(), String> {
    let names = fixture_names();
    let strategy = (
        0..names.len(),
        any::<u32>(),
        prop::collection::vec(-4i64..=4, 128),
    );
    run(strategy, |(f, mask, raw)| {
        let program = corpus::by_name(names[f]).unwrap().program();
        let lines = program.entry_fn().locations();
        let scope: BTreeSet<Line> = lines
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> (i % 32) & 1 == 1)
            .map(|(_, &l)| l)
            .collect();
        let sk = sketch(&program, &scope);
        let same = instantiate(&sk, &sk.original_assignment())
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(print_program(&same), print_program(&program));

        let values = sk
            .holes
            .iter()
            .zip(raw.iter().cycle())
            .map(|(h, &r)| match h.kind {
                HoleKind::Coeff => r.rem_euclid(3) - 1,
                HoleKind::Const => r,
            })
            .collect();
        let a = HoleAssignment(values);
        prop_assert!(sk.check(&a).is_ok());
        let changed = sk.changed_lines(&a);
        prop_assert!(changed.is_subset(&scope));
        let candidate = instantiate(&sk, &a).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let patch =
            diff_programs(&program, &candidate).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for line in patch.lines() {
            prop_assert!(
                changed.contains(&line),
                "line {} changed without a hole change",
                line
            );
        }
        Ok(())
    })
}

fn value_strategy() -> impl Strategy<Value = Value> {
    prop_oneof![
        Just(Value::Undefined),
        (-3i64..=3).prop_map(Value::Int),
        prop::collection::vec(-2i64..=2, 0..3).prop_map(Value::int_array),
    ]
}

const SLOTS: usize = 4;

fn config_strategy() -> impl Strategy<Value = Configuration> {
    (
        prop_oneof![(1u32..=4).prop_map(Location::Line), Just(Location::Exit)],
        prop::collection::vec(value_strategy(), SLOTS),
    )
        .prop_map(|(location, values)| Configuration { location, values })
}

/// Syntactic distance is a metric; configuration and trace distances are
/// symmetric, bounded and zero exactly on agreement.
pub fn distance_metric() -> Result<(), String> {
    let tracked_strategy = prop::collection::btree_set(0..SLOTS, 0..=SLOTS)
        .prop_map(|s| Tracked(s.into_iter().collect()));
    let traces = || prop::collection::vec(config_strategy(), 0..6);
    let holes = || prop::collection::vec(-4i64..=4, 5);
    let strategy = (
        tracked_strategy,
        (traces(), traces(), traces()),
        (holes(), holes(), holes()),
    );
    run(strategy, |(tracked, (ta, tb, tc), (ha, hb, hc))| {
        let bound = 1 + tracked.0.len() as u64;
        for (a, b, c) in ta.iter().zip(&tb).zip(&tc).map(|((a, b), c)| (a, b, c)) {
            prop_assert_eq!(config_distance(a, a, &tracked), 0);
            prop_assert_eq!(
                config_distance(a, b, &tracked),
                config_distance(b, a, &tracked)
            );
            prop_assert!(
                config_distance(a, c, &tracked)
                    <= config_distance(a, b, &tracked) + config_distance(b, c, &tracked)
            );
            prop_assert!(config_distance(a, b, &tracked) <= bound);
            let agree =
                a.location == b.location && tracked.0.iter().all(|&k| a.values[k] == b.values[k]);
            prop_assert_eq!(config_distance(a, b, &tracked) == 0, agree);
        }
        let d = |x: &[Configuration], y: &[Configuration]| trace_distance(x, y, &tracked);
        prop_assert_eq!(d(&ta, &ta), 0);
        prop_assert_eq!(d(&ta, &tb), d(&tb, &ta));
        let pairwise_equal = ta.len() == tb.len()
            && ta
                .iter()
                .zip(&tb)
                .all(|(x, y)| config_distance(x, y, &tracked) == 0);
        prop_assert_eq!(d(&ta, &tb) == 0, pairwise_equal);
        prop_assert!(d(&ta, &tb) >= ta.len().abs_diff(tb.len()) as u64);
        prop_assert!(
            d(&ta, &tb)
                <= bound * ta.len().min(tb.len()) as u64 + ta.len().abs_diff(tb.len()) as u64
        );

        let (a, b, c) = (HoleAssignment(ha), HoleAssignment(hb), HoleAssignment(hc));
        let s = |x: &HoleAssignment, y: &HoleAssignment| syntactic_distance(x, y).unwrap();
        prop_assert_eq!(s(&a, &a), 0);
        prop_assert_eq!(s(&a, &b) == 0, a == b);
        prop_assert_eq!(s(&a, &b), s(&b, &a));
        prop_assert!(s(&a, &c) <= s(&a, &b) + s(&b, &c));
        let expected: u64 = a.0.iter().zip(&b.0).map(|(x, y)| x.abs_diff(*y)).sum();
        prop_assert_eq!(s(&a, &b), expected);
        prop_assert!(syntactic_distance(&a, &HoleAssignment(vec![0; 4])).is_err());
        Ok(())
    })
}

/// Weakening a partial valuation never loses a satisfying configuration.
pub fn satisfaction_monotonicity() -> Result<(), String> {
    let program = corpus::by_name("largestGap").unwrap().program();
    let names = ["N", "max", "min", "i", "res"];
    let strategy = (
        input_strategy(&program),
        prop::collection::vec(
            (0..names.len(), prop::option::of(-5i64..=9), any::<bool>()),
            0..5,
        ),
        1u32..=11,
    );
    run(strategy, |(input, entries, line)| {
        let trace = run_trace(&program, &input, DEFAULT_FUEL);
        let strong: PartialValuation = entries
            .iter()
            .map(|&(n, v, _)| {
                let e = v.map_or(Expected::Any, |x| Expected::Is(Value::Int(x)));
                (names[n].to_string(), e)
            })
            .collect();
        let weak: PartialValuation = strong
            .iter()
            .zip(entries.iter().map(|e| e.2).cycle())
            .filter(|(_, keep)| *keep)
            .map(|((n, e), _)| (n.clone(), e.clone()))
            .collect();
        for k in 0..trace.len() {
            let nu = trace.valuation(k);
            if satisfies_partial(&nu, &strong) {
                prop_assert!(satisfies_partial(&nu, &weak));
            }
            let own: PartialValuation = nu
                .iter()
                .map(|(n, v)| (n.clone(), Expected::Is(v.clone())))
                .collect();
            prop_assert!(satisfies_partial(&nu, &own));
        }
        let location = Location::Line(line);
        let strong_idx: BTreeSet<usize> = satisfying_indices(&trace, location, &strong)
            .into_iter()
            .collect();
        let weak_idx: BTreeSet<usize> = satisfying_indices(&trace, location, &weak)
            .into_iter()
            .collect();
        prop_assert!(strong_idx.is_subset(&weak_idx));
        Ok(())
    })
}

/// A run with less fuel is a prefix of a run with more.
pub fn fuel_prefix_stability() -> Result<(), String> {
    let names = fixture_names();
    let programs: Vec<Program> = names
        .iter()
        .map(|n| corpus::by_name(n).unwrap().program())
        .collect();
    let strategy = (0..programs.len()).prop_flat_map(move |i| {
        (
            Just(i),
            input_strategy(&corpus::by_name(names[i]).unwrap().program()),
            0usize..40,
            0usize..40,
        )
    });
    run(strategy, |(i, input, f1, extra)| {
        let program = &programs[i];
        let short = run_trace(program, &input, f1);
        let long = run_trace(program, &input, f1 + extra);
        prop_assert!(short.len() <= f1.max(1));
        prop_assert!(short.len() <= long.len());
        for (a, b) in short.configs.iter().zip(&long.configs) {
            prop_assert_eq!(a.location, b.location);
            prop_assert_eq!(&a.values, &b.values);
        }
        if short.terminated {
            prop_assert_eq!(&short, &long);
        }
        Ok(())
    })
}

/// Rejecting proposals never makes the next one cheaper.
pub fn rejection_monotonicity() -> Result<(), String> {
    let names = ["max3", "iterPower", "multIA", "triple"];
    let programs: Vec<Program> = names
        .iter()
        .map(|n| corpus::by_name(n).unwrap().program())
        .collect();
    let strategy = (0..programs.len()).prop_flat_map(move |i| {
        (
            Just(i),
            input_strategy(&corpus::by_name(names[i]).unwrap().program()),
            any::<prop::sample::Index>(),
            any::<prop::sample::Index>(),
            -3i64..=3,
            prop::collection::vec(any::<bool>(), 3),
        )
    });
    run(strategy, |(i, input, at, var, value, feedback)| {
        let program = programs[i].clone();
        let trace = run_trace(&program, &input, DEFAULT_FUEL);
        prop_assume!(!trace.is_empty());
        let params: Vec<&str> = program
            .entry_fn()
            .params
            .iter()
            .map(|(n, _)| n.as_str())
            .collect();
        let locals: Vec<&String> = trace
            .vars
            .iter()
            .filter(|n| !params.contains(&n.as_str()) && n.as_str() != "return")
            .collect();
        prop_assume!(!locals.is_empty());
        let index = at.index(trace.len());
        let name = locals[var.index(locals.len())].clone();
        let manipulation = Manipulation {
            initial: input,
            index,
            values: [(name, Expected::Is(Value::Int(value)))].into(),
        };
        let options = RepairOptions {
            const_bound_schedule: vec![1],
            max_candidates: 20_000,
            ..RepairOptions::default()
        };
        let mut session = Session::new(program, Some(manipulation), options, Registry::standard())
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let mut costs = Vec::new();
        let mut patches = Vec::new();
        let mut record = |o: &Outcome| {
            if let Some(r) = o.repaired() {
                costs.push(r.cost.total);
                patches.push(r.patch.clone());
            }
        };
        record(session.propose());
        for reject_patch in feedback {
            let f = match (reject_patch, session.last().and_then(Outcome::repaired)) {
                (false, Some(r)) if !r.patch.lines().is_empty() => Feedback::Location {
                    location: r.patch.lines()[0],
                },
                _ => Feedback::Patch,
            };
            record(session.next_repair(f));
        }
        prop_assert!(costs.windows(2).all(|w| w[0] <= w[1]), "costs {:?}", costs);
        for (k, p) in patches.iter().enumerate() {
            prop_assert!(!patches[..k].contains(p), "patch proposed twice");
        }
        Ok(())
    })
}
