mod support;

use std::collections::BTreeSet;

use serde_json::json;
use support::{load, valuation};
use tracefix_core::extfun::Registry;
use tracefix_core::lang::parse_program;
use tracefix_core::solver::{
    bound_schedule, repair, repair_single_line, Feedback, Mode, NoRepairReason, OptionsError,
    OptionsSpec, Outcome, RepairOptions, Session,
};
use tracefix_core::tracer::{execute, run_test, Test, Value, DEFAULT_FUEL};

#[test]
fn options_are_validated() {
    let l = load("max3");
    let m = l.manipulation.as_ref();
    let bad = [
        (
            RepairOptions {
                const_bound_schedule: vec![],
                ..RepairOptions::default()
            },
            OptionsError::Schedule,
        ),
        (
            RepairOptions {
                const_bound_schedule: vec![2, 2],
                ..RepairOptions::default()
            },
            OptionsError::Schedule,
        ),
        (
            RepairOptions {
                fuel_factor: 0.0,
                ..RepairOptions::default()
            },
            OptionsError::Fuel,
        ),
        (
            RepairOptions {
                allowed_locations: Some(BTreeSet::from([3])),
                disallowed_locations: BTreeSet::from([3]),
                ..RepairOptions::default()
            },
            OptionsError::Overlap(3),
        ),
    ];
    for (options, want) in bad {
        assert_eq!(repair(&l.program, m, &options).unwrap_err(), want);
    }
    assert_eq!(
        repair(&l.program, None, &RepairOptions::default()).unwrap_err(),
        OptionsError::NoSpecification
    );
}

#[test]
fn repaired_program_satisfies_the_manipulation() {
    let l = load("max3");
    let m = l.manipulation.as_ref().unwrap();
    let out = repair(&l.program, Some(m), &RepairOptions::default()).unwrap();
    let r = out.repaired().expect("repair");
    let t = execute(&r.program, &m.initial, DEFAULT_FUEL).unwrap();
    let k = r.satisfying_index.unwrap();
    assert_eq!(t.configs[k].location, l.original.configs[m.index].location);
    assert_eq!(t.value(k, "m"), Some(&Value::Int(3)));
}

#[test]
fn disallowed_lines_are_never_patched() {
    let l = load("largestGap");
    let options = RepairOptions {
        disallowed_locations: BTreeSet::from([7]),
        ..RepairOptions::default()
    };
    let out = repair(&l.program, l.manipulation.as_ref(), &options).unwrap();
    let r = out.repaired().expect("repair");
    assert!(!r.patch.touches(7));
}

#[test]
fn allowed_lines_restrict_the_scope() {
    let l = load("largestGap");
    let options = RepairOptions {
        allowed_locations: Some(BTreeSet::from([5])),
        ..RepairOptions::default()
    };
    let out = repair(&l.program, l.manipulation.as_ref(), &options).unwrap();
    let r = out.repaired().expect("repair");
    assert_eq!(r.patch.lines(), vec![5]);
    assert_eq!(r.patch.entries[0].after, "for(int i = 0; i < N-1; i++) {");
    assert_eq!((r.cost.syntactic, r.cost.semantic), (1, 3));
}

#[test]
fn single_line_agrees_with_full_on_one_line_fixes() {
    for name in ["max3", "multIA", "iterPower"] {
        let l = load(name);
        let m = l.manipulation.as_ref();
        let full = repair(&l.program, m, &RepairOptions::default()).unwrap();
        let single = repair_single_line(&l.program, m, &RepairOptions::default()).unwrap();
        let (f, s) = (full.repaired().unwrap(), single.repaired().unwrap());
        assert_eq!(f.patch.lines().len(), 1, "{name}");
        assert_eq!(f.cost, s.cost, "{name}");
        assert_eq!(f.patch, s.patch, "{name}");
        assert!(!s.stats.per_line.is_empty());
    }
}

#[test]
fn tests_only_repair() {
    let p = parse_program("int twice(int x){\n  int y = x + 1;\n  return y; }").unwrap();
    let tests: Vec<Test> = [(1, 2), (3, 6)]
        .into_iter()
        .map(|(x, y)| Test {
            input: valuation(&[("x", Value::Int(x))]),
            output: Value::Int(y),
        })
        .collect();
    let options = RepairOptions {
        tests: tests.clone(),
        ..RepairOptions::default()
    };
    let out = repair(&p, None, &options).unwrap();
    let r = out.repaired().expect("repair");
    for t in &tests {
        assert!(run_test(&r.program, t, DEFAULT_FUEL), "{:?}", r.patch);
    }
    assert_eq!(r.satisfying_index, None);
}

#[test]
fn unreachable_manipulation_is_no_repair() {
    let l = load("max3");
    let mut m = l.manipulation.clone().unwrap();
    // Step 0 comes before any statement runs.
    m.index = 0;
    m.values = support::partial(&[("m", Some(3))]);
    let options = RepairOptions {
        const_bound_schedule: vec![1, 2],
        allowed_locations: Some(BTreeSet::from([2])),
        ..RepairOptions::default()
    };
    let out = repair(&l.program, Some(&m), &options).unwrap();
    match out {
        Outcome::NoRepair(n) => assert_eq!(n.reason, NoRepairReason::Domain),
        Outcome::Repaired(r) => panic!("unexpected repair {:?}", r.patch),
    }
}

#[test]
fn tiny_budget_reports_budget() {
    let l = load("subLargestGap");
    let options = RepairOptions {
        max_candidates: 10,
        ..RepairOptions::default()
    };
    let out = repair(&l.program, l.manipulation.as_ref(), &options).unwrap();
    match out {
        Outcome::NoRepair(n) => assert_eq!(n.reason, NoRepairReason::Budget),
        Outcome::Repaired(r) => panic!("unexpected repair {:?}", r.patch),
    }
}

#[test]
fn outcome_json_shape() {
    let l = load("max3");
    let out = repair(
        &l.program,
        l.manipulation.as_ref(),
        &RepairOptions::default(),
    )
    .unwrap();
    let j = out.to_json();
    assert_eq!(j["status"], json!("repaired"));
    assert_eq!(j["cost"], json!(1));
    assert_eq!(j["patch"][0]["line"], json!(4));
    assert!(j["stats"]["candidates"].as_u64().unwrap() > 0);
    assert!(j["program"].as_str().unwrap().starts_with("int max3("));
}

#[test]
fn session_feedback_round_trip() {
    let l = load("largestGap");
    let options = RepairOptions {
        mode: Mode::Full,
        ..RepairOptions::default()
    };
    let mut s = Session::new(l.program, l.manipulation, options, Registry::standard()).unwrap();
    let first = s.propose().repaired().unwrap().clone();
    let f: Feedback = serde_json::from_value(json!({"kind": "location", "location": 7})).unwrap();
    assert_eq!(f, Feedback::Location { location: 7 });
    let next = s.next_repair(f).repaired().unwrap().clone();
    assert!(first.patch.touches(7));
    assert!(!next.patch.touches(7));
    assert!(next.cost.total >= first.cost.total);
    assert_eq!(s.history.len(), 2);
}

#[test]
fn options_spec_defaults_match_solver_defaults() {
    let spec: OptionsSpec = serde_json::from_value(json!({})).unwrap();
    let o = spec.to_options(Vec::new()).unwrap();
    let d = RepairOptions::default();
    assert_eq!(o.const_bound_schedule, d.const_bound_schedule);
    assert_eq!(
        (o.mode, o.fuel_factor, o.max_candidates, o.use_slicing),
        (d.mode, d.fuel_factor, d.max_candidates, d.use_slicing)
    );
    assert_eq!(bound_schedule(1), vec![1]);
    assert_eq!(bound_schedule(5), vec![1, 2, 4, 5]);
    let spec: OptionsSpec =
        serde_json::from_value(json!({"mode": "single-line", "max_const": 0})).unwrap();
    assert_eq!(spec.mode, Mode::SingleLine);
    assert_eq!(
        spec.to_options(Vec::new()).unwrap_err(),
        OptionsError::Schedule
    );
    assert!(serde_json::from_value::<OptionsSpec>(json!({"bogus": 1})).is_err());
}
