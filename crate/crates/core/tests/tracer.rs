mod support;

use serde_json::json;
use support::{int_array, valuation};
use tracefix_core::lang::{parse_program, parse_program_with_entry, Location};
use tracefix_core::tracer::{
    execute, run_test, satisfying_indices, Expected, FaultReason, ManipulationError,
    ManipulationFile, Test, Value, DEFAULT_FUEL,
};

fn file(v: serde_json::Value) -> ManipulationFile {
    serde_json::from_value(v).unwrap()
}

fn largest_gap() -> tracefix_core::lang::Program {
    tracefix_core::corpus::by_name("largestGap")
        .unwrap()
        .program()
}

#[test]
fn out_of_bounds_keeps_partial_trace() {
    let p = largest_gap();
    let e = execute(&p, &valuation(&[("x", int_array(&[]))]), DEFAULT_FUEL).unwrap_err();
    assert_eq!(e.fault.location, Location::Line(3));
    assert_eq!(
        e.fault.reason,
        FaultReason::IndexOutOfBounds { index: -1, len: 0 }
    );
    assert_eq!(e.partial.len(), 2);
    assert!(!e.partial.terminated);
}

#[test]
fn division_by_zero_faults() {
    let p = parse_program("int f(int a){\n  int b = 10 / a;\n  return b; }").unwrap();
    let e = execute(&p, &valuation(&[("a", Value::Int(0))]), DEFAULT_FUEL).unwrap_err();
    assert_eq!(e.fault.reason, FaultReason::DivisionByZero);
}

#[test]
fn recursion_runs_and_callee_steps_are_hidden() {
    let src = "int fact(int n){\n  if(n <= 1)\n    return 1;\n  return n * fact(n - 1); }\n\
               int main(int n){\n  int r = fact(n);\n  return r; }";
    let p = parse_program_with_entry(src, "main").unwrap();
    let t = execute(&p, &valuation(&[("n", Value::Int(5))]), DEFAULT_FUEL).unwrap();
    assert_eq!(t.output(), Some(&Value::Int(120)));
    assert_eq!(
        t.locations(),
        vec![Location::Line(6), Location::Line(7), Location::Exit]
    );
}

#[test]
fn unbounded_loop_exhausts_fuel() {
    let p =
        parse_program("int f(int a){\n  while(a > 0){\n    a = a + 1; }\n  return a; }").unwrap();
    let e = execute(&p, &valuation(&[("a", Value::Int(1))]), 50);
    let t = match e {
        Ok(t) => t,
        Err(e) => e.partial,
    };
    assert!(!t.terminated);
    assert!(t.len() <= 50);
}

#[test]
fn satisfying_indices_for_example_manipulation() {
    let p = largest_gap();
    let t = execute(
        &p,
        &valuation(&[("x", int_array(&[9, 5, 4]))]),
        DEFAULT_FUEL,
    )
    .unwrap();
    let max5 = support::partial(&[("max", Some(5)), ("i", None)]);
    // max is 5 before line 8 and again before line 5, 10 and 11; only the
    // line 8 visit counts.
    assert_eq!(satisfying_indices(&t, Location::Line(8), &max5), vec![6]);
    assert_eq!(satisfying_indices(&t, Location::Line(5), &max5), vec![7]);
    assert!(satisfying_indices(
        &t,
        Location::Line(8),
        &support::partial(&[("max", Some(9))])
    )
    .is_empty());
}

#[test]
fn run_test_compares_output() {
    let p = largest_gap();
    let input = valuation(&[("x", int_array(&[9, 5, 4]))]);
    assert!(run_test(
        &p,
        &Test {
            input: input.clone(),
            output: Value::Int(1)
        },
        DEFAULT_FUEL
    ));
    assert!(!run_test(
        &p,
        &Test {
            input,
            output: Value::Int(5)
        },
        DEFAULT_FUEL
    ));
}

#[test]
fn manipulation_by_occurrence() {
    let p = largest_gap();
    let r = file(
        json!({"input": {"x": [9, 5, 4]}, "at": {"loc": 5, "occurrence": 2}, "values": {"max": 9}}),
    )
    .resolve(&p)
    .unwrap();
    let m = r.manipulation.unwrap();
    assert_eq!(m.index, 7);
    assert_eq!(m.values.get("max"), Some(&Expected::Is(Value::Int(9))));
}

#[test]
fn manipulation_errors() {
    let p = largest_gap();
    let cases = [
        (
            json!({"input": {"x": [9, 5, 4]}, "index": 40, "values": {"max": 9}}),
            ManipulationError::IndexOutOfRange { index: 40, len: 11 },
        ),
        (
            json!({"input": {"x": [9, 5, 4]}, "at": {"loc": 8, "occurrence": 3}, "values": {"max": 9}}),
            ManipulationError::OccurrenceNotFound {
                loc: 8,
                occurrence: 3,
            },
        ),
        (
            json!({"input": {"x": [9, 5, 4]}, "index": 6, "values": {"x": [1]}}),
            ManipulationError::InputManipulated("x".into()),
        ),
        (
            json!({"input": {"x": [9, 5, 4]}, "index": 6, "values": {"nope": 1}}),
            ManipulationError::UnknownVariable("nope".into()),
        ),
        (
            json!({"input": {}, "index": 6, "values": {"max": 9}}),
            ManipulationError::MissingInput("x".into()),
        ),
        (
            json!({"input": {"x": [9, 5, 4]}, "index": 6, "at": {"loc": 8, "occurrence": 1}, "values": {"max": 9}}),
            ManipulationError::Addressing,
        ),
    ];
    for (j, want) in cases {
        assert_eq!(file(j.clone()).resolve(&p).unwrap_err(), want, "{j}");
    }
}

#[test]
fn manipulation_file_rejects_unknown_fields() {
    let r: Result<ManipulationFile, _> =
        serde_json::from_value(json!({"input": {}, "index": 1, "values": {}, "extra": true}));
    assert!(r.is_err());
}

#[test]
fn trace_json_uses_null_for_unassigned() {
    let p = largest_gap();
    let t = execute(
        &p,
        &valuation(&[("x", int_array(&[9, 5, 4]))]),
        DEFAULT_FUEL,
    )
    .unwrap();
    let j = t.to_json();
    assert_eq!(j["terminated"], json!(true));
    assert_eq!(j["steps"][0]["vars"]["max"], json!(null));
    assert_eq!(j["steps"][10]["loc"], json!("exit"));
    assert_eq!(j["steps"][10]["vars"]["return"], json!(1));
}
