//! The `repair` command.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde_json::{json, Map, Value};
use tracefix_core::corpus;
use tracefix_core::extfun::{cegis_repair, Registry};
use tracefix_core::lang::{Line, Program};
use tracefix_core::slicer;
use tracefix_core::solver::{repair, Mode, OptionsSpec, Outcome, RepairOptions, Task};
use tracefix_core::tracer::{decode_tests, Manipulation, ManipulationFile, TestFile};

use crate::{load_program, print_json, read_file, Failure};

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    SingleLine,
}

#[derive(Args)]
pub struct RepairArgs {
    /// Program source; omit with --seed-corpus.
    #[arg(required_unless_present = "seed_corpus")]
    program: Option<PathBuf>,
    /// Manipulation file.
    #[arg(required_unless_present = "seed_corpus")]
    manipulation: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "full")]
    mode: ModeArg,
    /// Largest constant a hole may take.
    #[arg(long)]
    max_const: Option<i64>,
    /// Candidate fuel as a multiple of the original trace length.
    #[arg(long)]
    fuel_factor: Option<f64>,
    /// Only these lines may change.
    #[arg(long, value_delimiter = ',')]
    allow_lines: Option<Vec<Line>>,
    #[arg(long, value_delimiter = ',')]
    disallow_lines: Vec<Line>,
    /// Solve single-line sketches on the full program.
    #[arg(long)]
    no_slice: bool,
    /// JSON list of {input, output} tests added to the manipulation file's.
    #[arg(long)]
    tests: Option<PathBuf>,
    /// Include the guess-and-verify log for programs with external calls.
    #[arg(long)]
    explain_cegis: bool,
    /// Include the slice of every line considered in single-line mode.
    #[arg(long)]
    explain_slice: bool,
    /// Repair every bundled fixture instead.
    #[arg(long)]
    seed_corpus: bool,
}

impl RepairArgs {
    fn spec(&self) -> OptionsSpec {
        let d = OptionsSpec::default();
        OptionsSpec {
            mode: match self.mode {
                ModeArg::Full => Mode::Full,
                ModeArg::SingleLine => Mode::SingleLine,
            },
            max_const: self.max_const.unwrap_or(d.max_const),
            fuel_factor: self.fuel_factor.unwrap_or(d.fuel_factor),
            allow_lines: self
                .allow_lines
                .as_ref()
                .map(|l| l.iter().copied().collect()),
            disallow_lines: self.disallow_lines.iter().copied().collect(),
            slice: !self.no_slice,
            max_candidates: d.max_candidates,
        }
    }
}

/// Repairs one program. Returns the result JSON and whether it repaired.
fn solve(
    program: &Program,
    file: &ManipulationFile,
    extra_tests: &[TestFile],
    args: &RepairArgs,
) -> Result<(Value, Option<String>, bool), Failure> {
    let resolved = file.resolve(program).map_err(Failure::input)?;
    let mut tests = resolved.tests;
    tests.extend(decode_tests(program, extra_tests).map_err(Failure::input)?);
    let options = args.spec().to_options(tests).map_err(Failure::input)?;
    let m = resolved.manipulation.as_ref();
    let registry = Registry::standard();
    let mut explain = Map::new();
    let outcome = if program.external_calls() {
        let out = cegis_repair(program, m, &options, &registry).map_err(Failure::input)?;
        if args.explain_cegis {
            explain.insert("cegis".into(), out.log_json());
        }
        out.outcome
    } else {
        repair(program, m, &options).map_err(Failure::input)?
    };
    if args.explain_slice {
        explain.insert("slice".into(), slices(program, m, &options, &registry));
    }
    let mut json = outcome.to_json();
    if !explain.is_empty() {
        json["explain"] = Value::Object(explain);
    }
    let diff = outcome.repaired().map(|r| r.patch.to_unified());
    Ok((json, diff, matches!(outcome, Outcome::Repaired(_))))
}

fn slices(
    program: &Program,
    m: Option<&Manipulation>,
    options: &RepairOptions,
    registry: &Registry,
) -> Value {
    let task = Task::new(program, m, &[], registry);
    let Some(spec) = task.manipulation.as_ref() else {
        return json!([]);
    };
    let lines: BTreeSet<Line> = options.scope(program);
    Value::Array(
        lines
            .into_iter()
            .map(|line| {
                let s = slicer::explain(program, spec, line);
                json!({"line": line, "slice": s})
            })
            .collect(),
    )
}

fn read_tests(path: Option<&Path>) -> Result<Vec<TestFile>, Failure> {
    match path {
        None => Ok(Vec::new()),
        Some(p) => serde_json::from_str(&read_file(p)?)
            .map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
    }
}

fn seed_corpus(args: &RepairArgs, tests: &[TestFile]) -> Result<(), Failure> {
    let mut results = Map::new();
    let mut all = true;
    for fx in corpus::all() {
        let Some(file) = fx.manipulation_file() else {
            continue;
        };
        let (json, _, ok) = solve(&fx.program(), &file, tests, args)?;
        all &= ok;
        results.insert(fx.name.into(), json);
    }
    print_json(&Value::Object(results));
    if all {
        Ok(())
    } else {
        Err(Failure {
            code: 3,
            message: String::new(),
        })
    }
}

pub fn run(args: &RepairArgs) -> Result<(), Failure> {
    let tests = read_tests(args.tests.as_deref())?;
    if args.seed_corpus {
        return seed_corpus(args, &tests);
    }
    let (Some(program), Some(manipulation)) = (&args.program, &args.manipulation) else {
        return Err(Failure::input("give a program and a manipulation file"));
    };
    let p = load_program(program)?;
    let file: ManipulationFile = serde_json::from_str(&read_file(manipulation)?)
        .map_err(|e| Failure::input(format!("{}: {e}", manipulation.display())))?;
    let (json, diff, ok) = solve(&p, &file, &tests, args)?;
    print_json(&json);
    if let Some(d) = diff {
        eprint!("{d}");
    }
    if ok {
        Ok(())
    } else {
        Err(Failure {
            code: 3,
            message: String::new(),
        })
    }
}
