//! Repairs one bundled fixture and prints the result.
//!
//! `cargo run --release --example repair_fixture -- largestGap single-line`

use tracefix_core::corpus;
use tracefix_core::extfun::{cegis_repair, Registry};
use tracefix_core::solver::{repair, Mode, RepairOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "largestGap".into());
    let mode = match args.next().as_deref() {
        Some("single-line") => Mode::SingleLine,
        _ => Mode::Full,
    };
    let fx = corpus::by_name(&name).expect("unknown fixture");
    let program = fx.program();
    let file = fx.manipulation_file().expect("fixture has no manipulation");
    let resolved = file.resolve(&program).expect("manipulation resolves");
    let options = RepairOptions {
        mode,
        tests: resolved.tests.clone(),
        ..RepairOptions::default()
    };
    let m = resolved.manipulation.as_ref();
    let json = if program.external_calls() {
        let out =
            cegis_repair(&program, m, &options, &Registry::standard()).expect("valid options");
        serde_json::json!({"result": out.outcome.to_json(), "cegis": out.log_json()})
    } else {
        repair(&program, m, &options)
            .expect("valid options")
            .to_json()
    };
    println!("{}", serde_json::to_string_pretty(&json).unwrap());
}
