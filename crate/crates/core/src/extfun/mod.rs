//! External functions and the guess-and-verify repair loop.

mod cegis;
mod registry;
mod table;

pub(crate) use cegis::cegis_with_exclusions;
pub use cegis::{
    cegis_repair, harvest_interpretation, CegisOutcome, Iteration, MAX_ITERATIONS, MAX_UNSEEN,
};
pub use registry::Registry;
pub(crate) use table::GuessEnv;
pub use table::{
    verify_guesses, CallKey, GuessTable, Mismatch, PartialInterpretation, Provenance, TableEntry,
};
