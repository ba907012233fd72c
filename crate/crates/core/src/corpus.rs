//! Bundled benchmark programs and their manipulation files.

use crate::lang::{parse_program, Program};
use crate::tracer::ManipulationFile;

pub const LARGEST_GAP: &str = include_str!("../fixtures/largestGap.mj");
pub const LARGEST_GAP_MANIPULATION: &str = include_str!("../fixtures/largestGap.json");
pub const LARGEST_GAP_FIX: &str = include_str!("../fixtures/largestGapFix.mj");
pub const LARGEST_GAP_REVERSED: &str = include_str!("../fixtures/largestGapReversed.mj");
pub const SUM_POW: &str = include_str!("../fixtures/sumPow.mj");
pub const SUM_POW_MANIPULATION: &str = include_str!("../fixtures/sumPow.json");
pub const SUB_LARGEST_GAP: &str = include_str!("../fixtures/subLargestGap.mj");
pub const SUB_LARGEST_GAP_MANIPULATION: &str = include_str!("../fixtures/subLargestGap.json");
pub const MAX_MIN: &str = include_str!("../fixtures/maxMin.mj");
pub const MAX_MIN_MANIPULATION: &str = include_str!("../fixtures/maxMin.json");
pub const TRIPLE: &str = include_str!("../fixtures/triple.mj");
pub const MAX3: &str = include_str!("../fixtures/max3.mj");
pub const MAX3_MANIPULATION: &str = include_str!("../fixtures/max3.json");
pub const ITER_POWER: &str = include_str!("../fixtures/iterPower.mj");
pub const ITER_POWER_MANIPULATION: &str = include_str!("../fixtures/iterPower.json");
pub const MULT_IA: &str = include_str!("../fixtures/multIA.mj");
pub const MULT_IA_MANIPULATION: &str = include_str!("../fixtures/multIA.json");
pub const ARRAY_MAX: &str = include_str!("../fixtures/arrayMax.mj");
pub const ARRAY_MAX_MANIPULATION: &str = include_str!("../fixtures/arrayMax.json");

#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub source: &'static str,
    pub manipulation: Option<&'static str>,
}

impl Fixture {
    pub fn program(&self) -> Program {
        parse_program(self.source).expect("bundled fixture parses")
    }

    pub fn manipulation_file(&self) -> Option<ManipulationFile> {
        self.manipulation
            .map(|m| serde_json::from_str(m).expect("bundled manipulation parses"))
    }
}

pub fn all() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "largestGap",
            source: LARGEST_GAP,
            manipulation: Some(LARGEST_GAP_MANIPULATION),
        },
        Fixture {
            name: "largestGapFix",
            source: LARGEST_GAP_FIX,
            manipulation: None,
        },
        Fixture {
            name: "largestGapReversed",
            source: LARGEST_GAP_REVERSED,
            manipulation: None,
        },
        Fixture {
            name: "sumPow",
            source: SUM_POW,
            manipulation: Some(SUM_POW_MANIPULATION),
        },
        Fixture {
            name: "subLargestGap",
            source: SUB_LARGEST_GAP,
            manipulation: Some(SUB_LARGEST_GAP_MANIPULATION),
        },
        Fixture {
            name: "maxMin",
            source: MAX_MIN,
            manipulation: Some(MAX_MIN_MANIPULATION),
        },
        Fixture {
            name: "triple",
            source: TRIPLE,
            manipulation: None,
        },
        Fixture {
            name: "max3",
            source: MAX3,
            manipulation: Some(MAX3_MANIPULATION),
        },
        Fixture {
            name: "iterPower",
            source: ITER_POWER,
            manipulation: Some(ITER_POWER_MANIPULATION),
        },
        Fixture {
            name: "multIA",
            source: MULT_IA,
            manipulation: Some(MULT_IA_MANIPULATION),
        },
        Fixture {
            name: "arrayMax",
            source: ARRAY_MAX,
            manipulation: Some(ARRAY_MAX_MANIPULATION),
        },
    ]
}

pub fn by_name(name: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.name == name)
}
