use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use super::Registry;
use crate::tracer::{ExternalEnv, ExternalFault};

/// An external call: function name and integer arguments.
pub type CallKey = (String, Vec<i64>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Observed while running the original program.
    Harvested,
    /// Added after a guess was checked against the real function.
    Verified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableEntry {
    pub name: String,
    pub args: Vec<i64>,
    pub result: i64,
    pub provenance: Provenance,
}

/// Known input/output pairs of external functions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialInterpretation {
    entries: BTreeMap<CallKey, (i64, Provenance)>,
}

impl PartialInterpretation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str, args: &[i64]) -> Option<i64> {
        self.entries
            .get(&(name.to_string(), args.to_vec()))
            .map(|(r, _)| *r)
    }

    pub fn contains(&self, key: &CallKey) -> bool {
        self.entries.contains_key(key)
    }

    /// Keeps an existing entry; the table is a function.
    pub fn insert(&mut self, key: CallKey, result: i64, provenance: Provenance) -> bool {
        if self.entries.contains_key(&key) {
            return false;
        }
        self.entries.insert(key, (result, provenance));
        true
    }

    pub fn entries(&self) -> Vec<TableEntry> {
        self.entries
            .iter()
            .map(|((name, args), (result, provenance))| TableEntry {
                name: name.clone(),
                args: args.clone(),
                result: *result,
                provenance: *provenance,
            })
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CallKey, i64, Provenance)> {
        self.entries.iter().map(|(k, (r, p))| (k, *r, *p))
    }
}

impl Serialize for PartialInterpretation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.entries().serialize(s)
    }
}

/// Guessed results for calls the interpretation does not cover.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GuessTable {
    pub entries: Vec<(CallKey, i64)>,
}

impl GuessTable {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str, args: &[i64]) -> Option<i64> {
        self.entries
            .iter()
            .find(|((n, a), _)| n == name && a == args)
            .map(|(_, v)| *v)
    }
}

#[derive(Serialize)]
struct GuessJson<'a> {
    name: &'a str,
    args: &'a [i64],
    guess: i64,
}

impl Serialize for GuessTable {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.entries.iter().map(|((name, args), guess)| GuessJson {
            name,
            args,
            guess: *guess,
        }))
    }
}

/// A guess that disagrees with the real function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub name: String,
    pub args: Vec<i64>,
    pub guessed: i64,
    pub actual: i64,
}

/// Checks every guess against the registry.
pub fn verify_guesses(guesses: &GuessTable, registry: &Registry) -> Vec<Mismatch> {
    guesses
        .entries
        .iter()
        .filter_map(|((name, args), guessed)| {
            let actual = registry.apply(name, args).ok()?;
            (actual != *guessed).then(|| Mismatch {
                name: name.clone(),
                args: args.clone(),
                guessed: *guessed,
                actual,
            })
        })
        .collect()
}

/// Calls the registry and records every result.
pub(crate) struct Recorder<'a> {
    pub registry: &'a Registry,
    pub table: &'a mut PartialInterpretation,
}

impl ExternalEnv for Recorder<'_> {
    fn call(&mut self, name: &str, args: &[i64]) -> Result<i64, ExternalFault> {
        let r = self.registry.apply(name, args)?;
        self.table
            .insert((name.to_string(), args.to_vec()), r, Provenance::Harvested);
        Ok(r)
    }
}

/// Answers from the interpretation, then from the guesses; anything else
/// is reported as unknown.
pub(crate) struct GuessEnv<'a> {
    pub table: &'a PartialInterpretation,
    pub guesses: &'a GuessTable,
}

impl ExternalEnv for GuessEnv<'_> {
    fn call(&mut self, name: &str, args: &[i64]) -> Result<i64, ExternalFault> {
        self.table
            .get(name, args)
            .or_else(|| self.guesses.get(name, args))
            .ok_or_else(|| ExternalFault::Unknown {
                name: name.to_string(),
                args: args.to_vec(),
            })
    }
}
