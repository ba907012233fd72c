use serde::{Deserialize, Serialize};

use super::ast::*;
use super::printer::{statement_head, HoleStyle};
use super::LangError;

/// One rewritten statement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatchEntry {
    pub line: Line,
    pub before: String,
    pub after: String,
}

/// Statement-level difference between two programs with the same skeleton.
/// Entries are sorted by strictly increasing line.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Patch {
    pub entries: Vec<PatchEntry>,
}

impl Patch {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lines(&self) -> Vec<Line> {
        self.entries.iter().map(|e| e.line).collect()
    }

    pub fn touches(&self, line: Line) -> bool {
        self.entries.iter().any(|e| e.line == line)
    }

    /// Unified-diff style rendering.
    pub fn to_unified(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "@@ line {} @@\n-{}\n+{}\n",
                e.line, e.before, e.after
            ));
        }
        out
    }
}

pub fn diff_programs(original: &Program, repaired: &Program) -> Result<Patch, LangError> {
    if original.functions.len() != repaired.functions.len() {
        return Err(LangError::ShapeMismatch("function count differs".into()));
    }
    let mut entries = Vec::new();
    for (a, b) in original.functions.iter().zip(&repaired.functions) {
        if a.name != b.name || a.params != b.params || a.return_type != b.return_type {
            return Err(LangError::ShapeMismatch(format!(
                "signature of '{}' differs",
                a.name
            )));
        }
        diff_block(&a.body, &b.body, &mut entries)?;
    }
    entries.sort_by_key(|e| e.line);
    Ok(Patch { entries })
}

fn same_shape(a: &Stmt, b: &Stmt) -> bool {
    use StmtKind::*;
    a.loc == b.loc
        && match (&a.kind, &b.kind) {
            (Decl { .. }, Decl { .. })
            | (Assign { .. }, Assign { .. })
            | (While { .. }, While { .. })
            | (For { .. }, For { .. })
            | (Return(_), Return(_))
            | (Expr(_), Expr(_)) => true,
            (If { else_body: ea, .. }, If { else_body: eb, .. }) => ea.is_some() == eb.is_some(),
            _ => false,
        }
}

fn diff_block(a: &[Stmt], b: &[Stmt], out: &mut Vec<PatchEntry>) -> Result<(), LangError> {
    if a.len() != b.len() {
        return Err(LangError::ShapeMismatch(
            "blocks have different statement counts".into(),
        ));
    }
    for (sa, sb) in a.iter().zip(b) {
        if !same_shape(sa, sb) {
            return Err(LangError::ShapeMismatch(format!(
                "statements at line {} differ in kind or location",
                sa.loc
            )));
        }
        let before = statement_head(sa, HoleStyle::Plain);
        let after = statement_head(sb, HoleStyle::Plain);
        if before != after {
            out.push(PatchEntry {
                line: sa.loc,
                before,
                after,
            });
        }
        for (ba, bb) in sa.blocks().into_iter().zip(sb.blocks()) {
            diff_block(ba, bb, out)?;
        }
    }
    Ok(())
}
