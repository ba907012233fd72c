//! The mini imperative language: parsing, type checking, printing, diffing.

pub mod ast;
mod diff;
mod lexer;
mod parser;
mod printer;
pub mod typeck;

use thiserror::Error;

pub use ast::*;
pub use diff::{diff_programs, Patch, PatchEntry};
pub use printer::{expr_text, print_program, print_program_with, statement_head, HoleStyle};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LangError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: Line, message: String },
    #[error("type error at line {line}: {message}")]
    Type { line: Line, message: String },
    #[error("programs do not share a statement skeleton: {0}")]
    ShapeMismatch(String),
}

/// Parses and type-checks a program. The first function is the entry.
pub fn parse_program(source: &str) -> Result<Program, LangError> {
    let functions = parser::parse_functions(source)?;
    let Some(first) = functions.first() else {
        return Err(LangError::Parse {
            line: 1,
            message: "no function definition found".into(),
        });
    };
    let entry = first.name.clone();
    let program = Program { functions, entry };
    typeck::check_program(&program)?;
    Ok(program)
}

/// As [`parse_program`] with an explicit entry function.
pub fn parse_program_with_entry(source: &str, entry: &str) -> Result<Program, LangError> {
    let functions = parser::parse_functions(source)?;
    let program = Program {
        functions,
        entry: entry.to_string(),
    };
    typeck::check_program(&program)?;
    Ok(program)
}

/// Pretty-prints a program. Inverse of [`parse_program`] up to structure.
pub fn pretty_print(program: &Program) -> String {
    print_program(program)
}
