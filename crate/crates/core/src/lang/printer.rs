//! Line-preserving pretty printer.
//!
//! Each statement head lands on the line named by its location, so printing
//! and re-parsing re-derives the same labels. Closing braces are appended to
//! the last printed line instead of taking a line of their own.

use std::fmt::Write as _;

use super::ast::*;

/// How hole nodes are rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoleStyle {
    /// `??_b x` and `??`.
    Plain,
    /// `??_b#3 x` and `??#7`, for debugging hole ids.
    Numbered,
}

pub fn print_program(program: &Program) -> String {
    print_program_with(program, HoleStyle::Plain)
}

pub fn print_program_with(program: &Program, style: HoleStyle) -> String {
    let mut lines = Lines::default();
    for f in &program.functions {
        let params: Vec<String> = f.params.iter().map(|(n, t)| format!("{t} {n}")).collect();
        lines.emit(
            f.line,
            0,
            format!("{} {}({}) {{", f.return_type, f.name, params.join(", ")),
        );
        lines.block(&f.body, 1, style);
        lines.append(" }");
    }
    let mut out = lines.lines.join("\n");
    out.push('\n');
    out
}

#[derive(Default)]
struct Lines {
    lines: Vec<String>,
}

impl Lines {
    fn emit(&mut self, line: Line, indent: usize, text: String) {
        let target = line as usize;
        while self.lines.len() + 1 < target {
            self.lines.push(String::new());
        }
        self.lines.push(format!("{}{}", "  ".repeat(indent), text));
    }

    fn append(&mut self, s: &str) {
        match self.lines.last_mut() {
            Some(l) => l.push_str(s),
            None => self.lines.push(s.trim_start().to_string()),
        }
    }

    fn block(&mut self, body: &[Stmt], indent: usize, style: HoleStyle) {
        for s in body {
            self.emit(s.loc, indent, statement_head(s, style));
            if let StmtKind::If { else_body, .. } = &s.kind {
                let blocks = s.blocks();
                self.block(blocks[0], indent + 1, style);
                if let Some(e) = else_body {
                    self.append(" } else {");
                    self.block(e, indent + 1, style);
                }
                self.append(" }");
            } else if s.is_compound() {
                self.block(s.blocks()[0], indent + 1, style);
                self.append(" }");
            }
        }
    }
}

/// Text of a statement's head: the whole statement for simple statements,
/// the header line (ending in `{`) for compound ones.
pub fn statement_head(s: &Stmt, style: HoleStyle) -> String {
    match &s.kind {
        StmtKind::If { cond, .. } => format!("if({}) {{", expr_text(cond, style)),
        StmtKind::While { cond, .. } => format!("while({}) {{", expr_text(cond, style)),
        StmtKind::For {
            init, cond, update, ..
        } => {
            let i = init
                .as_ref()
                .map(|s| simple_text(s, style))
                .unwrap_or_default();
            let c = cond
                .as_ref()
                .map(|e| expr_text(e, style))
                .unwrap_or_default();
            let u = update
                .as_ref()
                .map(|s| simple_text(s, style))
                .unwrap_or_default();
            format!("for({i}; {c}; {u}) {{")
        }
        StmtKind::Return(Some(e)) => format!("return {};", expr_text(e, style)),
        StmtKind::Return(None) => "return;".to_string(),
        _ => format!("{};", simple_text(s, style)),
    }
}

fn simple_text(s: &Stmt, style: HoleStyle) -> String {
    match &s.kind {
        StmtKind::Decl { ty, name, init } => match init {
            Some(e) => format!("{ty} {name} = {}", expr_text(e, style)),
            None => format!("{ty} {name}"),
        },
        StmtKind::Assign { target, op, value } => {
            let t = match target {
                LValue::Var(n) => n.clone(),
                LValue::Index(n, i) => format!("{n}[{}]", compact(i, style)),
            };
            match (op, value) {
                (AssignOp::Add, Expr::Int(1)) => format!("{t}++"),
                (AssignOp::Sub, Expr::Int(1)) => format!("{t}--"),
                _ => format!("{t} {} {}", op.symbol(), expr_text(value, style)),
            }
        }
        StmtKind::Expr(e) => expr_text(e, style),
        _ => statement_head(s, style),
    }
}

/// Top-level rendering: arithmetic spaced, comparison operands compact.
pub fn expr_text(e: &Expr, style: HoleStyle) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, true, style);
    out
}

fn compact(e: &Expr, style: HoleStyle) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, false, style);
    out
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, ..) => op.precedence(),
        // `base + (...)`
        Expr::Adjust { .. } => BinOp::Add.precedence(),
        _ => 10,
    }
}

fn write_expr(out: &mut String, e: &Expr, spaced: bool, style: HoleStyle) {
    match e {
        Expr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Expr::Char(c) => out.push_str(&char_literal(*c)),
        Expr::Var(v) => out.push_str(v),
        Expr::Index(a, i) => {
            let _ = write!(out, "{a}[{}]", compact(i, style));
        }
        Expr::Length(a) => {
            let _ = write!(out, "{a}.length");
        }
        Expr::ArrayLit(items) => {
            let parts: Vec<String> = items.iter().map(|i| compact(i, style)).collect();
            let _ = write!(out, "{{{}}}", parts.join(", "));
        }
        Expr::NewArray(t, size) => {
            let _ = write!(out, "new {t}[{}]", compact(size, style));
        }
        Expr::Unary(op, x) => {
            out.push(if *op == UnOp::Neg { '-' } else { '!' });
            let needs = prec(x) < 10 || matches!(**x, Expr::Int(n) if n < 0);
            if needs {
                out.push('(');
            }
            write_expr(out, x, spaced, style);
            if needs {
                out.push(')');
            }
        }
        Expr::Binary(op, a, b) => {
            let p = op.precedence();
            let child_spaced = if op.is_comparison() { false } else { spaced };
            let lp = prec(a) < p;
            let rp = prec(b) <= p;
            wrap(out, a, lp, child_spaced, style);
            let sep_spaced = !op.is_arithmetic() || spaced;
            if sep_spaced {
                let _ = write!(out, " {} ", op.symbol());
            } else {
                out.push_str(op.symbol());
            }
            let mut rhs = String::new();
            wrap(&mut rhs, b, rp, child_spaced, style);
            if !sep_spaced && rhs.starts_with('-') {
                out.push(' ');
            }
            out.push_str(&rhs);
        }
        Expr::Call(name, args) => {
            let parts: Vec<String> = args.iter().map(|a| compact(a, style)).collect();
            let _ = write!(out, "{name}({})", parts.join(", "));
        }
        Expr::Hole(h) => out.push_str(&hole_mark(*h, false, style)),
        Expr::Coeff(h, x) => {
            out.push_str(&hole_mark(*h, true, style));
            out.push(if prec(x) < 10 { '*' } else { ' ' });
            wrap(out, x, prec(x) < 10, spaced, style);
        }
        Expr::Adjust {
            base,
            terms,
            constant,
        } => {
            wrap(
                out,
                base,
                prec(base) < BinOp::Add.precedence(),
                spaced,
                style,
            );
            out.push_str(" + (");
            for (h, v) in terms {
                let _ = write!(out, "{} {v} + ", hole_mark(*h, true, style));
            }
            out.push_str(&hole_mark(*constant, false, style));
            out.push(')');
        }
    }
}

fn wrap(out: &mut String, e: &Expr, parens: bool, spaced: bool, style: HoleStyle) {
    if parens {
        out.push('(');
        write_expr(out, e, spaced, style);
        out.push(')');
    } else {
        write_expr(out, e, spaced, style);
    }
}

fn hole_mark(h: HoleId, coeff: bool, style: HoleStyle) -> String {
    match (coeff, style) {
        (true, HoleStyle::Plain) => "??_b".into(),
        (false, HoleStyle::Plain) => "??".into(),
        (true, HoleStyle::Numbered) => format!("??_b#{h}"),
        (false, HoleStyle::Numbered) => format!("??#{h}"),
    }
}

fn char_literal(c: char) -> String {
    match c {
        '\n' => "'\\n'".into(),
        '\t' => "'\\t'".into(),
        '\0' => "'\\0'".into(),
        '\\' => "'\\\\'".into(),
        '\'' => "'\\''".into(),
        c => format!("'{c}'"),
    }
}
