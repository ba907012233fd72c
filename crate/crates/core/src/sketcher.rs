//! Repair space: rewriting statements into sketches with holes, and filling
//! the holes back in.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::typeck::TypeEnv;
use crate::lang::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoleKind {
    /// `??_b`, one of -1, 0, 1.
    Coeff,
    /// `??`, any integer within the search bound.
    Const,
}

/// Where a hole sits: the statement and a short description of its role.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HoleSite {
    pub line: Line,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hole {
    pub id: HoleId,
    pub kind: HoleKind,
    /// Value that reproduces the original program.
    pub original: i64,
    pub site: HoleSite,
}

/// Hole values indexed by hole id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HoleAssignment(pub Vec<i64>);

impl HoleAssignment {
    pub fn values(&self) -> &[i64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchedProgram {
    pub original: Program,
    /// The original with hole nodes in the scoped statements.
    pub program: Program,
    pub holes: Vec<Hole>,
    pub scope: BTreeSet<Line>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("assignment has {got} values for {expected} holes")]
    Arity { expected: usize, got: usize },
    #[error("coefficient hole {id} assigned {value}, expected -1, 0 or 1")]
    Coefficient { id: HoleId, value: i64 },
}

impl SketchedProgram {
    pub fn hole_count(&self) -> usize {
        self.holes.len()
    }

    pub fn original_assignment(&self) -> HoleAssignment {
        HoleAssignment(self.holes.iter().map(|h| h.original).collect())
    }

    pub fn check(&self, a: &HoleAssignment) -> Result<(), DomainError> {
        if a.0.len() != self.holes.len() {
            return Err(DomainError::Arity {
                expected: self.holes.len(),
                got: a.0.len(),
            });
        }
        for h in &self.holes {
            let v = a.0[h.id];
            if h.kind == HoleKind::Coeff && !(-1..=1).contains(&v) {
                return Err(DomainError::Coefficient { id: h.id, value: v });
            }
        }
        Ok(())
    }

    /// Lines whose holes differ from their original values under `a`.
    pub fn changed_lines(&self, a: &HoleAssignment) -> BTreeSet<Line> {
        self.holes
            .iter()
            .filter(|h| a.0[h.id] != h.original)
            .map(|h| h.site.line)
            .collect()
    }

    pub fn to_debug_string(&self) -> String {
        print_program_with(&self.program, HoleStyle::Plain)
    }
}

impl fmt::Display for SketchedProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_debug_string())
    }
}

/// Rewrites the statements of the entry function whose location is in
/// `scope`. Other statements are left untouched.
pub fn sketch(program: &Program, scope: &BTreeSet<Line>) -> SketchedProgram {
    let f = program.entry_fn();
    let mut s = Sketcher {
        env: TypeEnv::for_function(program, f),
        holes: Vec::new(),
        line: f.line,
        role: String::new(),
    };
    let body = s.block(&f.body, scope, false);
    let mut sketched = program.clone();
    sketched.entry_fn_mut().body = body;
    SketchedProgram {
        original: program.clone(),
        program: sketched,
        holes: s.holes,
        scope: scope.clone(),
    }
}

/// Sketch over every statement of the entry function.
pub fn sketch_all(program: &Program) -> SketchedProgram {
    let scope = program.entry_fn().locations().into_iter().collect();
    sketch(program, &scope)
}

pub fn original_assignment(sketched: &SketchedProgram) -> HoleAssignment {
    sketched.original_assignment()
}

struct Sketcher<'p> {
    env: TypeEnv<'p>,
    holes: Vec<Hole>,
    line: Line,
    role: String,
}

impl Sketcher<'_> {
    fn hole(&mut self, kind: HoleKind, original: i64, what: &str) -> HoleId {
        let id = self.holes.len();
        let role = if self.role.is_empty() {
            what.to_string()
        } else {
            format!("{}: {what}", self.role)
        };
        self.holes.push(Hole {
            id,
            kind,
            original,
            site: HoleSite {
                line: self.line,
                role,
            },
        });
        id
    }

    fn coeff(&mut self, e: Expr, what: &str) -> Expr {
        let h = self.hole(HoleKind::Coeff, 1, what);
        Expr::Coeff(h, Box::new(e))
    }

    /// `base + (Σ ??_b v + ??)` over `vars`.
    fn adjust(&mut self, base: Expr, vars: &[String]) -> Expr {
        let terms = vars
            .iter()
            .map(|v| {
                (
                    self.hole(HoleKind::Coeff, 0, &format!("add {v}")),
                    v.clone(),
                )
            })
            .collect();
        let constant = self.hole(HoleKind::Const, 0, "add constant");
        Expr::Adjust {
            base: Box::new(base),
            terms,
            constant,
        }
    }

    fn is_numeric(&self, e: &Expr) -> bool {
        self.env
            .type_of(e, self.line)
            .map(Type::is_numeric)
            .unwrap_or(false)
    }

    fn expr(&mut self, e: &Expr) -> Expr {
        match e {
            Expr::Int(_)
            | Expr::Bool(_)
            | Expr::Char(_)
            | Expr::Length(_)
            | Expr::ArrayLit(_)
            | Expr::NewArray(..) => e.clone(),
            Expr::Var(v) => {
                if self.env.lookup(v).is_some_and(Type::is_numeric) {
                    self.coeff(e.clone(), &format!("keep {v}"))
                } else {
                    e.clone()
                }
            }
            Expr::Index(a, i) => {
                let outer = self.hole(HoleKind::Coeff, 1, &format!("keep {a}[]"));
                let scale = self.coeff((**i).clone(), &format!("index of {a}"));
                let index = Expr::Adjust {
                    base: Box::new(scale),
                    terms: Vec::new(),
                    constant: self.hole(HoleKind::Const, 0, &format!("shift index of {a}")),
                };
                Expr::Coeff(outer, Box::new(Expr::Index(a.clone(), Box::new(index))))
            }
            Expr::Unary(op, x) => Expr::Unary(*op, Box::new(self.expr(x))),
            Expr::Binary(BinOp::Mul, a, b) if matches!(**a, Expr::Int(_)) && self.is_numeric(b) => {
                let vars = self.env.numeric_vars();
                let inner = self.expr(b);
                Expr::Binary(BinOp::Mul, a.clone(), Box::new(self.adjust(inner, &vars)))
            }
            Expr::Binary(BinOp::Mul, a, b) if matches!(**b, Expr::Int(_)) && self.is_numeric(a) => {
                let vars = self.env.numeric_vars();
                let inner = self.expr(a);
                Expr::Binary(BinOp::Mul, Box::new(self.adjust(inner, &vars)), b.clone())
            }
            Expr::Binary(op, a, b) if op.is_comparison() && self.is_numeric(a) => {
                let vars = self.env.numeric_vars();
                let l = self.expr(a);
                let r = self.expr(b);
                Expr::Binary(*op, Box::new(l), Box::new(self.adjust(r, &vars)))
            }
            Expr::Binary(op, a, b) => {
                let l = self.expr(a);
                let r = self.expr(b);
                Expr::Binary(*op, Box::new(l), Box::new(r))
            }
            Expr::Call(name, _) => {
                if self.is_numeric(e) {
                    self.coeff(e.clone(), &format!("keep {name}()"))
                } else {
                    e.clone()
                }
            }
            Expr::Hole(_) | Expr::Coeff(..) | Expr::Adjust { .. } => {
                unreachable!("sketching an already sketched expression")
            }
        }
    }

    /// Right-hand side of an assignment to a `ty` slot.
    fn rhs(&mut self, e: &Expr, ty: Type, vars: &[String]) -> Expr {
        let r = self.expr(e);
        if ty.is_numeric() {
            self.adjust(r, vars)
        } else {
            r
        }
    }

    fn block(&mut self, body: &[Stmt], scope: &BTreeSet<Line>, nested: bool) -> Vec<Stmt> {
        if nested {
            self.env.push();
        }
        let out = body.iter().map(|s| self.stmt(s, scope)).collect();
        if nested {
            self.env.pop();
        }
        out
    }

    /// Rewrites a simple statement (also used for `for` init and update).
    fn simple(&mut self, s: &Stmt, on: bool) -> Stmt {
        let kind = match &s.kind {
            StmtKind::Decl { ty, name, init } => {
                let vars = self.env.numeric_vars();
                let init = match init {
                    Some(e) if on => {
                        self.role = format!("init of {name}");
                        Some(self.rhs(e, *ty, &vars))
                    }
                    other => other.clone(),
                };
                self.env.declare(name, *ty);
                StmtKind::Decl {
                    ty: *ty,
                    name: name.clone(),
                    init,
                }
            }
            StmtKind::Assign { target, op, value } if on => {
                let vars = self.env.numeric_vars();
                let slot_ty = self.env.lookup(target.name()).unwrap_or(Type::Int);
                let (target, ty) = match target {
                    LValue::Var(n) => (LValue::Var(n.clone()), slot_ty),
                    LValue::Index(n, i) => {
                        self.role = format!("target {n}[]");
                        let scale = self.coeff(i.clone(), &format!("index of {n}"));
                        let index = Expr::Adjust {
                            base: Box::new(scale),
                            terms: Vec::new(),
                            constant: self.hole(HoleKind::Const, 0, &format!("shift index of {n}")),
                        };
                        (
                            LValue::Index(n.clone(), index),
                            slot_ty.element().unwrap_or(Type::Int),
                        )
                    }
                };
                self.role = format!("value of {}", target.name());
                StmtKind::Assign {
                    target,
                    op: *op,
                    value: self.rhs(value, ty, &vars),
                }
            }
            StmtKind::Return(Some(e)) if on => {
                let vars = self.env.numeric_vars();
                self.role = "return".into();
                let ty = self.env.type_of(e, s.loc).unwrap_or(Type::Int);
                StmtKind::Return(Some(self.rhs(e, ty, &vars)))
            }
            other => other.clone(),
        };
        self.role.clear();
        Stmt { loc: s.loc, kind }
    }

    fn stmt(&mut self, s: &Stmt, scope: &BTreeSet<Line>) -> Stmt {
        let on = scope.contains(&s.loc);
        self.line = s.loc;
        match &s.kind {
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                self.role = "condition".into();
                let cond = if on { self.expr(cond) } else { cond.clone() };
                self.role.clear();
                Stmt {
                    loc: s.loc,
                    kind: StmtKind::If {
                        cond,
                        then_body: self.block(then_body, scope, true),
                        else_body: else_body.as_ref().map(|b| self.block(b, scope, true)),
                    },
                }
            }
            StmtKind::While { cond, body } => {
                self.role = "condition".into();
                let cond = if on { self.expr(cond) } else { cond.clone() };
                self.role.clear();
                Stmt {
                    loc: s.loc,
                    kind: StmtKind::While {
                        cond,
                        body: self.block(body, scope, true),
                    },
                }
            }
            StmtKind::For {
                init,
                cond,
                update,
                body,
            } => {
                self.env.push();
                let init = init.as_ref().map(|i| Box::new(self.simple(i, on)));
                self.role = "condition".into();
                let cond = match cond {
                    Some(c) if on => Some(self.expr(c)),
                    other => other.clone(),
                };
                self.role.clear();
                let update = update.as_ref().map(|u| {
                    let r = Box::new(self.simple(u, on));
                    if on {
                        self.relabel_update();
                    }
                    r
                });
                let body = self.block(body, scope, true);
                self.env.pop();
                Stmt {
                    loc: s.loc,
                    kind: StmtKind::For {
                        init,
                        cond,
                        update,
                        body,
                    },
                }
            }
            _ => self.simple(s, on),
        }
    }

    /// Update holes share the header line; tag them so the roles stay unique.
    fn relabel_update(&mut self) {
        for h in self.holes.iter_mut().rev() {
            if h.site.line != self.line || h.site.role.starts_with("update ") {
                break;
            }
            if h.site.role.starts_with("value of") || h.site.role.starts_with("target") {
                h.site.role = format!("update {}", h.site.role);
            } else {
                break;
            }
        }
    }
}

/// Replaces every hole by its value and simplifies the hole-introduced
/// structure. Holes at their original values give back the original text.
pub fn instantiate(sketched: &SketchedProgram, a: &HoleAssignment) -> Result<Program, DomainError> {
    sketched.check(a)?;
    let mut p = sketched.program.clone();
    let f = p.entry_fn_mut();
    for s in f.body.iter_mut() {
        fill_stmt(s, &a.0);
    }
    Ok(p)
}

fn fill_stmt(s: &mut Stmt, holes: &[i64]) {
    let fill = |e: &mut Expr| *e = materialize(fill_expr(e, holes));
    match &mut s.kind {
        StmtKind::Decl { init, .. } => init.iter_mut().for_each(fill),
        StmtKind::Assign { target, value, .. } => {
            if let LValue::Index(_, i) = target {
                fill(i);
            }
            fill(value);
        }
        StmtKind::If {
            cond,
            then_body,
            else_body,
        } => {
            fill(cond);
            then_body.iter_mut().for_each(|s| fill_stmt(s, holes));
            for s in else_body.iter_mut().flatten() {
                fill_stmt(s, holes);
            }
        }
        StmtKind::While { cond, body } => {
            fill(cond);
            body.iter_mut().for_each(|s| fill_stmt(s, holes));
        }
        StmtKind::For {
            init,
            cond,
            update,
            body,
        } => {
            if let Some(i) = init {
                fill_stmt(i, holes);
            }
            cond.iter_mut().for_each(fill);
            if let Some(u) = update {
                fill_stmt(u, holes);
            }
            body.iter_mut().for_each(|s| fill_stmt(s, holes));
        }
        StmtKind::Return(e) => e.iter_mut().for_each(fill),
        StmtKind::Expr(e) => fill(e),
    }
}

/// An instantiated subexpression. `Neg` marks a negation introduced by a
/// -1 coefficient, which the parent may turn into a subtraction.
enum Filled {
    Zero,
    Pos(Expr),
    Neg(Expr),
}

fn materialize(f: Filled) -> Expr {
    match f {
        Filled::Zero => Expr::Int(0),
        Filled::Pos(e) => e,
        Filled::Neg(Expr::Int(n)) => Expr::Int(n.wrapping_neg()),
        Filled::Neg(e) => Expr::Unary(UnOp::Neg, Box::new(e)),
    }
}

fn negate(f: Filled) -> Filled {
    match f {
        Filled::Zero => Filled::Zero,
        Filled::Pos(e) => Filled::Neg(e),
        Filled::Neg(e) => Filled::Pos(e),
    }
}

fn add(acc: Expr, sign: i64, e: Expr) -> Expr {
    match (sign, e) {
        (s, Expr::Int(n)) if (s < 0) != (n < 0) && n != 0 => {
            Expr::binary(BinOp::Sub, acc, Expr::Int(n.wrapping_abs()))
        }
        (_, Expr::Int(n)) => Expr::binary(BinOp::Add, acc, Expr::Int(n.wrapping_abs())),
        (s, e) if s < 0 => Expr::binary(BinOp::Sub, acc, e),
        (_, e) => Expr::binary(BinOp::Add, acc, e),
    }
}

/// Builds `first ± rest... ± lit` from signed parts.
fn sum(parts: Vec<(i64, Expr)>, lit: i64) -> Expr {
    let mut it = parts.into_iter();
    let mut acc = match it.next() {
        None => return Expr::Int(lit),
        Some((s, e)) if s < 0 => materialize(Filled::Neg(e)),
        Some((_, e)) => e,
    };
    for (s, e) in it {
        acc = add(acc, s, e);
    }
    if lit != 0 {
        acc = add(acc, 1, Expr::Int(lit));
    }
    acc
}

fn fill_adjust(base: Filled, terms: Vec<(i64, String)>, c: i64) -> Filled {
    let terms: Vec<(i64, Expr)> = terms
        .into_iter()
        .filter(|(k, _)| *k != 0)
        .map(|(k, v)| (k, Expr::Var(v)))
        .collect();
    if terms.is_empty() && c == 0 {
        return base;
    }
    // Split off a literal the constant can fold into.
    let (head, lit) = match base {
        Filled::Zero => (None, 0),
        Filled::Pos(Expr::Int(n)) => (None, n),
        Filled::Neg(Expr::Int(n)) => (None, n.wrapping_neg()),
        Filled::Pos(Expr::Binary(BinOp::Add, x, m)) if c != 0 && matches!(*m, Expr::Int(_)) => {
            let Expr::Int(m) = *m else { unreachable!() };
            (Some((1, *x)), m)
        }
        Filled::Pos(Expr::Binary(BinOp::Sub, x, m)) if c != 0 && matches!(*m, Expr::Int(_)) => {
            let Expr::Int(m) = *m else { unreachable!() };
            (Some((1, *x)), m.wrapping_neg())
        }
        Filled::Pos(e) => (Some((1, e)), 0),
        Filled::Neg(e) => (Some((-1, e)), 0),
    };
    let lit = lit.wrapping_add(c);
    let expr = match head {
        Some(h) => {
            let mut parts = vec![h];
            parts.extend(terms);
            sum(parts, lit)
        }
        None if lit == 0 => sum(terms, 0),
        None => {
            let mut parts = vec![(1, Expr::Int(lit))];
            parts.extend(terms);
            sum(parts, 0)
        }
    };
    Filled::Pos(expr)
}

fn fill_expr(e: &Expr, holes: &[i64]) -> Filled {
    match e {
        Expr::Hole(h) => Filled::Pos(Expr::Int(holes[*h])),
        Expr::Coeff(h, x) => match holes[*h] {
            0 => Filled::Zero,
            k if k < 0 => negate(fill_expr(x, holes)),
            _ => fill_expr(x, holes),
        },
        Expr::Adjust {
            base,
            terms,
            constant,
        } => fill_adjust(
            fill_expr(base, holes),
            terms.iter().map(|(h, v)| (holes[*h], v.clone())).collect(),
            holes[*constant],
        ),
        Expr::Unary(UnOp::Neg, x) => match fill_expr(x, holes) {
            Filled::Pos(e) => Filled::Pos(Expr::Unary(UnOp::Neg, Box::new(e))),
            other => negate(other),
        },
        Expr::Unary(UnOp::Not, x) => Filled::Pos(Expr::Unary(
            UnOp::Not,
            Box::new(materialize(fill_expr(x, holes))),
        )),
        Expr::Binary(op @ (BinOp::Add | BinOp::Sub), a, b) => {
            let a = fill_expr(a, holes);
            let b = fill_expr(b, holes);
            let b = if *op == BinOp::Sub { negate(b) } else { b };
            match (a, b) {
                (Filled::Zero, b) => b,
                (a, Filled::Zero) => a,
                (Filled::Pos(a), Filled::Pos(b)) if *op == BinOp::Add => {
                    Filled::Pos(Expr::binary(BinOp::Add, a, b))
                }
                (Filled::Pos(a), Filled::Neg(b)) if *op == BinOp::Sub => {
                    Filled::Pos(Expr::binary(BinOp::Sub, a, b))
                }
                (Filled::Pos(a), Filled::Neg(b)) => Filled::Pos(Expr::binary(BinOp::Sub, a, b)),
                (Filled::Pos(a), Filled::Pos(b)) => Filled::Pos(Expr::binary(BinOp::Add, a, b)),
                (Filled::Neg(a), b) => {
                    let a = materialize(Filled::Neg(a));
                    match b {
                        Filled::Pos(b) => Filled::Pos(Expr::binary(BinOp::Add, a, b)),
                        Filled::Neg(b) => Filled::Pos(Expr::binary(BinOp::Sub, a, b)),
                        Filled::Zero => unreachable!(),
                    }
                }
            }
        }
        Expr::Binary(op, a, b) => Filled::Pos(Expr::binary(
            *op,
            materialize(fill_expr(a, holes)),
            materialize(fill_expr(b, holes)),
        )),
        Expr::Index(a, i) => Filled::Pos(Expr::Index(
            a.clone(),
            Box::new(materialize(fill_expr(i, holes))),
        )),
        Expr::NewArray(t, n) => Filled::Pos(Expr::NewArray(
            *t,
            Box::new(materialize(fill_expr(n, holes))),
        )),
        Expr::Call(name, args) => Filled::Pos(Expr::Call(
            name.clone(),
            args.iter()
                .map(|a| materialize(fill_expr(a, holes)))
                .collect(),
        )),
        Expr::ArrayLit(items) => Filled::Pos(Expr::ArrayLit(
            items
                .iter()
                .map(|a| materialize(fill_expr(a, holes)))
                .collect(),
        )),
        Expr::Int(_) | Expr::Bool(_) | Expr::Char(_) | Expr::Var(_) | Expr::Length(_) => {
            Filled::Pos(e.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn line_text(p: &Program, line: Line) -> String {
        statement_head(p.entry_fn().statement_at(line).unwrap(), HoleStyle::Plain)
    }

    #[test]
    fn triple_sketch() {
        let p = parse_program(corpus::TRIPLE).unwrap();
        let sk = sketch_all(&p);
        assert_eq!(
            line_text(&sk.program, 2),
            "int y = 3 * (??_b x + (??_b x + ??)) + (??_b x + ??);"
        );
        assert_eq!(
            line_text(&sk.program, 3),
            "if(??_b x == 10 + (??_b x + ??_b y + ??)) {"
        );
        assert_eq!(
            line_text(&sk.program, 4),
            "y = 30 + (??_b x + ??_b y + ??);"
        );
        assert_eq!(
            line_text(&sk.program, 5),
            "return ??_b y + (??_b x + ??_b y + ??);"
        );
        let orig = sk.original_assignment();
        let ones: Vec<HoleId> = sk
            .holes
            .iter()
            .filter(|h| h.original == 1)
            .map(|h| h.id)
            .collect();
        assert_eq!(ones.len(), 3);
        for h in &sk.holes {
            assert_eq!(orig.0[h.id], h.original);
            if h.kind == HoleKind::Const {
                assert_eq!(h.original, 0);
            }
        }
    }

    #[test]
    fn empty_scope_has_no_holes() {
        let p = parse_program(corpus::LARGEST_GAP).unwrap();
        let sk = sketch(&p, &BTreeSet::new());
        assert_eq!(sk.hole_count(), 0);
        assert_eq!(sk.program, p);
        assert!(sk.original_assignment().0.is_empty());
    }

    #[test]
    fn original_assignment_prints_original() {
        for fx in corpus::all() {
            let p = fx.program();
            let sk = sketch_all(&p);
            let q = instantiate(&sk, &sk.original_assignment()).unwrap();
            assert_eq!(print_program(&p), print_program(&q), "{}", fx.name);
        }
    }

    #[test]
    fn loop_init_fix() {
        let p = parse_program(corpus::LARGEST_GAP).unwrap();
        let sk = sketch_all(&p);
        let init_const = sk
            .holes
            .iter()
            .find(|h| h.site.line == 5 && h.site.role == "init of i: add constant")
            .unwrap()
            .id;
        let mut a = sk.original_assignment();
        a.0[init_const] = -1;
        let q = instantiate(&sk, &a).unwrap();
        assert_eq!(line_text(&q, 5), "for(int i = 0; i < N-1; i++) {");
        assert_eq!(sk.changed_lines(&a), BTreeSet::from([5]));
    }

    #[test]
    fn simplification_rules() {
        let p = parse_program("int f(int x, int y){\n  if(x < 0)\n    return 1;\n  return N(x);\n}\nint N(int z){\n  return z;\n}").unwrap();
        let sk = sketch(&p, &BTreeSet::from([2]));
        let find = |role: &str| {
            sk.holes
                .iter()
                .find(|h| h.site.role.ends_with(role))
                .unwrap()
                .id
        };
        let mut a = sk.original_assignment();
        a.0[find("add y")] = 1;
        let q = instantiate(&sk, &a).unwrap();
        assert_eq!(line_text(&q, 2), "if(x < y) {");

        a.0[find("keep x")] = -1;
        a.0[find("add constant")] = 3;
        let q = instantiate(&sk, &a).unwrap();
        assert_eq!(line_text(&q, 2), "if(-x < 3+y) {");

        a.0[find("keep x")] = 2;
        assert!(matches!(
            instantiate(&sk, &a),
            Err(DomainError::Coefficient { .. })
        ));
    }

    #[test]
    fn negative_terms_become_subtraction() {
        let p = parse_program(corpus::LARGEST_GAP).unwrap();
        let sk = sketch(&p, &BTreeSet::from([10]));
        let find = |role: &str| {
            sk.holes
                .iter()
                .find(|h| h.site.role.ends_with(role))
                .unwrap()
                .id
        };
        let mut a = sk.original_assignment();
        a.0[find("add constant")] = 4;
        assert_eq!(
            line_text(&instantiate(&sk, &a).unwrap(), 10),
            "int res = max - min + 4;"
        );
        a.0[find("add constant")] = -2;
        a.0[find("add N")] = -1;
        assert_eq!(
            line_text(&instantiate(&sk, &a).unwrap(), 10),
            "int res = max - min - N - 2;"
        );
        let mut b = sk.original_assignment();
        b.0[find("keep min")] = 0;
        assert_eq!(
            line_text(&instantiate(&sk, &b).unwrap(), 10),
            "int res = max;"
        );
        b.0[find("keep max")] = 0;
        assert_eq!(
            line_text(&instantiate(&sk, &b).unwrap(), 10),
            "int res = 0;"
        );
    }

    #[test]
    fn index_rewrite() {
        let p = parse_program(corpus::LARGEST_GAP).unwrap();
        let sk = sketch(&p, &BTreeSet::from([3]));
        assert_eq!(
            line_text(&sk.program, 3),
            "int max = ??_b x[??_b*(N-1) + (??)] + (??_b N + ??);"
        );
        let find = |role: &str| {
            sk.holes
                .iter()
                .find(|h| h.site.role.ends_with(role))
                .unwrap()
                .id
        };
        let mut a = sk.original_assignment();
        a.0[find("shift index of x")] = 1;
        assert_eq!(
            line_text(&instantiate(&sk, &a).unwrap(), 3),
            "int max = x[N];"
        );
        a.0[find("shift index of x")] = -1;
        assert_eq!(
            line_text(&instantiate(&sk, &a).unwrap(), 3),
            "int max = x[N-2];"
        );
    }
}
