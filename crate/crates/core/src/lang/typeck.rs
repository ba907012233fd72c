//! Scope-aware type checking.

use std::collections::{BTreeSet, HashMap};

use super::ast::*;
use super::LangError;

/// Parameters and return type of a function.
type Signature<'p> = (&'p [(String, Type)], Type);

/// Lexical scopes of one function, innermost last.
#[derive(Debug, Clone)]
pub struct TypeEnv<'p> {
    scopes: Vec<Vec<(String, Type)>>,
    signatures: HashMap<&'p str, Signature<'p>>,
}

impl<'p> TypeEnv<'p> {
    pub fn for_function(program: &'p Program, f: &FunctionDef) -> Self {
        let signatures = program
            .functions
            .iter()
            .map(|g| (g.name.as_str(), (g.params.as_slice(), g.return_type)))
            .collect();
        TypeEnv {
            scopes: vec![f.params.clone()],
            signatures,
        }
    }

    pub fn push(&mut self) {
        self.scopes.push(Vec::new());
    }

    pub fn pop(&mut self) {
        self.scopes.pop();
    }

    pub fn declare(&mut self, name: &str, ty: Type) {
        self.scopes
            .last_mut()
            .expect("at least one scope")
            .push((name.to_string(), ty));
    }

    pub fn declared_in_innermost(&self, name: &str) -> bool {
        self.scopes
            .last()
            .is_some_and(|s| s.iter().any(|(n, _)| n == name))
    }

    pub fn lookup(&self, name: &str) -> Option<Type> {
        self.scopes
            .iter()
            .rev()
            .flat_map(|s| s.iter().rev())
            .find(|(n, _)| n == name)
            .map(|(_, t)| *t)
    }

    /// In-scope integer and char variables in declaration order.
    pub fn numeric_vars(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (n, t) in self.scopes.iter().flatten() {
            if t.is_numeric() && seen.insert(n.clone()) {
                out.push(n.clone());
            }
        }
        out
    }

    /// Type of an expression; `line` only labels errors.
    pub fn type_of(&self, e: &Expr, line: Line) -> Result<Type, LangError> {
        let err = |message: String| LangError::Type { line, message };
        let var = |n: &str| {
            self.lookup(n)
                .ok_or_else(|| err(format!("use of undeclared variable '{n}'")))
        };
        match e {
            Expr::Int(_) | Expr::Hole(_) => Ok(Type::Int),
            Expr::Bool(_) => Ok(Type::Bool),
            Expr::Char(_) => Ok(Type::Char),
            Expr::Var(n) => var(n),
            Expr::Index(a, i) => {
                let at = var(a)?;
                let Some(elem) = at.element() else {
                    return Err(err(format!("'{a}' is not an array")));
                };
                if !self.type_of(i, line)?.is_numeric() {
                    return Err(err("array index must be an int".into()));
                }
                Ok(elem)
            }
            Expr::Length(a) => {
                if !var(a)?.is_array() {
                    return Err(err(format!("'{a}' is not an array")));
                }
                Ok(Type::Int)
            }
            Expr::ArrayLit(items) => {
                let mut elem = Type::Int;
                for (k, it) in items.iter().enumerate() {
                    let t = self.type_of(it, line)?;
                    if !t.is_numeric() {
                        return Err(err("array literal elements must be int or char".into()));
                    }
                    if k == 0 {
                        elem = t;
                    } else if t != elem {
                        elem = Type::Int;
                    }
                }
                Ok(elem.array_of().expect("numeric"))
            }
            Expr::NewArray(elem, size) => {
                if !self.type_of(size, line)?.is_numeric() {
                    return Err(err("array size must be an int".into()));
                }
                elem.array_of()
                    .ok_or_else(|| err(format!("cannot allocate array of {elem}")))
            }
            Expr::Unary(UnOp::Neg, x) | Expr::Coeff(_, x) => {
                if !self.type_of(x, line)?.is_numeric() {
                    return Err(err("negation of a non-integer".into()));
                }
                Ok(Type::Int)
            }
            Expr::Unary(UnOp::Not, x) => {
                if self.type_of(x, line)? != Type::Bool {
                    return Err(err("'!' applied to a non-boolean".into()));
                }
                Ok(Type::Bool)
            }
            Expr::Binary(op, a, b) => {
                let ta = self.type_of(a, line)?;
                let tb = self.type_of(b, line)?;
                if op.is_arithmetic() {
                    if !(ta.is_numeric() && tb.is_numeric()) {
                        return Err(err(format!(
                            "operands of '{}' must be integers",
                            op.symbol()
                        )));
                    }
                    Ok(Type::Int)
                } else if matches!(op, BinOp::And | BinOp::Or) {
                    if ta != Type::Bool || tb != Type::Bool {
                        return Err(err(format!(
                            "operands of '{}' must be booleans",
                            op.symbol()
                        )));
                    }
                    Ok(Type::Bool)
                } else if matches!(op, BinOp::Eq | BinOp::Ne) {
                    let ok = (ta.is_numeric() && tb.is_numeric())
                        || (ta == Type::Bool && tb == Type::Bool);
                    if !ok {
                        return Err(err(format!("cannot compare {ta} with {tb}")));
                    }
                    Ok(Type::Bool)
                } else {
                    if !(ta.is_numeric() && tb.is_numeric()) {
                        return Err(err(format!(
                            "operands of '{}' must be integers",
                            op.symbol()
                        )));
                    }
                    Ok(Type::Bool)
                }
            }
            Expr::Call(name, args) => {
                let arg_types = args
                    .iter()
                    .map(|a| self.type_of(a, line))
                    .collect::<Result<Vec<_>, _>>()?;
                if Expr::is_call_external(name) {
                    if arg_types.iter().any(|t| !t.is_numeric()) {
                        return Err(err(format!("external '{name}' takes integer arguments")));
                    }
                    return Ok(Type::Int);
                }
                let Some((params, ret)) = self.signatures.get(name.as_str()) else {
                    return Err(err(format!("call to undefined function '{name}'")));
                };
                if params.len() != args.len() {
                    return Err(err(format!(
                        "'{name}' expects {} arguments, got {}",
                        params.len(),
                        args.len()
                    )));
                }
                for ((_, pt), at) in params.iter().zip(&arg_types) {
                    if !assignable(*pt, *at) {
                        return Err(err(format!("argument of type {at} where {pt} expected")));
                    }
                }
                Ok(*ret)
            }
            Expr::Adjust { base, terms, .. } => {
                self.type_of(base, line)?;
                for (_, v) in terms {
                    var(v)?;
                }
                Ok(Type::Int)
            }
        }
    }
}

/// Int and char convert into each other implicitly; everything else must match.
pub fn assignable(target: Type, value: Type) -> bool {
    target == value || (target.is_numeric() && value.is_numeric())
}

pub fn check_program(program: &Program) -> Result<(), LangError> {
    let mut names = BTreeSet::new();
    for f in &program.functions {
        if !names.insert(f.name.as_str()) {
            return Err(LangError::Type {
                line: f.line,
                message: format!("function '{}' defined twice", f.name),
            });
        }
        let mut seen = BTreeSet::new();
        for p in &f.params {
            if !seen.insert(p.0.as_str()) {
                return Err(LangError::Type {
                    line: f.line,
                    message: format!("duplicate parameter '{}'", p.0),
                });
            }
        }
        let mut locs = BTreeSet::new();
        for s in f.statements() {
            if !locs.insert(s.loc) {
                return Err(LangError::Parse {
                    line: s.loc,
                    message: "two statements start on the same line".into(),
                });
            }
        }
        let mut env = TypeEnv::for_function(program, f);
        env.push();
        check_block(&mut env, f, &f.body)?;
    }
    if program.function(&program.entry).is_none() {
        return Err(LangError::Type {
            line: 1,
            message: format!("entry function '{}' not found", program.entry),
        });
    }
    Ok(())
}

fn check_block(env: &mut TypeEnv, f: &FunctionDef, body: &[Stmt]) -> Result<(), LangError> {
    for s in body {
        check_stmt(env, f, s)?;
    }
    Ok(())
}

fn check_nested(env: &mut TypeEnv, f: &FunctionDef, body: &[Stmt]) -> Result<(), LangError> {
    env.push();
    let r = check_block(env, f, body);
    env.pop();
    r
}

pub(crate) fn check_stmt(env: &mut TypeEnv, f: &FunctionDef, s: &Stmt) -> Result<(), LangError> {
    let line = s.loc;
    let err = |message: String| LangError::Type { line, message };
    let expect_bool = |env: &TypeEnv, c: &Expr| -> Result<(), LangError> {
        if env.type_of(c, line)? != Type::Bool {
            return Err(err("condition must be boolean".into()));
        }
        Ok(())
    };
    match &s.kind {
        StmtKind::Decl { ty, name, init } => {
            if env.declared_in_innermost(name) || f.params.iter().any(|(p, _)| p == name) {
                return Err(err(format!("variable '{name}' already declared")));
            }
            if let Some(e) = init {
                let t = env.type_of(e, line)?;
                if !assignable(*ty, t) {
                    return Err(err(format!("cannot initialise {ty} '{name}' with {t}")));
                }
            }
            env.declare(name, *ty);
        }
        StmtKind::Assign { target, op, value } => {
            let tt = env
                .lookup(target.name())
                .ok_or_else(|| err(format!("use of undeclared variable '{}'", target.name())))?;
            let slot_ty = match target {
                LValue::Var(_) => tt,
                LValue::Index(_, idx) => {
                    if !env.type_of(idx, line)?.is_numeric() {
                        return Err(err("array index must be an int".into()));
                    }
                    tt.element()
                        .ok_or_else(|| err(format!("'{}' is not an array", target.name())))?
                }
            };
            let vt = env.type_of(value, line)?;
            if *op != AssignOp::Set && !(slot_ty.is_numeric() && vt.is_numeric()) {
                return Err(err(format!("'{}' needs integer operands", op.symbol())));
            }
            if !assignable(slot_ty, vt) {
                return Err(err(format!("cannot assign {vt} to {slot_ty}")));
            }
        }
        StmtKind::If {
            cond,
            then_body,
            else_body,
        } => {
            expect_bool(env, cond)?;
            check_nested(env, f, then_body)?;
            if let Some(e) = else_body {
                check_nested(env, f, e)?;
            }
        }
        StmtKind::While { cond, body } => {
            expect_bool(env, cond)?;
            check_nested(env, f, body)?;
        }
        StmtKind::For {
            init,
            cond,
            update,
            body,
        } => {
            env.push();
            let r = (|| {
                if let Some(i) = init {
                    check_stmt(env, f, i)?;
                }
                if let Some(c) = cond {
                    expect_bool(env, c)?;
                }
                if let Some(u) = update {
                    check_stmt(env, f, u)?;
                }
                check_nested(env, f, body)
            })();
            env.pop();
            r?;
        }
        StmtKind::Return(e) => match (e, f.return_type) {
            (None, Type::Void) => {}
            (None, t) => return Err(err(format!("missing return value of type {t}"))),
            (Some(_), Type::Void) => return Err(err("void function returns a value".into())),
            (Some(e), t) => {
                let vt = env.type_of(e, line)?;
                if !assignable(t, vt) {
                    return Err(err(format!("returning {vt} from function of type {t}")));
                }
            }
        },
        StmtKind::Expr(e) => {
            if !matches!(e, Expr::Call(..)) {
                return Err(err("expression statement must be a call".into()));
            }
            env.type_of(e, line)?;
        }
    }
    Ok(())
}
