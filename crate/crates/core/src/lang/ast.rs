//! Syntax tree for the mini imperative language.
//!
//! The same tree type carries sketched programs: [`Expr::Hole`],
//! [`Expr::Coeff`] and [`Expr::Adjust`] never come out of the parser, only
//! out of the sketcher.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Source line of a statement head. Doubles as the statement's location label.
pub type Line = u32;

/// Index of a hole inside a sketched program.
pub type HoleId = usize;

/// A control location: a statement label or the reserved `exit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    Line(Line),
    Exit,
}

impl Location {
    pub fn line(self) -> Option<Line> {
        match self {
            Location::Line(l) => Some(l),
            Location::Exit => None,
        }
    }
}

impl Serialize for Location {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Location::Line(l) => s.serialize_u32(*l),
            Location::Exit => s.serialize_str("exit"),
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(l) => write!(f, "{l}"),
            Location::Exit => f.write_str("exit"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Type {
    Int,
    Bool,
    Char,
    IntArray,
    CharArray,
    Void,
}

impl Type {
    /// Integer-valued scalars: the types that take part in linear rewrites.
    pub fn is_numeric(self) -> bool {
        matches!(self, Type::Int | Type::Char)
    }

    pub fn is_array(self) -> bool {
        matches!(self, Type::IntArray | Type::CharArray)
    }

    pub fn element(self) -> Option<Type> {
        match self {
            Type::IntArray => Some(Type::Int),
            Type::CharArray => Some(Type::Char),
            _ => None,
        }
    }

    pub fn array_of(self) -> Option<Type> {
        match self {
            Type::Int => Some(Type::IntArray),
            Type::Char => Some(Type::CharArray),
            _ => None,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Type::Int => "int",
            Type::Bool => "boolean",
            Type::Char => "char",
            Type::IntArray => "int[]",
            Type::CharArray => "char[]",
            Type::Void => "void",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(
            self,
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod
        )
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Char(char),
    Var(String),
    /// `a[e]`; only named arrays can be indexed.
    Index(String, Box<Expr>),
    /// `a.length`
    Length(String),
    ArrayLit(Vec<Expr>),
    /// `new int[e]`, element type given.
    NewArray(Type, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// User function `f(..)` or external `Math.pow(..)` (name contains a dot).
    Call(String, Vec<Expr>),
    /// Unbounded integer hole `??`.
    Hole(HoleId),
    /// `??_b * e` with the coefficient drawn from {-1, 0, 1}.
    Coeff(HoleId, Box<Expr>),
    /// `base + (??_b v1 + ... + ??_b vn + ??)`.
    Adjust {
        base: Box<Expr>,
        terms: Vec<(HoleId, String)>,
        constant: HoleId,
    },
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn is_call_external(name: &str) -> bool {
        name.contains('.')
    }

    /// Calls every variable name read by this expression (array names included).
    pub fn visit_reads<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Char(_) | Expr::Hole(_) => {}
            Expr::Var(v) | Expr::Length(v) => f(v),
            Expr::Index(a, i) => {
                f(a);
                i.visit_reads(f);
            }
            Expr::ArrayLit(items) => items.iter().for_each(|e| e.visit_reads(f)),
            Expr::NewArray(_, e) | Expr::Unary(_, e) | Expr::Coeff(_, e) => e.visit_reads(f),
            Expr::Binary(_, a, b) => {
                a.visit_reads(f);
                b.visit_reads(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|e| e.visit_reads(f)),
            Expr::Adjust { base, terms, .. } => {
                base.visit_reads(f);
                for (_, v) in terms {
                    f(v);
                }
            }
        }
    }

    pub fn has_holes(&self) -> bool {
        match self {
            Expr::Hole(_) | Expr::Coeff(..) | Expr::Adjust { .. } => true,
            Expr::Int(_) | Expr::Bool(_) | Expr::Char(_) | Expr::Var(_) | Expr::Length(_) => false,
            Expr::Index(_, e) | Expr::NewArray(_, e) | Expr::Unary(_, e) => e.has_holes(),
            Expr::ArrayLit(items) | Expr::Call(_, items) => items.iter().any(Expr::has_holes),
            Expr::Binary(_, a, b) => a.has_holes() || b.has_holes(),
        }
    }

    pub fn calls_user_function(&self) -> bool {
        match self {
            Expr::Call(name, args) => {
                !Expr::is_call_external(name) || args.iter().any(Expr::calls_user_function)
            }
            Expr::Int(_)
            | Expr::Bool(_)
            | Expr::Char(_)
            | Expr::Var(_)
            | Expr::Length(_)
            | Expr::Hole(_) => false,
            Expr::Index(_, e) | Expr::NewArray(_, e) | Expr::Unary(_, e) | Expr::Coeff(_, e) => {
                e.calls_user_function()
            }
            Expr::ArrayLit(items) => items.iter().any(Expr::calls_user_function),
            Expr::Binary(_, a, b) => a.calls_user_function() || b.calls_user_function(),
            Expr::Adjust { base, .. } => base.calls_user_function(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LValue {
    Var(String),
    Index(String, Expr),
}

impl LValue {
    pub fn name(&self) -> &str {
        match self {
            LValue::Var(n) | LValue::Index(n, _) => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssignOp {
    Set,
    Add,
    Sub,
    Mul,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Set => "=",
            AssignOp::Add => "+=",
            AssignOp::Sub => "-=",
            AssignOp::Mul => "*=",
        }
    }

    pub fn binop(self) -> Option<BinOp> {
        match self {
            AssignOp::Set => None,
            AssignOp::Add => Some(BinOp::Add),
            AssignOp::Sub => Some(BinOp::Sub),
            AssignOp::Mul => Some(BinOp::Mul),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stmt {
    pub loc: Line,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StmtKind {
    Decl {
        ty: Type,
        name: String,
        init: Option<Expr>,
    },
    Assign {
        target: LValue,
        op: AssignOp,
        value: Expr,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Option<Vec<Stmt>>,
    },
    /// Init and update share the header's location.
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        update: Option<Box<Stmt>>,
        body: Vec<Stmt>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    Return(Option<Expr>),
    Expr(Expr),
}

impl Stmt {
    /// Nested statement blocks, in source order.
    pub fn blocks(&self) -> Vec<&Vec<Stmt>> {
        match &self.kind {
            StmtKind::If {
                then_body,
                else_body,
                ..
            } => {
                let mut v = vec![then_body];
                if let Some(e) = else_body {
                    v.push(e);
                }
                v
            }
            StmtKind::For { body, .. } | StmtKind::While { body, .. } => vec![body],
            _ => Vec::new(),
        }
    }

    pub fn is_compound(&self) -> bool {
        matches!(
            self.kind,
            StmtKind::If { .. } | StmtKind::For { .. } | StmtKind::While { .. }
        )
    }

    /// Variable written by the statement head (for headers: the loop variable).
    pub fn defined_vars(&self) -> Vec<&str> {
        match &self.kind {
            StmtKind::Decl { name, .. } => vec![name],
            StmtKind::Assign { target, .. } => vec![target.name()],
            StmtKind::For { init, update, .. } => init
                .iter()
                .chain(update.iter())
                .flat_map(|s| s.defined_vars())
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Variables read by the statement head. Compound assignments and
    /// element writes also read their target.
    pub fn used_vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit_head_exprs(&mut |e| e.visit_reads(&mut |v| out.push(v)));
        match &self.kind {
            StmtKind::Assign { target, op, .. } => {
                if *op != AssignOp::Set || matches!(target, LValue::Index(..)) {
                    out.push(target.name());
                }
            }
            StmtKind::For { init, update, .. } => {
                for s in init.iter().chain(update.iter()) {
                    out.extend(s.used_vars());
                }
            }
            _ => {}
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Expressions evaluated by this statement's head (not its nested blocks).
    pub fn visit_head_exprs<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        match &self.kind {
            StmtKind::Decl { init, .. } => init.iter().for_each(f),
            StmtKind::Assign { target, value, .. } => {
                if let LValue::Index(_, idx) = target {
                    f(idx);
                }
                f(value);
            }
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => f(cond),
            StmtKind::For {
                init, cond, update, ..
            } => {
                if let Some(s) = init {
                    s.visit_head_exprs(f);
                }
                if let Some(c) = cond {
                    f(c);
                }
                if let Some(s) = update {
                    s.visit_head_exprs(f);
                }
            }
            StmtKind::Return(e) => e.iter().for_each(f),
            StmtKind::Expr(e) => f(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<(String, Type)>,
    pub return_type: Type,
    pub body: Vec<Stmt>,
    /// Line of the signature.
    pub line: Line,
}

impl FunctionDef {
    /// Depth-first, source-order walk over all statements.
    pub fn statements(&self) -> Vec<&Stmt> {
        fn walk<'a>(stmts: &'a [Stmt], out: &mut Vec<&'a Stmt>) {
            for s in stmts {
                out.push(s);
                for b in s.blocks() {
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.body, &mut out);
        out
    }

    pub fn statement_at(&self, loc: Line) -> Option<&Stmt> {
        self.statements().into_iter().find(|s| s.loc == loc)
    }

    pub fn locations(&self) -> Vec<Line> {
        self.statements().iter().map(|s| s.loc).collect()
    }

    /// Name of each variable slot in the valuation: parameters, then locals
    /// in order of first declaration, then the output variable when the
    /// function returns a value.
    pub fn variable_slots(&self) -> Vec<String> {
        let mut names: Vec<String> = self.params.iter().map(|(n, _)| n.clone()).collect();
        for s in self.statements() {
            let decl = match &s.kind {
                StmtKind::Decl { name, .. } => Some(name),
                StmtKind::For { init: Some(i), .. } => match &i.kind {
                    StmtKind::Decl { name, .. } => Some(name),
                    _ => None,
                },
                _ => None,
            };
            if let Some(n) = decl {
                if !names.contains(n) {
                    names.push(n.clone());
                }
            }
        }
        if self.return_type != Type::Void {
            names.push(OUTPUT_VAR.to_string());
        }
        names
    }
}

/// Name of the output variable `o` in valuations. It is a keyword, so it
/// cannot clash with program variables.
pub const OUTPUT_VAR: &str = "return";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    pub functions: Vec<FunctionDef>,
    pub entry: String,
}

impl Program {
    pub fn entry_fn(&self) -> &FunctionDef {
        self.function(&self.entry)
            .expect("program invariant: entry function exists")
    }

    pub fn entry_fn_mut(&mut self) -> &mut FunctionDef {
        let entry = self.entry.clone();
        self.functions
            .iter_mut()
            .find(|f| f.name == entry)
            .expect("program invariant: entry function exists")
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn has_holes(&self) -> bool {
        self.functions.iter().flat_map(|f| f.statements()).any(|s| {
            let mut found = false;
            s.visit_head_exprs(&mut |e| found |= e.has_holes());
            found
        })
    }

    pub fn external_calls(&self) -> bool {
        fn has_ext(e: &Expr) -> bool {
            match e {
                Expr::Call(n, args) => Expr::is_call_external(n) || args.iter().any(has_ext),
                Expr::Index(_, e)
                | Expr::NewArray(_, e)
                | Expr::Unary(_, e)
                | Expr::Coeff(_, e) => has_ext(e),
                Expr::ArrayLit(items) => items.iter().any(has_ext),
                Expr::Binary(_, a, b) => has_ext(a) || has_ext(b),
                Expr::Adjust { base, .. } => has_ext(base),
                _ => false,
            }
        }
        self.functions.iter().flat_map(|f| f.statements()).any(|s| {
            let mut found = false;
            s.visit_head_exprs(&mut |e| found |= has_ext(e));
            found
        })
    }
}
