//! Small-step tracing interpreter.
//!
//! A configuration is recorded before every statement of the entry function
//! runs, and once at `exit`. Calls to user functions run to completion
//! without recording anything in the caller's trace.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use super::value::{Valuation, Value};
use crate::lang::*;

/// Outcome of a call to an external function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExternalFault {
    Unregistered(String),
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
    /// The evaluator has no value for this call yet.
    Unknown {
        name: String,
        args: Vec<i64>,
    },
}

/// Resolves calls of the form `Class.method(..)`.
pub trait ExternalEnv {
    fn call(&mut self, name: &str, args: &[i64]) -> Result<i64, ExternalFault>;
}

/// Environment where every external call is unregistered.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoExternals;

impl ExternalEnv for NoExternals {
    fn call(&mut self, name: &str, _args: &[i64]) -> Result<i64, ExternalFault> {
        Err(ExternalFault::Unregistered(name.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct Configuration {
    pub location: Location,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone)]
pub struct Trace {
    /// Slot names; `values[i]` of every configuration belongs to `vars[i]`.
    pub vars: Arc<[String]>,
    pub configs: Vec<Configuration>,
    /// Reached `exit` within the fuel.
    pub terminated: bool,
}

impl PartialEq for Trace {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars
            && self.terminated == other.terminated
            && self.configs.len() == other.configs.len()
            && self
                .configs
                .iter()
                .zip(&other.configs)
                .all(|(a, b)| a.location == b.location && a.values == b.values)
    }
}

impl Trace {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn slot(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn value(&self, index: usize, name: &str) -> Option<&Value> {
        self.slot(name).map(|s| &self.configs[index].values[s])
    }

    pub fn valuation(&self, index: usize) -> Valuation {
        self.vars
            .iter()
            .cloned()
            .zip(self.configs[index].values.iter().cloned())
            .collect()
    }

    /// Configurations `0..=end` (clamped to the trace length).
    pub fn prefix(&self, end: usize) -> Trace {
        Trace {
            vars: self.vars.clone(),
            configs: self.configs[..(end + 1).min(self.configs.len())].to_vec(),
            terminated: false,
        }
    }

    pub fn locations(&self) -> Vec<Location> {
        self.configs.iter().map(|c| c.location).collect()
    }

    /// Final value of the output variable, if the trace reached `exit`.
    pub fn output(&self) -> Option<&Value> {
        if !self.terminated {
            return None;
        }
        let last = self.configs.last()?;
        self.slot(OUTPUT_VAR).map(|s| &last.values[s])
    }

    pub fn to_json(&self) -> serde_json::Value {
        let steps: Vec<serde_json::Value> = self
            .configs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let vars: serde_json::Map<String, serde_json::Value> = self
                    .vars
                    .iter()
                    .zip(&c.values)
                    .map(|(n, v)| (n.clone(), v.to_json()))
                    .collect();
                let loc = match c.location {
                    Location::Line(l) => serde_json::Value::from(l),
                    Location::Exit => serde_json::Value::from("exit"),
                };
                serde_json::json!({ "step": i, "loc": loc, "vars": vars })
            })
            .collect();
        serde_json::json!({ "steps": steps, "terminated": self.terminated })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FaultReason {
    #[error("array index {index} out of bounds for length {len}")]
    IndexOutOfBounds { index: i64, len: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("negative array size {0}")]
    NegativeSize(i64),
    #[error("array size {0} exceeds the interpreter limit")]
    ArrayTooLarge(i64),
    #[error("read of unassigned variable '{0}'")]
    Unassigned(String),
    #[error("value {0} is not a valid char")]
    InvalidChar(i64),
    #[error("call to unregistered external function '{0}'")]
    Unregistered(String),
    #[error("external '{name}' expects {expected} arguments, got {got}")]
    ExternalArity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("no known result for {name}{args:?}")]
    UnknownExternal { name: String, args: Vec<i64> },
    #[error("call depth limit exceeded")]
    StackOverflow,
    #[error("function ended without returning a value")]
    MissingReturn,
    #[error("missing value for input variable '{0}'")]
    MissingInput(String),
    #[error("input '{name}': {message}")]
    BadInput { name: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("runtime fault at {location}: {reason}")]
pub struct Fault {
    pub location: Location,
    pub reason: FaultReason,
}

/// A fault together with the trace recorded up to it.
#[derive(Debug, Clone, Error)]
#[error("{fault}")]
pub struct ExecError {
    pub fault: Fault,
    pub partial: Trace,
}

/// Largest array the interpreter will allocate.
const MAX_ARRAY: i64 = 1 << 20;
const MAX_DEPTH: usize = 200;

/// Program prepared for repeated execution.
#[derive(Debug, Clone)]
pub struct Executable<'p> {
    pub program: &'p Program,
    layouts: HashMap<&'p str, Layout>,
    /// Statements executed inside callees before the run counts as diverging.
    pub hidden_step_limit: usize,
}

#[derive(Debug, Clone)]
struct Layout {
    names: Arc<[String]>,
    types: Vec<Type>,
}

impl Layout {
    fn slot(&self, name: &str) -> usize {
        self.names
            .iter()
            .position(|n| n == name)
            .unwrap_or_else(|| panic!("variable '{name}' has no slot; program not type-checked"))
    }
}

impl<'p> Executable<'p> {
    pub fn new(program: &'p Program) -> Self {
        let layouts = program
            .functions
            .iter()
            .map(|f| {
                let names = f.variable_slots();
                let mut types: HashMap<&str, Type> =
                    f.params.iter().map(|(n, t)| (n.as_str(), *t)).collect();
                for s in f.statements() {
                    let decl = match &s.kind {
                        StmtKind::Decl { ty, name, .. } => Some((name, *ty)),
                        StmtKind::For { init: Some(i), .. } => match &i.kind {
                            StmtKind::Decl { ty, name, .. } => Some((name, *ty)),
                            _ => None,
                        },
                        _ => None,
                    };
                    if let Some((n, t)) = decl {
                        types.entry(n.as_str()).or_insert(t);
                    }
                }
                let types = names
                    .iter()
                    .map(|n| {
                        if n == OUTPUT_VAR {
                            f.return_type
                        } else {
                            types[n.as_str()]
                        }
                    })
                    .collect();
                (
                    f.name.as_str(),
                    Layout {
                        names: names.into(),
                        types,
                    },
                )
            })
            .collect();
        Executable {
            program,
            layouts,
            hidden_step_limit: 1_000_000,
        }
    }

    /// Slot names of the entry function's valuation.
    pub fn entry_vars(&self) -> Arc<[String]> {
        self.layouts[self.program.entry.as_str()].names.clone()
    }

    /// Declared type of each entry slot, parallel to [`Self::entry_vars`].
    pub fn entry_types(&self) -> &[Type] {
        &self.layouts[self.program.entry.as_str()].types
    }

    /// Runs the entry function. `holes` gives hole values for sketched
    /// programs and is ignored by hole-free ones.
    pub fn run(
        &self,
        holes: &[i64],
        initial: &Valuation,
        fuel: usize,
        env: &mut dyn ExternalEnv,
    ) -> Result<Trace, ExecError> {
        let f = self.program.entry_fn();
        let layout = &self.layouts[f.name.as_str()];
        let mut m = Machine {
            exe: self,
            holes,
            env,
            fuel,
            configs: Vec::new(),
            hidden_steps: 0,
            depth: 0,
            current: Location::Line(f.line),
        };
        let mut slots = vec![Value::Undefined; layout.names.len()];
        let mut setup = || -> Result<(), Fault> {
            for (name, ty) in &f.params {
                let v = initial.get(name).ok_or_else(|| Fault {
                    location: Location::Line(f.line),
                    reason: FaultReason::MissingInput(name.clone()),
                })?;
                let ok = match (ty, v) {
                    (_, Value::Undefined) => false,
                    (t, v) => v.type_of() == Some(*t),
                };
                if !ok {
                    return Err(Fault {
                        location: Location::Line(f.line),
                        reason: FaultReason::BadInput {
                            name: name.clone(),
                            message: format!("expected {ty}, got {v}"),
                        },
                    });
                }
                slots[layout.slot(name)] = v.clone();
            }
            Ok(())
        };
        let vars = layout.names.clone();
        if let Err(fault) = setup() {
            return Err(ExecError {
                fault,
                partial: Trace {
                    vars,
                    configs: Vec::new(),
                    terminated: false,
                },
            });
        }
        let mut frame = Frame { slots, layout };
        let result = m.exec_stmts(&mut frame, &f.body, false);
        let outcome = match result {
            Ok(Flow::Normal) if f.return_type != Type::Void => Err(Stop::Fault(Fault {
                location: Location::Exit,
                reason: FaultReason::MissingReturn,
            })),
            Ok(_) => m.emit(&frame, Location::Exit),
            Err(e) => Err(e),
        };
        let configs = std::mem::take(&mut m.configs);
        match outcome {
            Ok(()) => Ok(Trace {
                vars,
                configs,
                terminated: true,
            }),
            Err(Stop::OutOfFuel) => Ok(Trace {
                vars,
                configs,
                terminated: false,
            }),
            Err(Stop::Fault(fault)) => Err(ExecError {
                fault,
                partial: Trace {
                    vars,
                    configs,
                    terminated: false,
                },
            }),
        }
    }
}

/// Runs a hole-free program.
pub fn execute_with(
    program: &Program,
    initial: &Valuation,
    fuel: usize,
    env: &mut dyn ExternalEnv,
) -> Result<Trace, ExecError> {
    Executable::new(program).run(&[], initial, fuel, env)
}

enum Flow {
    Normal,
    Return,
}

enum Stop {
    Fault(Fault),
    OutOfFuel,
}

impl From<Fault> for Stop {
    fn from(f: Fault) -> Self {
        Stop::Fault(f)
    }
}

struct Frame<'l> {
    slots: Vec<Value>,
    layout: &'l Layout,
}

struct Machine<'e, 'p, 'h> {
    exe: &'e Executable<'p>,
    holes: &'h [i64],
    env: &'e mut dyn ExternalEnv,
    fuel: usize,
    configs: Vec<Configuration>,
    hidden_steps: usize,
    depth: usize,
    current: Location,
}

type R<T> = Result<T, Stop>;

impl Machine<'_, '_, '_> {
    fn fault(&self, reason: FaultReason) -> Stop {
        Stop::Fault(Fault {
            location: self.current,
            reason,
        })
    }

    fn emit(&mut self, frame: &Frame, location: Location) -> R<()> {
        if let Location::Line(_) = location {
            self.current = location;
        }
        if self.depth > 0 {
            self.hidden_steps += 1;
            if self.hidden_steps > self.exe.hidden_step_limit {
                return Err(Stop::OutOfFuel);
            }
            return Ok(());
        }
        if self.configs.len() >= self.fuel {
            return Err(Stop::OutOfFuel);
        }
        self.configs.push(Configuration {
            location,
            values: frame.slots.clone(),
        });
        Ok(())
    }

    fn exec_block(&mut self, frame: &mut Frame, body: &[Stmt]) -> R<Flow> {
        self.exec_stmts(frame, body, true)
    }

    /// Runs a statement list. With `scoped`, variables declared in it go
    /// back to ⊥ afterwards; a function's outermost body keeps them so the
    /// `exit` configuration still shows them.
    fn exec_stmts(&mut self, frame: &mut Frame, body: &[Stmt], scoped: bool) -> R<Flow> {
        let mut declared = Vec::new();
        let mut flow = Flow::Normal;
        for s in body {
            if let (true, StmtKind::Decl { name, .. }) = (scoped, &s.kind) {
                declared.push(frame.layout.slot(name));
            }
            if let Flow::Return = self.exec_stmt(frame, s)? {
                flow = Flow::Return;
                break;
            }
        }
        for slot in declared {
            frame.slots[slot] = Value::Undefined;
        }
        Ok(flow)
    }

    fn exec_stmt(&mut self, frame: &mut Frame, s: &Stmt) -> R<Flow> {
        self.emit(frame, Location::Line(s.loc))?;
        self.exec_head(frame, s)
    }

    fn exec_head(&mut self, frame: &mut Frame, s: &Stmt) -> R<Flow> {
        self.current = Location::Line(s.loc);
        match &s.kind {
            StmtKind::Decl { name, init, .. } => {
                let slot = frame.layout.slot(name);
                if let Some(e) = init {
                    let v = self.eval(frame, e)?;
                    frame.slots[slot] = self.coerce(v, frame.layout.types[slot])?;
                }
            }
            StmtKind::Assign { target, op, value } => {
                let rhs = self.eval(frame, value)?;
                let slot = frame.layout.slot(target.name());
                match target {
                    LValue::Var(_) => {
                        let v = match op.binop() {
                            None => rhs,
                            Some(bop) => {
                                let cur = frame.slots[slot].clone();
                                if cur.is_undefined() {
                                    return Err(self.fault(FaultReason::Unassigned(
                                        target.name().to_string(),
                                    )));
                                }
                                self.arith(bop, &cur, &rhs)?
                            }
                        };
                        frame.slots[slot] = self.coerce(v, frame.layout.types[slot])?;
                    }
                    LValue::Index(name, idx) => {
                        let i = self.eval_int(frame, idx)?;
                        let elem_ty = frame.layout.types[slot].element();
                        let cur = self.read_element(frame, name, i)?;
                        let v = match op.binop() {
                            None => rhs,
                            Some(bop) => self.arith(bop, &cur, &rhs)?,
                        };
                        let v = self.coerce(v, elem_ty.unwrap_or(Type::Int))?;
                        match (&mut frame.slots[slot], v) {
                            (Value::IntArray(a), Value::Int(n)) => Arc::make_mut(a)[i as usize] = n,
                            (Value::CharArray(a), Value::Char(c)) => {
                                Arc::make_mut(a)[i as usize] = c
                            }
                            _ => unreachable!("element type checked"),
                        }
                    }
                }
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                let c = self.eval_bool(frame, cond)?;
                if c {
                    return self.exec_block(frame, then_body);
                } else if let Some(e) = else_body {
                    return self.exec_block(frame, e);
                }
            }
            StmtKind::While { cond, body } => loop {
                self.current = Location::Line(s.loc);
                if !self.eval_bool(frame, cond)? {
                    break;
                }
                if let Flow::Return = self.exec_block(frame, body)? {
                    return Ok(Flow::Return);
                }
                self.emit(frame, Location::Line(s.loc))?;
            },
            StmtKind::For {
                init,
                cond,
                update,
                body,
            } => {
                let loop_var = match init.as_deref() {
                    Some(Stmt {
                        kind: StmtKind::Decl { name, .. },
                        ..
                    }) => Some(frame.layout.slot(name)),
                    _ => None,
                };
                if let Some(i) = init {
                    self.exec_head(frame, i)?;
                }
                let flow = loop {
                    self.current = Location::Line(s.loc);
                    if let Some(c) = cond {
                        if !self.eval_bool(frame, c)? {
                            break Flow::Normal;
                        }
                    }
                    if let Flow::Return = self.exec_block(frame, body)? {
                        break Flow::Return;
                    }
                    self.emit(frame, Location::Line(s.loc))?;
                    if let Some(u) = update {
                        self.exec_head(frame, u)?;
                    }
                };
                if let Some(slot) = loop_var {
                    frame.slots[slot] = Value::Undefined;
                }
                return Ok(flow);
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    let v = self.eval(frame, e)?;
                    if let Some(slot) = frame.layout.names.iter().position(|n| n == OUTPUT_VAR) {
                        frame.slots[slot] = self.coerce(v, frame.layout.types[slot])?;
                    }
                }
                return Ok(Flow::Return);
            }
            StmtKind::Expr(e) => {
                self.eval(frame, e)?;
            }
        }
        Ok(Flow::Normal)
    }

    fn coerce(&self, v: Value, ty: Type) -> R<Value> {
        Ok(match (ty, v) {
            (Type::Char, Value::Int(n)) => match u32::try_from(n).ok().and_then(char::from_u32) {
                Some(c) => Value::Char(c),
                None => return Err(self.fault(FaultReason::InvalidChar(n))),
            },
            (Type::Int, Value::Char(c)) => Value::Int(c as i64),
            (_, v) => v,
        })
    }

    fn read_var<'f>(&self, frame: &'f Frame, name: &str) -> R<&'f Value> {
        let v = &frame.slots[frame.layout.slot(name)];
        if v.is_undefined() {
            return Err(self.fault(FaultReason::Unassigned(name.to_string())));
        }
        Ok(v)
    }

    fn read_element(&self, frame: &Frame, name: &str, i: i64) -> R<Value> {
        let (len, v) = match self.read_var(frame, name)? {
            Value::IntArray(a) => (a.len(), a.get(i as usize).map(|n| Value::Int(*n))),
            Value::CharArray(a) => (a.len(), a.get(i as usize).map(|c| Value::Char(*c))),
            _ => unreachable!("indexing type checked"),
        };
        if i < 0 {
            return Err(self.fault(FaultReason::IndexOutOfBounds { index: i, len }));
        }
        v.ok_or_else(|| self.fault(FaultReason::IndexOutOfBounds { index: i, len }))
    }

    fn eval_int(&mut self, frame: &mut Frame, e: &Expr) -> R<i64> {
        Ok(self
            .eval(frame, e)?
            .as_int()
            .expect("integer expression type checked"))
    }

    fn eval_bool(&mut self, frame: &mut Frame, e: &Expr) -> R<bool> {
        match self.eval(frame, e)? {
            Value::Bool(b) => Ok(b),
            _ => unreachable!("condition type checked"),
        }
    }

    fn arith(&self, op: BinOp, a: &Value, b: &Value) -> R<Value> {
        let (x, y) = (
            a.as_int().expect("numeric operand"),
            b.as_int().expect("numeric operand"),
        );
        Ok(Value::Int(match op {
            BinOp::Add => x.wrapping_add(y),
            BinOp::Sub => x.wrapping_sub(y),
            BinOp::Mul => x.wrapping_mul(y),
            BinOp::Div | BinOp::Mod if y == 0 => {
                return Err(self.fault(FaultReason::DivisionByZero))
            }
            BinOp::Div => x.wrapping_div(y),
            BinOp::Mod => x.wrapping_rem(y),
            _ => unreachable!("not arithmetic"),
        }))
    }

    fn eval(&mut self, frame: &mut Frame, e: &Expr) -> R<Value> {
        Ok(match e {
            Expr::Int(n) => Value::Int(*n),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Char(c) => Value::Char(*c),
            Expr::Var(v) => self.read_var(frame, v)?.clone(),
            Expr::Index(a, i) => {
                let i = self.eval_int(frame, i)?;
                self.read_element(frame, a, i)?
            }
            Expr::Length(a) => match self.read_var(frame, a)? {
                Value::IntArray(v) => Value::Int(v.len() as i64),
                Value::CharArray(v) => Value::Int(v.len() as i64),
                _ => unreachable!("length type checked"),
            },
            Expr::ArrayLit(items) => {
                let vals = items
                    .iter()
                    .map(|i| self.eval(frame, i))
                    .collect::<R<Vec<_>>>()?;
                if !vals.is_empty() && vals.iter().all(|v| matches!(v, Value::Char(_))) {
                    Value::CharArray(Arc::new(
                        vals.iter()
                            .map(|v| match v {
                                Value::Char(c) => *c,
                                _ => unreachable!(),
                            })
                            .collect(),
                    ))
                } else {
                    Value::IntArray(Arc::new(
                        vals.iter().map(|v| v.as_int().expect("numeric")).collect(),
                    ))
                }
            }
            Expr::NewArray(t, size) => {
                let n = self.eval_int(frame, size)?;
                if n < 0 {
                    return Err(self.fault(FaultReason::NegativeSize(n)));
                }
                if n > MAX_ARRAY {
                    return Err(self.fault(FaultReason::ArrayTooLarge(n)));
                }
                match t {
                    Type::Char => Value::CharArray(Arc::new(vec!['\0'; n as usize])),
                    _ => Value::IntArray(Arc::new(vec![0; n as usize])),
                }
            }
            Expr::Unary(UnOp::Neg, x) => Value::Int(self.eval_int(frame, x)?.wrapping_neg()),
            Expr::Unary(UnOp::Not, x) => Value::Bool(!self.eval_bool(frame, x)?),
            Expr::Binary(BinOp::And, a, b) => {
                Value::Bool(self.eval_bool(frame, a)? && self.eval_bool(frame, b)?)
            }
            Expr::Binary(BinOp::Or, a, b) => {
                Value::Bool(self.eval_bool(frame, a)? || self.eval_bool(frame, b)?)
            }
            Expr::Binary(op, a, b) => {
                let x = self.eval(frame, a)?;
                let y = self.eval(frame, b)?;
                if op.is_arithmetic() {
                    self.arith(*op, &x, &y)?
                } else {
                    Value::Bool(match (x.as_int(), y.as_int()) {
                        (Some(x), Some(y)) => match op {
                            BinOp::Lt => x < y,
                            BinOp::Le => x <= y,
                            BinOp::Gt => x > y,
                            BinOp::Ge => x >= y,
                            BinOp::Eq => x == y,
                            BinOp::Ne => x != y,
                            _ => unreachable!(),
                        },
                        _ => match op {
                            BinOp::Eq => x == y,
                            BinOp::Ne => x != y,
                            _ => unreachable!("ordering on booleans"),
                        },
                    })
                }
            }
            Expr::Call(name, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.eval(frame, a))
                    .collect::<R<Vec<_>>>()?;
                if Expr::is_call_external(name) {
                    let ints: Vec<i64> =
                        vals.iter().map(|v| v.as_int().expect("numeric")).collect();
                    match self.env.call(name, &ints) {
                        Ok(n) => Value::Int(n),
                        Err(ExternalFault::Unregistered(n)) => {
                            return Err(self.fault(FaultReason::Unregistered(n)))
                        }
                        Err(ExternalFault::Arity {
                            name,
                            expected,
                            got,
                        }) => {
                            return Err(self.fault(FaultReason::ExternalArity {
                                name,
                                expected,
                                got,
                            }))
                        }
                        Err(ExternalFault::Unknown { name, args }) => {
                            return Err(self.fault(FaultReason::UnknownExternal { name, args }))
                        }
                    }
                } else {
                    self.call_user(name, vals)?
                }
            }
            Expr::Hole(h) => Value::Int(self.holes[*h]),
            Expr::Coeff(h, x) => match self.holes[*h] {
                0 => Value::Int(0),
                k => Value::Int(k.wrapping_mul(self.eval_int(frame, x)?)),
            },
            Expr::Adjust {
                base,
                terms,
                constant,
            } => {
                let mut acc = self.eval_int(frame, base)?;
                for (h, v) in terms {
                    let k = self.holes[*h];
                    if k != 0 {
                        let x = self.read_var(frame, v)?.as_int().expect("numeric term");
                        acc = acc.wrapping_add(k.wrapping_mul(x));
                    }
                }
                Value::Int(acc.wrapping_add(self.holes[*constant]))
            }
        })
    }

    fn call_user(&mut self, name: &str, args: Vec<Value>) -> R<Value> {
        let f = self
            .exe
            .program
            .function(name)
            .expect("callee existence type checked");
        if self.depth >= MAX_DEPTH {
            return Err(self.fault(FaultReason::StackOverflow));
        }
        let layout = &self.exe.layouts[f.name.as_str()];
        let mut slots = vec![Value::Undefined; layout.names.len()];
        for ((p, _), v) in f.params.iter().zip(args) {
            let slot = layout.slot(p);
            slots[slot] = self.coerce(v, layout.types[slot])?;
        }
        let mut frame = Frame { slots, layout };
        let saved = self.current;
        self.depth += 1;
        let flow = self.exec_stmts(&mut frame, &f.body, false);
        self.depth -= 1;
        let flow = flow?;
        self.current = saved;
        match flow {
            Flow::Return if f.return_type != Type::Void => {
                let slot = layout.slot(OUTPUT_VAR);
                Ok(frame.slots[slot].clone())
            }
            Flow::Normal if f.return_type != Type::Void => {
                Err(self.fault(FaultReason::MissingReturn))
            }
            _ => Ok(Value::Undefined),
        }
    }
}
