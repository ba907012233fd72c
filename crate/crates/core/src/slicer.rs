//! Slicing for single-line repair: statements outside the region a line can
//! influence are replaced by constants taken from the original trace.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::extfun::{GuessEnv, GuessTable};
use crate::lang::{
    AssignOp, Expr, FunctionDef, LValue, Line, Location, Program, Stmt, StmtKind, Type, OUTPUT_VAR,
};
use crate::sketcher::{instantiate, SketchedProgram};
use crate::solver::{Externals, ManipulationSpec, Task};
use crate::tracer::{ExternalEnv, Trace, Value};

/// Control-flow graph of the entry function over statement locations.
struct Cfg<'p> {
    succ: BTreeMap<Location, BTreeSet<Location>>,
    stmts: BTreeMap<Line, &'p Stmt>,
    /// Enclosing compound statements of each statement, outermost first.
    parents: BTreeMap<Line, Vec<Line>>,
    nested_return: bool,
}

fn first(body: &[Stmt], follow: Location) -> Location {
    body.first()
        .map(|s| Location::Line(s.loc))
        .unwrap_or(follow)
}

impl<'p> Cfg<'p> {
    fn new(f: &'p FunctionDef) -> Self {
        let mut cfg = Cfg {
            succ: BTreeMap::new(),
            stmts: BTreeMap::new(),
            parents: BTreeMap::new(),
            nested_return: false,
        };
        cfg.build(&f.body, Location::Exit, &mut Vec::new());
        cfg.succ.entry(Location::Exit).or_default();
        cfg
    }

    fn edge(&mut self, from: Line, to: Location) {
        self.succ
            .entry(Location::Line(from))
            .or_default()
            .insert(to);
    }

    fn build(&mut self, body: &'p [Stmt], follow: Location, enclosing: &mut Vec<Line>) {
        for (k, s) in body.iter().enumerate() {
            let next = body
                .get(k + 1)
                .map(|n| Location::Line(n.loc))
                .unwrap_or(follow);
            self.stmts.insert(s.loc, s);
            self.parents.insert(s.loc, enclosing.clone());
            self.succ.entry(Location::Line(s.loc)).or_default();
            match &s.kind {
                StmtKind::Return(_) => {
                    self.nested_return |= !enclosing.is_empty();
                    self.edge(s.loc, Location::Exit);
                }
                StmtKind::If {
                    then_body,
                    else_body,
                    ..
                } => {
                    self.edge(s.loc, first(then_body, next));
                    let other = else_body.as_ref().map(|e| first(e, next)).unwrap_or(next);
                    self.edge(s.loc, other);
                    enclosing.push(s.loc);
                    self.build(then_body, next, enclosing);
                    if let Some(e) = else_body {
                        self.build(e, next, enclosing);
                    }
                    enclosing.pop();
                }
                StmtKind::For { body: inner, .. } | StmtKind::While { body: inner, .. } => {
                    let head = Location::Line(s.loc);
                    self.edge(s.loc, first(inner, head));
                    self.edge(s.loc, next);
                    enclosing.push(s.loc);
                    self.build(inner, head, enclosing);
                    enclosing.pop();
                }
                _ => self.edge(s.loc, next),
            }
        }
    }

    fn predecessors(&self) -> BTreeMap<Location, Vec<Location>> {
        let mut pred: BTreeMap<Location, Vec<Location>> = BTreeMap::new();
        for (from, tos) in &self.succ {
            for to in tos {
                pred.entry(*to).or_default().push(*from);
            }
        }
        pred
    }

    /// Definitions `(var, line)` reaching the point before each node.
    fn reaching(&self) -> BTreeMap<Location, BTreeSet<(String, Line)>> {
        let pred = self.predecessors();
        let mut out: BTreeMap<Line, BTreeSet<(String, Line)>> = BTreeMap::new();
        let mut inn: BTreeMap<Location, BTreeSet<(String, Line)>> = BTreeMap::new();
        loop {
            let mut changed = false;
            for node in self.succ.keys() {
                let mut i = BTreeSet::new();
                for p in pred.get(node).into_iter().flatten() {
                    if let Location::Line(l) = p {
                        i.extend(out.get(l).into_iter().flatten().cloned());
                    }
                }
                if let Location::Line(l) = node {
                    let s = self.stmts[l];
                    let defs = s.defined_vars();
                    let strong = kills(s);
                    let mut o: BTreeSet<(String, Line)> = i
                        .iter()
                        .filter(|(v, _)| !(strong && defs.contains(&v.as_str())))
                        .cloned()
                        .collect();
                    o.extend(defs.iter().map(|v| (v.to_string(), *l)));
                    if out.get(l) != Some(&o) {
                        out.insert(*l, o);
                        changed = true;
                    }
                }
                if inn.get(node) != Some(&i) {
                    inn.insert(*node, i);
                    changed = true;
                }
            }
            if !changed {
                return inn;
            }
        }
    }
}

/// Whether the statement overwrites its variable entirely. Element writes
/// and loop headers (init and update share a node) do not.
fn kills(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Decl { .. } => true,
        StmtKind::Assign { target, .. } => matches!(target, LValue::Var(_)),
        _ => false,
    }
}

/// Statements that can affect `vars` just before `location`, closed under
/// data and control dependence. Contains the statement at `location`.
pub fn backward_slice(program: &Program, location: Location, vars: &[&str]) -> BTreeSet<Line> {
    let cfg = Cfg::new(program.entry_fn());
    let rd = cfg.reaching();
    let mut slice = BTreeSet::new();
    let mut work = VecDeque::new();
    let add = |l: Line, slice: &mut BTreeSet<Line>, work: &mut VecDeque<Line>| {
        if slice.insert(l) {
            work.push_back(l);
        }
    };
    if let Location::Line(l) = location {
        slice.insert(l);
        for p in cfg.parents.get(&l).into_iter().flatten() {
            add(*p, &mut slice, &mut work);
        }
    }
    for (v, d) in rd.get(&location).into_iter().flatten() {
        if vars.contains(&v.as_str()) {
            add(*d, &mut slice, &mut work);
        }
    }
    while let Some(l) = work.pop_front() {
        for p in &cfg.parents[&l] {
            add(*p, &mut slice, &mut work);
        }
        let used = cfg.stmts[&l].used_vars();
        for (v, d) in &rd[&Location::Line(l)] {
            if used.contains(&v.as_str()) {
                add(*d, &mut slice, &mut work);
            }
        }
    }
    slice
}

/// Statements reachable from `line` in the control-flow graph, `line` included.
pub fn forward_reachable(program: &Program, line: Line) -> BTreeSet<Line> {
    let cfg = Cfg::new(program.entry_fn());
    let mut seen = BTreeSet::new();
    let mut work = vec![Location::Line(line)];
    while let Some(n) = work.pop() {
        if let Location::Line(l) = n {
            if cfg.stmts.contains_key(&l) && seen.insert(l) {
                work.extend(cfg.succ[&n].iter().copied());
            }
        }
    }
    seen
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Substitution {
    /// Where the value was read in the original trace.
    pub location: Location,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceResult {
    pub relevant: BTreeSet<Line>,
    #[serde(serialize_with = "print_summarized")]
    pub summarized: Program,
    pub substitutions: BTreeMap<String, Substitution>,
    pub applicable: bool,
    /// Why the slice cannot be used, when it cannot.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

fn print_summarized<S: serde::Serializer>(p: &Program, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&crate::lang::print_program(p))
}

impl SliceResult {
    fn unusable(program: &Program, relevant: &BTreeSet<Line>, reason: String) -> Self {
        SliceResult {
            relevant: relevant.clone(),
            summarized: program.clone(),
            substitutions: BTreeMap::new(),
            applicable: false,
            reason: Some(reason),
        }
    }

    pub fn statement_count(&self) -> usize {
        self.summarized.entry_fn().statements().len()
    }
}

fn literal(v: &Value) -> Option<Expr> {
    Some(match v {
        Value::Int(n) => Expr::Int(*n),
        Value::Bool(b) => Expr::Bool(*b),
        Value::Char(c) => Expr::Char(*c),
        Value::IntArray(a) => Expr::ArrayLit(a.iter().map(|n| Expr::Int(*n)).collect()),
        Value::CharArray(a) => Expr::ArrayLit(a.iter().map(|c| Expr::Char(*c)).collect()),
        Value::Undefined => return None,
    })
}

fn default_literal(ty: Type) -> Expr {
    match ty {
        Type::Bool => Expr::Bool(false),
        Type::Char => Expr::Char('\0'),
        Type::IntArray | Type::CharArray => Expr::ArrayLit(Vec::new()),
        Type::Int | Type::Void => Expr::Int(0),
    }
}

fn declared_type(f: &FunctionDef, var: &str) -> Option<Type> {
    f.statements().into_iter().find_map(|s| match &s.kind {
        StmtKind::Decl { ty, name, .. } if name == var => Some(*ty),
        StmtKind::For { init: Some(i), .. } => match &i.kind {
            StmtKind::Decl { ty, name, .. } if name == var => Some(*ty),
            _ => None,
        },
        _ => None,
    })
}

fn declares(s: &Stmt) -> Vec<&str> {
    match &s.kind {
        StmtKind::Decl { name, .. } => vec![name.as_str()],
        StmtKind::For { init: Some(i), .. } => declares(i),
        _ => Vec::new(),
    }
}

fn keep(body: &[Stmt], relevant: &BTreeSet<Line>) -> Vec<Stmt> {
    body.iter()
        .filter(|s| relevant.contains(&s.loc))
        .map(|s| {
            let mut s = s.clone();
            match &mut s.kind {
                StmtKind::If {
                    then_body,
                    else_body,
                    ..
                } => {
                    *then_body = keep(then_body, relevant);
                    if let Some(e) = else_body {
                        *e = keep(e, relevant);
                    }
                }
                StmtKind::For { body, .. } | StmtKind::While { body, .. } => {
                    *body = keep(body, relevant);
                }
                _ => {}
            }
            s
        })
        .collect()
}

/// Removes statements outside `relevant` and declares the variables the
/// region needs with their values on entry to it in `original`.
pub fn summarize(program: &Program, relevant: &BTreeSet<Line>, original: &Trace) -> SliceResult {
    let f = program.entry_fn();
    let cfg = Cfg::new(f);
    if relevant.is_empty() {
        return SliceResult::unusable(program, relevant, "empty region".into());
    }
    if cfg.nested_return {
        return SliceResult::unusable(program, relevant, "return inside a block".into());
    }
    for l in relevant {
        let Some(ps) = cfg.parents.get(l) else {
            return SliceResult::unusable(program, relevant, format!("no statement at line {l}"));
        };
        if let Some(p) = ps.iter().find(|p| !relevant.contains(p)) {
            return SliceResult::unusable(
                program,
                relevant,
                format!("line {l} is nested in line {p}, which is outside the region"),
            );
        }
    }
    let inside = |loc: Location| loc.line().is_some_and(|l| relevant.contains(&l));
    let entries: Vec<usize> = (0..original.len())
        .filter(|&j| inside(original.configs[j].location))
        .filter(|&j| j == 0 || !inside(original.configs[j - 1].location))
        .collect();
    let head = f
        .body
        .iter()
        .find(|s| relevant.contains(&s.loc))
        .map(|s| s.loc);
    let entry = match entries.as_slice() {
        [] => return SliceResult::unusable(program, relevant, "region never runs".into()),
        [e] => *e,
        _ => {
            return SliceResult::unusable(
                program,
                relevant,
                format!("region entered {} times", entries.len()),
            )
        }
    };
    let entry_loc = original.configs[entry].location;
    if entry_loc.line() != head {
        return SliceResult::unusable(program, relevant, format!("region entered at {entry_loc}"));
    }

    let mut referenced: BTreeSet<&str> = BTreeSet::new();
    let mut declared: BTreeSet<&str> = BTreeSet::new();
    for l in relevant {
        let s = cfg.stmts[l];
        referenced.extend(s.used_vars());
        referenced.extend(s.defined_vars());
        declared.extend(declares(s));
    }
    let params: BTreeSet<&str> = f.params.iter().map(|(n, _)| n.as_str()).collect();
    let statements = f.statements();
    let mut prologue = Vec::new();
    let mut substitutions = BTreeMap::new();
    for var in f.variable_slots() {
        if var == OUTPUT_VAR
            || !referenced.contains(var.as_str())
            || declared.contains(var.as_str())
        {
            continue;
        }
        let def_site = statements
            .iter()
            .find(|s| !relevant.contains(&s.loc) && s.defined_vars().contains(&var.as_str()))
            .map(|s| s.loc);
        let value = original
            .value(entry, &var)
            .cloned()
            .unwrap_or(Value::Undefined);
        let is_param = params.contains(var.as_str());
        let kind = match (is_param, def_site) {
            (true, None) => continue,
            (true, Some(_)) => match literal(&value) {
                Some(e) => StmtKind::Assign {
                    target: LValue::Var(var.clone()),
                    op: AssignOp::Set,
                    value: e,
                },
                None => {
                    return SliceResult::unusable(program, relevant, format!("{var} is unassigned"))
                }
            },
            (false, _) => match declared_type(f, &var) {
                Some(ty) => StmtKind::Decl {
                    ty,
                    name: var.clone(),
                    init: literal(&value),
                },
                None => {
                    return SliceResult::unusable(
                        program,
                        relevant,
                        format!("{var} is not declared"),
                    )
                }
            },
        };
        let Some(loc) = def_site.or_else(|| {
            statements
                .iter()
                .find(|s| !relevant.contains(&s.loc) && declares(s).contains(&var.as_str()))
                .map(|s| s.loc)
        }) else {
            return SliceResult::unusable(program, relevant, format!("no definition of {var}"));
        };
        prologue.push(Stmt { loc, kind });
        substitutions.insert(
            var.clone(),
            Substitution {
                location: entry_loc,
                value,
            },
        );
    }

    let mut body = keep(&f.body, relevant);
    // The region may end before the return; keep the result the original had.
    if f.return_type != Type::Void
        && !matches!(body.last().map(|s| &s.kind), Some(StmtKind::Return(_)))
    {
        if let Some(ret) = f
            .body
            .last()
            .filter(|s| matches!(s.kind, StmtKind::Return(_)))
        {
            let value = original
                .output()
                .and_then(literal)
                .unwrap_or_else(|| default_literal(f.return_type));
            body.push(Stmt {
                loc: ret.loc,
                kind: StmtKind::Return(Some(value)),
            });
        }
    }
    let mut summarized = program.clone();
    let g = summarized.entry_fn_mut();
    g.body = prologue;
    g.body.extend(body);
    SliceResult {
        relevant: relevant.clone(),
        summarized,
        substitutions,
        applicable: true,
        reason: None,
    }
}

/// Region relevant to a repair at `line` for a manipulation at `location`.
pub fn relevant_region(
    program: &Program,
    location: Location,
    vars: &[&str],
    line: Line,
) -> BTreeSet<Line> {
    let back = backward_slice(program, location, vars);
    let fwd = forward_reachable(program, line);
    back.intersection(&fwd).copied().collect()
}

/// A line's sketch on the summarized program, with its own task.
pub(crate) struct SlicedLine {
    pub sketched: SketchedProgram,
    pub task: Task,
}

/// Summarized sketch and task for repairing `line`, or `None` when the
/// slice cannot stand in for the full program.
pub(crate) fn slice_for_line(
    task: &Task,
    full: &SketchedProgram,
    line: Line,
    externals: Externals,
) -> Option<SlicedLine> {
    let m = task.manipulation.as_ref()?;
    let manipulation = m.as_manipulation();
    let relevant = relevant_region(
        &task.program,
        m.location,
        &manipulation.manipulated_vars(),
        line,
    );
    if !relevant.contains(&line) {
        return None;
    }
    if let Location::Line(l) = m.location {
        if !relevant.contains(&l) {
            return None;
        }
    }
    let slice = summarize(&full.program, &relevant, &m.original);
    if !slice.applicable {
        return None;
    }
    let mut sketched = SketchedProgram {
        original: task.program.clone(),
        program: slice.summarized.clone(),
        holes: full.holes.clone(),
        scope: BTreeSet::from([line]),
    };
    sketched.original = instantiate(&sketched, &sketched.original_assignment()).ok()?;

    let empty = GuessTable::default();
    let trace = match externals {
        Externals::Oracle(r) => {
            let mut env = r.clone();
            crate::solver::original_trace(&sketched.original, &m.initial, &mut env)
        }
        Externals::Guessing { table, .. } => {
            let mut env = GuessEnv {
                table,
                guesses: &empty,
            };
            crate::solver::original_trace(
                &sketched.original,
                &m.initial,
                &mut env as &mut dyn ExternalEnv,
            )
        }
    };
    let index = remap_index(&m.original, m.index, &trace, m.location)?;
    let sliced_task = Task {
        program: sketched.original.clone(),
        manipulation: Some(ManipulationSpec {
            initial: m.initial.clone(),
            index,
            location: m.location,
            values: m.values.clone(),
            original: trace,
        }),
        tests: Vec::new(),
    };
    Some(SlicedLine {
        sketched,
        task: sliced_task,
    })
}

/// Index in `sliced` of the visit to `location` matching `original[index]`.
fn remap_index(
    original: &Trace,
    index: usize,
    sliced: &Trace,
    location: Location,
) -> Option<usize> {
    let visit = original
        .configs
        .get(..=index)?
        .iter()
        .filter(|c| c.location == location)
        .count();
    sliced
        .configs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.location == location)
        .nth(visit.checked_sub(1)?)
        .map(|(j, _)| j)
}

/// Slice used for `line` in single-line repair, for display.
pub fn explain(program: &Program, spec: &ManipulationSpec, line: Line) -> SliceResult {
    let m = spec.as_manipulation();
    let relevant = relevant_region(program, spec.location, &m.manipulated_vars(), line);
    summarize(program, &relevant, &spec.original)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_program, print_program};
    use crate::tracer::execute;

    #[test]
    fn straight_line_slice() {
        let p = parse_program("int f(){\n  int x = 1;\n  int y = 2;\n  return x; }").unwrap();
        let s = backward_slice(&p, Location::Line(4), &["x"]);
        assert_eq!(s, BTreeSet::from([2, 4]));
        assert_eq!(
            backward_slice(&p, Location::Line(2), &["x"]),
            BTreeSet::from([2])
        );
        assert_eq!(forward_reachable(&p, 4), BTreeSet::from([4]));
        assert_eq!(forward_reachable(&p, 2), BTreeSet::from([2, 3, 4]));
    }

    #[test]
    fn whole_program_region_is_identity() {
        let p = parse_program("int f(int a){\n  int x = a;\n  x = x + 1;\n  return x; }").unwrap();
        let t = execute(&p, &[("a".to_string(), Value::Int(2))].into(), 100).unwrap();
        let r = summarize(&p, &BTreeSet::from([2, 3, 4]), &t);
        assert!(r.applicable);
        assert!(r.substitutions.is_empty());
        assert_eq!(print_program(&r.summarized), print_program(&p));
    }

    #[test]
    fn loop_varying_input_is_not_summarized() {
        let p = parse_program(
            "int f(int n){\n  int s = 0;\n  for(int i = 0; i < n; i++){\n    int t = i;\n    s = s + t; }\n  return s; }",
        )
        .unwrap();
        let t = execute(&p, &[("n".to_string(), Value::Int(3))].into(), 100).unwrap();
        let r = summarize(&p, &BTreeSet::from([5, 6]), &t);
        assert!(!r.applicable);
    }
}
