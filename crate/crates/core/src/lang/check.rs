//! Static checks: sorts, definite assignment and loop annotations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{BinOp, Builtin, CmpOp, Cond, Expr, Program, Sort, Stmt};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    DuplicateParam(String),
    EmptyName,
    /// A parameter is the target of an assignment.
    AssignsParam(String),
    /// A variable is read before it is definitely assigned.
    UnboundVariable(String),
    UnknownFunction(String),
    SortMismatch(String),
    /// A loop variant is not integer-sorted.
    VariantSort {
        loop_id: usize,
        found: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DiagnosticKind::DuplicateParam(n) => write!(f, "duplicate parameter `{n}`"),
            DiagnosticKind::EmptyName => write!(f, "empty variable or function name"),
            DiagnosticKind::AssignsParam(n) => write!(f, "assignment to parameter `{n}`"),
            DiagnosticKind::UnboundVariable(n) => {
                write!(f, "`{n}` may be read before it is assigned")
            }
            DiagnosticKind::UnknownFunction(n) => write!(f, "`{n}` is not a function or vector"),
            DiagnosticKind::SortMismatch(m) => write!(f, "sort mismatch: {m}"),
            DiagnosticKind::VariantSort { loop_id, found } => {
                write!(
                    f,
                    "variant of loop {loop_id} has sort {found}, expected an integer sort"
                )
            }
        }
    }
}

/// Static sorts. `Int` covers integer-valued reals such as `⌈e⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum S {
    Nat,
    Int,
    Real,
    Vec(usize),
    Fun,
}

impl fmt::Display for S {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            S::Nat => write!(f, "nat"),
            S::Int => write!(f, "int"),
            S::Real => write!(f, "real"),
            S::Vec(n) => write!(f, "vec[{n}]"),
            S::Fun => write!(f, "fun"),
        }
    }
}

fn scalar_rank(s: S) -> Option<u8> {
    match s {
        S::Nat => Some(0),
        S::Int => Some(1),
        S::Real => Some(2),
        _ => None,
    }
}

fn join(a: S, b: S) -> Option<S> {
    match (scalar_rank(a), scalar_rank(b)) {
        (Some(x), Some(y)) => Some(if x >= y { a } else { b }),
        _ if a == b => Some(a),
        _ => None,
    }
}

fn is_integral(s: S) -> bool {
    matches!(s, S::Nat | S::Int)
}

struct Checker<'a> {
    params: BTreeMap<&'a str, S>,
    locals: BTreeMap<String, S>,
    diags: Vec<Diagnostic>,
    /// Suppresses diagnostics during the sort-inference pass.
    quiet: bool,
}

impl<'a> Checker<'a> {
    fn report(&mut self, kind: DiagnosticKind) {
        if !self.quiet && !self.diags.iter().any(|d| d.kind == kind) {
            self.diags.push(Diagnostic { kind });
        }
    }

    fn var_sort(&self, name: &str, bound: &[(String, S)]) -> Option<S> {
        bound
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, s)| *s)
            .or_else(|| self.params.get(name).copied())
            .or_else(|| self.locals.get(name).copied())
    }

    fn scalar(&mut self, s: Option<S>, ctx: &str) -> Option<S> {
        match s {
            Some(S::Vec(_) | S::Fun) => {
                self.report(DiagnosticKind::SortMismatch(format!(
                    "{} used as a number in {ctx}",
                    s.map_or(String::new(), |s| s.to_string())
                )));
                None
            }
            other => other,
        }
    }

    /// Sort of `e`, or `None` when unknown. `assigned` gates definite assignment.
    fn expr(
        &mut self,
        e: &Expr,
        assigned: &BTreeSet<String>,
        bound: &mut Vec<(String, S)>,
    ) -> Option<S> {
        match e {
            Expr::Const(_) => Some(S::Real),
            Expr::Nat(_) => Some(S::Nat),
            Expr::Var(v) => self.read(v, assigned, bound),
            Expr::Neg(a) => {
                let s = self.expr(a, assigned, bound);
                let s = self.scalar(s, "negation")?;
                Some(if is_integral(s) { S::Int } else { S::Real })
            }
            Expr::Binary(BinOp::Max, a, b) if **b == Expr::Nat(0) => {
                if let Expr::Call(Builtin::Floor, inner) = &**a {
                    let s = self.expr(inner, assigned, bound);
                    self.scalar(s, "nat")?;
                    return Some(S::Nat);
                }
                let s = self.expr(a, assigned, bound);
                self.scalar(s, "max")
            }
            Expr::Binary(op, a, b) => {
                let sa = self.expr(a, assigned, bound);
                let sa = self.scalar(sa, "arithmetic");
                let sb = self.expr(b, assigned, bound);
                let sb = self.scalar(sb, "arithmetic");
                let (sa, sb) = (sa?, sb?);
                Some(match op {
                    BinOp::Div => S::Real,
                    BinOp::Min | BinOp::Max => join(sa, sb)?,
                    _ if sa == S::Nat && sb == S::Nat => S::Nat,
                    _ if is_integral(sa) && is_integral(sb) => S::Int,
                    _ => S::Real,
                })
            }
            Expr::PowNat(a, _) => {
                let s = self.expr(a, assigned, bound);
                self.scalar(s, "power")
            }
            Expr::Pow(a, k) => {
                let sa = self.expr(a, assigned, bound);
                let sa = self.scalar(sa, "power");
                let sk = self.expr(k, assigned, bound);
                let sk = self.scalar(sk, "exponent");
                Some(if sa? == S::Nat && sk? == S::Nat {
                    S::Nat
                } else {
                    S::Real
                })
            }
            Expr::Call(b, a) => {
                if *b == Builtin::Ceil {
                    if let Expr::Call(Builtin::Log2, arg) = &**a {
                        let s = self.expr(arg, assigned, bound);
                        self.scalar(s, "log2")?;
                        return Some(S::Int);
                    }
                }
                let s = self.expr(a, assigned, bound);
                let s = self.scalar(s, b.name())?;
                Some(match b {
                    Builtin::Abs | Builtin::Floor | Builtin::Ceil if s == S::Nat => S::Nat,
                    Builtin::Floor | Builtin::Ceil => S::Int,
                    Builtin::Abs if s == S::Int => S::Int,
                    _ => S::Real,
                })
            }
            Expr::Apply(name, a) => {
                let sa = self.expr(a, assigned, bound);
                match self.var_sort(name, bound) {
                    Some(S::Vec(_)) => {
                        self.read(name, assigned, bound);
                        if let Some(s) = sa {
                            if !is_integral(s) {
                                self.report(DiagnosticKind::SortMismatch(format!(
                                    "index into `{name}` has sort {s}"
                                )));
                            }
                        }
                        Some(S::Real)
                    }
                    Some(S::Fun) => {
                        self.scalar(sa, "function argument");
                        Some(S::Real)
                    }
                    Some(_) => {
                        self.report(DiagnosticKind::UnknownFunction(name.clone()));
                        None
                    }
                    None => {
                        if name.is_empty() {
                            self.report(DiagnosticKind::EmptyName);
                        } else if !self.quiet && self.locals.contains_key(name) {
                            self.report(DiagnosticKind::UnboundVariable(name.clone()));
                        } else {
                            self.report(DiagnosticKind::UnknownFunction(name.clone()));
                        }
                        None
                    }
                }
            }
            Expr::Iterate { func, count, arg } => {
                let sc = self.expr(count, assigned, bound);
                if let Some(s) = self.scalar(sc, "iteration count") {
                    if !is_integral(s) {
                        self.report(DiagnosticKind::SortMismatch(format!(
                            "iteration count has sort {s}"
                        )));
                    }
                }
                let sa = self.expr(arg, assigned, bound);
                self.scalar(sa, "iterate argument");
                if self.var_sort(func, bound) != Some(S::Fun) {
                    self.report(DiagnosticKind::UnknownFunction(func.clone()));
                }
                Some(S::Real)
            }
            Expr::Card(name) => {
                match self.read(name, assigned, bound) {
                    Some(S::Vec(_)) | None => {}
                    Some(s) => self.report(DiagnosticKind::SortMismatch(format!(
                        "card of `{name}` with sort {s}"
                    ))),
                }
                Some(S::Nat)
            }
        }
    }

    fn read(&mut self, v: &str, assigned: &BTreeSet<String>, bound: &[(String, S)]) -> Option<S> {
        if v.is_empty() {
            self.report(DiagnosticKind::EmptyName);
            return None;
        }
        if let Some((_, s)) = bound.iter().rev().find(|(n, _)| n == v) {
            return Some(*s);
        }
        if let Some(s) = self.params.get(v) {
            return Some(*s);
        }
        if !assigned.contains(v) {
            self.report(DiagnosticKind::UnboundVariable(v.to_string()));
        }
        self.locals.get(v).copied()
    }

    fn cond(&mut self, c: &Cond, assigned: &BTreeSet<String>, bound: &mut Vec<(String, S)>) {
        match c {
            Cond::Bool(_) => {}
            Cond::Cmp(op, a, b) => {
                let sa = self.expr(a, assigned, bound);
                let sb = self.expr(b, assigned, bound);
                let vec_eq = matches!((sa, sb), (Some(S::Vec(_)), Some(S::Vec(_))))
                    && matches!(op, CmpOp::Eq | CmpOp::Ne);
                if let (Some(S::Vec(n)), Some(S::Vec(m))) = (sa, sb) {
                    if n != m {
                        self.report(DiagnosticKind::SortMismatch(format!(
                            "comparison of vec[{n}] with vec[{m}]"
                        )));
                    }
                }
                if !vec_eq {
                    self.scalar(sa, "comparison");
                    self.scalar(sb, "comparison");
                }
            }
            Cond::Not(a) => self.cond(a, assigned, bound),
            Cond::And(a, b) | Cond::Or(a, b) | Cond::Implies(a, b) => {
                self.cond(a, assigned, bound);
                self.cond(b, assigned, bound);
            }
            Cond::Forall {
                var,
                bound: n,
                body,
            }
            | Cond::Exists {
                var,
                bound: n,
                body,
            } => {
                let s = self.expr(n, assigned, bound);
                if let Some(s) = self.scalar(s, "quantifier bound") {
                    if !is_integral(s) {
                        self.report(DiagnosticKind::SortMismatch(format!(
                            "quantifier bound has sort {s}"
                        )));
                    }
                }
                bound.push((var.clone(), S::Nat));
                self.cond(body, assigned, bound);
                bound.pop();
            }
            Cond::ExistsReal { var, body } => {
                bound.push((var.clone(), S::Real));
                self.cond(body, assigned, bound);
                bound.pop();
            }
        }
    }

    fn assign_sort(&mut self, name: &str, s: Option<S>) {
        let Some(s) = s else { return };
        match self.locals.get(name).copied() {
            None => {
                self.locals.insert(name.to_string(), s);
            }
            Some(old) => match join(old, s) {
                Some(j) => {
                    self.locals.insert(name.to_string(), j);
                }
                None => self.report(DiagnosticKind::SortMismatch(format!(
                    "`{name}` assigned both {old} and {s}"
                ))),
            },
        }
    }

    /// Checks `s` and returns the set of definitely assigned names after it.
    fn stmt(&mut self, s: &Stmt, mut assigned: BTreeSet<String>) -> BTreeSet<String> {
        let mut bound = Vec::new();
        match s {
            Stmt::Skip => {}
            Stmt::Assign(x, e) => {
                let se = self.expr(e, &assigned, &mut bound);
                if x.is_empty() {
                    self.report(DiagnosticKind::EmptyName);
                } else if self.params.contains_key(x.as_str()) {
                    self.report(DiagnosticKind::AssignsParam(x.clone()));
                } else {
                    if se == Some(S::Fun) {
                        self.report(DiagnosticKind::SortMismatch(format!(
                            "function assigned to `{x}`"
                        )));
                    }
                    self.assign_sort(x, se);
                }
                assigned.insert(x.clone());
            }
            Stmt::VecAssign(x, i, e) => {
                let si = self.expr(i, &assigned, &mut bound);
                if let Some(si) = self.scalar(si, "vector index") {
                    if !is_integral(si) {
                        self.report(DiagnosticKind::SortMismatch(format!(
                            "index into `{x}` has sort {si}"
                        )));
                    }
                }
                let se = self.expr(e, &assigned, &mut bound);
                self.scalar(se, "vector element");
                if self.params.contains_key(x.as_str()) {
                    self.report(DiagnosticKind::AssignsParam(x.clone()));
                } else {
                    match self.read(x, &assigned, &bound) {
                        Some(S::Vec(_)) | None => {}
                        Some(other) => self.report(DiagnosticKind::SortMismatch(format!(
                            "indexed assignment to `{x}` of sort {other}"
                        ))),
                    }
                }
            }
            Stmt::Seq(stmts) => {
                for s in stmts {
                    assigned = self.stmt(s, assigned);
                }
            }
            Stmt::If(c, t, e) => {
                self.cond(c, &assigned, &mut bound);
                let at = self.stmt(t, assigned.clone());
                let ae = self.stmt(e, assigned);
                assigned = at.intersection(&ae).cloned().collect();
            }
            Stmt::While(lp) => {
                self.cond(&lp.guard, &assigned, &mut bound);
                self.cond(&lp.invariant, &assigned, &mut bound);
                let sv = self.expr(&lp.variant, &assigned, &mut bound);
                if let Some(sv) = sv {
                    if !is_integral(sv) {
                        self.report(DiagnosticKind::VariantSort {
                            loop_id: lp.id,
                            found: sv.to_string(),
                        });
                    }
                }
                self.stmt(&lp.body, assigned.clone());
            }
        }
        assigned
    }
}

fn param_sort(s: Sort) -> S {
    match s {
        Sort::Real => S::Real,
        Sort::Nat => S::Nat,
        Sort::Vec(n) => S::Vec(n),
        Sort::Fun => S::Fun,
    }
}

/// Diagnostics for `p`; empty exactly when the program is well formed.
pub fn well_formed(p: &Program) -> Vec<Diagnostic> {
    let mut ck = Checker {
        params: BTreeMap::new(),
        locals: BTreeMap::new(),
        diags: Vec::new(),
        quiet: true,
    };
    let mut dups = Vec::new();
    for prm in &p.params {
        if ck.params.insert(&prm.name, param_sort(prm.sort)).is_some() {
            dups.push(prm.name.clone());
        }
    }
    let everything: BTreeSet<String> = p.locals().into_iter().collect();
    // Local sorts are a fixpoint: `i := i + 1` needs the sort of `i`.
    for _ in 0..=everything.len() + 1 {
        let before = ck.locals.clone();
        ck.stmt(&p.body, everything.clone());
        if ck.locals == before {
            break;
        }
    }
    ck.quiet = false;
    for d in dups {
        ck.report(DiagnosticKind::DuplicateParam(d));
    }
    if p.params.iter().any(|prm| prm.name.is_empty()) {
        ck.report(DiagnosticKind::EmptyName);
    }
    ck.stmt(&p.body, BTreeSet::new());
    ck.diags
}
