//! Expression trees, conditions and the guarded-command program AST.
//!
//! Programs are written in a small line-oriented notation:
//!
//! ```text
//! program vec_scale (n::real, X::vec[4]) =
//!   "vc := X;
//!    i := 0;
//!    while i < card(X)
//!    invariant i ≤ card(X) ∧ (∀k < i. vc(k) = n * X(k))
//!    variant card(X) - i
//!    do vc[i] := n * X(i); i := i + 1 od"
//! ```
//!
//! Every `while` carries an invariant and a variant. Conditions are classical
//! two-valued predicates; real equality is exact binary64 equality.

mod check;
mod eval;
mod lexer;
mod parser;
mod print;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use check::{well_formed, Diagnostic, DiagnosticKind};
pub use eval::{ceil_log2_ratio, eval_cond, eval_cond_ulps, eval_expr, ulp, EvalError};
pub use lexer::{Pos, Tok, Token};
pub use parser::{
    parse_arg_list, parse_cond, parse_expr, parse_function, parse_program, ParseError, Parser,
};

/// Variable valuation.
pub type Env = BTreeMap<String, Value>;
/// Function parameters bound by name.
pub type Funcs = BTreeMap<String, FuncDef>;

/// A runtime value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Nat(u64),
    Real(f64),
    /// Fixed-length real vector; the length never changes after creation.
    Vec(Vec<f64>),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Real(x) => Some(x),
            Value::Nat(n) => Some(n as f64),
            Value::Vec(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Real(x) => write!(f, "{x:?}"),
            Value::Vec(v) => {
                write!(f, "[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x:?}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// Built-in single-argument functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Abs,
    Floor,
    Ceil,
    Log2,
    Exp,
    Ln,
    Sin,
    Cos,
    /// Unit in the last place of the binary64 argument.
    Ulp,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Abs => "abs",
            Builtin::Floor => "floor",
            Builtin::Ceil => "ceil",
            Builtin::Log2 => "log2",
            Builtin::Exp => "exp",
            Builtin::Ln => "ln",
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
            Builtin::Ulp => "ulp",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Some(match name {
            "abs" => Builtin::Abs,
            "floor" => Builtin::Floor,
            "ceil" => Builtin::Ceil,
            "log2" => Builtin::Log2,
            "exp" => Builtin::Exp,
            "ln" => Builtin::Ln,
            "sin" => Builtin::Sin,
            "cos" => Builtin::Cos,
            "ulp" => Builtin::Ulp,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
}

/// Real-valued expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Nat(u64),
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Power with a literal natural exponent.
    PowNat(Box<Expr>, u32),
    /// Power with a computed integer exponent, as in `2^iter`.
    Pow(Box<Expr>, Box<Expr>),
    Call(Builtin, Box<Expr>),
    /// Application of a function parameter, or indexing of a vector variable.
    Apply(String, Box<Expr>),
    /// `(f ^^ n) x`: the n-fold iterate of a function parameter.
    Iterate {
        func: String,
        count: Box<Expr>,
        arg: Box<Expr>,
    },
    /// Length of a vector variable.
    Card(String),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn real(x: f64) -> Expr {
        Expr::Const(x)
    }

    pub fn nat(n: u64) -> Expr {
        Expr::Nat(n)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(b: Builtin, arg: Expr) -> Expr {
        Expr::Call(b, Box::new(arg))
    }

    pub fn apply(name: &str, arg: Expr) -> Expr {
        Expr::Apply(name.to_string(), Box::new(arg))
    }

    pub fn powi(self, k: u32) -> Expr {
        Expr::PowNat(Box::new(self), k)
    }

    pub fn min(self, other: Expr) -> Expr {
        Expr::binary(BinOp::Min, self, other)
    }

    pub fn max(self, other: Expr) -> Expr {
        Expr::binary(BinOp::Max, self, other)
    }

    /// `nat(e)`: floor clamped at zero.
    pub fn nat_of(self) -> Expr {
        Expr::call(Builtin::Floor, self).max(Expr::Nat(0))
    }

    /// True when `name` occurs free in the expression.
    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Expr::Const(_) | Expr::Nat(_) => false,
            Expr::Var(v) | Expr::Card(v) => v == name,
            Expr::Neg(a) | Expr::PowNat(a, _) | Expr::Call(_, a) => a.mentions(name),
            Expr::Binary(_, a, b) | Expr::Pow(a, b) => a.mentions(name) || b.mentions(name),
            Expr::Apply(f, a) => f == name || a.mentions(name),
            Expr::Iterate { func, count, arg } => {
                func == name || count.mentions(name) || arg.mentions(name)
            }
        }
    }
}

macro_rules! expr_binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
    };
}

expr_binop!(Add, add, BinOp::Add);
expr_binop!(Sub, sub, BinOp::Sub);
expr_binop!(Mul, mul, BinOp::Mul);
expr_binop!(Div, div, BinOp::Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "≤",
            CmpOp::Gt => ">",
            CmpOp::Ge => "≥",
            CmpOp::Eq => "=",
            CmpOp::Ne => "≠",
        }
    }
}

/// Boolean condition over expressions.
#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    Bool(bool),
    Cmp(CmpOp, Expr, Expr),
    Not(Box<Cond>),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
    Implies(Box<Cond>, Box<Cond>),
    /// `∀k < bound. body`, with `k` ranging over `0..bound`.
    Forall {
        var: String,
        bound: Expr,
        body: Box<Cond>,
    },
    /// `∃k < bound. body`, with `k` ranging over `0..bound`.
    Exists {
        var: String,
        bound: Expr,
        body: Box<Cond>,
    },
    /// `∃c. body` over the reals. Only checkable through a registered witness.
    ExistsReal {
        var: String,
        body: Box<Cond>,
    },
}

impl Cond {
    pub fn cmp(op: CmpOp, lhs: Expr, rhs: Expr) -> Cond {
        Cond::Cmp(op, lhs, rhs)
    }

    pub fn and(self, other: Cond) -> Cond {
        Cond::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Cond) -> Cond {
        Cond::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Cond) -> Cond {
        Cond::Implies(Box::new(self), Box::new(other))
    }

    pub fn negate(self) -> Cond {
        Cond::Not(Box::new(self))
    }

    /// Top-level conjuncts, left to right.
    pub fn conjuncts(&self) -> Vec<&Cond> {
        let mut out = Vec::new();
        fn walk<'a>(c: &'a Cond, out: &mut Vec<&'a Cond>) {
            match c {
                Cond::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Variables bound by real existentials anywhere in the condition.
    pub fn real_existentials(&self) -> Vec<&str> {
        let mut out = Vec::new();
        fn walk<'a>(c: &'a Cond, out: &mut Vec<&'a str>) {
            match c {
                Cond::Bool(_) | Cond::Cmp(..) => {}
                Cond::Not(a) => walk(a, out),
                Cond::And(a, b) | Cond::Or(a, b) | Cond::Implies(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Cond::Forall { body, .. } | Cond::Exists { body, .. } => walk(body, out),
                Cond::ExistsReal { var, body } => {
                    out.push(var);
                    walk(body, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }
}

/// Parameter sort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sort {
    Real,
    Nat,
    Vec(usize),
    Fun,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Real => write!(f, "real"),
            Sort::Nat => write!(f, "nat"),
            Sort::Vec(n) => write!(f, "vec[{n}]"),
            Sort::Fun => write!(f, "fun"),
        }
    }
}

/// A single-argument function given as an expression in its formal parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct FuncDef {
    pub param: String,
    pub body: Expr,
}

impl FuncDef {
    pub fn new(param: &str, body: Expr) -> FuncDef {
        FuncDef {
            param: param.to_string(),
            body,
        }
    }

    /// Parses `x^2 - 2` (formal parameter `x`) or `λy. y^2 - 2`.
    pub fn parse(src: &str) -> Result<FuncDef, ParseError> {
        parse_function(src)
    }
}

impl fmt::Display for FuncDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "λ{}. {}", self.param, self.body)
    }
}

/// An actual argument: a value, or a function for a `fun` parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Value(Value),
    Func(FuncDef),
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Value(v) => write!(f, "{v}"),
            Arg::Func(d) => write!(f, "{d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub sort: Sort,
}

/// Annotated loop. `id` numbers loops in textual order.
#[derive(Debug, Clone, PartialEq)]
pub struct Loop {
    pub id: usize,
    pub guard: Cond,
    pub invariant: Cond,
    pub variant: Expr,
    pub body: Box<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Skip,
    Assign(String, Expr),
    VecAssign(String, Expr, Expr),
    Seq(Vec<Stmt>),
    If(Cond, Box<Stmt>, Box<Stmt>),
    While(Loop),
}

impl Stmt {
    pub fn assign(name: &str, e: Expr) -> Stmt {
        Stmt::Assign(name.to_string(), e)
    }

    pub fn while_loop(guard: Cond, invariant: Cond, variant: Expr, body: Stmt) -> Stmt {
        Stmt::While(Loop {
            id: 0,
            guard,
            invariant,
            variant,
            body: Box::new(body),
        })
    }

    fn number_loops(&mut self, next: &mut usize) {
        match self {
            Stmt::Seq(stmts) => stmts.iter_mut().for_each(|s| s.number_loops(next)),
            Stmt::If(_, t, e) => {
                t.number_loops(next);
                e.number_loops(next);
            }
            Stmt::While(lp) => {
                lp.id = *next;
                *next += 1;
                lp.body.number_loops(next);
            }
            Stmt::Skip | Stmt::Assign(..) | Stmt::VecAssign(..) => {}
        }
    }

    /// Every loop in the statement, in textual order.
    pub fn loops(&self) -> Vec<&Loop> {
        let mut out = Vec::new();
        fn walk<'a>(s: &'a Stmt, out: &mut Vec<&'a Loop>) {
            match s {
                Stmt::Seq(stmts) => stmts.iter().for_each(|s| walk(s, out)),
                Stmt::If(_, t, e) => {
                    walk(t, out);
                    walk(e, out);
                }
                Stmt::While(lp) => {
                    out.push(lp);
                    walk(&lp.body, out);
                }
                Stmt::Skip | Stmt::Assign(..) | Stmt::VecAssign(..) => {}
            }
        }
        walk(self, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Stmt,
}

impl Program {
    /// Builds a program and numbers its loops in textual order.
    pub fn new(name: &str, params: Vec<Param>, mut body: Stmt) -> Program {
        let mut next = 0;
        body.number_loops(&mut next);
        Program {
            name: name.to_string(),
            params,
            body,
        }
    }

    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Assignment targets in first-assignment order.
    pub fn locals(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        fn walk(s: &Stmt, out: &mut Vec<String>) {
            match s {
                Stmt::Assign(x, _) | Stmt::VecAssign(x, _, _) => {
                    if !out.contains(x) {
                        out.push(x.clone());
                    }
                }
                Stmt::Seq(stmts) => stmts.iter().for_each(|s| walk(s, out)),
                Stmt::If(_, t, e) => {
                    walk(t, out);
                    walk(e, out);
                }
                Stmt::While(lp) => walk(&lp.body, out),
                Stmt::Skip => {}
            }
        }
        walk(&self.body, &mut out);
        out
    }

    pub fn loop_by_id(&self, id: usize) -> Option<&Loop> {
        self.body.loops().into_iter().find(|lp| lp.id == id)
    }
}
