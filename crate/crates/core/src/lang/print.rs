//! Concrete syntax output. Printing then parsing yields the parsed tree back.

use std::fmt::{self, Write};

use super::{BinOp, Builtin, Cond, Expr, Program, Stmt};

const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn nat_pattern(e: &Expr) -> Option<&Expr> {
    match e {
        Expr::Binary(BinOp::Max, a, b) if **b == Expr::Nat(0) => match &**a {
            Expr::Call(Builtin::Floor, inner) => Some(inner),
            _ => None,
        },
        _ => None,
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => ADD,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => MUL,
        Expr::Neg(_) => NEG,
        Expr::Const(x) if x.is_sign_negative() => NEG,
        Expr::PowNat(..) | Expr::Pow(..) => POW,
        _ => ATOM,
    }
}

fn write_expr(out: &mut impl Write, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        out.write_char('(')?;
        write_expr(out, e, 0)?;
        return out.write_char(')');
    }
    if let Some(inner) = nat_pattern(e) {
        out.write_str("nat(")?;
        write_expr(out, inner, 0)?;
        return out.write_char(')');
    }
    match e {
        Expr::Const(x) => write!(out, "{x:?}"),
        Expr::Nat(n) => write!(out, "{n}"),
        Expr::Var(v) => out.write_str(v),
        Expr::Neg(a) => {
            out.write_char('-')?;
            write_expr(out, a, POW)
        }
        Expr::Binary(op, a, b) => match op {
            BinOp::Min | BinOp::Max => {
                out.write_str(if *op == BinOp::Min { "min(" } else { "max(" })?;
                write_expr(out, a, 0)?;
                out.write_str(", ")?;
                write_expr(out, b, 0)?;
                out.write_char(')')
            }
            _ => {
                let (sym, lp, rp) = match op {
                    BinOp::Add => (" + ", ADD, MUL),
                    BinOp::Sub => (" - ", ADD, MUL),
                    BinOp::Mul => (" * ", MUL, NEG),
                    _ => (" / ", MUL, NEG),
                };
                write_expr(out, a, lp)?;
                out.write_str(sym)?;
                write_expr(out, b, rp)
            }
        },
        Expr::PowNat(a, k) => {
            write_expr(out, a, ATOM)?;
            write!(out, "^{k}")
        }
        Expr::Pow(a, k) => {
            write_expr(out, a, ATOM)?;
            out.write_char('^')?;
            write_expr(out, k, ATOM)
        }
        Expr::Call(b, a) => {
            write!(out, "{}(", b.name())?;
            write_expr(out, a, 0)?;
            out.write_char(')')
        }
        Expr::Apply(f, a) => {
            write!(out, "{f}(")?;
            write_expr(out, a, 0)?;
            out.write_char(')')
        }
        Expr::Iterate { func, count, arg } => {
            write!(out, "({func} ^^ ")?;
            write_expr(out, count, 0)?;
            out.write_str(") (")?;
            write_expr(out, arg, 0)?;
            out.write_char(')')
        }
        Expr::Card(v) => write!(out, "card({v})"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const NOT: u8 = 4;
const CATOM: u8 = 5;

fn cprec(c: &Cond) -> u8 {
    match c {
        Cond::Implies(..) => IMPLIES,
        Cond::Or(..) => OR,
        Cond::And(..) => AND,
        Cond::Not(_) => NOT,
        _ => CATOM,
    }
}

fn write_cond(out: &mut impl Write, c: &Cond, min: u8) -> fmt::Result {
    if cprec(c) < min {
        out.write_char('(')?;
        write_cond(out, c, 0)?;
        return out.write_char(')');
    }
    match c {
        Cond::Bool(b) => write!(out, "{b}"),
        Cond::Cmp(op, a, b) => {
            write_expr(out, a, 0)?;
            write!(out, " {} ", op.symbol())?;
            write_expr(out, b, 0)
        }
        Cond::Not(a) => {
            out.write_char('¬')?;
            write_cond(out, a, NOT)
        }
        Cond::And(a, b) => {
            write_cond(out, a, AND)?;
            out.write_str(" ∧ ")?;
            write_cond(out, b, NOT)
        }
        Cond::Or(a, b) => {
            write_cond(out, a, OR)?;
            out.write_str(" ∨ ")?;
            write_cond(out, b, AND)
        }
        Cond::Implies(a, b) => {
            write_cond(out, a, OR)?;
            out.write_str(" ⟶ ")?;
            write_cond(out, b, IMPLIES)
        }
        // Quantifier bodies extend as far as possible, so the binder is always enclosed.
        Cond::Forall { var, bound, body } | Cond::Exists { var, bound, body } => {
            let q = if matches!(c, Cond::Forall { .. }) {
                '∀'
            } else {
                '∃'
            };
            write!(out, "({q}{var} < ")?;
            write_expr(out, bound, 0)?;
            out.write_str(". ")?;
            write_cond(out, body, 0)?;
            out.write_char(')')
        }
        Cond::ExistsReal { var, body } => {
            write!(out, "(∃{var}. ")?;
            write_cond(out, body, 0)?;
            out.write_char(')')
        }
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_cond(f, self, 0)
    }
}

fn pad(out: &mut impl Write, n: usize) -> fmt::Result {
    for _ in 0..n {
        out.write_char(' ')?;
    }
    Ok(())
}

fn write_seq(out: &mut impl Write, stmts: &[Stmt], indent: usize) -> fmt::Result {
    if stmts.is_empty() {
        return out.write_str("skip");
    }
    for (i, s) in stmts.iter().enumerate() {
        if i > 0 {
            out.write_str(";\n")?;
            pad(out, indent)?;
        }
        write_stmt(out, s, indent)?;
    }
    Ok(())
}

fn write_body(out: &mut impl Write, s: &Stmt, indent: usize) -> fmt::Result {
    match s {
        Stmt::Seq(stmts) => write_seq(out, stmts, indent),
        other => write_stmt(out, other, indent),
    }
}

fn write_stmt(out: &mut impl Write, s: &Stmt, indent: usize) -> fmt::Result {
    match s {
        Stmt::Skip => out.write_str("skip"),
        Stmt::Assign(x, e) => write!(out, "{x} := {e}"),
        Stmt::VecAssign(x, i, e) => write!(out, "{x}[{i}] := {e}"),
        Stmt::Seq(stmts) => write_seq(out, stmts, indent),
        Stmt::If(c, t, e) => {
            writeln!(out, "if {c}")?;
            pad(out, indent)?;
            out.write_str("then ")?;
            write_body(out, t, indent + 5)?;
            if **e != Stmt::Skip {
                out.write_char('\n')?;
                pad(out, indent)?;
                out.write_str("else ")?;
                write_body(out, e, indent + 5)?;
            }
            out.write_char('\n')?;
            pad(out, indent)?;
            out.write_str("fi")
        }
        Stmt::While(lp) => {
            writeln!(out, "while {}", lp.guard)?;
            pad(out, indent)?;
            writeln!(out, "invariant {}", lp.invariant)?;
            pad(out, indent)?;
            writeln!(out, "variant {}", lp.variant)?;
            pad(out, indent)?;
            out.write_str("do\n")?;
            pad(out, indent + 2)?;
            write_body(out, &lp.body, indent + 2)?;
            out.write_char('\n')?;
            pad(out, indent)?;
            out.write_str("od")
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_stmt(f, self, 0)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "program {} (", self.name)?;
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}::{}", p.name, p.sort)?;
        }
        f.write_str(") =\n  \"")?;
        write_body(f, &self.body, 3)?;
        f.write_str("\"\n")
    }
}
