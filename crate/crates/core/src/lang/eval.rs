//! Expression and condition semantics over binary64 reals and exact naturals.
//!
//! Natural arithmetic is exact: `+` and `*` trap on overflow, `-` truncates at
//! zero, and `/` produces a real. Any real operand makes the operation real.
//! `⌈log2(p / q)⌉` is evaluated exactly on the binary64 values of `p` and `q`
//! rather than through a rounded logarithm.

use std::collections::BTreeMap;

use super::{BinOp, Builtin, CmpOp, Cond, Env, Expr, Funcs, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{func} of non-positive argument {arg:?}")]
    Domain { func: &'static str, arg: f64 },
    #[error("index {index} out of range for `{name}` of length {len}")]
    IndexOutOfRange {
        name: String,
        index: u64,
        len: usize,
    },
    #[error("{what} must be a natural number, got {value}")]
    NotNatural { what: &'static str, value: String },
    #[error("natural-number overflow")]
    NatOverflow,
    #[error("sort mismatch: {0}")]
    Sort(String),
    #[error("{what} {value} exceeds the evaluation limit")]
    TooLarge { what: &'static str, value: u64 },
    #[error("function application nested too deeply")]
    RecursionLimit,
    #[error("real existential over `{0}` needs a registered witness")]
    Existential(String),
}

/// Upper bound on quantifier ranges and iterate counts.
const MAX_EXPANSION: u64 = 10_000_000;
const MAX_DEPTH: usize = 64;

static EMPTY: Env = BTreeMap::new();

struct Ctx<'a> {
    env: &'a Env,
    funcs: &'a Funcs,
    locals: Vec<(String, Value)>,
    depth: usize,
    /// Real equalities hold within this many ulps of the larger side.
    eq_ulps: u32,
}

impl<'a> Ctx<'a> {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.locals
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
            .or_else(|| self.env.get(name))
    }
}

/// Spacing between `|x|` and the next larger binary64 value.
pub fn ulp(x: f64) -> f64 {
    let a = x.abs();
    if a.is_nan() {
        return f64::NAN;
    }
    if a == f64::INFINITY {
        return f64::INFINITY;
    }
    if a == f64::MAX {
        return a - f64::from_bits(a.to_bits() - 1);
    }
    f64::from_bits(a.to_bits() + 1) - a
}

fn decompose(x: f64) -> (u64, i64) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    }
}

/// Least integer `k` with `num ≤ den · 2^k`, computed exactly.
///
/// Both arguments must be positive and finite.
pub fn ceil_log2_ratio(num: f64, den: f64) -> Result<i64, EvalError> {
    if !(num > 0.0 && num.is_finite()) {
        return Err(EvalError::Domain {
            func: "log2",
            arg: num / den,
        });
    }
    if den == 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    if !(den > 0.0 && den.is_finite()) {
        return Err(EvalError::Domain {
            func: "log2",
            arg: num / den,
        });
    }
    let (m1, e1) = decompose(num);
    let (m2, e2) = decompose(den);
    let bitlen = |m: u64| 64 - i64::from(m.leading_zeros());
    // m2·2^(j0-1) < m1 < m2·2^(j0+1), so the answer is j0 or j0 + 1.
    let j0 = bitlen(m1) - bitlen(m2);
    let le = |j: i64| {
        if j >= 0 {
            u128::from(m1) <= u128::from(m2) << j
        } else {
            u128::from(m1) << (-j) <= u128::from(m2)
        }
    };
    let j = if le(j0) { j0 } else { j0 + 1 };
    Ok(j - e2 + e1)
}

fn real(v: &Value, ctx: &str) -> Result<f64, EvalError> {
    v.as_f64()
        .ok_or_else(|| EvalError::Sort(format!("vector used as a number in {ctx}")))
}

fn natural(v: &Value, what: &'static str) -> Result<u64, EvalError> {
    match *v {
        Value::Nat(n) => Ok(n),
        Value::Real(x) if x >= 0.0 && x.fract() == 0.0 && x < 18_446_744_073_709_551_616.0 => {
            Ok(x as u64)
        }
        _ => Err(EvalError::NotNatural {
            what,
            value: v.to_string(),
        }),
    }
}

fn binary(op: BinOp, a: Value, b: Value) -> Result<Value, EvalError> {
    if let (Value::Nat(x), Value::Nat(y)) = (&a, &b) {
        let (x, y) = (*x, *y);
        return match op {
            BinOp::Add => x
                .checked_add(y)
                .map(Value::Nat)
                .ok_or(EvalError::NatOverflow),
            BinOp::Sub => Ok(Value::Nat(x.saturating_sub(y))),
            BinOp::Mul => x
                .checked_mul(y)
                .map(Value::Nat)
                .ok_or(EvalError::NatOverflow),
            BinOp::Div if y == 0 => Err(EvalError::DivisionByZero),
            BinOp::Div => Ok(Value::Real(x as f64 / y as f64)),
            BinOp::Min => Ok(Value::Nat(x.min(y))),
            BinOp::Max => Ok(Value::Nat(x.max(y))),
        };
    }
    let x = real(&a, "arithmetic")?;
    let y = real(&b, "arithmetic")?;
    Ok(Value::Real(match op {
        BinOp::Add => x + y,
        BinOp::Sub => x - y,
        BinOp::Mul => x * y,
        BinOp::Div if y == 0.0 => return Err(EvalError::DivisionByZero),
        BinOp::Div => x / y,
        BinOp::Min => {
            if x <= y {
                x
            } else {
                y
            }
        }
        BinOp::Max => {
            if x >= y {
                x
            } else {
                y
            }
        }
    }))
}

fn pow_int(base: Value, k: i64) -> Result<Value, EvalError> {
    if let Value::Nat(b) = base {
        if k >= 0 {
            let k = u32::try_from(k).map_err(|_| EvalError::NatOverflow)?;
            return b
                .checked_pow(k)
                .map(Value::Nat)
                .ok_or(EvalError::NatOverflow);
        }
    }
    let b = real(&base, "power")?;
    if b == 0.0 && k < 0 {
        return Err(EvalError::DivisionByZero);
    }
    let k = i32::try_from(k).map_err(|_| EvalError::TooLarge {
        what: "exponent",
        value: k.unsigned_abs(),
    })?;
    Ok(Value::Real(b.powi(k)))
}

fn eval(e: &Expr, ctx: &mut Ctx<'_>) -> Result<Value, EvalError> {
    match e {
        Expr::Const(x) => Ok(Value::Real(*x)),
        Expr::Nat(n) => Ok(Value::Nat(*n)),
        Expr::Var(v) => ctx
            .lookup(v)
            .cloned()
            .ok_or_else(|| EvalError::Unbound(v.clone())),
        Expr::Neg(a) => {
            let x = real(&eval(a, ctx)?, "negation")?;
            Ok(Value::Real(-x))
        }
        Expr::Binary(BinOp::Max, a, b) if **b == Expr::Nat(0) => {
            if let Expr::Call(Builtin::Floor, inner) = &**a {
                // nat(e)
                let x = real(&eval(inner, ctx)?, "nat")?.floor();
                if x <= 0.0 {
                    return Ok(Value::Nat(0));
                }
                return natural(&Value::Real(x), "nat(·)").map(Value::Nat);
            }
            let x = eval(a, ctx)?;
            binary(BinOp::Max, x, Value::Nat(0))
        }
        Expr::Binary(op, a, b) => {
            let x = eval(a, ctx)?;
            let y = eval(b, ctx)?;
            binary(*op, x, y)
        }
        Expr::PowNat(a, k) => pow_int(eval(a, ctx)?, i64::from(*k)),
        Expr::Pow(a, k) => {
            let base = eval(a, ctx)?;
            let kv = eval(k, ctx)?;
            match kv {
                Value::Nat(n) => {
                    pow_int(base, i64::try_from(n).map_err(|_| EvalError::NatOverflow)?)
                }
                Value::Real(y) if y.fract() == 0.0 && y.abs() < 2f64.powi(62) => {
                    pow_int(base, y as i64)
                }
                Value::Real(y) => {
                    let b = real(&base, "power")?;
                    if b <= 0.0 {
                        return Err(EvalError::Domain {
                            func: "real power",
                            arg: b,
                        });
                    }
                    Ok(Value::Real(b.powf(y)))
                }
                Value::Vec(_) => Err(EvalError::Sort("vector exponent".into())),
            }
        }
        Expr::Call(Builtin::Ceil, inner) if matches!(**inner, Expr::Call(Builtin::Log2, _)) => {
            let Expr::Call(_, arg) = &**inner else {
                unreachable!()
            };
            let k = match &**arg {
                Expr::Binary(BinOp::Div, p, q) => {
                    let p = real(&eval(p, ctx)?, "log2")?;
                    let q = real(&eval(q, ctx)?, "log2")?;
                    ceil_log2_ratio(p, q)?
                }
                other => ceil_log2_ratio(real(&eval(other, ctx)?, "log2")?, 1.0)?,
            };
            Ok(Value::Real(k as f64))
        }
        Expr::Call(b, a) => {
            let v = eval(a, ctx)?;
            if let Value::Nat(n) = v {
                if matches!(b, Builtin::Abs | Builtin::Floor | Builtin::Ceil) {
                    return Ok(Value::Nat(n));
                }
            }
            let x = real(&v, b.name())?;
            Ok(Value::Real(match b {
                Builtin::Abs => x.abs(),
                Builtin::Floor => x.floor(),
                Builtin::Ceil => x.ceil(),
                Builtin::Log2 | Builtin::Ln if x <= 0.0 => {
                    return Err(EvalError::Domain {
                        func: b.name(),
                        arg: x,
                    })
                }
                Builtin::Log2 => x.log2(),
                Builtin::Ln => x.ln(),
                Builtin::Exp => x.exp(),
                Builtin::Sin => x.sin(),
                Builtin::Cos => x.cos(),
                Builtin::Ulp => ulp(x),
            }))
        }
        Expr::Apply(name, a) => {
            let arg = eval(a, ctx)?;
            if let Some(v) = ctx.lookup(name) {
                let Value::Vec(xs) = v else {
                    return Err(EvalError::Sort(format!(
                        "`{name}` is not a vector or function"
                    )));
                };
                let i = natural(&arg, "vector index")?;
                return usize::try_from(i)
                    .ok()
                    .and_then(|i| xs.get(i))
                    .map(|x| Value::Real(*x))
                    .ok_or_else(|| EvalError::IndexOutOfRange {
                        name: name.clone(),
                        index: i,
                        len: xs.len(),
                    });
            }
            call(name, arg, ctx)
        }
        Expr::Iterate { func, count, arg } => {
            let n = natural(&eval(count, ctx)?, "iteration count")?;
            if n > MAX_EXPANSION {
                return Err(EvalError::TooLarge {
                    what: "iteration count",
                    value: n,
                });
            }
            let mut x = eval(arg, ctx)?;
            for _ in 0..n {
                x = call(func, x, ctx)?;
            }
            Ok(x)
        }
        Expr::Card(name) => match ctx.lookup(name) {
            Some(Value::Vec(xs)) => Ok(Value::Nat(xs.len() as u64)),
            Some(_) => Err(EvalError::Sort(format!("card of non-vector `{name}`"))),
            None => Err(EvalError::Unbound(name.clone())),
        },
    }
}

fn call(name: &str, arg: Value, ctx: &mut Ctx<'_>) -> Result<Value, EvalError> {
    let def = ctx
        .funcs
        .get(name)
        .ok_or_else(|| EvalError::UnknownFunction(name.to_string()))?;
    if ctx.depth >= MAX_DEPTH {
        return Err(EvalError::RecursionLimit);
    }
    let mut inner = Ctx {
        env: &EMPTY,
        funcs: ctx.funcs,
        locals: vec![(def.param.clone(), arg)],
        depth: ctx.depth + 1,
        eq_ulps: ctx.eq_ulps,
    };
    eval(&def.body, &mut inner)
}

fn compare(op: CmpOp, a: &Value, b: &Value, eq_ulps: u32) -> Result<bool, EvalError> {
    use std::cmp::Ordering;
    let ord = match (a, b) {
        (Value::Nat(x), Value::Nat(y)) => Some(x.cmp(y)),
        (Value::Vec(x), Value::Vec(y)) => {
            let eq = x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p == q);
            return match op {
                CmpOp::Eq => Ok(eq),
                CmpOp::Ne => Ok(!eq),
                _ => Err(EvalError::Sort("ordering comparison of vectors".into())),
            };
        }
        _ => {
            let x = real(a, "comparison")?;
            let y = real(b, "comparison")?;
            if eq_ulps > 0 && matches!(op, CmpOp::Eq | CmpOp::Ne) {
                let near = (x - y).abs() <= f64::from(eq_ulps) * ulp(x.abs().max(y.abs()));
                return Ok(near == (op == CmpOp::Eq));
            }
            x.partial_cmp(&y)
        }
    };
    Ok(match ord {
        None => op == CmpOp::Ne,
        Some(o) => match op {
            CmpOp::Lt => o == Ordering::Less,
            CmpOp::Le => o != Ordering::Greater,
            CmpOp::Gt => o == Ordering::Greater,
            CmpOp::Ge => o != Ordering::Less,
            CmpOp::Eq => o == Ordering::Equal,
            CmpOp::Ne => o != Ordering::Equal,
        },
    })
}

fn holds(c: &Cond, ctx: &mut Ctx<'_>) -> Result<bool, EvalError> {
    match c {
        Cond::Bool(b) => Ok(*b),
        Cond::Cmp(op, a, b) => {
            let x = eval(a, ctx)?;
            let y = eval(b, ctx)?;
            compare(*op, &x, &y, ctx.eq_ulps)
        }
        Cond::Not(a) => Ok(!holds(a, ctx)?),
        Cond::And(a, b) => Ok(holds(a, ctx)? && holds(b, ctx)?),
        Cond::Or(a, b) => Ok(holds(a, ctx)? || holds(b, ctx)?),
        Cond::Implies(a, b) => Ok(!holds(a, ctx)? || holds(b, ctx)?),
        Cond::Forall { var, bound, body } | Cond::Exists { var, bound, body } => {
            let n = natural(&eval(bound, ctx)?, "quantifier bound")?;
            if n > MAX_EXPANSION {
                return Err(EvalError::TooLarge {
                    what: "quantifier bound",
                    value: n,
                });
            }
            let universal = matches!(c, Cond::Forall { .. });
            for k in 0..n {
                ctx.locals.push((var.clone(), Value::Nat(k)));
                let r = holds(body, ctx);
                ctx.locals.pop();
                if r? != universal {
                    return Ok(!universal);
                }
            }
            Ok(universal)
        }
        Cond::ExistsReal { var, .. } => Err(EvalError::Existential(var.clone())),
    }
}

pub fn eval_expr(e: &Expr, env: &Env, funcs: &Funcs) -> Result<Value, EvalError> {
    eval(
        e,
        &mut Ctx {
            env,
            funcs,
            locals: Vec::new(),
            depth: 0,
            eq_ulps: 0,
        },
    )
}

/// Two-valued evaluation. Conditions are evaluated left to right with
/// short-circuiting, so an error in a skipped operand is not reported.
pub fn eval_cond(c: &Cond, env: &Env, funcs: &Funcs) -> Result<bool, EvalError> {
    eval_cond_ulps(c, env, funcs, 0)
}

/// As [`eval_cond`], but an equality between reals holds when the sides are
/// within `eq_ulps` ulps of the larger magnitude. Natural equalities stay exact.
pub fn eval_cond_ulps(c: &Cond, env: &Env, funcs: &Funcs, eq_ulps: u32) -> Result<bool, EvalError> {
    holds(
        c,
        &mut Ctx {
            env,
            funcs,
            locals: Vec::new(),
            depth: 0,
            eq_ulps,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_cond, parse_expr, FuncDef};
    use proptest::prelude::*;

    fn env(pairs: &[(&str, Value)]) -> Env {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect()
    }

    fn ev(src: &str, pairs: &[(&str, Value)]) -> Result<Value, EvalError> {
        eval_expr(&parse_expr(src).unwrap(), &env(pairs), &Funcs::new())
    }

    fn cond(src: &str, pairs: &[(&str, Value)]) -> bool {
        eval_cond(&parse_cond(src).unwrap(), &env(pairs), &Funcs::new()).unwrap()
    }

    #[test]
    fn equality_within_ulps() {
        let c = parse_cond("x = 1 ∧ n = 3").unwrap();
        let near = env(&[
            ("x", Value::Real(1.0 + 3.0 * f64::EPSILON)),
            ("n", Value::Nat(3)),
        ]);
        assert!(!eval_cond(&c, &near, &Funcs::new()).unwrap());
        assert!(!eval_cond_ulps(&c, &near, &Funcs::new(), 2).unwrap());
        assert!(eval_cond_ulps(&c, &near, &Funcs::new(), 4).unwrap());
        let off = env(&[("x", Value::Real(1.0)), ("n", Value::Nat(4))]);
        assert!(!eval_cond_ulps(&c, &off, &Funcs::new(), 4).unwrap());
        let ne = parse_cond("x ≠ 1").unwrap();
        assert!(!eval_cond_ulps(&ne, &near, &Funcs::new(), 4).unwrap());
    }

    #[test]
    fn direct_arithmetic() {
        assert_eq!(
            ev("x^2 - 2", &[("x", Value::Real(1.5))]),
            Ok(Value::Real(0.25))
        );
        let a = Value::Real(0.3);
        assert_eq!(
            ev("|x - a|", &[("x", a.clone()), ("a", a)]),
            Ok(Value::Real(0.0))
        );
    }

    #[test]
    fn thirteen_halvings() {
        assert_eq!(
            ev("⌈log 2 ((1.5 - 1) / 0.0001)⌉", &[]),
            Ok(Value::Real(13.0))
        );
        assert_eq!(
            ev("nat(⌈log 2 ((1.5 - 1) / 0.0001)⌉) - 13", &[]),
            Ok(Value::Nat(0))
        );
    }

    #[test]
    fn ceil_log2_ratio_is_exact_at_powers_of_two() {
        assert_eq!(ceil_log2_ratio(1.0, 2f64.powi(-20)), Ok(20));
        assert_eq!(
            ceil_log2_ratio(1.0, 2f64.powi(-20) * (1.0 + f64::EPSILON)),
            Ok(20)
        );
        assert_eq!(
            ceil_log2_ratio(1.0, 2f64.powi(-20) * (1.0 - f64::EPSILON / 2.0)),
            Ok(21)
        );
        assert_eq!(ceil_log2_ratio(3.0, 4.0), Ok(0));
        assert_eq!(ceil_log2_ratio(1.0, 1.0), Ok(0));
        assert_eq!(ceil_log2_ratio(1.0, 3.0), Ok(-1));
        assert_eq!(ceil_log2_ratio(f64::MAX, 5e-324), Ok(2098));
        assert!(ceil_log2_ratio(-1.0, 1.0).is_err());
        assert_eq!(ceil_log2_ratio(1.0, 0.0), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn natural_arithmetic() {
        assert_eq!(ev("3 - 5", &[]), Ok(Value::Nat(0)));
        assert_eq!(ev("3 / 2", &[]), Ok(Value::Real(1.5)));
        assert_eq!(
            ev("18446744073709551615 + 1", &[]),
            Err(EvalError::NatOverflow)
        );
        assert_eq!(ev("3.0 - 5", &[]), Ok(Value::Real(-2.0)));
        assert_eq!(ev("nat(-2.5)", &[]), Ok(Value::Nat(0)));
        assert_eq!(ev("nat(2.5)", &[]), Ok(Value::Nat(2)));
    }

    #[test]
    fn errors() {
        assert_eq!(
            ev("1 / (x - x)", &[("x", Value::Real(2.0))]),
            Err(EvalError::DivisionByZero)
        );
        assert!(matches!(ev("ln(0)", &[]), Err(EvalError::Domain { .. })));
        assert!(matches!(ev("log2(-1)", &[]), Err(EvalError::Domain { .. })));
        assert_eq!(ev("y", &[]), Err(EvalError::Unbound("y".into())));
        assert!(matches!(
            ev("X(4)", &[("X", Value::Vec(vec![0.0; 4]))]),
            Err(EvalError::IndexOutOfRange {
                index: 4,
                len: 4,
                ..
            })
        ));
        assert_eq!(ev("g(1)", &[]), Err(EvalError::UnknownFunction("g".into())));
    }

    #[test]
    fn functions_and_iterates() {
        let mut funcs = Funcs::new();
        funcs.insert("g".into(), FuncDef::parse("λx. (3/x + x)/2").unwrap());
        let e = parse_expr("(g ^^ 2) 1").unwrap();
        let v = eval_expr(&e, &Env::new(), &funcs).unwrap();
        assert_eq!(v, Value::Real(((3.0 / 1.0 + 1.0) / 2.0 + 3.0 / 2.0) / 2.0));
        funcs.insert("h".into(), FuncDef::parse("λx. h(x)").unwrap());
        let e = parse_expr("h(1)").unwrap();
        assert_eq!(
            eval_expr(&e, &Env::new(), &funcs),
            Err(EvalError::RecursionLimit)
        );
    }

    #[test]
    fn quantifiers_and_sign_tests() {
        assert!(cond("(∀k<0. 1 = 0)", &[]));
        assert!(!cond("(∃k<0. 1 = 1)", &[]));
        let state = [
            ("i", Value::Nat(4)),
            ("vc", Value::Vec(vec![3.0, 6.0, 9.0, 12.0])),
            ("n", Value::Real(3.0)),
            ("X", Value::Vec(vec![1.0, 2.0, 3.0, 4.0])),
        ];
        assert!(cond("i ≤ card(X) ∧ (∀k<i. vc k = n * X k)", &state));
        assert!(cond(
            "fa*fb ≤ 0",
            &[("fa", Value::Real(-1.0)), ("fb", Value::Real(0.25))]
        ));
        let mut state = state.to_vec();
        state.push(("want", Value::Vec(vec![3.0, 6.0, 9.0, 12.0])));
        assert!(cond("vc = want ∧ vc ≠ X", &state));
    }

    #[test]
    fn real_equality_is_exact() {
        assert!(!cond("0.1 + 0.2 = 0.3", &[]));
        assert!(cond("|(0.1 + 0.2) - 0.3| ≤ ulp(0.3)", &[]));
    }

    #[test]
    fn nan_comparisons() {
        let x = [("x", Value::Real(f64::NAN))];
        assert!(!cond("x = x", &x));
        assert!(cond("x ≠ x", &x));
        assert!(!cond("x < 1", &x));
    }

    fn explicit(body: &dyn Fn(u64) -> bool, n: u64, universal: bool) -> bool {
        let mut acc = universal;
        for k in 0..n {
            acc = if universal {
                acc && body(k)
            } else {
                acc || body(k)
            };
        }
        acc
    }

    proptest! {
        #[test]
        fn bounded_quantifiers_match_expansion(
            xs in proptest::collection::vec(-3i32..3, 16),
            n in 0u64..=16,
            t in -3i32..3,
        ) {
            let v = Value::Vec(xs.iter().map(|&x| f64::from(x)).collect());
            let state = [("X", v), ("n", Value::Nat(n)), ("t", Value::Real(f64::from(t)))];
            let body = |k: u64| f64::from(xs[k as usize]) <= f64::from(t);
            prop_assert_eq!(cond("(∀k<n. X k ≤ t)", &state), explicit(&body, n, true));
            prop_assert_eq!(cond("(∃k<n. X k ≤ t)", &state), explicit(&body, n, false));
        }

        #[test]
        fn evaluation_is_deterministic(x in -1e3f64..1e3, y in 0.1f64..1e3) {
            let e = parse_expr("sin(x) * exp(x / y) + ln(y) / (x * x + 1) - cos(y)^3").unwrap();
            let en = env(&[("x", Value::Real(x)), ("y", Value::Real(y))]);
            let a = eval_expr(&e, &en, &Funcs::new()).unwrap().as_f64().unwrap();
            let b = eval_expr(&e, &en, &Funcs::new()).unwrap().as_f64().unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }

        #[test]
        fn ceil_log2_ratio_brackets(num in 1e-300f64..1e300, den in 1e-300f64..1e300) {
            let k = ceil_log2_ratio(num, den).unwrap();
            // Exact check in the 2^k-scaled domain: den·2^k is exact unless it over/underflows.
            let scaled = |j: i64| den * 2f64.powi(j as i32);
            if (-1000..1000).contains(&k) {
                let hi = scaled(k);
                let lo = scaled(k - 1);
                if hi.is_finite() && lo > 0.0 && lo.is_normal() {
                    prop_assert!(num <= hi);
                    prop_assert!(num > lo);
                }
            }
        }
    }
}
