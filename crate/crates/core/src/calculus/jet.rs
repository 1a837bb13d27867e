//! Truncated Taylor arithmetic over expression trees.
//!
//! A jet of order k at `a` holds `f(a), f'(a)/1!, …, f⁽ᵏ⁾(a)/k!`. Subtrees that
//! do not depend on a live variable are evaluated with the scalar semantics of
//! `lang::eval` and lifted, so natural-number arithmetic keeps its meaning.
//! Coefficient 0 of every smooth node is computed exactly as `eval` computes
//! it, which makes an order-0 jet in binary64 agree bit for bit with `eval`.

use std::collections::BTreeMap;

use super::{binomial, factorial, CalcError, Dd, Scalar};
use crate::lang::{
    ceil_log2_ratio, eval_expr, ulp, BinOp, Builtin, Env, EvalError, Expr, Funcs, Value,
};

/// Largest supported jet order.
pub const MAX_ORDER: usize = 64;

const MAX_DEPTH: usize = 64;
const MAX_ITERATE: u64 = 1_000_000;

static EMPTY: Env = BTreeMap::new();

#[derive(Debug, Clone, PartialEq)]
pub struct Jet<S = f64> {
    pub center: f64,
    /// `coeffs[m] = f⁽ᵐ⁾(center) / m!`.
    pub coeffs: Vec<S>,
}

impl<S: Scalar> Jet<S> {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> S {
        self.coeffs[0]
    }

    /// `f⁽ᵐ⁾(center)`; `m` must not exceed the order.
    pub fn derivative(&self, m: usize) -> S {
        self.coeffs[m] * S::from_f64(factorial(m))
    }
}

struct Ctx<'a, S> {
    live: Vec<(String, Vec<S>)>,
    env: &'a Env,
    funcs: &'a Funcs,
    k: usize,
    depth: usize,
}

fn is_const<S: Scalar>(c: &[S]) -> bool {
    c[1..].iter().all(|x| *x == S::zero())
}

fn constant<S: Scalar>(x: S, k: usize) -> Vec<S> {
    let mut c = vec![S::zero(); k + 1];
    c[0] = x;
    c
}

fn lift<S: Scalar>(v: Value, k: usize) -> Result<Vec<S>, CalcError> {
    match v {
        Value::Real(x) => Ok(constant(S::from_f64(x), k)),
        Value::Nat(n) => Ok(constant(S::from_f64(n as f64), k)),
        Value::Vec(_) => Err(EvalError::Sort("vector used as a number".into()).into()),
    }
}

fn nonsmooth<S: Scalar>(node: &'static str, at: S) -> CalcError {
    CalcError::NonSmooth {
        node,
        at: at.to_f64(),
    }
}

fn mul<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let mut rev: Vec<S> = Vec::with_capacity(b.len());
    (0..a.len())
        .map(|n| {
            rev.insert(0, b[n]);
            S::dot(&a[..=n], &rev)
        })
        .collect()
}

fn div<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let mut c: Vec<S> = Vec::with_capacity(a.len());
    c.push(a[0] / b[0]);
    for n in 1..a.len() {
        let rev: Vec<S> = c.iter().rev().copied().collect();
        c.push((a[n] - S::dot(&b[1..=n], &rev)) / b[0]);
    }
    c
}

/// `j·a[j]` for j = 1..=n.
fn weighted<S: Scalar>(a: &[S], n: usize) -> Vec<S> {
    (1..=n).map(|j| S::from_f64(j as f64) * a[j]).collect()
}

fn rev_prefix<S: Scalar>(c: &[S], n: usize) -> Vec<S> {
    // c[n-1], …, c[0]
    c[..n].iter().rev().copied().collect()
}

fn exp<S: Scalar>(a: &[S]) -> Vec<S> {
    let mut e = vec![a[0].exp()];
    for n in 1..a.len() {
        let s = S::dot(&weighted(a, n), &rev_prefix(&e, n));
        e.push(s / S::from_f64(n as f64));
    }
    e
}

fn ln<S: Scalar>(a: &[S]) -> Vec<S> {
    let mut l = vec![a[0].ln()];
    for n in 1..a.len() {
        // Σ_{j=1}^{n-1} j·l_j·a_{n-j}
        let jl: Vec<S> = (1..n).map(|j| S::from_f64(j as f64) * l[j]).collect();
        let ar: Vec<S> = (1..n).map(|j| a[n - j]).collect();
        let s = S::dot(&jl, &ar) / S::from_f64(n as f64);
        l.push((a[n] - s) / a[0]);
    }
    l
}

fn sin_cos<S: Scalar>(a: &[S]) -> (Vec<S>, Vec<S>) {
    let mut s = vec![a[0].sin()];
    let mut c = vec![a[0].cos()];
    for n in 1..a.len() {
        let w = weighted(a, n);
        let nf = S::from_f64(n as f64);
        let sn = S::dot(&w, &rev_prefix(&c, n)) / nf;
        let cn = -(S::dot(&w, &rev_prefix(&s, n)) / nf);
        s.push(sn);
        c.push(cn);
    }
    (s, c)
}

fn ipow<S: Scalar>(a: &[S], k: u32) -> Vec<S> {
    let mut acc = constant(S::one(), a.len() - 1);
    let mut base = a.to_vec();
    let mut n = k;
    while n > 0 {
        if n & 1 == 1 {
            acc = mul(&acc, &base);
        }
        n >>= 1;
        if n > 0 {
            base = mul(&base, &base);
        }
    }
    acc
}

fn natural(v: &Value, what: &'static str) -> Result<u64, CalcError> {
    match *v {
        Value::Nat(n) => Ok(n),
        Value::Real(x) if x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 => Ok(x as u64),
        _ => Err(EvalError::NotNatural {
            what,
            value: v.to_string(),
        }
        .into()),
    }
}

impl<'a, S: Scalar> Ctx<'a, S> {
    fn depends(&self, e: &Expr) -> bool {
        match e {
            Expr::Const(_) | Expr::Nat(_) | Expr::Card(_) => false,
            Expr::Var(v) => self.live.iter().any(|(n, _)| n == v),
            Expr::Neg(a) | Expr::PowNat(a, _) | Expr::Call(_, a) | Expr::Apply(_, a) => {
                self.depends(a)
            }
            Expr::Binary(_, a, b) | Expr::Pow(a, b) => self.depends(a) || self.depends(b),
            Expr::Iterate { count, arg, .. } => self.depends(count) || self.depends(arg),
        }
    }

    fn jet(&mut self, e: &Expr) -> Result<Vec<S>, CalcError> {
        let k = self.k;
        if !self.depends(e) {
            return lift(eval_expr(e, self.env, self.funcs)?, k);
        }
        match e {
            Expr::Const(_) | Expr::Nat(_) | Expr::Card(_) => unreachable!("constant node"),
            Expr::Var(v) => Ok(self
                .live
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, c)| c.clone())
                .expect("live variable")),
            Expr::Neg(a) => Ok(self.jet(a)?.into_iter().map(|x| -x).collect()),
            Expr::Binary(op, a, b) => {
                if let (BinOp::Max, Expr::Call(Builtin::Floor, inner), Expr::Nat(0)) =
                    (op, &**a, &**b)
                {
                    // nat(e)
                    let x = self.jet(inner)?;
                    let f = x[0].floor();
                    if k >= 1 && f == x[0] && !is_const(&x) {
                        return Err(nonsmooth("nat", x[0]));
                    }
                    if x[0].to_f64().is_nan() {
                        return Err(EvalError::NotNatural {
                            what: "nat(·)",
                            value: format!("{:?}", x[0].to_f64()),
                        }
                        .into());
                    }
                    let z = S::zero();
                    return Ok(constant(if f <= z { z } else { f }, k));
                }
                let x = self.jet(a)?;
                let y = self.jet(b)?;
                Ok(match op {
                    BinOp::Add => x.iter().zip(&y).map(|(p, q)| *p + *q).collect(),
                    BinOp::Sub => x.iter().zip(&y).map(|(p, q)| *p - *q).collect(),
                    BinOp::Mul => mul(&x, &y),
                    BinOp::Div => {
                        if y[0] == S::zero() {
                            return Err(EvalError::DivisionByZero.into());
                        }
                        div(&x, &y)
                    }
                    BinOp::Min | BinOp::Max => {
                        if x[0] == y[0] && x != y {
                            return Err(nonsmooth(
                                if *op == BinOp::Min { "min" } else { "max" },
                                x[0],
                            ));
                        }
                        let take_x = if *op == BinOp::Min {
                            x[0] <= y[0]
                        } else {
                            x[0] >= y[0]
                        };
                        if take_x {
                            x
                        } else {
                            y
                        }
                    }
                })
            }
            Expr::PowNat(a, p) => {
                let x = self.jet(a)?;
                let mut c = ipow(&x, *p);
                c[0] = x[0].powi(*p as i32);
                Ok(c)
            }
            Expr::Pow(a, p) => {
                let x = self.jet(a)?;
                if !self.depends(p) {
                    let pv = eval_expr(p, self.env, self.funcs)?;
                    let int = match pv {
                        Value::Nat(n) => Some(n as f64),
                        Value::Real(y) if y.fract() == 0.0 && y.abs() < 2f64.powi(31) => Some(y),
                        Value::Real(_) => None,
                        Value::Vec(_) => {
                            return Err(EvalError::Sort("vector exponent".into()).into())
                        }
                    };
                    if let Some(n) = int {
                        let n = n as i64;
                        if x[0] == S::zero() && n < 0 {
                            return Err(EvalError::DivisionByZero.into());
                        }
                        let mut c = ipow(&x, n.unsigned_abs() as u32);
                        if n < 0 {
                            c = div(&constant(S::one(), k), &c);
                        }
                        c[0] = x[0].powi(n as i32);
                        return Ok(c);
                    }
                    let y = lift::<S>(pv, k)?;
                    return self.real_pow(&x, &y);
                }
                let y = self.jet(p)?;
                self.real_pow(&x, &y)
            }
            Expr::Call(Builtin::Ceil, inner) if matches!(**inner, Expr::Call(Builtin::Log2, _)) => {
                let Expr::Call(_, arg) = &**inner else {
                    unreachable!()
                };
                let (p, q) = match &**arg {
                    Expr::Binary(BinOp::Div, p, q) => (self.jet(p)?[0], self.jet(q)?[0]),
                    other => (self.jet(other)?[0], S::one()),
                };
                let (p, q) = (p.to_f64(), q.to_f64());
                let up = ceil_log2_ratio(p, q)?;
                // An integral logarithm sits on a jump.
                if k >= 1 && up == -ceil_log2_ratio(q, p)? {
                    return Err(nonsmooth("⌈log2⌉", S::from_f64(p / q)));
                }
                Ok(constant(S::from_f64(up as f64), k))
            }
            Expr::Call(b, a) => {
                let x = self.jet(a)?;
                let a0 = x[0];
                let smooth = k == 0 || is_const(&x);
                match b {
                    Builtin::Abs => {
                        if a0 == S::zero() && !smooth {
                            return Err(nonsmooth("abs", a0));
                        }
                        Ok(if a0 < S::zero() {
                            x.into_iter().map(|v| -v).collect()
                        } else {
                            x
                        })
                    }
                    Builtin::Floor | Builtin::Ceil => {
                        let r = if *b == Builtin::Floor {
                            a0.floor()
                        } else {
                            a0.ceil()
                        };
                        if r == a0 && !smooth {
                            return Err(nonsmooth(b.name(), a0));
                        }
                        Ok(constant(r, k))
                    }
                    Builtin::Ulp => {
                        let v = a0.to_f64().abs();
                        let boundary =
                            v == 0.0 || (v.is_finite() && v == 2f64.powi(v.log2().round() as i32));
                        if boundary && !smooth {
                            return Err(nonsmooth("ulp", a0));
                        }
                        Ok(constant(S::from_f64(ulp(v)), k))
                    }
                    Builtin::Log2 | Builtin::Ln => {
                        if !(a0 > S::zero()) {
                            return Err(EvalError::Domain {
                                func: b.name(),
                                arg: a0.to_f64(),
                            }
                            .into());
                        }
                        let mut l = ln(&x);
                        if *b == Builtin::Log2 {
                            let l2 = S::ln2();
                            l = l.into_iter().map(|v| v / l2).collect();
                            l[0] = a0.log2();
                        }
                        Ok(l)
                    }
                    Builtin::Exp => Ok(exp(&x)),
                    Builtin::Sin => Ok(sin_cos(&x).0),
                    Builtin::Cos => Ok(sin_cos(&x).1),
                }
            }
            Expr::Apply(name, a) => {
                let x = self.jet(a)?;
                let vector = self
                    .live
                    .iter()
                    .all(|(n, _)| n != name)
                    .then(|| self.env.get(name))
                    .flatten();
                if let Some(v) = vector {
                    let Value::Vec(xs) = v else {
                        return Err(EvalError::Sort(format!(
                            "`{name}` is not a vector or function"
                        ))
                        .into());
                    };
                    if k >= 1 && !is_const(&x) {
                        return Err(nonsmooth("vector index", x[0]));
                    }
                    let i = natural(&Value::Real(x[0].to_f64()), "vector index")?;
                    let xi = usize::try_from(i)
                        .ok()
                        .and_then(|i| xs.get(i))
                        .ok_or_else(|| EvalError::IndexOutOfRange {
                            name: name.clone(),
                            index: i,
                            len: xs.len(),
                        })?;
                    return Ok(constant(S::from_f64(*xi), k));
                }
                self.call(name, x)
            }
            Expr::Iterate { func, count, arg } => {
                let n = if self.depends(count) {
                    let c = self.jet(count)?;
                    if k >= 1 && !is_const(&c) {
                        return Err(nonsmooth("iteration count", c[0]));
                    }
                    natural(&Value::Real(c[0].to_f64()), "iteration count")?
                } else {
                    natural(&eval_expr(count, self.env, self.funcs)?, "iteration count")?
                };
                if n > MAX_ITERATE {
                    return Err(EvalError::TooLarge {
                        what: "iteration count",
                        value: n,
                    }
                    .into());
                }
                let mut x = self.jet(arg)?;
                for _ in 0..n {
                    x = self.call(func, x)?;
                }
                Ok(x)
            }
        }
    }

    fn real_pow(&mut self, x: &[S], y: &[S]) -> Result<Vec<S>, CalcError> {
        if !(x[0] > S::zero()) {
            return Err(EvalError::Domain {
                func: "real power",
                arg: x[0].to_f64(),
            }
            .into());
        }
        let mut c = exp(&mul(y, &ln(x)));
        c[0] = x[0].powf(y[0]);
        Ok(c)
    }

    fn call(&mut self, name: &str, arg: Vec<S>) -> Result<Vec<S>, CalcError> {
        let def = self
            .funcs
            .get(name)
            .ok_or_else(|| EvalError::UnknownFunction(name.to_string()))?;
        if self.depth >= MAX_DEPTH {
            return Err(EvalError::RecursionLimit.into());
        }
        let mut inner = Ctx {
            live: vec![(def.param.clone(), arg)],
            env: &EMPTY,
            funcs: self.funcs,
            k: self.k,
            depth: self.depth + 1,
        };
        inner.jet(&def.body)
    }
}

/// Jet of `e` in `var` at `a` in the scalar type `S`; other variables come from `env`.
pub fn jet_eval_in<S: Scalar>(
    e: &Expr,
    var: &str,
    a: S,
    k: usize,
    env: &Env,
    funcs: &Funcs,
) -> Result<Jet<S>, CalcError> {
    if k > MAX_ORDER {
        return Err(CalcError::OrderCap {
            order: k,
            cap: MAX_ORDER,
        });
    }
    let mut id = constant(a, k);
    if k >= 1 {
        id[1] = S::one();
    }
    let mut ctx = Ctx {
        live: vec![(var.to_string(), id)],
        env,
        funcs,
        k,
        depth: 0,
    };
    let coeffs = ctx.jet(e)?;
    Ok(Jet {
        center: a.to_f64(),
        coeffs,
    })
}

pub fn jet_eval(
    e: &Expr,
    var: &str,
    a: f64,
    k: usize,
    env: &Env,
    funcs: &Funcs,
) -> Result<Jet<f64>, CalcError> {
    jet_eval_in(e, var, a, k, env, funcs)
}

/// `f⁽ⁿ⁾(a)` with `f = λvar. e`.
pub fn nth_derivative(
    e: &Expr,
    var: &str,
    n: usize,
    a: f64,
    env: &Env,
    funcs: &Funcs,
) -> Result<f64, CalcError> {
    Ok(jet_eval(e, var, a, n, env, funcs)?.derivative(n))
}

/// `e` at `var = x`, evaluated in `S`.
pub fn eval_real<S: Scalar>(
    e: &Expr,
    var: &str,
    x: S,
    env: &Env,
    funcs: &Funcs,
) -> Result<S, CalcError> {
    Ok(jet_eval_in(e, var, x, 0, env, funcs)?.value())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeibnizCheck {
    /// `(f·g)⁽ⁿ⁾(x)` from the product jet.
    pub lhs: f64,
    /// `Σ C(n,k) f⁽ᵏ⁾(x) g⁽ⁿ⁻ᵏ⁾(x)` accumulated in double-double.
    pub rhs: f64,
    /// `|lhs − rhs|` in units of `ulp(max(|lhs|, |rhs|, 1))`.
    pub ulps: f64,
    pub pass: bool,
}

/// Tolerance of the Leibniz identity, in ulps.
pub const LEIBNIZ_ULPS: f64 = 32.0;

pub fn leibniz_product_check(
    f: &Expr,
    g: &Expr,
    var: &str,
    n: usize,
    x: f64,
    env: &Env,
    funcs: &Funcs,
) -> Result<LeibnizCheck, CalcError> {
    let product = f.clone() * g.clone();
    let lhs = nth_derivative(&product, var, n, x, env, funcs)?;
    let fj = jet_eval(f, var, x, n, env, funcs)?;
    let gj = jet_eval(g, var, x, n, env, funcs)?;
    let mut acc = Dd::ZERO;
    for k in 0..=n {
        let dk = Dd::new(fj.coeffs[k]).mul_f64(factorial(k));
        let dnk = Dd::new(gj.coeffs[n - k]).mul_f64(factorial(n - k));
        acc = acc + (dk * dnk).mul_f64(binomial(n, k));
    }
    let rhs = acc.to_f64();
    let scale = ulp(lhs.abs().max(rhs.abs()).max(1.0));
    let ulps = (lhs - rhs).abs() / scale;
    Ok(LeibnizCheck {
        lhs,
        rhs,
        ulps,
        pass: ulps <= LEIBNIZ_ULPS,
    })
}
