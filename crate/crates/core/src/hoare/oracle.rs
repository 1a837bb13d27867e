//! Witnesses for real existentials in postconditions.
//!
//! A root witness is a bracket `[lower, upper]` of binary64 values holding a
//! sign change of `f` evaluated in double-double. The conjunct `f(c) = 0` is
//! discharged by the sign change; every other conjunct mentioning `c` is
//! evaluated at both bracket ends. That is sound when those conjuncts define
//! convex sets of `c`, as comparisons affine in `c` and distance bounds
//! `¦c − e¦ ≤ d` do.

use super::{HoareTriple, Witness};
use crate::calculus::{eval_real, Dd};
use crate::interp::ProgState;
use crate::lang::{eval_cond, eval_expr, CmpOp, Cond, Env, Expr, FuncDef, Funcs, Value};

/// Bisection steps of the root oracle; far more than double-double resolves.
pub const ROOT_ITERATIONS: u32 = 200;

/// Binary64 bracket around a root refined in double-double.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lower: f64,
    pub upper: f64,
    /// Bisection steps taken before the bracket stopped shrinking.
    pub iterations: u32,
}

fn sign(f: &FuncDef, x: Dd) -> Result<i8, String> {
    let y =
        eval_real(&f.body, &f.param, x, &Env::new(), &Funcs::new()).map_err(|e| format!("{e}"))?;
    if !y.is_finite() {
        return Err(format!("f({x}) is not finite"));
    }
    Ok(if y.hi > 0.0 {
        1
    } else if y.hi < 0.0 {
        -1
    } else {
        0
    })
}

fn round_down(d: Dd) -> f64 {
    if d.lo < 0.0 {
        d.hi.next_down()
    } else {
        d.hi
    }
}

fn round_up(d: Dd) -> f64 {
    if d.lo > 0.0 {
        d.hi.next_up()
    } else {
        d.hi
    }
}

/// Bisects `f` on `[lo, hi]` in double-double for up to [`ROOT_ITERATIONS`]
/// steps and rounds the final bracket outward to binary64.
pub fn root_bracket(f: &FuncDef, lo: f64, hi: f64) -> Result<RootBracket, String> {
    if !(lo <= hi) {
        return Err(format!("empty bracket [{lo:?}, {hi:?}]"));
    }
    let (mut l, mut u) = (Dd::new(lo), Dd::new(hi));
    let sl = sign(f, l)?;
    if sl == 0 {
        return Ok(RootBracket {
            lower: lo,
            upper: lo,
            iterations: 0,
        });
    }
    let su = sign(f, u)?;
    if su == 0 {
        return Ok(RootBracket {
            lower: hi,
            upper: hi,
            iterations: 0,
        });
    }
    if sl == su {
        return Err(format!("no sign change on [{lo:?}, {hi:?}]"));
    }
    let mut iterations = 0;
    while iterations < ROOT_ITERATIONS {
        let m = (l + u).ldexp(-1);
        if !(l < m && m < u) {
            break;
        }
        iterations += 1;
        match sign(f, m)? {
            0 => {
                l = m;
                u = m;
                break;
            }
            s if s == sl => l = m,
            _ => u = m,
        }
    }
    Ok(RootBracket {
        lower: round_down(l),
        upper: round_up(u),
        iterations,
    })
}

fn strip_existentials(c: &Cond) -> Cond {
    match c {
        Cond::Bool(_) | Cond::Cmp(..) => c.clone(),
        Cond::Not(a) => strip_existentials(a).negate(),
        Cond::And(a, b) => strip_existentials(a).and(strip_existentials(b)),
        Cond::Or(a, b) => strip_existentials(a).or(strip_existentials(b)),
        Cond::Implies(a, b) => strip_existentials(a).implies(strip_existentials(b)),
        Cond::Forall { var, bound, body } => Cond::Forall {
            var: var.clone(),
            bound: bound.clone(),
            body: Box::new(strip_existentials(body)),
        },
        Cond::Exists { var, bound, body } => Cond::Exists {
            var: var.clone(),
            bound: bound.clone(),
            body: Box::new(strip_existentials(body)),
        },
        Cond::ExistsReal { body, .. } => strip_existentials(body),
    }
}

fn cond_mentions(c: &Cond, name: &str) -> bool {
    match c {
        Cond::Bool(_) => false,
        Cond::Cmp(_, a, b) => a.mentions(name) || b.mentions(name),
        Cond::Not(a) => cond_mentions(a, name),
        Cond::And(a, b) | Cond::Or(a, b) | Cond::Implies(a, b) => {
            cond_mentions(a, name) || cond_mentions(b, name)
        }
        Cond::Forall { var, bound, body } | Cond::Exists { var, bound, body } => {
            bound.mentions(name) || (var != name && cond_mentions(body, name))
        }
        Cond::ExistsReal { var, body } => var != name && cond_mentions(body, name),
    }
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Nat(0)) || matches!(e, Expr::Const(x) if *x == 0.0)
}

/// `func(var) = 0` in either orientation.
fn is_root_claim(c: &Cond, func: &str, var: &str) -> bool {
    let applied = |e: &Expr| matches!(e, Expr::Apply(f, a) if f == func && **a == Expr::var(var));
    match c {
        Cond::Cmp(CmpOp::Eq, l, r) => (applied(l) && is_zero(r)) || (is_zero(l) && applied(r)),
        _ => false,
    }
}

struct Resolved {
    var: String,
    candidates: Vec<f64>,
    root_of: Option<String>,
}

fn real_of(e: &Expr, env: &Env, funcs: &Funcs) -> Result<f64, String> {
    eval_expr(e, env, funcs)
        .map_err(|err| err.to_string())?
        .as_f64()
        .ok_or_else(|| format!("`{e}` is not a real"))
}

fn resolve(var: &str, w: &Witness, state: &ProgState) -> Result<Resolved, String> {
    match w {
        Witness::Value(e) => Ok(Resolved {
            var: var.to_string(),
            candidates: vec![real_of(e, &state.vars, &state.funcs)?],
            root_of: None,
        }),
        Witness::Root { func, lower, upper } => {
            let f = state
                .funcs
                .get(func)
                .ok_or_else(|| format!("unknown function `{func}`"))?;
            let lo = real_of(lower, &state.vars, &state.funcs)?;
            let hi = real_of(upper, &state.vars, &state.funcs)?;
            let b = root_bracket(f, lo, hi)?;
            Ok(Resolved {
                var: var.to_string(),
                candidates: vec![b.lower, b.upper],
                root_of: Some(func.clone()),
            })
        }
    }
}

/// Conjuncts of the ensures clause that fail in `state`, with witnesses
/// substituted. Empty when the postcondition holds.
pub(crate) fn failed_post_conjuncts(t: &HoareTriple, state: &ProgState) -> Vec<String> {
    let mut resolved = Vec::new();
    for (var, w) in &t.witnesses {
        match resolve(var, w, state) {
            Ok(r) => resolved.push(r),
            Err(e) => return vec![format!("witness {var} := {w} unavailable: {e}")],
        }
    }
    let body = strip_existentials(&t.post);
    let mut failed = Vec::new();
    for c in body.conjuncts() {
        let discharged = resolved.iter().any(|r| {
            r.root_of
                .as_deref()
                .is_some_and(|f| is_root_claim(c, f, &r.var))
        });
        if discharged {
            continue;
        }
        let used: Vec<&Resolved> = resolved
            .iter()
            .filter(|r| cond_mentions(c, &r.var))
            .collect();
        // Every combination of candidate values must satisfy the conjunct.
        let combos: usize = used.iter().map(|r| r.candidates.len()).product();
        for mut k in 0..combos {
            let mut env = state.vars.clone();
            for r in &used {
                let n = r.candidates.len();
                env.insert(r.var.clone(), Value::Real(r.candidates[k % n]));
                k /= n;
            }
            let failure = match eval_cond(c, &env, &state.funcs) {
                Ok(true) => None,
                Ok(false) => Some(c.to_string()),
                Err(e) => Some(format!("{c} (undefined: {e})")),
            };
            if let Some(msg) = failure {
                failed.push(msg);
                break;
            }
        }
    }
    failed
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brackets_the_square_root_of_two() {
        let f = FuncDef::parse("x^2 - 2").unwrap();
        let b = root_bracket(&f, 1.0, 1.5).unwrap();
        let s = 2f64.sqrt();
        assert!(b.lower <= s && s <= b.upper, "{b:?}");
        assert!(b.upper - b.lower <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn endpoint_roots_and_missing_sign_change() {
        let f = FuncDef::parse("x - 1").unwrap();
        assert_eq!(root_bracket(&f, 1.0, 2.0).unwrap().upper, 1.0);
        assert_eq!(root_bracket(&f, 0.0, 1.0).unwrap().lower, 1.0);
        assert!(root_bracket(&f, 2.0, 3.0).is_err());
        assert!(root_bracket(&f, 3.0, 2.0).is_err());
    }

    #[test]
    fn exact_dyadic_root_is_found() {
        let f = FuncDef::parse("x - 0.375").unwrap();
        let b = root_bracket(&f, 0.0, 1.0).unwrap();
        assert_eq!((b.lower, b.upper), (0.375, 0.375));
    }

    #[test]
    fn root_claims_are_recognised() {
        let c = crate::lang::parse_cond("f(c) = 0").unwrap();
        assert!(is_root_claim(&c, "f", "c"));
        let c = crate::lang::parse_cond("0 = f c").unwrap();
        assert!(is_root_claim(&c, "f", "c"));
        let c = crate::lang::parse_cond("f(c) = 1").unwrap();
        assert!(!is_root_claim(&c, "f", "c"));
    }
}
