//! Central finite differences, used only as an independent cross-check of jets.

use super::{binomial, CalcError, FdStep};
use crate::lang::{eval_expr, Env, EvalError, Expr, Funcs, Value};

/// Step for an order-`n` stencil at `a`: `max(1, |a|) · ε^(1/(n+2))`.
pub fn fd_step(n: usize, a: f64) -> f64 {
    a.abs().max(1.0) * f64::EPSILON.powf(1.0 / (n as f64 + 2.0))
}

/// `f⁽ⁿ⁾(a)` from the central stencil `h⁻ⁿ Σ (-1)ʲ C(n,j) f(a + (n/2 - j)h)`.
///
/// Evaluates `e` with the scalar interpreter, never through jets.
pub fn nth_derivative_fd(
    e: &Expr,
    var: &str,
    n: usize,
    a: f64,
    step: FdStep,
    env: &Env,
    funcs: &Funcs,
) -> Result<f64, CalcError> {
    let h = match step {
        FdStep::Absolute(h) if h > 0.0 && h.is_finite() => h,
        FdStep::Absolute(h) => {
            return Err(CalcError::Invalid(format!("step {h} must be positive")))
        }
        FdStep::ScaleRelative => fd_step(n, a),
    };
    let mut scope = env.clone();
    let mut f = |x: f64| -> Result<f64, CalcError> {
        scope.insert(var.to_string(), Value::Real(x));
        eval_expr(e, &scope, funcs)?
            .as_f64()
            .ok_or_else(|| EvalError::Sort("vector-valued expression".into()).into())
    };
    let mut acc = 0.0;
    for j in 0..=n {
        let x = a + (n as f64 / 2.0 - j as f64) * h;
        let term = binomial(n, j) * f(x)?;
        acc += if j % 2 == 0 { term } else { -term };
    }
    Ok(acc / h.powi(n as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_expr;

    fn fd(src: &str, n: usize, a: f64) -> f64 {
        let e = parse_expr(src).unwrap();
        nth_derivative_fd(
            &e,
            "x",
            n,
            a,
            FdStep::ScaleRelative,
            &Env::new(),
            &Funcs::new(),
        )
        .unwrap()
    }

    #[test]
    fn step_rule() {
        assert_eq!(fd_step(0, 0.5), f64::EPSILON.sqrt());
        assert_eq!(fd_step(2, -8.0), 8.0 * f64::EPSILON.powf(0.25));
    }

    #[test]
    fn exp_third_derivative_at_zero() {
        assert!((fd("exp(x)", 3, 0.0) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn order_zero_is_the_value() {
        assert_eq!(fd("x^2 + 1", 0, 3.0), 10.0);
    }

    #[test]
    fn quadratic_second_difference() {
        assert!((fd("3*x^2 - x", 2, 0.25) - 6.0).abs() < 1e-6);
    }

    #[test]
    fn explicit_step_must_be_positive() {
        let e = parse_expr("x").unwrap();
        let r = nth_derivative_fd(
            &e,
            "x",
            1,
            0.0,
            FdStep::Absolute(0.0),
            &Env::new(),
            &Funcs::new(),
        );
        assert!(matches!(r, Err(CalcError::Invalid(_))));
    }
}
