//! Bisection and fixed-point iteration, their annotated programs, and
//! convergence certificates.

mod bisection;
mod certificate;
mod fixed_point;

pub use bisection::{bisect, bisection_program, predicted_iterations, BisectionResult};
pub use certificate::{
    c1_certificate, linear_error_certificate, quadratic_certificate, refine_fixed_point, CertKind,
    CertRow, Certificate, Root, RootSource, Trajectory, GRID_POINTS,
};
pub use fixed_point::{
    check_contraction_closure, contraction_estimate, fixed_point, fixed_point_program,
    FixedPointResult,
};

use crate::calculus::CalcError;
use crate::lang::{eval_expr, Env, EvalError, FuncDef, Funcs, Value};

/// A real function of one real argument.
pub trait RealFn {
    fn eval(&self, x: f64) -> Result<f64, EvalError>;
}

impl<F: Fn(f64) -> Result<f64, EvalError>> RealFn for F {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        self(x)
    }
}

/// Evaluated exactly as the interpreter applies a `fun` argument.
impl RealFn for FuncDef {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let mut env = Env::new();
        env.insert(self.param.clone(), Value::Real(x));
        eval_expr(&self.body, &env, &Funcs::new())?
            .as_f64()
            .ok_or_else(|| EvalError::Sort("function returned a vector".into()))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MethodError {
    #[error("tolerance must satisfy 0 < tol < b - a (tol = {tol:?}, b - a = {width:?})")]
    Tolerance { tol: f64, width: f64 },
    #[error("degenerate bracket [{a:?}, {b:?}]")]
    DegenerateBracket { a: f64, b: f64 },
    #[error("no sign change: f(a) = {fa:?}, f(b) = {fb:?}")]
    NoSignChange { fa: f64, fb: f64 },
    #[error("bisection stalled at iteration {iter}: the midpoint is not representable")]
    Stalled { iter: u64 },
    #[error("f(r) - r = {residual:?} exceeds 8 ulps of r = {r:?}")]
    NotFixedPoint { r: f64, residual: f64 },
    #[error("contraction rate {0:?} is not in [0, 1)")]
    Rate(f64),
    #[error("|f'(r)| = {0:?} is not below 1")]
    NotContractive(f64),
    #[error("f'(r) = {0:?} is not zero")]
    NotSuperlinear(f64),
    #[error("no radius in the schedule satisfies the {0} hypothesis")]
    NoRadius(&'static str),
    #[error("the run carries no trajectory")]
    MissingTrajectory,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Calc(#[from] CalcError),
}
