//! Higher derivatives of expression trees by truncated Taylor arithmetic,
//! a finite-difference cross-check, Taylor polynomials and remainder probes.

pub mod dd;
mod fd;
mod jet;
mod taylor;

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub use dd::Dd;
pub use fd::{fd_step, nth_derivative_fd};
pub use jet::{
    eval_real, jet_eval, jet_eval_in, leibniz_product_check, nth_derivative, Jet, LeibnizCheck,
};
pub use taylor::{
    default_radii, lagrange_witness, peano_lagrange_gap, peano_limit_probe, peano_remainder,
    taylor_poly, LagrangeWitness, ProbeReport, ProbeRow, TaylorPoly,
};

use crate::lang::EvalError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CalcError {
    #[error("{node} is not differentiable at {at:?}")]
    NonSmooth { node: &'static str, at: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("jet order {order} exceeds the cap {cap}")]
    OrderCap { order: usize, cap: usize },
    #[error("{0}")]
    Invalid(String),
}

/// Finite-difference step policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FdStep {
    Absolute(f64),
    /// `h = max(1, |a|) · ε^(1/(n+2))`.
    ScaleRelative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffConfig {
    pub step: FdStep,
    /// Probe radii before scaling by `max(1, |c|)`; strictly decreasing.
    pub radii: Vec<f64>,
}

impl Default for DiffConfig {
    fn default() -> DiffConfig {
        DiffConfig {
            step: FdStep::ScaleRelative,
            radii: default_radii(),
        }
    }
}

impl DiffConfig {
    pub fn validate(&self) -> Result<(), CalcError> {
        if let FdStep::Absolute(h) = self.step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CalcError::Invalid(format!("step {h} must be positive")));
            }
        }
        if self.radii.is_empty()
            || self.radii.iter().any(|r| !(*r > 0.0))
            || self.radii.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(CalcError::Invalid(
                "probe radii must be positive and strictly decreasing".into(),
            ));
        }
        Ok(())
    }
}

/// Field operations shared by binary64 and double-double evaluation.
pub trait Scalar:
    Copy
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn log2(self) -> Self;
    fn powf(self, y: Self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn floor(self) -> Self;
    fn ceil(self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, k: i32) -> Self;
    fn ln2() -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    /// `Σ a[i]·b[i]`.
    fn dot(a: &[Self], b: &[Self]) -> Self {
        a.iter()
            .zip(b)
            .fold(Self::zero(), |acc, (x, y)| acc + *x * *y)
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> f64 {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn exp(self) -> f64 {
        f64::exp(self)
    }
    fn ln(self) -> f64 {
        f64::ln(self)
    }
    fn log2(self) -> f64 {
        f64::log2(self)
    }
    fn powf(self, y: f64) -> f64 {
        f64::powf(self, y)
    }
    fn sin(self) -> f64 {
        f64::sin(self)
    }
    fn cos(self) -> f64 {
        f64::cos(self)
    }
    fn floor(self) -> f64 {
        f64::floor(self)
    }
    fn ceil(self) -> f64 {
        f64::ceil(self)
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn powi(self, k: i32) -> f64 {
        f64::powi(self, k)
    }
    fn ln2() -> f64 {
        std::f64::consts::LN_2
    }

    /// Compensated dot product: as accurate as if computed in twice the
    /// working precision and rounded once.
    fn dot(a: &[f64], b: &[f64]) -> f64 {
        let mut p = 0.0;
        let mut s = 0.0;
        for (x, y) in a.iter().zip(b) {
            let h = x * y;
            let r = x.mul_add(*y, -h);
            let sum = p + h;
            let bb = sum - p;
            let q = (p - (sum - bb)) + (h - bb);
            p = sum;
            s += q + r;
        }
        p + s
    }
}

impl Scalar for Dd {
    fn from_f64(x: f64) -> Dd {
        Dd::new(x)
    }
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }
    fn exp(self) -> Dd {
        Dd::exp(self)
    }
    fn ln(self) -> Dd {
        Dd::ln(self)
    }
    fn log2(self) -> Dd {
        Dd::ln(self) / Dd::LN2
    }
    fn powf(self, y: Dd) -> Dd {
        (y * Dd::ln(self)).exp()
    }
    fn sin(self) -> Dd {
        Dd::sin(self)
    }
    fn cos(self) -> Dd {
        Dd::cos(self)
    }
    fn floor(self) -> Dd {
        Dd::floor(self)
    }
    fn ceil(self) -> Dd {
        Dd::ceil(self)
    }
    fn abs(self) -> Dd {
        Dd::abs(self)
    }
    fn powi(self, k: i32) -> Dd {
        Dd::powi(self, k)
    }
    fn ln2() -> Dd {
        Dd::LN2
    }
}

/// `n!` as a binary64 value (exact for n ≤ 22).
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient as a binary64 value (exact while it fits in 53 bits).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}
