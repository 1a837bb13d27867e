use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{MethodError, RealFn};
use crate::lang::{parse_program, ulp, Program};

const SOURCE: &str = include_str!("../../programs/fixed_point.gcl");

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointResult {
    pub x: f64,
    pub x_new: f64,
    pub itr: u64,
    pub break_flag: u8,
    /// The break flag was raised; the loop then exits at the next head.
    pub converged: bool,
    /// `x` at every loop head: `x₀, f(x₀), …, fⁱᵗʳ(x₀)`.
    pub trajectory: Vec<f64>,
    /// `(x, x_new)` at the check that raised the break flag.
    pub trigger: Option<(f64, f64)>,
}

/// Statement-for-statement transcription of the fixed-point program.
pub fn fixed_point(
    f: &impl RealFn,
    x0: f64,
    tol: f64,
    max_iter: u64,
) -> Result<FixedPointResult, MethodError> {
    if !(tol > 0.0) {
        return Err(MethodError::Invalid(format!(
            "tolerance {tol:?} must be positive"
        )));
    }
    let mut x = x0;
    let mut x_new = f.eval(x)?;
    let mut itr = 0;
    let mut brk = 0u8;
    let mut trajectory = vec![x];
    let mut trigger = None;
    while itr < max_iter && brk == 0 {
        if (x_new - x).abs() < tol {
            brk = 1;
            trigger = Some((x, x_new));
        }
        x = x_new;
        x_new = f.eval(x)?;
        itr += 1;
        trajectory.push(x);
    }
    Ok(FixedPointResult {
        x,
        x_new,
        itr,
        break_flag: brk,
        converged: brk == 1,
        trajectory,
        trigger,
    })
}

/// The annotated fixed-point program with its four invariant conjuncts.
pub fn fixed_point_program() -> Program {
    parse_program(SOURCE).expect("bundled fixed-point program parses")
}

/// Largest sampled difference quotient `|f(s) − f(t)| / |s − t|` over the open
/// ball of radius `delta` about `r`. A lower bound on the Lipschitz constant.
pub fn contraction_estimate(
    f: &impl RealFn,
    r: f64,
    delta: f64,
    samples: usize,
    seed: u64,
) -> Result<f64, MethodError> {
    if !(delta > 0.0) {
        return Err(MethodError::Invalid(format!(
            "radius {delta:?} must be positive"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| loop {
        let u: f64 = rng.gen_range(-1.0..1.0);
        let x = r + delta * u;
        if u > -1.0 && (x - r).abs() < delta {
            return x;
        }
    };
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let s = point(&mut rng);
        let t = point(&mut rng);
        if s == t {
            continue;
        }
        let q = (f.eval(s)? - f.eval(t)?).abs() / (s - t).abs();
        best = best.max(q);
    }
    Ok(best)
}

pub(crate) fn require_fixed_point(f: &impl RealFn, r: f64) -> Result<(), MethodError> {
    let residual = f.eval(r)? - r;
    if !(residual.abs() <= 8.0 * ulp(r)) {
        return Err(MethodError::NotFixedPoint { r, residual });
    }
    Ok(())
}

/// True iff every one of `samples` equispaced points of the open ball keeps
/// `|fⁿ(x) − r| < δ` for all `n ≤ n_max`.
pub fn check_contraction_closure(
    f: &impl RealFn,
    r: f64,
    c: f64,
    delta: f64,
    n_max: u64,
    samples: usize,
) -> Result<bool, MethodError> {
    if !(0.0..1.0).contains(&c) {
        return Err(MethodError::Rate(c));
    }
    if !(delta > 0.0) {
        return Err(MethodError::Invalid(format!(
            "radius {delta:?} must be positive"
        )));
    }
    require_fixed_point(f, r)?;
    for i in 0..samples {
        let u = 2.0 * (i + 1) as f64 / (samples + 1) as f64 - 1.0;
        let mut x = r + delta * u;
        if (x - r).abs() >= delta {
            continue;
        }
        for _ in 0..n_max {
            x = f.eval(x)?;
            if !((x - r).abs() < delta) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
