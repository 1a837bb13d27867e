//! Error-bound certificates for fixed-point iteration.
//!
//! Each certificate replays one or more trajectories and compares the
//! measured error `|xₙ − r|` with the theoretical bound. Every comparison
//! carries a rounding slack of 16 ulps of `max(|x₀ − r|, |r|)`: the float
//! iteration settles within a few ulps of `r`, never exactly on it.

use super::fixed_point::{fixed_point, require_fixed_point};
use super::{MethodError, RealFn};
use crate::calculus::{jet_eval, jet_eval_in, nth_derivative, peano_remainder, Dd};
use crate::lang::{ulp, Env, FuncDef, Funcs};

/// Points per ball in the grid-sup estimates, endpoints included.
pub const GRID_POINTS: usize = 257;
/// Trajectory starts: every 16th grid point.
const START_STRIDE: usize = 16;
const SCHEDULE: std::ops::RangeInclusive<i32> = 1..=20;
const SLACK_ULPS: f64 = 16.0;
/// Quadratic ratios are reported only above this multiple of `ulp(r)`.
const RATIO_FLOOR_ULPS: f64 = 1024.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertKind {
    Linear,
    C1,
    Quadratic,
}

impl CertKind {
    pub fn name(self) -> &'static str {
        match self {
            CertKind::Linear => "linear",
            CertKind::C1 => "c1",
            CertKind::Quadratic => "quadratic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootSource {
    Supplied,
    Refined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: f64,
    pub source: RootSource,
}

impl Root {
    pub fn supplied(value: f64) -> Root {
        Root {
            value,
            source: RootSource::Supplied,
        }
    }
}

/// Newton's method on `f(x) − x` in double-double, started at `guess`.
pub fn refine_fixed_point(f: &FuncDef, guess: f64) -> Result<Root, MethodError> {
    let (env, funcs) = (Env::new(), Funcs::new());
    let mut x = Dd::new(guess);
    for _ in 0..100 {
        let j = jet_eval_in(&f.body, &f.param, x, 1, &env, &funcs)?;
        let slope = j.coeffs[1] - Dd::ONE;
        if slope == Dd::ZERO {
            return Err(MethodError::Invalid(format!(
                "refinement stalled: f'(x) = 1 at x = {:?}",
                x.to_f64()
            )));
        }
        let step = (j.coeffs[0] - x) / slope;
        x = x - step;
        if !x.is_finite() {
            return Err(MethodError::Invalid("refinement diverged".into()));
        }
        if step.abs().to_f64() <= 1e-32 * x.abs().to_f64().max(1e-300) {
            break;
        }
    }
    Ok(Root {
        value: x.to_f64(),
        source: RootSource::Refined,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertRow {
    pub k: u64,
    pub measured: f64,
    pub bound: f64,
    pub holds: bool,
    /// `Eₖ / Eₖ₋₁²` (quadratic certificates, above the rounding floor).
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x0: f64,
    pub slack: f64,
    pub rows: Vec<CertRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub kind: CertKind,
    pub r: f64,
    pub root_source: RootSource,
    /// `c`, `1 − ε`, or `(|f″(r)| + ε)/2`.
    pub rate: f64,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub f2_abs: Option<f64>,
    pub trajectories: Vec<Trajectory>,
    /// Every row of every trajectory satisfies its bound.
    pub holds: bool,
    /// Largest recorded `Eₖ / Eₖ₋₁²`.
    pub max_ratio: Option<f64>,
}

fn slack(x0: f64, r: f64) -> f64 {
    SLACK_ULPS * ulp((x0 - r).abs().max(r.abs()))
}

/// Rows for `|xₙ − r| ≤ rateⁿ·|x₀ − r|`.
fn geometric(traj: &[f64], r: f64, rate: f64) -> Trajectory {
    let x0 = traj[0];
    let e0 = (x0 - r).abs();
    let s = slack(x0, r);
    let rows = traj
        .iter()
        .enumerate()
        .map(|(n, x)| {
            let measured = (x - r).abs();
            let bound = rate.powi(n as i32) * e0;
            CertRow {
                k: n as u64,
                measured,
                bound,
                holds: measured <= bound + s,
                ratio: None,
            }
        })
        .collect();
    Trajectory { x0, slack: s, rows }
}

/// Rows for `Eₖ ≤ M^(2ᵏ−1)·E₀^(2ᵏ)`, via `bₖ = M·bₖ₋₁²`.
fn quadratic(traj: &[f64], r: f64, m: f64) -> Trajectory {
    let x0 = traj[0];
    let s = slack(x0, r);
    let floor = RATIO_FLOOR_ULPS * ulp(r).max(f64::MIN_POSITIVE);
    let mut bound = (x0 - r).abs();
    let mut prev: Option<f64> = None;
    let mut rows = Vec::with_capacity(traj.len());
    for (k, x) in traj.iter().enumerate() {
        let measured = (x - r).abs();
        if k > 0 {
            bound = m * bound * bound;
        }
        let ratio = match prev {
            Some(p) if p > 0.0 && measured > floor => Some(measured / (p * p)),
            _ => None,
        };
        rows.push(CertRow {
            k: k as u64,
            measured,
            bound,
            holds: measured <= bound + s,
            ratio,
        });
        prev = Some(measured);
    }
    Trajectory { x0, slack: s, rows }
}

fn finish(mut cert: Certificate) -> Certificate {
    cert.holds = cert
        .trajectories
        .iter()
        .all(|t| t.rows.iter().all(|r| r.holds));
    cert.max_ratio = cert
        .trajectories
        .iter()
        .flat_map(|t| t.rows.iter().filter_map(|r| r.ratio))
        .reduce(f64::max);
    cert
}

/// `|xₙ − r| ≤ cⁿ·|x₀ − r|` along a recorded run.
pub fn linear_error_certificate(
    f: &impl RealFn,
    root: Root,
    c: f64,
    run: &super::FixedPointResult,
) -> Result<Certificate, MethodError> {
    if !(0.0..1.0).contains(&c) {
        return Err(MethodError::Rate(c));
    }
    require_fixed_point(f, root.value)?;
    if run.trajectory.is_empty() {
        return Err(MethodError::MissingTrajectory);
    }
    Ok(finish(Certificate {
        kind: CertKind::Linear,
        r: root.value,
        root_source: root.source,
        rate: c,
        delta: None,
        epsilon: None,
        f2_abs: None,
        trajectories: vec![geometric(&run.trajectory, root.value, c)],
        holds: false,
        max_ratio: None,
    }))
}

fn grid(r: f64, delta: f64) -> impl Iterator<Item = f64> {
    let n = (GRID_POINTS - 1) as f64;
    (0..GRID_POINTS).map(move |i| r - delta + 2.0 * delta * (i as f64 / n))
}

fn derivative(f: &FuncDef, n: usize, x: f64) -> Result<f64, MethodError> {
    Ok(nth_derivative(
        &f.body,
        &f.param,
        n,
        x,
        &Env::new(),
        &Funcs::new(),
    )?)
}

/// Grid supremum of `|f′|` on the ball, or `None` where a jet fails.
fn sup_derivative(f: &FuncDef, r: f64, delta: f64) -> Option<f64> {
    grid(r, delta)
        .map(|x| derivative(f, 1, x).ok().map(f64::abs))
        .try_fold(0.0, |acc: f64, v| v.map(|v| acc.max(v)))
}

/// Grid supremum of `|h₂|` (the Peano remainder of order 2 at `r`).
fn sup_remainder(f: &FuncDef, r: f64, delta: f64) -> Option<f64> {
    grid(r, delta)
        .filter(|x| *x != r)
        .map(|x| {
            peano_remainder(&f.body, &f.param, 2, r, x, &Env::new(), &Funcs::new())
                .ok()
                .map(f64::abs)
        })
        .try_fold(0.0, |acc: f64, v| v.map(|v| acc.max(v)))
}

fn starts(r: f64, delta: f64) -> Vec<f64> {
    grid(r, delta).step_by(START_STRIDE).collect()
}

fn trajectories(
    f: &FuncDef,
    xs: &[f64],
    tol: f64,
    max_iter: u64,
) -> Result<Vec<Vec<f64>>, MethodError> {
    xs.iter()
        .map(|x0| Ok(fixed_point(f, *x0, tol, max_iter)?.trajectory))
        .collect()
}

/// First `(δ, ε)` of the schedule with grid-sup `|f′| ≤ 1 − ε` on the ball.
fn c1_radius(f: &FuncDef, r: f64) -> Result<(i32, f64, f64), MethodError> {
    let d1 = derivative(f, 1, r)?.abs();
    if !(d1 < 1.0) {
        return Err(MethodError::NotContractive(d1));
    }
    let eps = (1.0 - d1) / 2.0;
    let scale = r.abs().max(1.0);
    for i in SCHEDULE {
        let delta = 2f64.powi(-i) * scale;
        if matches!(sup_derivative(f, r, delta), Some(s) if s <= 1.0 - eps) {
            return Ok((i, delta, eps));
        }
    }
    Err(MethodError::NoRadius("C¹ contraction"))
}

/// The `(1 − ε)`-rate certificate on the largest scheduled ball where
/// `|f′| ≤ 1 − ε`, with `ε = (1 − |f′(r)|)/2`.
pub fn c1_certificate(
    f: &FuncDef,
    root: Root,
    tol: f64,
    max_iter: u64,
) -> Result<Certificate, MethodError> {
    let r = root.value;
    require_fixed_point(f, r)?;
    let (_, delta, eps) = c1_radius(f, r)?;
    let rate = 1.0 - eps;
    let trajectories = trajectories(f, &starts(r, delta), tol, max_iter)?
        .iter()
        .map(|t| geometric(t, r, rate))
        .collect();
    Ok(finish(Certificate {
        kind: CertKind::C1,
        r,
        root_source: root.source,
        rate,
        delta: Some(delta),
        epsilon: Some(eps),
        f2_abs: None,
        trajectories,
        holds: false,
        max_ratio: None,
    }))
}

/// Derivative bound above which `f′(r)` does not count as zero.
const FLAT: f64 = 1e-10;

/// `Eₖ ≤ ((|f″(r)| + ε)/2)^(2ᵏ−1)·E₀^(2ᵏ)` on a ball where also `|h₂| < ε/2`.
pub fn quadratic_certificate(
    f: &FuncDef,
    root: Root,
    tol: f64,
    max_iter: u64,
) -> Result<Certificate, MethodError> {
    let r = root.value;
    require_fixed_point(f, r)?;
    let j = jet_eval(&f.body, &f.param, r, 2, &Env::new(), &Funcs::new())?;
    let d1 = j.derivative(1);
    if !(d1.abs() <= FLAT) {
        return Err(MethodError::NotSuperlinear(d1));
    }
    let f2 = j.derivative(2).abs();
    let (first, _, eps) = c1_radius(f, r)?;
    let scale = r.abs().max(1.0);
    let delta = (first..=*SCHEDULE.end())
        .map(|i| 2f64.powi(-i) * scale)
        .find(|d| matches!(sup_remainder(f, r, *d), Some(s) if s < eps / 2.0))
        .ok_or(MethodError::NoRadius("quadratic remainder"))?;
    let m = (f2 + eps) / 2.0;
    let trajectories = trajectories(f, &starts(r, delta), tol, max_iter)?
        .iter()
        .map(|t| quadratic(t, r, m))
        .collect();
    Ok(finish(Certificate {
        kind: CertKind::Quadratic,
        r,
        root_source: root.source,
        rate: m,
        delta: Some(delta),
        epsilon: Some(eps),
        f2_abs: Some(f2),
        trajectories,
        holds: false,
        max_ratio: None,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_base_case_and_equality_case() {
        let half = FuncDef::parse("x/2").unwrap();
        let run = fixed_point(&half, 1.0, 1e-300, 30).unwrap();
        let cert = linear_error_certificate(&half, Root::supplied(0.0), 0.5, &run).unwrap();
        assert!(cert.holds);
        let rows = &cert.trajectories[0].rows;
        assert_eq!(rows[0].measured, rows[0].bound);
        for row in rows {
            assert_eq!(row.measured, 2f64.powi(-(row.k as i32)));
            assert_eq!(row.measured, row.bound);
        }
    }

    #[test]
    fn linear_preconditions() {
        let half = FuncDef::parse("x/2").unwrap();
        let run = fixed_point(&half, 1.0, 1e-3, 30).unwrap();
        assert!(matches!(
            linear_error_certificate(&half, Root::supplied(0.0), 1.0, &run),
            Err(MethodError::Rate(_))
        ));
        assert!(matches!(
            linear_error_certificate(&half, Root::supplied(0.1), 0.5, &run),
            Err(MethodError::NotFixedPoint { .. })
        ));
        let mut empty = run.clone();
        empty.trajectory.clear();
        assert!(matches!(
            linear_error_certificate(&half, Root::supplied(0.0), 0.5, &empty),
            Err(MethodError::MissingTrajectory)
        ));
    }

    #[test]
    fn linear_bound_on_newton_for_three() {
        let g = FuncDef::parse("(3/x + x)/2").unwrap();
        let r = 3f64.sqrt();
        let c = super::super::contraction_estimate(&g, r, 0.2, 500, 0xC0FFEE).unwrap();
        let run = fixed_point(&g, 1.6, 0.001, 10).unwrap();
        let cert = linear_error_certificate(&g, Root::supplied(r), c, &run).unwrap();
        assert!(cert.holds, "{cert:?}");
    }

    #[test]
    fn c1_on_an_affine_contraction() {
        let f = FuncDef::parse("x/2 + 1").unwrap();
        let cert = c1_certificate(&f, Root::supplied(2.0), 1e-12, 60).unwrap();
        assert_eq!(cert.epsilon, Some(0.25));
        assert_eq!(cert.delta, Some(1.0));
        assert!(cert.holds);
        assert_eq!(cert.trajectories.len(), 17);
    }

    #[test]
    fn c1_on_newton_for_three() {
        let g = FuncDef::parse("(3/x + x)/2").unwrap();
        let cert = c1_certificate(&g, Root::supplied(3f64.sqrt()), 1e-12, 30).unwrap();
        // g′(√3) = 0 up to rounding of r.
        assert!((cert.epsilon.unwrap() - 0.5).abs() < 1e-15);
        assert!(cert.holds);
    }

    #[test]
    fn c1_rejects_an_expansion() {
        let f = FuncDef::parse("2*x").unwrap();
        assert!(matches!(
            c1_certificate(&f, Root::supplied(0.0), 1e-6, 10),
            Err(MethodError::NotContractive(d)) if d == 2.0
        ));
    }

    #[test]
    fn quadratic_on_newton_for_three() {
        let g = FuncDef::parse("(3/x + x)/2").unwrap();
        let r = refine_fixed_point(&g, 1.7).unwrap();
        assert_eq!(r.source, RootSource::Refined);
        assert_eq!(r.value, 3f64.sqrt());
        let cert = quadratic_certificate(&g, r, 1e-14, 20).unwrap();
        assert!(cert.holds, "{cert:?}");
        // f″(√3) = 3/r³ = 1/√3.
        assert!((cert.f2_abs.unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(cert.max_ratio.unwrap() <= cert.rate + 1e-3);
        let first = &cert.trajectories[0].rows[0];
        assert_eq!(first.measured, first.bound);
    }

    #[test]
    fn quadratic_on_squaring() {
        let f = FuncDef::parse("x^2").unwrap();
        let cert = quadratic_certificate(&f, Root::supplied(0.0), 1e-300, 12).unwrap();
        assert!(cert.holds, "{cert:?}");
        assert_eq!(cert.f2_abs, Some(2.0));
    }

    #[test]
    fn quadratic_needs_a_flat_derivative() {
        let f = FuncDef::parse("x/2").unwrap();
        assert!(matches!(
            quadratic_certificate(&f, Root::supplied(0.0), 1e-6, 10),
            Err(MethodError::NotSuperlinear(_))
        ));
    }

    #[test]
    fn refinement_without_a_fixed_point_fails() {
        let f = FuncDef::parse("x + 1").unwrap();
        assert!(refine_fixed_point(&f, 0.0).is_err());
    }
}
