//! Taylor polynomials, the Lagrange form of the remainder and the Peano probe.
//!
//! Remainders are formed in double-double: `f(x) − Sₙ(x)` cancels almost
//! completely near the center, and binary64 would leave only rounding noise.

use super::jet::{eval_real, jet_eval, jet_eval_in};
use super::{CalcError, Dd};
use crate::lang::{Env, Expr, Funcs};

/// Default probe radii `2⁻¹, 2⁻², …, 2⁻²⁴`.
pub fn default_radii() -> Vec<f64> {
    (1..=24).map(|i| 2f64.powi(-i)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorPoly {
    pub center: f64,
    /// `coeffs[m] = f⁽ᵐ⁾(center) / m!`.
    pub coeffs: Vec<f64>,
}

impl TaylorPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let d = x - self.center;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * d + c)
    }
}

pub fn taylor_poly(
    e: &Expr,
    var: &str,
    c: f64,
    n: usize,
    env: &Env,
    funcs: &Funcs,
) -> Result<TaylorPoly, CalcError> {
    let j = jet_eval(e, var, c, n, env, funcs)?;
    Ok(TaylorPoly {
        center: c,
        coeffs: j.coeffs,
    })
}

fn horner(coeffs: &[Dd], d: Dd) -> Dd {
    coeffs.iter().rev().fold(Dd::ZERO, |acc, c| acc * d + *c)
}

/// `f(x) − S_m(x)` in double-double, with `S_m` the degree-m Taylor polynomial at `c`.
fn remainder(
    e: &Expr,
    var: &str,
    m: usize,
    c: f64,
    x: f64,
    env: &Env,
    funcs: &Funcs,
) -> Result<Dd, CalcError> {
    let fx = eval_real(e, var, Dd::new(x), env, funcs)?;
    let jc = jet_eval_in(e, var, Dd::new(c), m, env, funcs)?;
    Ok(fx - horner(&jc.coeffs, Dd::new(x) - Dd::new(c)))
}

/// `hₙ(x) = (f(x) − Sₙ(x)) / (x − c)ⁿ`.
pub fn peano_remainder(
    e: &Expr,
    var: &str,
    n: usize,
    c: f64,
    x: f64,
    env: &Env,
    funcs: &Funcs,
) -> Result<f64, CalcError> {
    if x == c {
        return Err(CalcError::Invalid("the remainder needs x ≠ c".into()));
    }
    let r = remainder(e, var, n, c, x, env, funcs)?;
    let d = Dd::new(x) - Dd::new(c);
    Ok((r / d.powi(n as i32)).to_f64())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeWitness {
    /// Strictly between `c` and `x`.
    pub t: f64,
    /// `|g(t)|` with `g(t) = f(x) − Sₙ₋₁(x) − f⁽ⁿ⁾(t)/n! · (x − c)ⁿ`.
    pub residual: f64,
    /// A sign change of `g` was found and bisected.
    pub bracketed: bool,
    pub localized: bool,
}

const GRID: usize = 256;

/// Locates `t` with `f(x) = Sₙ₋₁(x) + f⁽ⁿ⁾(t)/n! · (x − c)ⁿ`.
///
/// Scans 255 interior grid points for a sign change of `g` and bisects it;
/// otherwise returns the grid minimiser of `|g|`, localized iff `|g| ≤ tol_t`.
#[allow(clippy::too_many_arguments)]
pub fn lagrange_witness(
    e: &Expr,
    var: &str,
    n: usize,
    c: f64,
    x: f64,
    tol_t: f64,
    env: &Env,
    funcs: &Funcs,
) -> Result<LagrangeWitness, CalcError> {
    if n == 0 {
        return Err(CalcError::Invalid("the Lagrange form needs n ≥ 1".into()));
    }
    if x == c {
        return Err(CalcError::Invalid("the Lagrange form needs x ≠ c".into()));
    }
    let r = remainder(e, var, n - 1, c, x, env, funcs)?;
    let dn = (Dd::new(x) - Dd::new(c)).powi(n as i32);
    let g = |t: f64| -> Result<Dd, CalcError> {
        let j = jet_eval_in(e, var, Dd::new(t), n, env, funcs)?;
        Ok(r - j.coeffs[n] * dn)
    };
    let ts: Vec<f64> = (1..GRID)
        .map(|i| c + (x - c) * (i as f64 / GRID as f64))
        .collect();
    let gs = ts.iter().map(|t| g(*t)).collect::<Result<Vec<_>, _>>()?;
    let found = |t: f64, v: Dd, bracketed: bool| LagrangeWitness {
        t,
        residual: v.abs().to_f64(),
        bracketed,
        localized: bracketed || v.abs().to_f64() <= tol_t,
    };
    if let Some(i) = gs.iter().position(|v| *v == Dd::ZERO) {
        return Ok(found(ts[i], gs[i], true));
    }
    let sign = |v: Dd| v > Dd::ZERO;
    if let Some(i) = (0..ts.len() - 1).find(|i| sign(gs[*i]) != sign(gs[i + 1])) {
        let (mut lo, mut hi) = (ts[i], ts[i + 1]);
        let lo_sign = sign(gs[i]);
        for _ in 0..200 {
            let mid = lo + (hi - lo) / 2.0;
            if mid == lo || mid == hi {
                break;
            }
            let v = g(mid)?;
            if v == Dd::ZERO {
                return Ok(found(mid, v, true));
            }
            if sign(v) == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (vl, vh) = (g(lo)?, g(hi)?);
        return Ok(if vl.abs() <= vh.abs() {
            found(lo, vl, true)
        } else {
            found(hi, vh, true)
        });
    }
    let (i, _) = gs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).expect("finite residual"))
        .expect("nonempty grid");
    Ok(found(ts[i], gs[i], false))
}

/// `|hₙ(x) − (f⁽ⁿ⁾(t) − f⁽ⁿ⁾(c))/n!|` for a localized Lagrange witness `t`, else `None`.
#[allow(clippy::too_many_arguments)]
pub fn peano_lagrange_gap(
    e: &Expr,
    var: &str,
    n: usize,
    c: f64,
    x: f64,
    tol_t: f64,
    env: &Env,
    funcs: &Funcs,
) -> Result<Option<f64>, CalcError> {
    let w = lagrange_witness(e, var, n, c, x, tol_t, env, funcs)?;
    if !w.localized {
        return Ok(None);
    }
    let h = peano_remainder(e, var, n, c, x, env, funcs)?;
    let at_t = jet_eval_in(e, var, Dd::new(w.t), n, env, funcs)?.coeffs[n];
    let at_c = jet_eval_in(e, var, Dd::new(c), n, env, funcs)?.coeffs[n];
    Ok(Some((h - (at_t - at_c).to_f64()).abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub radius: f64,
    pub plus: f64,
    pub minus: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub n: usize,
    pub center: f64,
    pub threshold: f64,
    pub rows: Vec<ProbeRow>,
    /// Largest `|hₙ|` over the four smallest radii.
    pub tail_max: f64,
    /// Per-radius maxima do not grow after their peak.
    pub monotone: bool,
    pub pass: bool,
}

/// Sampled evidence that `hₙ(x) → 0` as `x → c`.
///
/// Passes iff the maxima over the four smallest radii stay below `threshold`
/// and the per-radius maxima are non-increasing after their peak. Increases
/// below `threshold · 1e-3` are treated as rounding noise.
#[allow(clippy::too_many_arguments)]
pub fn peano_limit_probe(
    e: &Expr,
    var: &str,
    n: usize,
    c: f64,
    radii: &[f64],
    threshold: f64,
    env: &Env,
    funcs: &Funcs,
) -> Result<ProbeReport, CalcError> {
    if radii.len() < 4
        || radii.windows(2).any(|w| !(w[1] < w[0]))
        || !(radii[radii.len() - 1] > 0.0)
    {
        return Err(CalcError::Invalid(
            "the probe needs at least four positive, strictly decreasing radii".into(),
        ));
    }
    // The n-th derivative must exist at the center.
    jet_eval(e, var, c, n, env, funcs)?;
    let scale = c.abs().max(1.0);
    let rows = radii
        .iter()
        .map(|r| {
            let r = r * scale;
            let plus = peano_remainder(e, var, n, c, c + r, env, funcs)?.abs();
            let minus = peano_remainder(e, var, n, c, c - r, env, funcs)?.abs();
            Ok(ProbeRow {
                radius: r,
                plus,
                minus,
                max: plus.max(minus),
            })
        })
        .collect::<Result<Vec<_>, CalcError>>()?;
    let tail_max = rows[rows.len() - 4..]
        .iter()
        .map(|r| r.max)
        .fold(0.0, f64::max);
    let peak = rows.iter().enumerate().fold(
        0,
        |best, (i, r)| if r.max > rows[best].max { i } else { best },
    );
    let floor = threshold * 1e-3;
    let monotone = rows[peak..]
        .windows(2)
        .all(|w| w[1].max <= w[0].max || w[1].max <= floor);
    Ok(ProbeReport {
        n,
        center: c,
        threshold,
        rows,
        tail_max,
        monotone,
        pass: tail_max <= threshold && monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_expr;

    fn env() -> (Env, Funcs) {
        (Env::new(), Funcs::new())
    }

    #[test]
    fn taylor_polynomial_of_exp() {
        let (env, funcs) = env();
        let p = taylor_poly(&parse_expr("exp(x)").unwrap(), "x", 0.0, 4, &env, &funcs).unwrap();
        assert_eq!(p.degree(), 4);
        assert_eq!(p.coeffs[..3], [1.0, 1.0, 0.5]);
        assert!((p.eval(0.1) - 1.1051708333333334).abs() < 4e-16);
    }

    #[test]
    fn lagrange_witness_for_a_cubic() {
        let (env, funcs) = env();
        // x³ = 0 + 0·x + 3t · x², so t = x/3.
        let w = lagrange_witness(
            &parse_expr("x^3").unwrap(),
            "x",
            2,
            0.0,
            0.9,
            1e-12,
            &env,
            &funcs,
        )
        .unwrap();
        assert!(w.localized && w.bracketed);
        assert!((w.t - 0.3).abs() < 1e-8, "{w:?}");
    }

    #[test]
    fn lagrange_witness_for_exp() {
        let (env, funcs) = env();
        let w = lagrange_witness(
            &parse_expr("exp(x)").unwrap(),
            "x",
            1,
            0.0,
            1.0,
            1e-12,
            &env,
            &funcs,
        )
        .unwrap();
        let want = (std::f64::consts::E - 1.0).ln();
        assert!((w.t - want).abs() < 1e-12, "{w:?}");
        assert!(w.t > 0.0 && w.t < 1.0);
    }

    #[test]
    fn lagrange_witness_when_every_point_works() {
        let (env, funcs) = env();
        let w = lagrange_witness(
            &parse_expr("x^2").unwrap(),
            "x",
            2,
            0.0,
            1.0,
            1e-12,
            &env,
            &funcs,
        )
        .unwrap();
        assert_eq!(w.residual, 0.0);
        assert!(w.t > 0.0 && w.t < 1.0);
    }

    #[test]
    fn peano_remainder_of_a_polynomial_vanishes() {
        let (env, funcs) = env();
        let e = parse_expr("2*x^3 - x + 5").unwrap();
        for x in [1.5, -0.25, 1e-6] {
            assert!(
                peano_remainder(&e, "x", 3, 0.5, x, &env, &funcs)
                    .unwrap()
                    .abs()
                    < 1e-20
            );
        }
        assert!(peano_remainder(&e, "x", 1, 0.5, 0.5, &env, &funcs).is_err());
    }

    #[test]
    fn probe_rejects_a_kink() {
        let (env, funcs) = env();
        let r = peano_limit_probe(
            &parse_expr("abs(x)").unwrap(),
            "x",
            1,
            0.0,
            &default_radii(),
            1e-6,
            &env,
            &funcs,
        );
        assert!(matches!(r, Err(CalcError::NonSmooth { .. })));
    }

    #[test]
    fn probe_passes_for_sine() {
        let (env, funcs) = env();
        let r = peano_limit_probe(
            &parse_expr("sin(x)").unwrap(),
            "x",
            3,
            0.0,
            &default_radii(),
            1e-6,
            &env,
            &funcs,
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.rows.len(), 24);
    }

    #[test]
    fn probe_fails_when_the_remainder_stalls() {
        let (env, funcs) = env();
        // h₁(x) ≈ 1250·x is still far above the threshold at 2⁻²¹.
        let e = parse_expr("exp(50*x)").unwrap();
        let r = peano_limit_probe(&e, "x", 1, 0.0, &default_radii(), 1e-6, &env, &funcs).unwrap();
        assert!(!r.pass);
        assert!(r.tail_max > 1e-6);
    }
}
