use super::{MethodError, RealFn};
use crate::lang::{parse_program, Program};

const SOURCE: &str = include_str!("../../programs/bisection.gcl");

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionResult {
    pub xmid: f64,
    pub lower: f64,
    pub upper: f64,
    pub fa: f64,
    pub fb: f64,
    pub iter: u64,
    pub predicted_iter: u64,
    pub bracket_width: f64,
    /// `(lower, upper)` at every loop head, starting with `(a, b)`.
    pub brackets: Vec<(f64, f64)>,
}

fn opposite(fa: f64, fb: f64) -> bool {
    (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)
}

fn check_interval(a: f64, b: f64, tol: f64) -> Result<f64, MethodError> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(MethodError::DegenerateBracket { a, b });
    }
    let width = b - a;
    if !(tol > 0.0 && tol < width) {
        return Err(MethodError::Tolerance { tol, width });
    }
    Ok(width)
}

/// Least `k` with `(b - a) / 2^k ≤ tol`, by repeated halving of `b - a`.
///
/// Halving a binary64 value is exact above the subnormal range, so this is
/// the exact count for the rounded width.
pub fn predicted_iterations(a: f64, b: f64, tol: f64) -> Result<u64, MethodError> {
    let mut w = check_interval(a, b, tol)?;
    let mut k = 0;
    while w > tol {
        w /= 2.0;
        k += 1;
    }
    Ok(k)
}

/// Statement-for-statement transcription of the bisection program.
pub fn bisect(f: &impl RealFn, a: f64, b: f64, tol: f64) -> Result<BisectionResult, MethodError> {
    let predicted_iter = predicted_iterations(a, b, tol)?;
    let mut iter = 0u64;
    let mut fa = f.eval(a)?;
    let mut fb = f.eval(b)?;
    if !opposite(fa, fb) {
        return Err(MethodError::NoSignChange { fa, fb });
    }
    let mut lower = a;
    let mut upper = b;
    let mut xmid = lower;
    // ymid := f(xmid); overwritten before its first use.
    f.eval(xmid)?;
    let mut brackets = vec![(lower, upper)];
    while upper - lower > tol {
        iter += 1;
        xmid = (lower + upper) / 2.0;
        if xmid <= lower || xmid >= upper {
            return Err(MethodError::Stalled { iter });
        }
        let ymid = f.eval(xmid)?;
        if fa * ymid > 0.0 {
            lower = xmid;
            fa = ymid;
        } else {
            upper = xmid;
            fb = ymid;
        }
        brackets.push((lower, upper));
    }
    Ok(BisectionResult {
        xmid,
        lower,
        upper,
        fa,
        fb,
        iter,
        predicted_iter,
        bracket_width: upper - lower,
        brackets,
    })
}

/// The annotated bisection program with its nine invariant conjuncts and variant.
pub fn bisection_program() -> Program {
    parse_program(SOURCE).expect("bundled bisection program parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{ceil_log2_ratio, well_formed, EvalError, FuncDef};
    use proptest::prelude::*;

    fn sqrt2() -> FuncDef {
        FuncDef::parse("x^2 - 2").unwrap()
    }

    #[test]
    fn square_root_of_two() {
        let r = bisect(&sqrt2(), 1.0, 1.5, 1e-4).unwrap();
        assert_eq!(r.iter, 13);
        assert_eq!(r.predicted_iter, 13);
        // Hand simulation of the loop: xmid is the 13th midpoint, which became `upper`.
        assert_eq!(r.xmid, 1.41424560546875);
        assert_eq!((r.lower, r.upper), (1.4141845703125, 1.41424560546875));
        // The midpoint of the final bracket is the reported approximate root.
        assert!(((r.lower + r.upper) / 2.0 - 1.41421508789).abs() < 1e-9);
        assert!(r.bracket_width <= 1e-4);
        assert!(r.lower <= r.xmid && r.xmid <= r.upper);
    }

    #[test]
    fn linear_root_stays_bracketed() {
        let f = |x: f64| Ok::<f64, EvalError>(x);
        let r = bisect(&f, -1.0, 2.0, 0.5).unwrap();
        assert!(r.brackets.iter().all(|(l, u)| *l <= 0.0 && 0.0 <= *u));
        assert!(r.xmid.abs() <= 0.5);
    }

    #[test]
    fn precondition_errors() {
        assert!(matches!(
            bisect(&sqrt2(), 1.0, 1.5, 0.6),
            Err(MethodError::Tolerance { .. })
        ));
        assert!(matches!(
            bisect(&sqrt2(), 1.0, 1.5, 0.0),
            Err(MethodError::Tolerance { .. })
        ));
        assert!(matches!(
            bisect(&sqrt2(), 1.5, 1.0, 0.1),
            Err(MethodError::DegenerateBracket { .. })
        ));
        assert!(matches!(
            bisect(&sqrt2(), 2.0, 3.0, 0.1),
            Err(MethodError::NoSignChange { .. })
        ));
    }

    #[test]
    fn midpoint_root_takes_the_else_branch() {
        // f(0.5) = 0: the strict test sends the midpoint to `upper`.
        let f = |x: f64| Ok::<f64, EvalError>(x - 0.5);
        let r = bisect(&f, 0.0, 1.0, 0.3).unwrap();
        assert_eq!(r.brackets[1], (0.0, 0.5));
        assert_eq!(r.fb, 0.0);
    }

    #[test]
    fn predicted_counts() {
        assert_eq!(predicted_iterations(1.0, 1.5, 1e-4).unwrap(), 13);
        assert_eq!(predicted_iterations(0.0, 1.0, 0.5).unwrap(), 1);
        assert_eq!(predicted_iterations(0.0, 1.0, 2f64.powi(-20)).unwrap(), 20);
    }

    #[test]
    fn program_is_well_formed() {
        let p = bisection_program();
        assert!(well_formed(&p).is_empty());
        let text = p.to_string();
        assert!(text.contains("fa * fb ≤ 0"), "{text}");
        assert!(
            text.contains("iter = 0 ∨ 2 * (upper - lower) > tol"),
            "{text}"
        );
    }

    proptest! {
        #[test]
        fn halving_count_matches_exact_logarithm(
            a in -100.0f64..100.0,
            w in 1e-6f64..100.0,
            frac in 1e-9f64..1.0,
        ) {
            let b = a + w;
            let width = b - a;
            let tol = width * frac;
            prop_assume!(tol > 0.0 && tol < width);
            let k = predicted_iterations(a, b, tol).unwrap();
            let want = ceil_log2_ratio(width, tol).unwrap().max(0) as u64;
            prop_assert_eq!(k, want);
        }

        #[test]
        fn bracket_halves_and_keeps_the_sign_change(
            m in 1i64..4000,
            n in 0i64..64,
            e in 1i32..12,
            tol_frac in 1e-6f64..0.99,
        ) {
            // Dyadic endpoints keep every midpoint exact.
            let a = 1.0 - m as f64 * 2f64.powi(-12);
            let b = 1.5 + n as f64 * 2f64.powi(-e);
            let tol = (b - a) * tol_frac;
            let f = sqrt2();
            let r = bisect(&f, a, b, tol).unwrap();
            prop_assert_eq!(r.iter, r.predicted_iter);
            for w in r.brackets.windows(2) {
                let (l0, u0) = w[0];
                let (l1, u1) = w[1];
                prop_assert_eq!(u1 - l1, (u0 - l0) / 2.0);
                let (fl, fu) = (f.eval(l1).unwrap(), f.eval(u1).unwrap());
                prop_assert!(fl * fu <= 0.0);
            }
        }
    }
}
