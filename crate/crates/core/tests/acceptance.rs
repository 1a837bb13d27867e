//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p certinum --test acceptance -- --nocapture` to see
//! the lines; the test fails if any criterion fails.

use std::time::{Duration, Instant};

use certinum::calculus::{
    default_radii, jet_eval, leibniz_product_check, nth_derivative, nth_derivative_fd,
    peano_lagrange_gap, peano_limit_probe, FdStep,
};
use certinum::hoare::{check_annotations, Aggregate, AuditConfig, SampleOutcome};
use certinum::interp::DEFAULT_BUDGET;
use certinum::lang::{parse_expr, Arg, Env, Expr, FuncDef, Funcs, Value};
use certinum::methods::{
    bisect, bisection_program, fixed_point, linear_error_certificate, predicted_iterations,
    quadratic_certificate, refine_fixed_point, RealFn, Root,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0xC0FFEE;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn func(src: &str) -> FuncDef {
    FuncDef::parse(src).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn expr(src: &str) -> Expr {
    parse_expr(src).unwrap_or_else(|e| panic!("{src}: {e}"))
}

/// Distance from `x` to the next binary64 away from zero.
fn ulp(x: f64) -> f64 {
    let x = x.abs();
    f64::from_bits(x.to_bits() + 1) - x
}

fn no_env() -> (Env, Funcs) {
    (Env::new(), Funcs::new())
}

/// Smallest `k` with `w / 2^k ≤ tol`, by exact halving of a dyadic width.
fn exact_halvings(w: f64, tol: f64) -> u64 {
    let (mut w, mut k) = (w, 0);
    while w > tol {
        w /= 2.0;
        k += 1;
    }
    k
}

struct Instance {
    f: FuncDef,
    a: f64,
    b: f64,
    tol: f64,
}

/// Dyadic endpoints on 10 fractional bits keep `b - a` and every halving exact.
fn bisection_instances() -> Vec<Instance> {
    let corpus = [
        "x^2 - 2",
        "x^3 - x - 1",
        "exp(x) - 3",
        "x - 1.25",
        "x^3 - 2",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..1000)
        .map(|_| {
            let f = func(corpus[rng.gen_range(0..corpus.len())]);
            let a = rng.gen_range(0..=1024) as f64 / 1024.0;
            let b = 1.5 + rng.gen_range(0..=1024) as f64 * 1.5 / 1024.0;
            let tol = (b - a) * 10f64.powf(rng.gen_range(-12.0..0.0));
            Instance { f, a, b, tol }
        })
        .collect()
}

fn criterion_1() -> Verdict {
    let f = func("x^2 - 2");
    let start = Instant::now();
    let r = bisect(&f, 1.0, 1.5, 1e-4).expect("valid bracket");
    let elapsed = start.elapsed();
    let target = 1.41421508789;
    let xmid_ok = (r.xmid - target).abs() <= 1e-9;
    let iter_ok = r.iter == 13;
    let time_ok = elapsed < Duration::from_millis(1);
    let midpoint = r.lower + (r.upper - r.lower) / 2.0;
    let mut detail = format!(
        "xmid={:.17} (|xmid - {target}| = {:.3e}) iter={} runtime={elapsed:?}",
        r.xmid,
        (r.xmid - target).abs(),
        r.iter
    );
    if !xmid_ok {
        detail.push_str(&format!(
            "; the 13th midpoint is xmid, while {target} is the midpoint {midpoint:.17} of the \
             final bracket (|diff| = {:.3e}), a 14th halving the loop never performs",
            (midpoint - target).abs()
        ));
    }
    verdict(xmid_ok && iter_ok && time_ok, detail)
}

fn criterion_2() -> Verdict {
    let instances = bisection_instances();
    let mut spent = Duration::ZERO;
    let mut failures = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        let fa = inst.f.eval(inst.a).unwrap();
        let fb = inst.f.eval(inst.b).unwrap();
        assert!(fa * fb < 0.0, "instance {i} lacks a sign change");
        assert!(0.0 < inst.tol && inst.tol < inst.b - inst.a);
        let start = Instant::now();
        let r = bisect(&inst.f, inst.a, inst.b, inst.tol).unwrap();
        spent += start.elapsed();
        let predicted = predicted_iterations(inst.a, inst.b, inst.tol).unwrap();
        let exact = exact_halvings(inst.b - inst.a, inst.tol);
        if r.iter != predicted || predicted != exact || !(r.upper - r.lower <= inst.tol) {
            failures.push(format!(
                "#{i} iter={} predicted={predicted} exact={exact} width={}",
                r.iter,
                r.upper - r.lower
            ));
        }
    }
    let detail = format!(
        "{} instances, {} mismatches, bisect time {spent:?}{}",
        instances.len(),
        failures.len(),
        failures
            .first()
            .map(|f| format!("; first: {f}"))
            .unwrap_or_default()
    );
    verdict(
        failures.is_empty() && spent < Duration::from_secs(1),
        detail,
    )
}

fn criterion_3() -> Verdict {
    let p = bisection_program();
    let inv = p.body.to_string();
    let has_conjunct = inv.contains("iter = 0 ∨ 2 * (upper - lower) > tol");
    let cfg = AuditConfig { eq_ulps: 4 };
    let (mut heads, mut checks, mut failures) = (0usize, 0usize, Vec::new());
    for (i, inst) in bisection_instances().iter().enumerate() {
        let args = [
            Arg::Func(inst.f.clone()),
            Arg::Value(Value::Real(inst.a)),
            Arg::Value(Value::Real(inst.b)),
            Arg::Value(Value::Real(inst.tol)),
        ];
        let report = check_annotations(&p, &args, DEFAULT_BUDGET, cfg).unwrap();
        let SampleOutcome::Checked { verdict, audit, .. } = &report.samples[0].outcome else {
            failures.push(format!("#{i} not checked"));
            continue;
        };
        heads += audit.heads;
        checks += audit.conjunct_checks;
        if report.aggregate != Aggregate::Pass || audit.conjunct_checks != 9 * audit.heads {
            failures.push(format!("#{i}: {verdict}"));
        }
    }
    let detail = format!(
        "{heads} loop heads, {checks} conjunct checks (9 per head), eq within 4 ulps, \
         guard-doubling conjunct present={has_conjunct}, {} failures{}",
        failures.len(),
        failures
            .first()
            .map(|f| format!("; first: {f}"))
            .unwrap_or_default()
    );
    verdict(has_conjunct && failures.is_empty(), detail)
}

fn criterion_4() -> Verdict {
    let g = func("(3/x + x)/2");
    let r = fixed_point(&g, 1.0, 0.001, 10).unwrap();
    let target = 1.73205081001;
    let pass = (r.x - target).abs() <= 1e-8 && r.itr == 4;
    verdict(
        pass,
        format!(
            "x={:.17} (|x - {target}| = {:.3e}) itr={}",
            r.x,
            (r.x - target).abs(),
            r.itr
        ),
    )
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut rows, mut failures) = (0usize, Vec::new());
    for i in 0..50 {
        let c: f64 = rng.gen_range(-0.99..0.99);
        let d: f64 = rng.gen_range(-10.0..10.0);
        let x0: f64 = rng.gen_range(-10.0..10.0);
        let f = FuncDef {
            param: "x".into(),
            body: Expr::real(c) * Expr::var("x") + Expr::real(d),
        };
        let root = refine_fixed_point(&f, d / (1.0 - c)).unwrap();
        let run = fixed_point(&f, x0, 1e-12, 200).unwrap();
        let cert = linear_error_certificate(&f, root, c.abs(), &run).unwrap();
        // Recheck every row from the trajectory itself.
        let r = root.value;
        let slack = 16.0 * ulp((x0 - r).abs().max(r.abs()));
        let recheck = run
            .trajectory
            .iter()
            .enumerate()
            .all(|(n, x)| (x - r).abs() <= c.abs().powi(n as i32) * (x0 - r).abs() + slack);
        rows += run.trajectory.len();
        if !cert.holds || !recheck || cert.trajectories[0].slack > slack {
            failures.push(format!("#{i} c={c} d={d} x0={x0}"));
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "50 affine contractions, {rows} iterations checked, slack 16 ulps, {} failures{}",
            failures.len(),
            failures
                .first()
                .map(|f| format!("; first: {f}"))
                .unwrap_or_default()
        ),
    )
}

fn criterion_6() -> Verdict {
    // (g, r, |g″(r)| in closed form)
    let cases = [
        ("(3/x + x)/2", 3f64.sqrt(), 1.0 / 3f64.sqrt()),
        ("x^2", 0.0, 2.0),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (src, r, f2) in cases {
        let g = func(src);
        let cert = quadratic_certificate(&g, Root::supplied(r), 1e-15, 60).unwrap();
        let eps = cert.epsilon.unwrap();
        let bound = (f2 + eps) / 2.0 + 1e-3;
        let f2_ok = (cert.f2_abs.unwrap() - f2).abs() <= 1e-12;
        let ratio = cert.max_ratio.unwrap_or(0.0);
        let rows: usize = cert.trajectories.iter().map(|t| t.rows.len()).sum();
        let ok = cert.holds && f2_ok && ratio <= bound;
        pass &= ok;
        parts.push(format!(
            "{src} at r={r}: holds={} rows={rows} max ratio {ratio:.6} ≤ {bound:.6}",
            cert.holds
        ));
    }
    verdict(pass, parts.join("; "))
}

const SMOOTH_CORPUS: [&str; 8] = [
    "sin(x)",
    "cos(x)",
    "exp(x)",
    "ln(1 + x)",
    "x^3 - 2*x + 1",
    "1/(1 + x^2)",
    "sin(x)*exp(x)",
    "exp(-x^2)",
];

fn criterion_7() -> Verdict {
    let h = expr("(3*x - 5)*x^2 + ((-1)^0 * ((0 + 1)*x)^0) - (-(2*x) + 7) + (x^4 - 3*x^4)");
    let (env, funcs) = no_env();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let nonzero: Vec<f64> = (0..20)
        .map(|_| rng.gen_range(-10.0..10.0))
        .filter(|x| nth_derivative(&h, "x", 5, *x, &env, &funcs).unwrap() != 0.0)
        .collect();
    let (mut pairs, mut worst) = (0usize, 0.0f64);
    for src in SMOOTH_CORPUS {
        let e = expr(src);
        for _ in 0..10 {
            let a = rng.gen_range(-0.9..0.9);
            for n in 0..=4 {
                let jet = nth_derivative(&e, "x", n, a, &env, &funcs).unwrap();
                let fd =
                    nth_derivative_fd(&e, "x", n, a, FdStep::ScaleRelative, &env, &funcs).unwrap();
                worst = worst.max((jet - fd).abs() / jet.abs().max(1.0));
                pairs += 1;
            }
        }
    }
    verdict(
        nonzero.is_empty() && worst <= 1e-3,
        format!(
            "H⁽⁵⁾ = 0 exactly at {} of 20 points; jet vs fd on {} corpus functions, \
             {pairs} (point, n ≤ 4) pairs, worst relative gap {worst:.3e} ≤ 1e-3",
            20 - nonzero.len(),
            SMOOTH_CORPUS.len()
        ),
    )
}

/// Random polynomial `Σ cₖ xᵏ` with coefficients in [-1, 1].
fn random_poly(rng: &mut ChaCha8Rng, degree: usize) -> Vec<f64> {
    (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn poly_expr(coeffs: &[f64]) -> Expr {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| Expr::real(*c) * Expr::var("x").powi(k as u32))
        .reduce(|a, b| a + b)
        .unwrap_or(Expr::real(0.0))
}

/// Coefficients of the k-th derivative, by the power rule.
fn poly_derivative(coeffs: &[f64], k: usize) -> Vec<f64> {
    (k..coeffs.len())
        .map(|j| coeffs[j] * ((j - k + 1)..=j).map(|m| m as f64).product::<f64>())
        .collect()
}

/// Polynomial or analytic instance on [-1, 1].
fn random_function(rng: &mut ChaCha8Rng) -> Expr {
    let s: f64 = rng.gen_range(-1.0..1.0);
    match rng.gen_range(0..4) {
        0 => {
            let degree = rng.gen_range(0..=6);
            poly_expr(&random_poly(rng, degree))
        }
        1 => expr(&format!("sin({s} * x)")),
        2 => expr(&format!("exp({s} * x)")),
        _ => expr(&format!("cos({s} * x) * (1 + x^2)")),
    }
}

fn within(lhs: f64, rhs: f64, scale: f64, ulps: f64) -> bool {
    (lhs - rhs).abs() <= ulps * ulp(lhs.abs().max(rhs.abs()).max(scale).max(1.0))
}

fn criterion_8() -> Verdict {
    let (env, funcs) = no_env();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut fails = [0usize; 4];
    for _ in 0..200 {
        // Law 1: jetting the k-th derivative polynomial to order n - k.
        let p = random_poly(&mut rng, 6);
        let n = rng.gen_range(1..=6);
        let k = rng.gen_range(1..=n);
        let x = rng.gen_range(-1.0..1.0);
        let direct = nth_derivative(&poly_expr(&p), "x", n, x, &env, &funcs).unwrap();
        let dk = poly_derivative(&p, k);
        let rejet = nth_derivative(&poly_expr(&dk), "x", n - k, x, &env, &funcs).unwrap();
        let magnitude = poly_derivative(&p, n).iter().map(|c| c.abs()).sum::<f64>();
        fails[0] += !within(direct, rejet, magnitude, 32.0) as usize;

        // Laws 2 and 3: (s·f + g)⁽ⁿ⁾ = s·f⁽ⁿ⁾ + g⁽ⁿ⁾.
        let f = random_function(&mut rng);
        let g = random_function(&mut rng);
        let s: f64 = rng.gen_range(-4.0..4.0);
        let n = rng.gen_range(0..=6);
        let fd = nth_derivative(&f, "x", n, x, &env, &funcs).unwrap();
        let gd = nth_derivative(&g, "x", n, x, &env, &funcs).unwrap();
        let scaled = nth_derivative(&(Expr::real(s) * f.clone()), "x", n, x, &env, &funcs).unwrap();
        fails[1] += !within(scaled, s * fd, (s * fd).abs(), 32.0) as usize;
        let sum = nth_derivative(&(f.clone() + g.clone()), "x", n, x, &env, &funcs).unwrap();
        fails[2] += !within(sum, fd + gd, fd.abs().max(gd.abs()), 32.0) as usize;

        // Leibniz.
        let lb = leibniz_product_check(&f, &g, "x", n, x, &env, &funcs).unwrap();
        fails[3] += !lb.pass as usize;
    }
    verdict(
        fails.iter().all(|f| *f == 0),
        format!(
            "200 instances per suite within 32 ulps: commutation {} fails, scaling {} fails, \
             sum {} fails, Leibniz {} fails",
            fails[0], fails[1], fails[2], fails[3]
        ),
    )
}

fn criterion_9() -> Verdict {
    let (env, funcs) = no_env();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut functions: Vec<(String, Expr)> = ["sin(x)", "cos(x)", "exp(x)", "ln(1 + x)"]
        .iter()
        .map(|s| (s.to_string(), expr(s)))
        .collect();
    for i in 0..5 {
        functions.push((format!("poly8#{i}"), poly_expr(&random_poly(&mut rng, 8))));
    }
    let radii = default_radii();
    let mut probe_fails = Vec::new();
    let mut probes = 0;
    for (name, e) in &functions {
        for n in 1..=3 {
            let rep = peano_limit_probe(e, "x", n, 0.0, &radii, 1e-6, &env, &funcs).unwrap();
            probes += 1;
            if !rep.pass {
                probe_fails.push(format!("{name} n={n} tail={:.3e}", rep.tail_max));
            }
        }
    }
    // Peano–Lagrange consistency on the smooth corpus, n ≤ 4.
    let (mut localized, mut tried, mut worst) = (0, 0, 0.0f64);
    for src in SMOOTH_CORPUS {
        let e = expr(src);
        for n in 1..=4 {
            for x in [-0.5, -0.1, 0.05, 0.3] {
                let c = 0.1;
                tried += 1;
                if let Some(gap) = peano_lagrange_gap(&e, "x", n, c, x, 1e-9, &env, &funcs).unwrap()
                {
                    localized += 1;
                    worst = worst.max(gap);
                }
            }
        }
    }
    // The jets at 0 must exist for every probed function.
    for (_, e) in &functions {
        jet_eval(e, "x", 0.0, 3, &env, &funcs).unwrap();
    }
    verdict(
        probe_fails.is_empty() && worst <= 1e-6,
        format!(
            "{probes} probes at c=0 with threshold 1e-6, {} failed{}; Peano-Lagrange gap \
             worst {worst:.3e} ≤ 1e-6 over {localized} of {tried} localized witnesses; \
             coverage: sampled radii 2^-1..2^-24 and listed points only",
            probe_fails.len(),
            probe_fails
                .first()
                .map(|f| format!(" (first: {f})"))
                .unwrap_or_default()
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("√2 reproduction", criterion_1),
        ("iteration-count theorem", criterion_2),
        ("invariant audit", criterion_3),
        ("√3 reproduction", criterion_4),
        ("linear-rate certificate", criterion_5),
        ("quadratic certificate", criterion_6),
        ("derivative engine", criterion_7),
        ("Leibniz and linearity suites", criterion_8),
        ("Peano probe", criterion_9),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{tag}] {name}: {}", i + 1, v.detail);
        if !v.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
