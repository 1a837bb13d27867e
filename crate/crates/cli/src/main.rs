//! `certinum`: run annotated programs, check triples, differentiate, and run
//! the two iterative methods with their certificates.
//!
//! Exit codes: 0 success, 1 violation or method failure, 2 usage or parse error.

mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use certinum::calculus::{
    default_radii, fd_step, jet_eval, lagrange_witness, nth_derivative_fd, peano_limit_probe,
    peano_remainder, taylor_poly, FdStep,
};
use certinum::hoare::{
    check_triple, falsify, load_spec, Aggregate, AuditConfig, HoareError, SampleOutcome,
    SampleSource, SpecError, DEFAULT_SEED,
};
use certinum::interp::{bind_named, run, ExecOutcome, Trace, DEFAULT_BUDGET};
use certinum::lang::{parse_arg_list, parse_expr, parse_program, Env, FuncDef, Funcs};
use certinum::methods::{
    bisect, c1_certificate, fixed_point, linear_error_certificate, quadratic_certificate,
    refine_fixed_point, CertKind, Certificate, Root, RootSource,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{Emitter, Record};

#[derive(Debug, Parser)]
#[command(
    name = "certinum",
    version,
    about = "Runtime-checked numerical programs"
)]
struct Cli {
    /// Step budget for program runs.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Sampling seed, decimal or 0x-prefixed hex [default: 0xC0FFEE].
    #[arg(long, global = true, value_parser = parse_seed)]
    seed: Option<u64>,
    /// Also print trace records.
    #[arg(long, global = true)]
    trace: bool,
    /// One JSON object per line instead of `kind key=value` lines.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute a program file.
    Run {
        file: PathBuf,
        /// Named arguments, e.g. "f=x^2-2, a=1, b=1.5, tol=0.0001".
        #[arg(long, default_value = "")]
        args: String,
    },
    /// Check a triple file on its sample plan.
    Check {
        spec: PathBuf,
        /// Stop at the first failing sample and report it.
        #[arg(long)]
        falsify: bool,
        /// Override the number of generated samples.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Derivatives of f at a point, from jets.
    Derive(DeriveArgs),
    /// Taylor polynomial, Peano remainder and limit probe.
    Taylor(TaylorArgs),
    /// Bisection on [a, b].
    Bisect(BisectArgs),
    /// Fixed-point iteration, optionally with a convergence certificate.
    Fpm(FpmArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct DeriveArgs {
    /// Function body in one variable, e.g. "sin(x)*exp(x)".
    #[arg(long, visible_alias = "expr")]
    f: String,
    /// Variable of differentiation; inferred from a single free variable otherwise.
    #[arg(long)]
    var: Option<String>,
    #[arg(long)]
    at: f64,
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// Also print central finite-difference estimates.
    #[arg(long)]
    fd: bool,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct TaylorArgs {
    #[arg(long, visible_alias = "expr")]
    f: String,
    #[arg(long)]
    var: Option<String>,
    /// Expansion center.
    #[arg(long)]
    at: f64,
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Point at which to evaluate the remainders.
    #[arg(long)]
    x: Option<f64>,
    /// Run the Peano limit probe on the default radii.
    #[arg(long)]
    probe: bool,
    #[arg(long, default_value_t = 1e-6)]
    threshold: f64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct BisectArgs {
    #[arg(long)]
    f: String,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CertArg {
    Linear,
    C1,
    Quadratic,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct FpmArgs {
    #[arg(long)]
    f: String,
    #[arg(long)]
    x0: f64,
    #[arg(long)]
    tol: f64,
    #[arg(long)]
    max_iter: u64,
    #[arg(long, value_enum)]
    certify: Option<CertArg>,
    /// Fixed point; refined from the final iterate when omitted.
    #[arg(long)]
    r: Option<f64>,
    /// Contraction rate c for the linear certificate.
    #[arg(long)]
    rate: Option<f64>,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let t = s.trim().replace('_', "");
    match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    }
    .map_err(|e| format!("invalid seed `{s}`: {e}"))
}

enum Failure {
    /// Bad input: exit 2.
    Usage(String),
    /// A violation or failed method: exit 1.
    Violation(String),
}

type Outcome = Result<u8, Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn violation(e: impl std::fmt::Display) -> Failure {
    Failure::Violation(e.to_string())
}

fn io(e: std::io::Error) -> Failure {
    Failure::Violation(format!("write error: {e}"))
}

fn function(src: &str) -> Result<FuncDef, Failure> {
    FuncDef::parse(src).map_err(|e| usage(format!("--f: {e}")))
}

fn function_in(src: &str, var: Option<&str>) -> Result<FuncDef, Failure> {
    match var {
        None => function(src),
        Some(v) => Ok(FuncDef {
            param: v.to_string(),
            body: parse_expr(src).map_err(|e| usage(format!("--f: {e}")))?,
        }),
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    out: Emitter<'a>,
}

impl Ctx<'_> {
    fn emit(&mut self, r: Record) -> Result<(), Failure> {
        self.out.emit(&r).map_err(io)
    }

    fn header(&mut self, command: &'static str, seed: u64) -> Result<(), Failure> {
        let r = Record::new("header")
            .text("command", command)
            .text("seed", format!("{seed:#x}"))
            .nat("budget", self.cli.budget);
        self.emit(r)
    }

    fn trace(&mut self, trace: &Trace) -> Result<(), Failure> {
        for ev in &trace.events {
            let obj = serde_json::to_value(ev).map_err(violation)?;
            self.out.emit_json("trace", obj).map_err(io)?;
        }
        Ok(())
    }
}

fn cmd_run(ctx: &mut Ctx, file: &Path, args: &str) -> Outcome {
    let src = std::fs::read_to_string(file)
        .map_err(|e| usage(format!("cannot read {}: {e}", file.display())))?;
    let p = parse_program(&src).map_err(|e| usage(format!("{}: {e}", file.display())))?;
    let named = parse_arg_list(args, &p.params).map_err(|e| usage(format!("--args: {e}")))?;
    let actual = bind_named(&p, &named).map_err(|e| usage(format!("--args: {e}")))?;
    let out = run(&p, &actual, ctx.cli.budget).map_err(usage)?;
    ctx.header("run", ctx.cli.seed.unwrap_or(DEFAULT_SEED))?;
    if ctx.cli.trace {
        ctx.trace(out.trace())?;
    }
    let (status, code, error) = match &out {
        ExecOutcome::Terminated { .. } => ("terminated", 0, None),
        ExecOutcome::BudgetExhausted { .. } => ("budget_exhausted", 1, None),
        ExecOutcome::RuntimeError { error, .. } => ("runtime_error", 1, Some(error.to_string())),
    };
    let mut r = Record::new("outcome")
        .text("program", p.name.as_str())
        .text("status", status)
        .nat("steps", out.steps());
    if let Some(e) = error {
        r = r.text("error", e);
    }
    ctx.emit(r)?;
    ctx.emit(Record::new("state").vars(&out.state().vars))?;
    Ok(code)
}

fn cmd_check(ctx: &mut Ctx, path: &Path, stop_at_first: bool, samples: Option<usize>) -> Outcome {
    let spec = load_spec(path).map_err(|e| match e {
        SpecError::Hoare(h) => usage(h),
        other => usage(format!("{}: {other}", path.display())),
    })?;
    let mut plan = spec.plan.clone();
    if let Some(seed) = ctx.cli.seed {
        plan.seed = seed;
    }
    if let Some(n) = samples {
        plan.samples = n;
    }
    let cfg = AuditConfig {
        eq_ulps: spec.eq_ulps,
    };
    let budget = ctx.cli.budget;
    ctx.header("check", plan.seed)?;
    let plan_error = |e: HoareError| usage(e);
    if stop_at_first {
        let f = falsify(&spec.triple, &plan, budget, cfg).map_err(plan_error)?;
        let code = match &f.counterexample {
            Some(cx) => {
                let mut r = Record::new("counterexample")
                    .nat("index", cx.index as u64)
                    .text("verdict", cx.verdict.tag())
                    .text("detail", cx.verdict.to_string());
                for (k, a) in &cx.args {
                    r = r.text(k, a.to_string());
                }
                ctx.emit(r)?;
                if ctx.cli.trace {
                    ctx.trace(&cx.trace)?;
                }
                1
            }
            None if f.empty_evidence() => 2,
            None => 0,
        };
        ctx.emit(
            Record::new("falsify")
                .text("program", spec.triple.program.name.as_str())
                .flag("found", f.counterexample.is_some())
                .flag("empty_evidence", f.empty_evidence())
                .nat("checked", f.checked as u64)
                .nat("rejected", f.rejected as u64),
        )?;
        return Ok(code);
    }
    let report = check_triple(&spec.triple, &plan, budget, cfg).map_err(plan_error)?;
    for s in &report.samples {
        let source = match s.source {
            SampleSource::Instance => "instance",
            SampleSource::Generated => "generated",
        };
        let mut r = Record::new("sample")
            .nat("index", s.index as u64)
            .text("source", source);
        match &s.outcome {
            SampleOutcome::Rejected(why) => {
                r = r.text("verdict", "rejected").text("detail", why.as_str());
            }
            SampleOutcome::Checked {
                verdict,
                steps,
                audit,
                ..
            } => {
                r = r
                    .text("verdict", verdict.tag())
                    .nat("steps", *steps)
                    .nat("heads", audit.heads as u64);
                if !verdict.is_pass() {
                    r = r.text("detail", verdict.to_string());
                }
            }
        }
        for (k, a) in &s.args {
            r = r.text(k, a.to_string());
        }
        ctx.emit(r)?;
    }
    ctx.emit(
        Record::new("summary")
            .text("program", report.program.as_str())
            .text("aggregate", report.aggregate.to_string())
            .nat("samples", report.samples.len() as u64)
            .nat("checked", report.checked() as u64)
            .nat("passed", report.passed() as u64)
            .nat("rejected", report.rejected() as u64)
            .nat("eq_ulps", cfg.eq_ulps as u64)
            .text("coverage", report.coverage()),
    )?;
    Ok(match report.aggregate {
        Aggregate::Pass => 0,
        Aggregate::Fail => 1,
        Aggregate::EmptyEvidence => 2,
    })
}

fn cmd_derive(ctx: &mut Ctx, a: &DeriveArgs) -> Outcome {
    let f = function_in(&a.f, a.var.as_deref())?;
    let (env, funcs) = (Env::new(), Funcs::new());
    let jet = jet_eval(&f.body, &f.param, a.at, a.order, &env, &funcs).map_err(violation)?;
    ctx.header("derive", ctx.cli.seed.unwrap_or(DEFAULT_SEED))?;
    for n in 0..=a.order {
        let mut r = Record::new("derivative")
            .text("f", f.to_string())
            .num("at", a.at)
            .nat("n", n as u64)
            .num("coeff", jet.coeffs[n])
            .num("value", jet.derivative(n));
        if a.fd {
            let est = nth_derivative_fd(
                &f.body,
                &f.param,
                n,
                a.at,
                FdStep::ScaleRelative,
                &env,
                &funcs,
            )
            .map_err(violation)?;
            r = r.num("fd", est).num("fd_step", fd_step(n, a.at));
        }
        ctx.emit(r)?;
    }
    Ok(0)
}

fn cmd_taylor(ctx: &mut Ctx, a: &TaylorArgs) -> Outcome {
    let f = function_in(&a.f, a.var.as_deref())?;
    let (env, funcs) = (Env::new(), Funcs::new());
    let poly = taylor_poly(&f.body, &f.param, a.at, a.order, &env, &funcs).map_err(violation)?;
    ctx.header("taylor", ctx.cli.seed.unwrap_or(DEFAULT_SEED))?;
    for (k, c) in poly.coeffs.iter().enumerate() {
        ctx.emit(
            Record::new("coefficient")
                .num("center", a.at)
                .nat("k", k as u64)
                .num("value", *c),
        )?;
    }
    if let Some(x) = a.x {
        let h = peano_remainder(&f.body, &f.param, a.order, a.at, x, &env, &funcs)
            .map_err(violation)?;
        let mut r = Record::new("remainder")
            .num("x", x)
            .num("taylor", poly.eval(x))
            .num("peano", h);
        if a.order >= 1 {
            let w = lagrange_witness(&f.body, &f.param, a.order, a.at, x, 1e-9, &env, &funcs)
                .map_err(violation)?;
            r = r
                .num("lagrange_t", w.t)
                .num("lagrange_residual", w.residual)
                .flag("localized", w.localized);
        }
        ctx.emit(r)?;
    }
    if !a.probe {
        return Ok(0);
    }
    let radii = default_radii();
    let rep = peano_limit_probe(
        &f.body,
        &f.param,
        a.order,
        a.at,
        &radii,
        a.threshold,
        &env,
        &funcs,
    )
    .map_err(violation)?;
    for row in &rep.rows {
        ctx.emit(
            Record::new("probe_row")
                .num("radius", row.radius)
                .num("plus", row.plus)
                .num("minus", row.minus)
                .num("max", row.max),
        )?;
    }
    ctx.emit(
        Record::new("probe")
            .nat("n", rep.n as u64)
            .num("center", rep.center)
            .num("threshold", rep.threshold)
            .nat("radii", rep.rows.len() as u64)
            .num("tail_max", rep.tail_max)
            .flag("monotone", rep.monotone)
            .flag("pass", rep.pass),
    )?;
    Ok(if rep.pass { 0 } else { 1 })
}

fn cmd_bisect(ctx: &mut Ctx, a: &BisectArgs) -> Outcome {
    let f = function(&a.f)?;
    let res = bisect(&f, a.a, a.b, a.tol).map_err(violation)?;
    ctx.header("bisect", ctx.cli.seed.unwrap_or(DEFAULT_SEED))?;
    if ctx.cli.trace {
        for (i, (l, u)) in res.brackets.iter().enumerate() {
            ctx.emit(
                Record::new("bracket")
                    .nat("iter", i as u64)
                    .num("lower", *l)
                    .num("upper", *u),
            )?;
        }
    }
    ctx.emit(
        Record::new("bisection")
            .text("f", f.to_string())
            .num("xmid", res.xmid)
            .num("lower", res.lower)
            .num("upper", res.upper)
            .num(
                "bracket_midpoint",
                res.lower + (res.upper - res.lower) / 2.0,
            )
            .num("fa", res.fa)
            .num("fb", res.fb)
            .nat("iter", res.iter)
            .nat("predicted_iter", res.predicted_iter)
            .num("bracket_width", res.bracket_width),
    )?;
    Ok(0)
}

fn cert_records(ctx: &mut Ctx, c: &Certificate) -> Result<(), Failure> {
    if ctx.cli.trace {
        for t in &c.trajectories {
            for row in &t.rows {
                ctx.emit(
                    Record::new("cert_row")
                        .num("x0", t.x0)
                        .nat("k", row.k)
                        .num("measured", row.measured)
                        .num("bound", row.bound)
                        .flag("holds", row.holds)
                        .opt_num("ratio", row.ratio),
                )?;
            }
        }
    }
    let source = match c.root_source {
        RootSource::Supplied => "supplied",
        RootSource::Refined => "refined",
    };
    let rows: usize = c.trajectories.iter().map(|t| t.rows.len()).sum();
    ctx.emit(
        Record::new("certificate")
            .text("kind", c.kind.name())
            .num("r", c.r)
            .text("root_source", source)
            .num("rate", c.rate)
            .opt_num("delta", c.delta)
            .opt_num("epsilon", c.epsilon)
            .opt_num("f2_abs", c.f2_abs)
            .nat("trajectories", c.trajectories.len() as u64)
            .nat("rows", rows as u64)
            .opt_num("max_ratio", c.max_ratio)
            .flag("holds", c.holds),
    )
}

fn cmd_fpm(ctx: &mut Ctx, a: &FpmArgs) -> Outcome {
    let f = function(&a.f)?;
    let res = fixed_point(&f, a.x0, a.tol, a.max_iter).map_err(violation)?;
    ctx.header("fpm", ctx.cli.seed.unwrap_or(DEFAULT_SEED))?;
    if ctx.cli.trace {
        for (i, x) in res.trajectory.iter().enumerate() {
            ctx.emit(Record::new("iterate").nat("itr", i as u64).num("x", *x))?;
        }
    }
    ctx.emit(
        Record::new("fixed_point")
            .text("f", f.to_string())
            .num("x", res.x)
            .num("x_new", res.x_new)
            .nat("itr", res.itr)
            .nat("break", res.break_flag as u64)
            .flag("converged", res.converged),
    )?;
    let Some(kind) = a.certify else {
        return Ok(0);
    };
    let root = match a.r {
        Some(r) => Root::supplied(r),
        None => refine_fixed_point(&f, res.x).map_err(violation)?,
    };
    let cert = match kind {
        CertArg::Linear => {
            let c = a
                .rate
                .ok_or_else(|| usage("--certify linear needs --rate"))?;
            linear_error_certificate(&f, root, c, &res)
        }
        CertArg::C1 => c1_certificate(&f, root, a.tol, a.max_iter),
        CertArg::Quadratic => quadratic_certificate(&f, root, a.tol, a.max_iter),
    }
    .map_err(violation)?;
    debug_assert!(matches!(
        (kind, cert.kind),
        (CertArg::Linear, CertKind::Linear)
            | (CertArg::C1, CertKind::C1)
            | (CertArg::Quadratic, CertKind::Quadratic)
    ));
    cert_records(ctx, &cert)?;
    Ok(if cert.holds { 0 } else { 1 })
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Outcome {
    let mut ctx = Ctx {
        cli,
        out: Emitter::new(cli.json, out),
    };
    if cli.budget == 0 {
        return Err(usage("--budget must be at least 1"));
    }
    match &cli.command {
        Command::Run { file, args } => cmd_run(&mut ctx, file, args),
        Command::Check {
            spec,
            falsify,
            samples,
        } => cmd_check(&mut ctx, spec, *falsify, *samples),
        Command::Derive(a) => cmd_derive(&mut ctx, a),
        Command::Taylor(a) => cmd_taylor(&mut ctx, a),
        Command::Bisect(a) => cmd_bisect(&mut ctx, a),
        Command::Fpm(a) => cmd_fpm(&mut ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let code = match dispatch(&cli, &mut lock) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    };
    let _ = lock.flush();
    ExitCode::from(code)
}
