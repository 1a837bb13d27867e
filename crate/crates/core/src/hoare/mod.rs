//! Runtime evidence for total-correctness triples `H[P] prog [Q]`.
//!
//! A triple is checked by running the program from sampled arguments that
//! satisfy `P`, auditing every loop head against the loop's invariant and
//! variant, and evaluating `Q` in the final state. Sampling gathers evidence
//! only; a passing report does not establish the claim for all inputs.

mod audit;
mod oracle;
mod plan;
mod spec_file;

use std::collections::BTreeMap;
use std::fmt;

pub use audit::{audit_trace, Audit, AuditConfig, VariantFault};
pub use oracle::{root_bracket, RootBracket, ROOT_ITERATIONS};
pub use plan::{Generator, Sample, SamplePlan, SampleSource, DEFAULT_SAMPLES, DEFAULT_SEED};
pub use spec_file::{load_spec, parse_spec, SpecError, SpecFile};

use crate::interp::{bind_named, initial_state, run, ArgError, ExecOutcome, Trace};
use crate::lang::{eval_cond, well_formed, Arg, Cond, Env, Expr, Program, Sort};

/// How the value of an existentially bound real is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// An expression over the final state.
    Value(Expr),
    /// A root of the function parameter `func` inside the final-state bracket
    /// `[lower, upper]`, refined by [`root_bracket`].
    Root {
        func: String,
        lower: Expr,
        upper: Expr,
    },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Value(e) => write!(f, "{e}"),
            Witness::Root { func, lower, upper } => write!(f, "root({func}, {lower}, {upper})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HoareError {
    #[error("uncheckable triple: {0}")]
    Uncheckable(String),
    #[error("the sample plan is empty")]
    EmptyPlan,
    #[error("sample plan: {0}")]
    Plan(String),
    #[error(transparent)]
    Arg(#[from] ArgError),
}

/// A validated total-correctness triple.
#[derive(Debug, Clone, PartialEq)]
pub struct HoareTriple {
    pub pre: Cond,
    pub program: Program,
    pub post: Cond,
    pub witnesses: BTreeMap<String, Witness>,
}

impl HoareTriple {
    /// Rejects triples that cannot be decided by execution: ill-formed
    /// programs, existentials without a witness, and existentials in
    /// negative position, where a single witness proves nothing.
    pub fn new(
        pre: Cond,
        program: Program,
        post: Cond,
        witnesses: BTreeMap<String, Witness>,
    ) -> Result<HoareTriple, HoareError> {
        let diags = well_formed(&program);
        if !diags.is_empty() {
            let msgs: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
            return Err(HoareError::Uncheckable(msgs.join("; ")));
        }
        if !pre.real_existentials().is_empty() {
            return Err(HoareError::Uncheckable(
                "requires clause contains a real existential".into(),
            ));
        }
        let bound = post.real_existentials();
        for var in &bound {
            if !witnesses.contains_key(*var) {
                return Err(HoareError::Uncheckable(format!(
                    "existential `{var}` has no registered witness"
                )));
            }
        }
        if let Some(bad) = negative_existential(&post, true) {
            return Err(HoareError::Uncheckable(format!(
                "existential `{bad}` occurs under a negation"
            )));
        }
        let names: Vec<String> = program
            .params
            .iter()
            .map(|p| p.name.clone())
            .chain(program.locals())
            .collect();
        for (var, w) in &witnesses {
            if !bound.contains(&var.as_str()) {
                return Err(HoareError::Uncheckable(format!(
                    "witness `{var}` does not name an existential of the ensures clause"
                )));
            }
            if names.contains(var) {
                return Err(HoareError::Uncheckable(format!(
                    "witness `{var}` shadows a program variable"
                )));
            }
            if let Witness::Root { func, .. } = w {
                if program.param(func).map(|p| p.sort) != Some(Sort::Fun) {
                    return Err(HoareError::Uncheckable(format!(
                        "root witness for `{var}` needs a function parameter, found `{func}`"
                    )));
                }
            }
        }
        Ok(HoareTriple {
            pre,
            program,
            post,
            witnesses,
        })
    }
}

fn negative_existential(c: &Cond, positive: bool) -> Option<String> {
    match c {
        Cond::Bool(_) | Cond::Cmp(..) => None,
        Cond::Not(a) => negative_existential(a, !positive),
        Cond::And(a, b) | Cond::Or(a, b) => {
            negative_existential(a, positive).or_else(|| negative_existential(b, positive))
        }
        Cond::Implies(a, b) => {
            negative_existential(a, !positive).or_else(|| negative_existential(b, positive))
        }
        Cond::Forall { body, .. } | Cond::Exists { body, .. } => {
            negative_existential(body, positive)
        }
        Cond::ExistsReal { var, body } => {
            if positive {
                negative_existential(body, positive)
            } else {
                Some(var.clone())
            }
        }
    }
}

/// Outcome of checking one sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    /// Failing conjuncts of the ensures clause, with the final state.
    PostViolation {
        conjuncts: Vec<String>,
        state: Env,
    },
    InvariantViolation {
        loop_id: usize,
        iter: u64,
        conjunct: String,
        state: Env,
    },
    /// `iter` is the loop-head index at which the fault was observed; for
    /// [`VariantFault::NonDecreasing`] it is the body execution that failed
    /// to decrease the variant.
    VariantViolation {
        kind: VariantFault,
        loop_id: usize,
        iter: u64,
        detail: String,
    },
    Nontermination {
        budget: u64,
    },
    RuntimeError {
        message: String,
        state: Env,
    },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    /// Short tag used in reports.
    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::PostViolation { .. } => "post-violation",
            Verdict::InvariantViolation { .. } => "invariant-violation",
            Verdict::VariantViolation { .. } => "variant-violation",
            Verdict::Nontermination { .. } => "nontermination",
            Verdict::RuntimeError { .. } => "runtime-error",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::PostViolation { conjuncts, .. } => {
                write!(f, "post-violation: {}", conjuncts.join("; "))
            }
            Verdict::InvariantViolation {
                loop_id,
                iter,
                conjunct,
                ..
            } => write!(
                f,
                "invariant-violation at loop {loop_id}, head {iter}: {conjunct}"
            ),
            Verdict::VariantViolation {
                kind,
                loop_id,
                iter,
                detail,
            } => write!(
                f,
                "variant-violation ({kind}) at loop {loop_id}, iteration {iter}: {detail}"
            ),
            Verdict::Nontermination { budget } => {
                write!(f, "nontermination: step budget {budget} exhausted")
            }
            Verdict::RuntimeError { message, .. } => write!(f, "runtime-error: {message}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampleOutcome {
    /// The requires clause was false or undefined; the sample is not evidence.
    Rejected(String),
    Checked {
        verdict: Verdict,
        steps: u64,
        audit: Audit,
        final_state: Env,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub index: usize,
    pub source: SampleSource,
    pub args: Vec<(String, Arg)>,
    pub outcome: SampleOutcome,
}

impl SampleReport {
    pub fn verdict(&self) -> Option<&Verdict> {
        match &self.outcome {
            SampleOutcome::Checked { verdict, .. } => Some(verdict),
            SampleOutcome::Rejected(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    Pass,
    Fail,
    /// Every sample was rejected by the requires clause.
    EmptyEvidence,
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregate::Pass => "pass",
            Aggregate::Fail => "fail",
            Aggregate::EmptyEvidence => "empty-evidence",
        })
    }
}

/// Per-sample verdicts keyed by sample index.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub program: String,
    pub seed: u64,
    pub budget: u64,
    pub samples: Vec<SampleReport>,
    pub aggregate: Aggregate,
}

impl CheckReport {
    fn new(program: &str, seed: u64, budget: u64, samples: Vec<SampleReport>) -> CheckReport {
        let checked: Vec<&Verdict> = samples.iter().filter_map(|s| s.verdict()).collect();
        let aggregate = if checked.is_empty() {
            Aggregate::EmptyEvidence
        } else if checked.iter().all(|v| v.is_pass()) {
            Aggregate::Pass
        } else {
            Aggregate::Fail
        };
        CheckReport {
            program: program.to_string(),
            seed,
            budget,
            samples,
            aggregate,
        }
    }

    pub fn checked(&self) -> usize {
        self.samples
            .iter()
            .filter(|s| s.verdict().is_some())
            .count()
    }

    pub fn rejected(&self) -> usize {
        self.samples.len() - self.checked()
    }

    pub fn passed(&self) -> usize {
        self.samples
            .iter()
            .filter(|s| s.verdict().is_some_and(Verdict::is_pass))
            .count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &SampleReport> {
        self.samples
            .iter()
            .filter(|s| s.verdict().is_some_and(|v| !v.is_pass()))
    }

    /// One-line statement of what the evidence covers.
    pub fn coverage(&self) -> String {
        format!(
            "{} of {} samples satisfied requires and were checked ({} passed, {} rejected); \
             evidence covers these samples only",
            self.checked(),
            self.samples.len(),
            self.passed(),
            self.rejected()
        )
    }
}

/// The first failing sample of a plan, with its full trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub index: usize,
    pub args: Vec<(String, Arg)>,
    pub verdict: Verdict,
    pub trace: Trace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Falsification {
    pub counterexample: Option<Counterexample>,
    pub checked: usize,
    pub rejected: usize,
}

impl Falsification {
    /// No sample satisfied the requires clause, so "no counterexample" is vacuous.
    pub fn empty_evidence(&self) -> bool {
        self.counterexample.is_none() && self.checked == 0
    }
}

fn verdict_of(
    program: &Program,
    out: &ExecOutcome,
    funcs: &crate::lang::Funcs,
    budget: u64,
    cfg: AuditConfig,
) -> (Verdict, Audit) {
    let audit = audit_trace(program, funcs, out.trace(), cfg);
    if let Some(v) = &audit.violation {
        return (v.clone(), audit);
    }
    let verdict = match out {
        ExecOutcome::Terminated { .. } => Verdict::Pass,
        ExecOutcome::BudgetExhausted { .. } => Verdict::Nontermination { budget },
        ExecOutcome::RuntimeError { error, state, .. } => Verdict::RuntimeError {
            message: error.to_string(),
            state: state.vars.clone(),
        },
    };
    (verdict, audit)
}

/// Runs `p` once and audits every loop head, including the head reached with
/// a false guard.
pub fn check_annotations(
    p: &Program,
    args: &[Arg],
    budget: u64,
    cfg: AuditConfig,
) -> Result<CheckReport, HoareError> {
    let st0 = initial_state(p, args)?;
    let out = run(p, args, budget)?;
    let (verdict, audit) = verdict_of(p, &out, &st0.funcs, budget, cfg);
    let named = p
        .params
        .iter()
        .map(|prm| prm.name.clone())
        .zip(args.iter().cloned())
        .collect();
    let sample = SampleReport {
        index: 0,
        source: SampleSource::Instance,
        args: named,
        outcome: SampleOutcome::Checked {
            verdict,
            steps: out.steps(),
            audit,
            final_state: out.state().vars.clone(),
        },
    };
    Ok(CheckReport::new(&p.name, 0, budget, vec![sample]))
}

fn check_sample(
    t: &HoareTriple,
    sample: &Sample,
    budget: u64,
    cfg: AuditConfig,
) -> Result<(SampleReport, Option<Trace>), HoareError> {
    let p = &t.program;
    let args = bind_named(p, &sample.args)?;
    let st0 = initial_state(p, &args)?;
    let report = |outcome| SampleReport {
        index: sample.index,
        source: sample.source,
        args: sample.args.clone(),
        outcome,
    };
    match eval_cond(&t.pre, &st0.vars, &st0.funcs) {
        Ok(true) => {}
        Ok(false) => {
            return Ok((
                report(SampleOutcome::Rejected("requires is false".into())),
                None,
            ))
        }
        Err(e) => {
            return Ok((
                report(SampleOutcome::Rejected(format!(
                    "requires is undefined: {e}"
                ))),
                None,
            ))
        }
    }
    let out = run(p, &args, budget)?;
    let (mut verdict, audit) = verdict_of(p, &out, &st0.funcs, budget, cfg);
    if let (Verdict::Pass, Some(state)) = (&verdict, out.terminated()) {
        let failed = oracle::failed_post_conjuncts(t, state);
        if !failed.is_empty() {
            verdict = Verdict::PostViolation {
                conjuncts: failed,
                state: state.vars.clone(),
            };
        }
    }
    let rep = report(SampleOutcome::Checked {
        verdict,
        steps: out.steps(),
        audit,
        final_state: out.state().vars.clone(),
    });
    let trace = match out {
        ExecOutcome::Terminated { trace, .. }
        | ExecOutcome::BudgetExhausted { trace, .. }
        | ExecOutcome::RuntimeError { trace, .. } => trace,
    };
    Ok((rep, Some(trace)))
}

/// Checks `t` on every sample of `plan`. Rejected samples are recorded, not fatal.
pub fn check_triple(
    t: &HoareTriple,
    plan: &SamplePlan,
    budget: u64,
    cfg: AuditConfig,
) -> Result<CheckReport, HoareError> {
    let samples = plan.samples_for(&t.program.params)?;
    let mut reports = Vec::with_capacity(samples.len());
    for s in &samples {
        reports.push(check_sample(t, s, budget, cfg)?.0);
    }
    Ok(CheckReport::new(
        &t.program.name,
        plan.seed,
        budget,
        reports,
    ))
}

/// Stops at the first sample whose verdict is not a pass.
pub fn falsify(
    t: &HoareTriple,
    plan: &SamplePlan,
    budget: u64,
    cfg: AuditConfig,
) -> Result<Falsification, HoareError> {
    let samples = plan.samples_for(&t.program.params)?;
    let (mut checked, mut rejected) = (0, 0);
    for s in &samples {
        let (rep, trace) = check_sample(t, s, budget, cfg)?;
        match (rep.outcome, trace) {
            (SampleOutcome::Checked { verdict, .. }, Some(trace)) => {
                checked += 1;
                if !verdict.is_pass() {
                    return Ok(Falsification {
                        counterexample: Some(Counterexample {
                            index: rep.index,
                            args: rep.args,
                            verdict,
                            trace,
                        }),
                        checked,
                        rejected,
                    });
                }
            }
            _ => rejected += 1,
        }
    }
    Ok(Falsification {
        counterexample: None,
        checked,
        rejected,
    })
}
