//! Small-step execution of guarded-command programs under a step budget.
//!
//! Costs: each assignment, `skip`, `if` test and loop-head guard test takes one
//! step; sequencing is free. A loop-head event is recorded before every guard
//! test, including the final test that exits the loop.

use serde::{Deserialize, Serialize};

use crate::lang::{eval_cond, eval_expr, Arg, Env, EvalError, Funcs, Program, Sort, Stmt, Value};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Variables and function bindings of a running program.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProgState {
    pub vars: Env,
    pub funcs: Funcs,
}

impl ProgState {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.vars.get(name)
    }

    pub fn real(&self, name: &str) -> Option<f64> {
        self.vars.get(name).and_then(Value::as_f64)
    }

    pub fn nat(&self, name: &str) -> Option<u64> {
        match self.vars.get(name) {
            Some(Value::Nat(n)) => Some(*n),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    LoopHead,
    Assignment,
    Branch,
    Termination,
}

/// One trace record.
///
/// `vars` is a full snapshot for loop heads and termination, and the single
/// written binding for assignments. `loop`/`iter` name the innermost
/// enclosing loop activation, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub kind: EventKind,
    #[serde(rename = "loop", default, skip_serializing_if = "Option::is_none")]
    pub loop_id: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iter: Option<u64>,
    pub vars: Env,
    /// Branch taken by an `if`: true for `then`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taken: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn loop_heads(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(|e| e.kind == EventKind::LoopHead)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ArgError {
    #[error("expected {expected} arguments, found {found}")]
    Count { expected: usize, found: usize },
    #[error("argument `{param}` should have sort {expected}, found {found}")]
    Sort {
        param: String,
        expected: Sort,
        found: String,
    },
    #[error("missing argument `{0}`")]
    Missing(String),
    #[error("unknown argument `{0}`")]
    Unknown(String),
    #[error("step budget must be at least 1")]
    ZeroBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExecOutcome {
    Terminated {
        state: ProgState,
        trace: Trace,
        steps: u64,
    },
    BudgetExhausted {
        state: ProgState,
        trace: Trace,
        steps: u64,
    },
    RuntimeError {
        error: EvalError,
        state: ProgState,
        trace: Trace,
        steps: u64,
    },
}

impl ExecOutcome {
    pub fn trace(&self) -> &Trace {
        match self {
            ExecOutcome::Terminated { trace, .. }
            | ExecOutcome::BudgetExhausted { trace, .. }
            | ExecOutcome::RuntimeError { trace, .. } => trace,
        }
    }

    pub fn state(&self) -> &ProgState {
        match self {
            ExecOutcome::Terminated { state, .. }
            | ExecOutcome::BudgetExhausted { state, .. }
            | ExecOutcome::RuntimeError { state, .. } => state,
        }
    }

    pub fn steps(&self) -> u64 {
        match self {
            ExecOutcome::Terminated { steps, .. }
            | ExecOutcome::BudgetExhausted { steps, .. }
            | ExecOutcome::RuntimeError { steps, .. } => *steps,
        }
    }

    pub fn terminated(&self) -> Option<&ProgState> {
        match self {
            ExecOutcome::Terminated { state, .. } => Some(state),
            _ => None,
        }
    }
}

enum Stop {
    Budget,
    Error(EvalError),
}

impl From<EvalError> for Stop {
    fn from(e: EvalError) -> Stop {
        Stop::Error(e)
    }
}

struct Machine {
    state: ProgState,
    trace: Trace,
    steps: u64,
    budget: u64,
    /// Innermost loop activation: (loop id, iteration).
    frames: Vec<(usize, u64)>,
}

impl Machine {
    fn tick(&mut self) -> Result<(), Stop> {
        if self.steps >= self.budget {
            return Err(Stop::Budget);
        }
        self.steps += 1;
        Ok(())
    }

    fn emit(&mut self, kind: EventKind, vars: Env, taken: Option<bool>) {
        let frame = self.frames.last().copied();
        self.trace.events.push(TraceEvent {
            kind,
            loop_id: frame.map(|f| f.0),
            iter: frame.map(|f| f.1),
            vars,
            taken,
        });
    }

    fn exec(&mut self, s: &Stmt) -> Result<(), Stop> {
        match s {
            Stmt::Skip => self.tick(),
            Stmt::Assign(x, e) => {
                self.tick()?;
                let v = eval_expr(e, &self.state.vars, &self.state.funcs)?;
                self.state.vars.insert(x.clone(), v.clone());
                self.emit(EventKind::Assignment, Env::from([(x.clone(), v)]), None);
                Ok(())
            }
            Stmt::VecAssign(x, i, e) => {
                self.tick()?;
                let idx = eval_expr(i, &self.state.vars, &self.state.funcs)?;
                let v = eval_expr(e, &self.state.vars, &self.state.funcs)?;
                let x_val = v.as_f64().ok_or_else(|| {
                    EvalError::Sort(format!("vector element of `{x}` must be a number"))
                })?;
                let index = match idx {
                    Value::Nat(n) => n,
                    Value::Real(r) if r >= 0.0 && r.fract() == 0.0 && r < 2f64.powi(63) => r as u64,
                    other => {
                        return Err(Stop::Error(EvalError::NotNatural {
                            what: "vector index",
                            value: other.to_string(),
                        }))
                    }
                };
                let Some(slot) = self.state.vars.get_mut(x) else {
                    return Err(Stop::Error(EvalError::Unbound(x.clone())));
                };
                let Value::Vec(xs) = slot else {
                    return Err(Stop::Error(EvalError::Sort(format!(
                        "`{x}` is not a vector"
                    ))));
                };
                let len = xs.len();
                let cell = usize::try_from(index)
                    .ok()
                    .and_then(|k| xs.get_mut(k))
                    .ok_or_else(|| EvalError::IndexOutOfRange {
                        name: x.clone(),
                        index,
                        len,
                    })?;
                *cell = x_val;
                let snapshot = slot.clone();
                self.emit(
                    EventKind::Assignment,
                    Env::from([(x.clone(), snapshot)]),
                    None,
                );
                Ok(())
            }
            Stmt::Seq(stmts) => {
                for s in stmts {
                    self.exec(s)?;
                }
                Ok(())
            }
            Stmt::If(c, t, e) => {
                self.tick()?;
                let b = eval_cond(c, &self.state.vars, &self.state.funcs)?;
                self.emit(EventKind::Branch, Env::new(), Some(b));
                self.exec(if b { t } else { e })
            }
            Stmt::While(lp) => {
                self.frames.push((lp.id, 0));
                let r = self.run_loop(lp);
                self.frames.pop();
                r
            }
        }
    }

    fn run_loop(&mut self, lp: &crate::lang::Loop) -> Result<(), Stop> {
        loop {
            self.tick()?;
            self.emit(EventKind::LoopHead, self.state.vars.clone(), None);
            if !eval_cond(&lp.guard, &self.state.vars, &self.state.funcs)? {
                return Ok(());
            }
            self.exec(&lp.body)?;
            if let Some(frame) = self.frames.last_mut() {
                frame.1 += 1;
            }
        }
    }
}

/// Checks `args` against the parameter list and builds the initial state.
pub fn initial_state(p: &Program, args: &[Arg]) -> Result<ProgState, ArgError> {
    if args.len() != p.params.len() {
        return Err(ArgError::Count {
            expected: p.params.len(),
            found: args.len(),
        });
    }
    let mut st = ProgState::default();
    for (param, arg) in p.params.iter().zip(args) {
        let mismatch = || ArgError::Sort {
            param: param.name.clone(),
            expected: param.sort,
            found: arg.to_string(),
        };
        match (param.sort, arg) {
            (Sort::Fun, Arg::Func(f)) => {
                st.funcs.insert(param.name.clone(), f.clone());
            }
            (Sort::Real, Arg::Value(v @ (Value::Real(_) | Value::Nat(_)))) => {
                let x = v.as_f64().ok_or_else(mismatch)?;
                st.vars.insert(param.name.clone(), Value::Real(x));
            }
            (Sort::Nat, Arg::Value(Value::Nat(n))) => {
                st.vars.insert(param.name.clone(), Value::Nat(*n));
            }
            (Sort::Vec(n), Arg::Value(Value::Vec(xs))) if xs.len() == n => {
                st.vars.insert(param.name.clone(), Value::Vec(xs.clone()));
            }
            _ => return Err(mismatch()),
        }
    }
    Ok(st)
}

/// Orders named arguments by parameter position.
pub fn bind_named(p: &Program, named: &[(String, Arg)]) -> Result<Vec<Arg>, ArgError> {
    if let Some((n, _)) = named.iter().find(|(n, _)| p.param(n).is_none()) {
        return Err(ArgError::Unknown(n.clone()));
    }
    p.params
        .iter()
        .map(|prm| {
            named
                .iter()
                .find(|(n, _)| *n == prm.name)
                .map(|(_, a)| a.clone())
                .ok_or_else(|| ArgError::Missing(prm.name.clone()))
        })
        .collect()
}

/// Runs `p` from the state given by `args`. Evaluation errors become
/// [`ExecOutcome::RuntimeError`]; running out of steps is an outcome too.
pub fn run(p: &Program, args: &[Arg], budget: u64) -> Result<ExecOutcome, ArgError> {
    if budget == 0 {
        return Err(ArgError::ZeroBudget);
    }
    let state = initial_state(p, args)?;
    let mut m = Machine {
        state,
        trace: Trace::default(),
        steps: 0,
        budget,
        frames: Vec::new(),
    };
    let r = m.exec(&p.body);
    let Machine {
        state,
        mut trace,
        steps,
        ..
    } = m;
    Ok(match r {
        Ok(()) => {
            trace.events.push(TraceEvent {
                kind: EventKind::Termination,
                loop_id: None,
                iter: None,
                vars: state.vars.clone(),
                taken: None,
            });
            ExecOutcome::Terminated {
                state,
                trace,
                steps,
            }
        }
        Err(Stop::Budget) => ExecOutcome::BudgetExhausted {
            state,
            trace,
            steps,
        },
        Err(Stop::Error(error)) => ExecOutcome::RuntimeError {
            error,
            state,
            trace,
            steps,
        },
    })
}

/// Same contract as [`run`]. The semantics has no source of nondeterminism,
/// so repeated calls produce identical traces.
pub fn run_bounded_deterministic(
    p: &Program,
    args: &[Arg],
    budget: u64,
) -> Result<ExecOutcome, ArgError> {
    run(p, args, budget)
}

/// Rebuilds the variable map by applying the recorded assignments to `initial`.
pub fn replay(initial: &Env, trace: &Trace) -> Env {
    let mut vars = initial.clone();
    for ev in &trace.events {
        if ev.kind == EventKind::Assignment {
            for (k, v) in &ev.vars {
                vars.insert(k.clone(), v.clone());
            }
        }
    }
    vars
}
