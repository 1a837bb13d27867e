use std::collections::BTreeMap;
use std::fmt;

use super::Verdict;
use crate::interp::Trace;
use crate::lang::{eval_cond_ulps, eval_expr, Funcs, Program, Value};

/// Tolerances applied while auditing loop heads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AuditConfig {
    /// Real equalities in invariants hold within this many ulps.
    pub eq_ulps: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantFault {
    Negative,
    NotInteger,
    NonDecreasing,
}

impl fmt::Display for VariantFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VariantFault::Negative => "negative",
            VariantFault::NotInteger => "not an integer",
            VariantFault::NonDecreasing => "non-decreasing",
        })
    }
}

/// Result of auditing the loop heads of one trace.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Audit {
    /// Loop-head snapshots examined.
    pub heads: usize,
    /// Invariant conjuncts evaluated (one per conjunct per head).
    pub conjunct_checks: usize,
    /// `(loop, head index, variant value)` in trace order.
    pub variants: Vec<(usize, u64, u64)>,
    /// First violation in trace order, if any.
    pub violation: Option<Verdict>,
}

impl Audit {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

fn variant_value(v: &Value) -> Result<u64, (VariantFault, String)> {
    match *v {
        Value::Nat(n) => Ok(n),
        Value::Real(x) if x < 0.0 => Err((VariantFault::Negative, format!("{x:?}"))),
        Value::Real(x) if x.fract() == 0.0 && x < 2f64.powi(64) => Ok(x as u64),
        ref other => Err((VariantFault::NotInteger, other.to_string())),
    }
}

/// Re-evaluates every invariant conjunct and variant at each loop-head
/// snapshot of `trace`. A pure function of its arguments; it does not run the
/// program.
///
/// Heads of one loop activation carry consecutive indices from 0, so a head
/// with index `k > 0` is compared against head `k − 1` of the same loop.
pub fn audit_trace(p: &Program, funcs: &Funcs, trace: &Trace, cfg: AuditConfig) -> Audit {
    let mut audit = Audit::default();
    let mut last: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
    for ev in trace.loop_heads() {
        let (Some(id), Some(iter)) = (ev.loop_id, ev.iter) else {
            continue;
        };
        let Some(lp) = p.loop_by_id(id) else {
            audit.violation = Some(Verdict::RuntimeError {
                message: format!("trace names unknown loop {id}"),
                state: ev.vars.clone(),
            });
            return audit;
        };
        audit.heads += 1;
        for c in lp.invariant.conjuncts() {
            audit.conjunct_checks += 1;
            let failure = match eval_cond_ulps(c, &ev.vars, funcs, cfg.eq_ulps) {
                Ok(true) => None,
                Ok(false) => Some(c.to_string()),
                Err(e) => Some(format!("{c} (undefined: {e})")),
            };
            if let Some(conjunct) = failure {
                audit.violation = Some(Verdict::InvariantViolation {
                    loop_id: id,
                    iter,
                    conjunct,
                    state: ev.vars.clone(),
                });
                return audit;
            }
        }
        let value = eval_expr(&lp.variant, &ev.vars, funcs)
            .map_err(|e| (VariantFault::NotInteger, format!("undefined: {e}")))
            .and_then(|v| variant_value(&v));
        let n = match value {
            Ok(n) => n,
            Err((kind, detail)) => {
                audit.violation = Some(Verdict::VariantViolation {
                    kind,
                    loop_id: id,
                    iter,
                    detail,
                });
                return audit;
            }
        };
        audit.variants.push((id, iter, n));
        if let Some(&(prev_iter, prev)) = last.get(&id) {
            if iter > 0 && prev_iter + 1 == iter && n >= prev {
                audit.violation = Some(Verdict::VariantViolation {
                    kind: VariantFault::NonDecreasing,
                    loop_id: id,
                    iter: prev_iter,
                    detail: format!("{prev} then {n}"),
                });
                return audit;
            }
        }
        last.insert(id, (iter, n));
    }
    audit
}
