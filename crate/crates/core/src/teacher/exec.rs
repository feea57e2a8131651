//! Scoring execution trees against (partial) bindings.

use crate::atoms::{compare, logic_and, logic_or};
use crate::corpus::{classify_answer_type, Span};

use super::program::{Exec, Ref, Side};

/// What a reference resolves to under the current bindings.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolved {
    /// A slot not bound yet; the rule cannot be scored.
    Unbound,
    /// Candidate spans, existentially quantified. Empty means absent.
    Spans(Vec<Span>),
}

/// Bindings and lookups the executor needs.
pub trait Env {
    fn resolve(&self, r: &Ref) -> Resolved;
    /// Whether the question starts with the (lowercased, tokenized) literal.
    fn question_starts_with(&self, lit: &str) -> bool;
    /// Whether the span bound to `r` has type `ty`.
    fn has_type(&self, r: &Ref, span: Span, ty: crate::corpus::AnswerType) -> bool;
}

/// Rule score, or `None` when some slot it needs is unbound.
pub fn eval(exec: &Exec, env: &dyn Env, soft: bool) -> Option<f64> {
    let spans = |r: &Ref| match env.resolve(r) {
        Resolved::Unbound => None,
        Resolved::Spans(s) => Some(s),
    };
    match exec {
        Exec::Compare { later, earlier, d0 } => {
            let (ls, es) = (spans(later)?, spans(earlier)?);
            let mut best = 0.0f64;
            for e in &es {
                for l in &ls {
                    if e.end < l.start {
                        let d1 = (l.start - e.end - 1) as i64;
                        best = best.max(compare(*d0, d1, soft));
                    }
                }
            }
            Some(best)
        }
        Exec::Precedes { earlier, later } => {
            let (es, ls) = (spans(earlier)?, spans(later)?);
            Some(indicator(es.iter().any(|e| ls.iter().any(|l| e.end < l.start))))
        }
        Exec::Between { left, mid, right } => {
            let (a, m, b) = (spans(left)?, spans(mid)?, spans(right)?);
            Some(indicator(m.iter().any(|m| a.iter().any(|a| a.end < m.start) && b.iter().any(|b| m.end < b.start))))
        }
        Exec::And(a, b) => {
            let (x, y) = (eval(a, env, soft)?, eval(b, env, soft)?);
            Some(logic_and(x, y).expect("scores stay in [0, 1]"))
        }
        Exec::Or(a, b) => {
            let (x, y) = (eval(a, env, soft)?, eval(b, env, soft)?);
            Some(logic_or(x, y).expect("scores stay in [0, 1]"))
        }
        Exec::StartsWith(lit) => Some(indicator(env.question_starts_with(lit))),
        Exec::Contains(r) => Some(indicator(!spans(r)?.is_empty())),
        Exec::IsType { target, ty } => {
            let s = spans(target)?;
            Some(indicator(s.iter().any(|sp| env.has_type(target, *sp, *ty))))
        }
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Conjunction of every rule that can be scored. Unscorable rules count as 1,
/// so the value never increases as more slots are bound.
pub fn score_rules<'a>(rules: impl IntoIterator<Item = &'a Exec>, env: &dyn Env, soft: bool) -> f64 {
    let mut z = 1.0;
    for r in rules {
        if let Some(s) = eval(r, env, soft) {
            z = logic_and(z, s).expect("scores stay in [0, 1]");
        }
    }
    z
}

/// Side a reference lives on; the answer is always in the context.
pub fn side_of(r: &Ref) -> Side {
    match r {
        Ref::Ans => Side::Context,
        Ref::Var { side, .. } | Ref::Lit { side, .. } => *side,
    }
}

/// Type check used by concrete environments.
pub fn span_has_type(seq: &crate::corpus::TokenSeq, span: Span, ty: crate::corpus::AnswerType) -> bool {
    classify_answer_type(seq, span).contains(&ty)
}
