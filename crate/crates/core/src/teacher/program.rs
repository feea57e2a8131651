//! Lowering logical forms into executable rules over module calls.

use indexmap::IndexMap;
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::atoms::find_strict_in;
use crate::corpus::{tokenize, AnswerType, Instance, Span};
use crate::semparser::{flatten_rules, Explanation, LogicalForm, Predicate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Question,
    Context,
}

/// Something a rule locates: the answer, a variable binding or a literal
/// phrase, on one side of the instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ref {
    Ans,
    Var { name: String, side: Side },
    Lit { text: String, side: Side },
}

impl fmt::Display for Ref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ref::Ans => f.write_str("Ans"),
            Ref::Var { name, side: Side::Context } => write!(f, "Find({name})"),
            Ref::Var { name, side: Side::Question } => write!(f, "Fill({name})"),
            Ref::Lit { text, side: Side::Context } => write!(f, "Find(\"{text}\")"),
            Ref::Lit { text, side: Side::Question } => write!(f, "QFind(\"{text}\")"),
        }
    }
}

/// Execution tree of one rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Exec {
    /// `gap(earlier, later) <= d0`, with `earlier` entirely before `later`.
    Compare { later: Ref, earlier: Ref, d0: i64 },
    /// `earlier` ends before `later` starts.
    Precedes { earlier: Ref, later: Ref },
    Between { left: Ref, mid: Ref, right: Ref },
    And(Box<Exec>, Box<Exec>),
    Or(Box<Exec>, Box<Exec>),
    StartsWith(String),
    Contains(Ref),
    IsType { target: Ref, ty: AnswerType },
}

impl fmt::Display for Exec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exec::Compare { later, earlier, d0 } => write!(f, "Compare(Distance({later},{earlier}),{d0})"),
            Exec::Precedes { earlier, later } => write!(f, "Precedes({earlier},{later})"),
            Exec::Between { left, mid, right } => write!(f, "Between({left},{mid},{right})"),
            Exec::And(a, b) => write!(f, "And({a}, {b})"),
            Exec::Or(a, b) => write!(f, "Or({a}, {b})"),
            Exec::StartsWith(s) => write!(f, "StartsWith(Question,\"{s}\")"),
            Exec::Contains(r) => write!(f, "Contains(Question,{r})"),
            Exec::IsType { target, ty } => write!(f, "IsType({target},{ty})"),
        }
    }
}

impl Exec {
    pub fn refs(&self, out: &mut Vec<Ref>) {
        match self {
            Exec::Compare { later, earlier, .. } | Exec::Precedes { earlier, later } => {
                out.push(earlier.clone());
                out.push(later.clone());
            }
            Exec::Between { left, mid, right } => out.extend([left.clone(), mid.clone(), right.clone()]),
            Exec::And(a, b) | Exec::Or(a, b) => {
                a.refs(out);
                b.refs(out);
            }
            Exec::StartsWith(_) => {}
            Exec::Contains(r) | Exec::IsType { target: r, .. } => out.push(r.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("{0} has no execution in this position")]
    Unsupported(String),
    #[error("variable {0} is not defined")]
    UndefinedVariable(String),
    #[error("variable {name} ({surface:?}) does not occur in the reference instance")]
    NotInReference { name: String, surface: String },
    #[error("variable {0} is constrained in the question but does not occur in the reference question")]
    NotInQuestion(String),
    #[error("the answer cannot be located in the question")]
    AnswerInQuestion,
    #[error("reference instance has no gold answer")]
    NoGold,
    #[error("no rule constrains the answer")]
    NoAnswerRule,
}

fn entity(lf: &LogicalForm, scope: Side) -> Result<Ref, CompileError> {
    match lf {
        LogicalForm::Answer if scope == Side::Question => Err(CompileError::AnswerInQuestion),
        LogicalForm::Answer => Ok(Ref::Ans),
        LogicalForm::Variable(v) => Ok(Ref::Var { name: v.clone(), side: scope }),
        LogicalForm::Literal(t) => Ok(Ref::Lit { text: t.clone(), side: scope }),
        other => Err(CompileError::Unsupported(other.to_string())),
    }
}

fn relation(subject: &Ref, rel: &LogicalForm, scope: Side) -> Result<Exec, CompileError> {
    use LogicalForm::Pred;
    let unsupported = || CompileError::Unsupported(rel.to_string());
    match rel {
        Pred(Predicate::Right, a) => Ok(Exec::Precedes { earlier: entity(&a[0], scope)?, later: subject.clone() }),
        Pred(Predicate::Left, a) => Ok(Exec::Precedes { earlier: subject.clone(), later: entity(&a[0], scope)? }),
        Pred(Predicate::Direct, a) => bounded(subject, &a[0], 0, scope),
        Pred(Predicate::LessThan, a) => match &a[1] {
            LogicalForm::Number(n) => bounded(subject, &a[0], *n, scope),
            _ => Err(unsupported()),
        },
        Pred(Predicate::And, a) => Ok(Exec::And(Box::new(relation(subject, &a[0], scope)?), Box::new(relation(subject, &a[1], scope)?))),
        Pred(Predicate::Or, a) => Ok(Exec::Or(Box::new(relation(subject, &a[0], scope)?), Box::new(relation(subject, &a[1], scope)?))),
        Pred(Predicate::Between, a) => Ok(Exec::Between { left: entity(&a[0], scope)?, mid: subject.clone(), right: entity(&a[1], scope)? }),
        _ => Err(unsupported()),
    }
}

fn bounded(subject: &Ref, dir: &LogicalForm, d0: i64, scope: Side) -> Result<Exec, CompileError> {
    match dir {
        LogicalForm::Pred(Predicate::Right, a) => Ok(Exec::Compare { later: subject.clone(), earlier: entity(&a[0], scope)?, d0 }),
        LogicalForm::Pred(Predicate::Left, a) => Ok(Exec::Compare { later: entity(&a[0], scope)?, earlier: subject.clone(), d0 }),
        other => Err(CompileError::Unsupported(other.to_string())),
    }
}

/// Lowers one proposition. Variables in `@AnswerType` are placed on the
/// question side when `question_vars` contains them.
pub fn lower(lf: &LogicalForm, scope: Side, question_vars: &BTreeSet<String>) -> Result<Exec, CompileError> {
    use LogicalForm::Pred;
    match lf {
        Pred(Predicate::In, a) => match &a[0] {
            LogicalForm::Literal(_) | LogicalForm::Variable(_) => Ok(Exec::Contains(entity(&a[0], Side::Question)?)),
            prop => lower(prop, Side::Question, question_vars),
        },
        Pred(Predicate::Is, a) => relation(&entity(&a[0], scope)?, &a[1], scope),
        Pred(Predicate::And, a) => Ok(Exec::And(Box::new(lower(&a[0], scope, question_vars)?), Box::new(lower(&a[1], scope, question_vars)?))),
        Pred(Predicate::Or, a) => Ok(Exec::Or(Box::new(lower(&a[0], scope, question_vars)?), Box::new(lower(&a[1], scope, question_vars)?))),
        Pred(Predicate::StartsWith, a) => match &a[1] {
            LogicalForm::Literal(s) => Ok(Exec::StartsWith(s.clone())),
            other => Err(CompileError::Unsupported(other.to_string())),
        },
        Pred(Predicate::AnswerType, a) => {
            let ty = match &a[1] {
                LogicalForm::TypeName(t) => *t,
                other => return Err(CompileError::Unsupported(other.to_string())),
            };
            let target = match &a[0] {
                LogicalForm::Answer => Ref::Ans,
                LogicalForm::Variable(v) => {
                    let side = if question_vars.contains(v) { Side::Question } else { Side::Context };
                    Ref::Var { name: v.clone(), side }
                }
                other => return Err(CompileError::Unsupported(other.to_string())),
            };
            Ok(Exec::IsType { target, ty })
        }
        other => Err(CompileError::Unsupported(other.to_string())),
    }
}

/// Where a slot's candidates come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotKind {
    /// Variable in the question, proposed by Fill against its reference
    /// question span.
    Question { name: String, ref_span: Span },
    /// Variable in the context located by Find of its question binding.
    ContextFind { name: String },
    /// Variable in the context proposed by Fill against its reference
    /// context span.
    ContextFill { name: String, ref_span: Span },
    Answer,
}

impl SlotKind {
    pub fn label(&self) -> String {
        match self {
            SlotKind::Question { name, .. } => format!("Q:{name}"),
            SlotKind::ContextFind { name } | SlotKind::ContextFill { name, .. } => format!("C:{name}"),
            SlotKind::Answer => "ANS".into(),
        }
    }
}

/// One compiled rule with the form it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub form: LogicalForm,
    pub exec: Exec,
}

/// A compiled explanation bound to its reference instance.
#[derive(Debug, Clone)]
pub struct TeacherProgram {
    pub id: String,
    pub explanation: Explanation,
    pub reference: Arc<Instance>,
    /// Top parse of every rule sentence.
    pub forms: Vec<LogicalForm>,
    pub rules: Vec<Rule>,
    pub slots: Vec<SlotKind>,
    pub validated: bool,
}

/// Content hash of the reference id and explanation text.
pub fn teacher_id(instance_id: &str, text: &str) -> String {
    let mut h = Sha256::new();
    h.update(instance_id.as_bytes());
    h.update([0u8]);
    h.update(text.as_bytes());
    hex::encode(&h.finalize()[..8])
}

fn surface_span(seq: &crate::corpus::TokenSeq, surface: &str, lo: usize, hi: usize) -> Option<Span> {
    let key = tokenize(surface);
    let lowers = key.lowers();
    find_strict_in(&lowers, seq, lo, hi, false).into_iter().next()
}

impl TeacherProgram {
    /// Compiles parsed forms against the reference instance. The program
    /// starts unvalidated.
    pub fn compile(explanation: Explanation, forms: Vec<LogicalForm>, reference: Arc<Instance>) -> Result<Self, CompileError> {
        let gold = reference.gold.ok_or(CompileError::NoGold)?;
        let defs: &IndexMap<String, String> = &explanation.variable_defs;
        for f in &forms {
            for v in f.variables() {
                if !defs.contains_key(&v) {
                    return Err(CompileError::UndefinedVariable(v));
                }
            }
        }
        let q = &reference.question;
        let question_spans: IndexMap<String, Option<Span>> =
            defs.iter().map(|(name, surface)| (name.clone(), surface_span(q, surface, 0, q.len()))).collect();
        let question_vars: BTreeSet<String> = question_spans.iter().filter(|(_, s)| s.is_some()).map(|(n, _)| n.clone()).collect();

        let mut flat = Vec::new();
        for f in &forms {
            flatten_rules(f, &mut flat);
        }
        let mut rules = Vec::with_capacity(flat.len());
        for form in flat {
            let exec = lower(&form, Side::Context, &question_vars)?;
            rules.push(Rule { form, exec });
        }
        if !forms.iter().any(|f| f.mentions_answer()) {
            return Err(CompileError::NoAnswerRule);
        }

        let mut refs = Vec::new();
        for r in &rules {
            r.exec.refs(&mut refs);
        }
        let uses = |name: &str, side: Side| refs.iter().any(|r| matches!(r, Ref::Var { name: n, side: s } if n == name && *s == side));

        let gold_sentence = reference.sentence_containing(gold.start).unwrap_or(0..reference.context.len());
        let mut q_slots = Vec::new();
        let mut c_slots = Vec::new();
        for (name, surface) in defs {
            let in_q = uses(name, Side::Question);
            let in_c = uses(name, Side::Context);
            if !in_q && !in_c {
                continue;
            }
            let q_span = question_spans[name];
            if in_q {
                match q_span {
                    Some(s) => q_slots.push(SlotKind::Question { name: name.clone(), ref_span: s }),
                    None => return Err(CompileError::NotInQuestion(name.clone())),
                }
            }
            if in_c {
                if q_span.is_some() {
                    if !in_q {
                        q_slots.push(SlotKind::Question { name: name.clone(), ref_span: q_span.unwrap() });
                    }
                    c_slots.push(SlotKind::ContextFind { name: name.clone() });
                } else {
                    let ctx = &reference.context;
                    let span = surface_span(ctx, surface, gold_sentence.start, gold_sentence.end)
                        .or_else(|| surface_span(ctx, surface, 0, ctx.len()))
                        .ok_or_else(|| CompileError::NotInReference { name: name.clone(), surface: surface.clone() })?;
                    c_slots.push(SlotKind::ContextFill { name: name.clone(), ref_span: span });
                }
            }
        }
        // Keep definition order among question slots.
        q_slots.sort_by_key(|s| match s {
            SlotKind::Question { name, .. } => defs.get_index_of(name),
            _ => None,
        });
        let mut slots = q_slots;
        slots.extend(c_slots);
        slots.push(SlotKind::Answer);

        let id = teacher_id(&explanation.instance_id, &explanation.raw_text);
        Ok(TeacherProgram { id, explanation, reference, forms, rules, slots, validated: false })
    }

    pub fn answer_slot(&self) -> usize {
        self.slots.len() - 1
    }

    pub fn slot_of(&self, name: &str, side: Side) -> Option<usize> {
        self.slots.iter().position(|s| match (s, side) {
            (SlotKind::Question { name: n, .. }, Side::Question) => n == name,
            (SlotKind::ContextFind { name: n } | SlotKind::ContextFill { name: n, .. }, Side::Context) => n == name,
            _ => false,
        })
    }

    /// Question-side slot of a variable.
    pub fn question_slot(&self, name: &str) -> Option<usize> {
        self.slot_of(name, Side::Question)
    }

    pub fn execution_trees(&self) -> Vec<String> {
        self.rules.iter().map(|r| r.exec.to_string()).collect()
    }
}
