//! Running compiled teachers on instances.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::ops::Range;
use std::sync::Arc;

use crate::atoms::{fill_candidates, fill_soft_in, fill_strict_in, find_soft_in, find_strict_in, match_kind, Lexical, MatchKind, SimilarityBackend};
use crate::corpus::{tokenize, AnswerType, Instance, Span};

use super::exec::{score_rules, side_of, span_has_type, Env, Resolved};
use super::program::{Exec, Ref, Side, SlotKind, TeacherProgram};
use super::search::{beam_search, exhaustive_search, Candidate, Problem, State};

/// Prior given to soft matches, scaled by their similarity.
const SOFT_PRIOR: f64 = 0.25;
/// Per-token bonus among answer-type matches, so longer typed spans win ties.
const LENGTH_BONUS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub beam_width: usize,
    pub threshold: f64,
    pub soft: bool,
    pub k_fill: usize,
    pub max_len: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { beam_width: 10, threshold: 0.6, soft: true, k_fill: 5, max_len: 10 }
    }
}

impl SearchConfig {
    pub fn strict() -> Self {
        SearchConfig { soft: false, ..Self::default() }
    }
}

/// One teacher's answer on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeacherAnswer {
    pub teacher_id: String,
    pub span: Span,
    pub text: String,
    pub z: f64,
    pub prior: f64,
    /// Slot label and binding, in slot order.
    pub bindings: Vec<(String, Span)>,
}

/// Search settings plus the similarity backends used by soft Fill and Find.
#[derive(Clone)]
pub struct Engine {
    pub config: SearchConfig,
    pub fill: Arc<dyn SimilarityBackend>,
    pub find: Arc<dyn SimilarityBackend>,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new(SearchConfig::default())
    }
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("config", &self.config)
            .field("fill", &self.fill.name())
            .field("find", &self.find.name())
            .finish()
    }
}

struct InstanceProblem<'a> {
    prog: &'a TeacherProgram,
    inst: &'a Instance,
    window: Range<usize>,
    engine: &'a Engine,
    soft: bool,
    question_cands: &'a [Option<Vec<Candidate>>],
    literals: &'a HashMap<(String, Side), Vec<Span>>,
    execs: Vec<&'a Exec>,
}

struct BindingEnv<'p, 'a> {
    p: &'p InstanceProblem<'a>,
    bindings: &'p [Option<Span>],
}

impl Env for BindingEnv<'_, '_> {
    fn resolve(&self, r: &Ref) -> Resolved {
        let slot = match r {
            Ref::Ans => Some(self.p.prog.answer_slot()),
            Ref::Var { name, side } => self.p.prog.slot_of(name, *side),
            Ref::Lit { text, side } => {
                return Resolved::Spans(self.p.literals.get(&(text.clone(), *side)).cloned().unwrap_or_default());
            }
        };
        match slot.and_then(|s| self.bindings[s]) {
            Some(sp) => Resolved::Spans(vec![sp]),
            None if slot.is_some() => Resolved::Unbound,
            None => Resolved::Spans(Vec::new()),
        }
    }

    fn question_starts_with(&self, lit: &str) -> bool {
        let key = tokenize(lit);
        let q = self.p.inst.question.lowers();
        let k = key.lowers();
        !k.is_empty() && q.len() >= k.len() && q[..k.len()] == k[..]
    }

    fn has_type(&self, r: &Ref, span: Span, ty: AnswerType) -> bool {
        let seq = match side_of(r) {
            Side::Question => &self.p.inst.question,
            Side::Context => &self.p.inst.context,
        };
        span_has_type(seq, span, ty)
    }
}

fn literal_spans(prog: &TeacherProgram, inst: &Instance, window: &Range<usize>) -> HashMap<(String, Side), Vec<Span>> {
    let mut refs = Vec::new();
    for r in &prog.rules {
        r.exec.refs(&mut refs);
    }
    let mut out = HashMap::new();
    for r in refs {
        if let Ref::Lit { text, side } = r {
            let key = tokenize(&text);
            let lowers = key.lowers();
            let spans = match side {
                Side::Question => find_strict_in(&lowers, &inst.question, 0, inst.question.len(), false),
                Side::Context => find_strict_in(&lowers, &inst.context, window.start, window.end, false),
            };
            out.insert((text, side), spans);
        }
    }
    out
}

fn answer_types(prog: &TeacherProgram) -> Vec<AnswerType> {
    prog.rules
        .iter()
        .filter_map(|r| match &r.exec {
            Exec::IsType { target: Ref::Ans, ty } => Some(*ty),
            _ => None,
        })
        .collect()
}

fn prior_of(kind: Option<MatchKind>, span: Span) -> f64 {
    match kind {
        Some(MatchKind::AnswerType) => MatchKind::AnswerType.strength() + LENGTH_BONUS * span.len() as f64,
        Some(k) => k.strength(),
        None => 0.0,
    }
}

fn soft_candidates(scored: Vec<crate::atoms::ScoredSpan>, k: usize) -> Vec<Candidate> {
    scored.into_iter().take(k).map(|s| Candidate { span: s.span, prior: SOFT_PRIOR * s.score }).collect()
}

impl Problem for InstanceProblem<'_> {
    fn num_slots(&self) -> usize {
        self.prog.slots.len()
    }

    fn propose(&self, slot: usize, bindings: &[Option<Span>]) -> Vec<Candidate> {
        let cfg = &self.engine.config;
        let (lo, hi) = (self.window.start, self.window.end);
        let ctx = &self.inst.context;
        let reference = &self.prog.reference;
        match &self.prog.slots[slot] {
            SlotKind::Question { .. } => self.question_cands[slot].clone().unwrap_or_default(),
            SlotKind::ContextFind { name } => {
                let Some(qb) = self.prog.question_slot(name).and_then(|s| bindings[s]) else {
                    return Vec::new();
                };
                let key = qb.lowers(&self.inst.question);
                let strict = find_strict_in(&key, ctx, lo, hi, false);
                if strict.is_empty() && self.soft {
                    let scored = find_soft_in(&self.inst.question, qb, ctx, lo, hi, self.engine.find.as_ref());
                    return soft_candidates(scored, cfg.k_fill);
                }
                strict.into_iter().map(|span| Candidate { span, prior: 1.0 }).collect()
            }
            SlotKind::ContextFill { ref_span, .. } => {
                let max_len = cfg.max_len.max(ref_span.len());
                let strict = fill_strict_in(&reference.context, *ref_span, ctx, lo, hi, max_len);
                if strict.is_empty() && self.soft {
                    let scored = fill_soft_in(&reference.context, *ref_span, ctx, lo, hi, max_len, self.engine.fill.as_ref(), cfg.k_fill);
                    return soft_candidates(scored, cfg.k_fill);
                }
                strict.into_iter().map(|(span, k)| Candidate { span, prior: prior_of(Some(k), span) }).collect()
            }
            SlotKind::Answer => {
                let gold = reference.gold.expect("compiled programs have gold");
                let types = answer_types(self.prog);
                let max_len = cfg.max_len.max(gold.len());
                fill_candidates(ctx, lo, hi, max_len)
                    .into_iter()
                    .filter(|c| types.iter().all(|t| span_has_type(ctx, *c, *t)))
                    .map(|span| Candidate { span, prior: prior_of(match_kind(&reference.context, gold, ctx, span), span) })
                    .collect()
            }
        }
    }

    fn score(&self, bindings: &[Option<Span>]) -> f64 {
        let env = BindingEnv { p: self, bindings };
        score_rules(self.execs.iter().copied(), &env, self.soft)
    }
}

fn question_candidates(prog: &TeacherProgram, inst: &Instance, engine: &Engine, soft: bool) -> Vec<Option<Vec<Candidate>>> {
    let cfg = &engine.config;
    let q = &inst.question;
    let rq = &prog.reference.question;
    prog.slots
        .iter()
        .map(|s| match s {
            SlotKind::Question { ref_span, .. } => {
                let max_len = cfg.max_len.max(ref_span.len());
                let strict = fill_strict_in(rq, *ref_span, q, 0, q.len(), max_len);
                Some(if strict.is_empty() && soft {
                    soft_candidates(fill_soft_in(rq, *ref_span, q, 0, q.len(), max_len, engine.fill.as_ref(), cfg.k_fill), cfg.k_fill)
                } else {
                    strict.into_iter().map(|(span, k)| Candidate { span, prior: prior_of(Some(k), span) }).collect()
                })
            }
            _ => None,
        })
        .collect()
}

fn answer_start(prog: &TeacherProgram, s: &State) -> usize {
    s.bindings[prog.answer_slot()].map(|b| b.start).unwrap_or(usize::MAX)
}

impl Engine {
    pub fn new(config: SearchConfig) -> Self {
        Engine { config, fill: Arc::new(Lexical::with_context()), find: Arc::new(Lexical::plain()) }
    }

    pub fn with_backends(config: SearchConfig, fill: Arc<dyn SimilarityBackend>, find: Arc<dyn SimilarityBackend>) -> Self {
        Engine { config, fill, find }
    }

    fn run(&self, prog: &TeacherProgram, inst: &Instance, soft: bool, exhaustive: bool) -> Vec<State> {
        let qc = question_candidates(prog, inst, self, soft);
        let execs: Vec<&Exec> = prog.rules.iter().map(|r| &r.exec).collect();
        let mut best: Vec<State> = Vec::new();
        let windows: Vec<Range<usize>> = if inst.sentences().is_empty() { vec![0..inst.context.len()] } else { inst.sentences().to_vec() };
        for window in windows {
            let literals = literal_spans(prog, inst, &window);
            let problem = InstanceProblem {
                prog,
                inst,
                window,
                engine: self,
                soft,
                question_cands: &qc,
                literals: &literals,
                execs: execs.clone(),
            };
            let found = if exhaustive {
                exhaustive_search(&problem, self.config.threshold)
            } else {
                beam_search(&problem, self.config.beam_width, self.config.threshold)
            };
            best.extend(found.into_iter().next());
        }
        best.sort_by(|a, b| {
            b.z.total_cmp(&a.z)
                .then(b.prior.total_cmp(&a.prior))
                .then(answer_start(prog, a).cmp(&answer_start(prog, b)))
        });
        best
    }

    fn to_answer(&self, prog: &TeacherProgram, inst: &Instance, st: &State) -> TeacherAnswer {
        let span = st.bindings[prog.answer_slot()].expect("complete assignment");
        let bindings = prog.slots.iter().zip(&st.bindings).filter_map(|(k, b)| b.map(|b| (k.label(), b))).collect();
        TeacherAnswer {
            teacher_id: prog.id.clone(),
            span,
            text: span.text(&inst.context).to_string(),
            z: st.z,
            prior: st.prior,
            bindings,
        }
    }

    /// Score of a full or partial assignment. Context literals are looked up
    /// in the sentence holding the answer binding, or the whole context.
    pub fn execute(&self, prog: &TeacherProgram, inst: &Instance, bindings: &[Option<Span>], soft: bool) -> f64 {
        let window = bindings
            .get(prog.answer_slot())
            .copied()
            .flatten()
            .and_then(|a| inst.sentence_containing(a.start))
            .unwrap_or(0..inst.context.len());
        let qc = vec![None; prog.slots.len()];
        let literals = literal_spans(prog, inst, &window);
        let problem = InstanceProblem {
            prog,
            inst,
            window,
            engine: self,
            soft,
            question_cands: &qc,
            literals: &literals,
            execs: prog.rules.iter().map(|r| &r.exec).collect(),
        };
        problem.score(bindings)
    }

    /// Candidates for the question-side slots, keyed by slot label. Empty
    /// when the question-only rules already fail.
    pub fn propose_question(&self, prog: &TeacherProgram, inst: &Instance) -> Vec<(String, Vec<Candidate>)> {
        let soft = self.config.soft;
        if self.execute(prog, inst, &vec![None; prog.slots.len()], soft) <= self.config.threshold {
            return Vec::new();
        }
        let qc = question_candidates(prog, inst, self, soft);
        prog.slots.iter().zip(qc).filter_map(|(s, c)| c.map(|c| (s.label(), c))).collect()
    }

    /// Best answer in the configured mode, or `None` when the teacher abstains.
    pub fn answer(&self, prog: &TeacherProgram, inst: &Instance) -> Option<TeacherAnswer> {
        self.answer_mode(prog, inst, self.config.soft)
    }

    pub fn answer_mode(&self, prog: &TeacherProgram, inst: &Instance, soft: bool) -> Option<TeacherAnswer> {
        let states = self.run(prog, inst, soft, false);
        states.first().map(|s| self.to_answer(prog, inst, s))
    }

    /// Same as [`Engine::answer_mode`] but enumerating every assignment.
    pub fn answer_exhaustive(&self, prog: &TeacherProgram, inst: &Instance, soft: bool) -> Option<TeacherAnswer> {
        let states = self.run(prog, inst, soft, true);
        states.first().map(|s| self.to_answer(prog, inst, s))
    }

    /// A program is valid when strict execution on its own reference
    /// recovers the gold span with score 1.
    pub fn validate(&self, prog: &TeacherProgram) -> bool {
        let reference = prog.reference.clone();
        match self.answer_mode(prog, &reference, false) {
            Some(a) => Some(a.span) == reference.gold && a.z == 1.0,
            None => false,
        }
    }

    /// Runs every teacher and combines their answers.
    pub fn ensemble_answer(&self, progs: &[TeacherProgram], inst: &Instance) -> Option<TeacherAnswer> {
        let answers: Vec<TeacherAnswer> = progs.iter().filter_map(|p| self.answer(p, inst)).collect();
        ensemble(&answers).cloned()
    }
}

/// Highest score wins; ties go to the earlier span, then the smaller teacher id.
pub fn ensemble(answers: &[TeacherAnswer]) -> Option<&TeacherAnswer> {
    answers.iter().min_by(|a, b| {
        b.z.total_cmp(&a.z).then(a.span.start.cmp(&b.span.start)).then(a.teacher_id.cmp(&b.teacher_id))
    })
}
