use std::sync::Arc;

use nmt_core::corpus::{Instance, Span};
use nmt_core::fixtures;
use nmt_core::semparser::{parse_explanation, Explanation, Lexicon, LogicalForm};
use nmt_core::teacher::*;

fn program(id: &str) -> TeacherProgram {
    let corpus = fixtures::corpus();
    let rec = fixtures::explanation(id);
    let reference = corpus.get(&rec.instance_id).unwrap().clone();
    build_teacher(&rec, &Lexicon::builtin(), reference, &Engine::default()).unwrap()
}

fn inst(id: &str) -> Arc<Instance> {
    fixtures::corpus().get(id).unwrap().clone()
}

fn answer_of(p: &TeacherProgram, id: &str) -> Option<(String, f64)> {
    Engine::default().answer(p, &inst(id)).map(|a| (a.text, a.z))
}

#[test]
fn bundled_teachers_validate() {
    for id in ["table1", "filmfest", "estonia", "hydrogen"] {
        assert!(program(id).validated, "{id}");
    }
}

#[test]
fn strict_and_soft_matches() {
    let t1 = program("table1");
    assert_eq!(answer_of(&t1, "independence"), Some(("24 September 1973".into(), 1.0)));
    let (text, z) = answer_of(&t1, "brazelton").unwrap();
    assert_eq!(text, "Monday August 19, 1878");
    assert!((z - 0.9375).abs() < 1e-9);

    assert_eq!(answer_of(&program("filmfest"), "music-night"), Some(("1992".into(), 1.0)));

    let (text, z) = answer_of(&program("estonia"), "slavs").unwrap();
    assert_eq!(text, "Byzantine borders");
    assert!((z - 35.0 / 36.0).abs() < 1e-9);
}

#[test]
fn strict_mode_rejects_soft_matches() {
    let t1 = program("table1");
    let e = Engine::new(SearchConfig::strict());
    assert!(e.answer(&t1, &inst("brazelton")).is_none());
    assert_eq!(e.answer(&t1, &inst("independence")).unwrap().z, 1.0);
}

#[test]
fn execute_with_fixed_bindings() {
    let t1 = program("table1");
    let e = Engine::default();
    let i = inst("independence");
    // Slots: Q:X, Q:Y, C:X, C:Y, ANS
    let good = [Some(Span::single(2)), Some(Span::single(3)), Some(Span::single(14)), Some(Span::single(16)), Some(Span::new(18, 20))];
    assert_eq!(e.execute(&t1, &i, &good, true), 1.0);
    assert_eq!(e.execute(&t1, &i, &good, false), 1.0);
    // Answer five tokens too far from "on".
    let far = Instance::with_answer_text(
        "far",
        "When was independence declared?",
        "Independence was declared on a b c d e 24 September 1973.",
        Some("24 September 1973"),
    );
    let b = [Some(Span::single(2)), Some(Span::single(3)), Some(Span::single(0)), Some(Span::single(2)), far.gold];
    assert_eq!(e.execute(&t1, &far, &b, true), 0.0);
}

#[test]
fn partial_scores_never_increase() {
    let t1 = program("table1");
    let e = Engine::default();
    let i = inst("brazelton");
    let full = [Some(Span::single(2)), Some(Span::single(3)), Some(Span::single(0)), Some(Span::single(6)), Some(Span::new(8, 12))];
    let mut prev = 1.0;
    for k in 0..=full.len() {
        let mut b = vec![None; full.len()];
        b[..k].copy_from_slice(&full[..k]);
        let z = e.execute(&t1, &i, &b, true);
        assert!(z <= prev + 1e-12);
        prev = z;
    }
    assert!((prev - 0.9375).abs() < 1e-9);
}

#[test]
fn proposals() {
    let t1 = program("table1");
    let e = Engine::default();
    let q = e.propose_question(&t1, &inst("independence"));
    let x = &q.iter().find(|(l, _)| l == "Q:X").unwrap().1;
    assert!(x.iter().any(|c| c.span == Span::single(2)));

    let off = Instance::with_answer_text("off", "Who declared independence?", "Independence was declared on 24 September 1973.", None);
    assert!(e.propose_question(&t1, &off).is_empty());
    assert!(e.answer(&t1, &off).is_none());

    let own = e.propose_question(&t1, &t1.reference);
    let x = &own.iter().find(|(l, _)| l == "Q:X").unwrap().1;
    let funeral = t1.reference.question.tokens().iter().position(|t| t.lower == "funeral").unwrap();
    assert!(x.iter().any(|c| c.span == Span::single(funeral)));
}

#[test]
fn beam_equals_exhaustive_on_fixtures() {
    let corpus = fixtures::corpus();
    let wide = Engine::new(SearchConfig { beam_width: 100_000, threshold: 0.5, ..SearchConfig::default() });
    for id in ["table1", "filmfest", "estonia", "hydrogen"] {
        let p = program(id);
        for i in corpus.iter() {
            for soft in [false, true] {
                assert_eq!(wide.answer_mode(&p, i, soft), wide.answer_exhaustive(&p, i, soft), "{id} on {}", i.id);
            }
        }
    }
}

#[test]
fn self_contradiction_does_not_validate() {
    let corpus = fixtures::corpus();
    let reference = corpus.get("independence").unwrap().clone();
    let expl = Explanation::new("bad", "independence", "X is \"declared\". The answer is directly before X.").unwrap();
    let forms = parse_explanation(&expl, &Lexicon::builtin()).unwrap();
    let p = TeacherProgram::compile(expl, forms, reference).unwrap();
    assert!(!Engine::default().validate(&p));
}

#[test]
fn compile_errors() {
    let reference = inst("independence");
    let expl = Explanation::new("e", "independence", "X is \"declared\". The answer is after W.").unwrap();
    let forms: Vec<LogicalForm> = vec!["@Is(Answer, @Right(W))".parse().unwrap()];
    assert_eq!(TeacherProgram::compile(expl, forms, reference.clone()).unwrap_err(), CompileError::UndefinedVariable("W".into()));

    let expl = Explanation::new("e", "independence", "X is \"nowhere\". The answer is after X.").unwrap();
    let forms = vec!["@Is(Answer, @Right(X))".parse().unwrap()];
    assert!(matches!(TeacherProgram::compile(expl, forms, reference).unwrap_err(), CompileError::NotInReference { .. }));
}

fn fake(id: &str, start: usize, z: f64) -> TeacherAnswer {
    TeacherAnswer { teacher_id: id.into(), span: Span::new(start, start + 1), text: String::new(), z, prior: 0.0, bindings: Vec::new() }
}

#[test]
fn ensemble_rules() {
    let a = [fake("a", 5, 1.0), fake("b", 1, 0.93)];
    assert_eq!(ensemble(&a).unwrap().teacher_id, "a");
    assert!(ensemble(&[]).is_none());
    let b = [fake("a", 3, 0.9), fake("b", 3, 0.95)];
    assert_eq!(ensemble(&b).unwrap().z, 0.95);
    let tie = [fake("b", 3, 0.9), fake("a", 3, 0.9), fake("c", 1, 0.9)];
    assert_eq!(ensemble(&tie).unwrap().teacher_id, "c");
    let tie = [fake("b", 3, 0.9), fake("a", 3, 0.9)];
    assert_eq!(ensemble(&tie).unwrap().teacher_id, "a");
}

#[test]
fn ensemble_over_programs() {
    let progs = vec![program("table1"), program("filmfest"), program("estonia")];
    let e = Engine::default();
    assert_eq!(e.ensemble_answer(&progs, &inst("independence")).unwrap().text, "24 September 1973");
    assert_eq!(e.ensemble_answer(&progs, &inst("music-night")).unwrap().text, "1992");
    assert!(e.ensemble_answer(&progs, &inst("hamlet")).is_none());
}

#[test]
fn bundle_round_trip() {
    let corpus = fixtures::corpus();
    let progs = vec![program("table1"), program("estonia")];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("teachers.jsonl");
    write_bundles(&progs, &path).unwrap();
    let bundles = load_bundles(&path).unwrap();
    assert_eq!(bundles[0].logical_forms.len(), 6);
    assert_eq!(bundles[0].variable_defs.get("X").map(String::as_str), Some("funeral"));
    for (b, p) in bundles.iter().zip(&progs) {
        let back = from_bundle(b, &corpus, &Engine::default()).unwrap();
        assert_eq!(back.id, p.id);
        assert_eq!(back.execution_trees(), p.execution_trees());
        assert!(back.validated);
    }
    assert!(matches!(parse_bundles("{\"id\": 3}\n"), Err(TeacherError::Jsonl { line: 1, .. })));
}

#[test]
fn teacher_ids_are_content_hashes() {
    let a = program("table1");
    let b = program("table1");
    assert_eq!(a.id, b.id);
    assert_ne!(a.id, program("filmfest").id);
}
