use std::collections::BTreeMap;

use nmt_core::corpus::{Corpus, Instance, Span};
use nmt_core::pipeline::{LabeledSplits, SoftEntry, StrictEntry};
use nmt_core::supervision::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Deserialize)]
struct EvalCase {
    id: String,
    prediction: String,
    answers: Vec<String>,
    exact_match: f64,
    f1: f64,
}

fn cases() -> Vec<EvalCase> {
    serde_json::from_str(include_str!("fixtures/eval_cases.json")).unwrap()
}

#[test]
fn evaluator_matches_oracle_per_case() {
    for c in cases() {
        let pred = BTreeMap::from([(c.id.clone(), c.prediction.clone())]);
        let gold = BTreeMap::from([(c.id.clone(), c.answers.clone())]);
        let m = evaluate(&pred, &gold).unwrap();
        assert_eq!(m.exact_match, c.exact_match, "{}", c.id);
        assert!((m.f1 - c.f1).abs() < 1e-6, "{}: {} vs {}", c.id, m.f1, c.f1);
    }
}

#[test]
fn evaluator_macro_average() {
    let cs = cases();
    let pred: BTreeMap<_, _> = cs.iter().map(|c| (c.id.clone(), c.prediction.clone())).collect();
    let gold: BTreeMap<_, _> = cs.iter().map(|c| (c.id.clone(), c.answers.clone())).collect();
    let m = evaluate(&pred, &gold).unwrap();
    let em: f64 = cs.iter().map(|c| c.exact_match).sum::<f64>() / cs.len() as f64;
    let f1: f64 = cs.iter().map(|c| c.f1).sum::<f64>() / cs.len() as f64;
    assert!((m.exact_match - em).abs() < 1e-9);
    assert!((m.f1 - f1).abs() < 1e-6);
}

#[test]
fn evaluator_errors_on_missing_gold() {
    let pred = BTreeMap::from([("q".to_string(), "x".to_string())]);
    assert_eq!(evaluate(&pred, &BTreeMap::new()), Err(EvalError::MissingGold("q".into())));
}

proptest! {
    #[test]
    fn evaluator_symmetric(a in "[a-zA-Z ,.]{0,20}", b in "[a-zA-Z ,.]{0,20}") {
        prop_assert_eq!(exact_match(&a, &b), exact_match(&b, &a));
        prop_assert!((f1_score(&a, &b) - f1_score(&b, &a)).abs() < 1e-12);
    }

    #[test]
    fn weights_are_a_distribution(z in prop::collection::vec(0.0f64..=1.0, 1..20), theta in 0.0f64..10.0) {
        let w = batch_weights(&z, theta).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(w.iter().all(|v| *v > 0.0));
        if theta > 0.0 {
            for i in 0..z.len() {
                for j in 0..z.len() {
                    if z[i] > z[j] + 1e-9 {
                        prop_assert!(w[i] > w[j]);
                    }
                }
            }
        }
        let mut rev = z.clone();
        rev.reverse();
        let mut wr = batch_weights(&rev, theta).unwrap();
        wr.reverse();
        for (a, b) in w.iter().zip(&wr) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_temperature_is_uniform(z in prop::collection::vec(0.0f64..=1.0, 1..20)) {
        let w = batch_weights(&z, 0.0).unwrap();
        prop_assert!(w.iter().all(|v| *v == 1.0 / z.len() as f64));
    }

    #[test]
    fn one_soft_step_per_cycle(r in 1usize..=16, offset in 0usize..100) {
        let soft = (offset..offset + r + 1).filter(|&s| rotation_schedule(s, r) == BatchKind::Soft).count();
        prop_assert_eq!(soft, 1);
    }
}

fn on_corpus(n: usize, seed: u64) -> Vec<Instance> {
    let names = ["Alice", "Bruno", "Chen", "Dara", "Emil", "Farah"];
    let things = ["Kestrel", "Marlowe", "Quill", "Tamsin", "Orrin", "Pella", "Veyra"];
    let verbs = ["arrived", "landed", "stood", "waited"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let name = names[rng.gen_range(0..names.len())];
            let thing = things[rng.gen_range(0..things.len())];
            let verb = verbs[rng.gen_range(0..verbs.len())];
            Instance::with_answer_text(
                format!("on{i}"),
                &format!("Where {verb} {name}?"),
                &format!("After a long trip with friends, {name} {verb} on {thing} and rested."),
                Some(thing),
            )
        })
        .collect()
}

fn strict_entry(inst: &Instance) -> StrictEntry {
    let (s, e) = inst.gold_chars().unwrap();
    StrictEntry { instance_id: inst.id.clone(), answer_text: inst.gold_text().unwrap().into(), char_start: s, char_end: e, teacher_id: "t".into() }
}

#[test]
fn pseudo_labels_follow_learned_pattern() {
    let train = on_corpus(40, 1);
    let held = on_corpus(10, 2);
    let corpus: Corpus = train.iter().cloned().collect();
    let splits = LabeledSplits { strict: train.iter().map(strict_entry).collect(), ..Default::default() };
    let (student, report) = train_student(&splits, &corpus, &TrainConfig { epochs: 30, ..TrainConfig::default() }, TrainMode::SaOnly).unwrap();
    assert!(report.epoch_losses.last().unwrap() < report.epoch_losses.first().unwrap());
    let refs: Vec<&Instance> = held.iter().collect();
    for (inst, span) in pseudo_label(&student, &refs) {
        let on = inst.context.tokens().iter().position(|t| t.lower == "on").unwrap();
        assert_eq!(span.start, on + 1, "{}", inst.id);
    }
    assert!(pseudo_label(&student, &[]).is_empty());
}

#[test]
fn training_edge_cases() {
    let train = on_corpus(5, 3);
    let corpus: Corpus = train.iter().cloned().collect();
    let splits = LabeledSplits { strict: train.iter().map(strict_entry).collect(), ..Default::default() };
    let (s, r) = train_student(&splits, &corpus, &TrainConfig { epochs: 0, ..TrainConfig::default() }, TrainMode::Da).unwrap();
    assert_eq!(s, Student::default());
    assert_eq!(r.steps, 0);
    assert_eq!(train_student(&LabeledSplits::default(), &corpus, &TrainConfig::default(), TrainMode::SaOnly).unwrap_err(), TrainError::EmptyStrict);
}

#[test]
fn training_is_deterministic_for_every_mode() {
    let all = on_corpus(30, 4);
    let corpus: Corpus = all.iter().cloned().collect();
    let strict = all[..10].iter().map(strict_entry).collect();
    let soft = all[10..20]
        .iter()
        .map(|i| {
            let e = strict_entry(i);
            SoftEntry { instance_id: e.instance_id, answer_text: e.answer_text, char_start: e.char_start, char_end: e.char_end, teacher_id: e.teacher_id, z: 0.8 }
        })
        .collect();
    let unlabeled = all[10..].iter().map(|i| i.id.clone()).collect();
    let splits = LabeledSplits { strict, soft, unlabeled };
    for mode in [TrainMode::SaOnly, TrainMode::Da, TrainMode::DaPl] {
        let a = train_student(&splits, &corpus, &TrainConfig::default(), mode).unwrap().0;
        let b = train_student(&splits, &corpus, &TrainConfig::default(), mode).unwrap().0;
        assert_eq!(a, b);
        assert!(a.is_finite());
    }
}

fn random_student(rng: &mut ChaCha8Rng) -> Student {
    let mut s = Student::default();
    for w in s.start.iter_mut().chain(s.end.iter_mut()) {
        *w = rng.gen_range(-1.0..1.0);
    }
    s
}

#[test]
fn uniform_weights_reduce_to_mean() {
    let data = on_corpus(6, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let s = random_student(&mut rng);
    let batch: Vec<(&Instance, Span)> = data.iter().map(|i| (i, i.gold.unwrap())).collect();
    let w = vec![1.0 / batch.len() as f64; batch.len()];
    assert_eq!(mrc_loss_mean(&s, &batch).unwrap(), mrc_loss(&s, &batch, &w).unwrap());
    let mean: f64 = batch.iter().map(|b| mrc_loss(&s, &[*b], &[1.0]).unwrap().0).sum::<f64>() / batch.len() as f64;
    assert!((mrc_loss_mean(&s, &batch).unwrap().0 - mean).abs() < 1e-12);
    let single = mrc_loss(&s, &batch[..1], &[1.0]).unwrap().0;
    let mut w = vec![0.0; batch.len()];
    w[0] = 1.0;
    assert_eq!(mrc_loss(&s, &batch, &w).unwrap().0, single);
}

#[test]
fn gradient_matches_central_differences() {
    let data = on_corpus(20, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let s = random_student(&mut rng);
        let k = rng.gen_range(1..4);
        let batch: Vec<(&Instance, Span)> = (0..k).map(|_| &data[rng.gen_range(0..data.len())]).map(|i| (i, i.gold.unwrap())).collect();
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let (_, g) = mrc_loss(&s, &batch, &w).unwrap();
        let h = 1e-5;
        let analytic: Vec<f64> = g.start.iter().chain(&g.end).copied().collect();
        for (idx, a) in analytic.iter().enumerate() {
            let mut p = s.clone();
            let mut m = s.clone();
            let n = s.start.len();
            if idx < n {
                p.start[idx] += h;
                m.start[idx] -= h;
            } else {
                p.end[idx - n] += h;
                m.end[idx - n] -= h;
            }
            let num = (mrc_loss(&p, &batch, &w).unwrap().0 - mrc_loss(&m, &batch, &w).unwrap().0) / (2.0 * h);
            let rel = (num - a).abs() / a.abs().max(num.abs()).max(1e-3);
            assert!(rel < 1e-4, "param {idx}: analytic {a} numeric {num}");
        }
    }
}
