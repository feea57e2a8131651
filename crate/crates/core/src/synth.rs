//! Seeded synthetic corpora and random search problems.
//!
//! The corpus is built from five question families. Each family has a
//! reference instance with a shipped explanation, and every generated
//! instance is phrased in one of three ways: the reference wording, a
//! loosened wording only a softened teacher reaches, or an unrelated
//! wording no teacher matches.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atoms::logic_and;
use crate::corpus::{Corpus, Instance, Span};
use crate::semparser::ExplanationRecord;
use crate::teacher::{Candidate, Problem};

/// Explanations for the five reference instances, as `(family, text)`.
pub const EXPLANATIONS: [(&str, &str); 5] = [
    (
        "date",
        "X is \"charter\". Y is \"signed\". In the question X is within 4 words after \"when was\" and Y is directly after X. \"on\" is directly before the answer. Y is within 2 words before the answer. X is within 3 words left of Y. The question starts with \"when\", so the answer should be a date.",
    ),
    (
        "since",
        "X is \"Alden Regatta\". The question starts with \"In what year\", so the answer should be a year. \"begin\" is in the question. X is directly after \"did\" and directly before \"begin\" in the question. \"since\" is directly before the answer.",
    ),
    (
        "founder",
        "X is \"founded\". X is in the question. \"by\" is directly before the answer. X is within 2 words before the answer. The answer should be a person.",
    ),
    (
        "count",
        "X is \"bridges\". Y is \"Riverton\". In the question X is directly after \"how many\" and Y is within 2 words after X. The answer is directly before X. Y is within 2 words before the answer. The answer should be a number.",
    ),
    (
        "located",
        "X is \"located\". The question starts with \"where\". X is in the question. \"in\" is directly before the answer. The answer is within 2 words after X.",
    ),
];

const REFERENCES: [(&str, &str, &str); 5] = [
    ("When was the charter signed?", "The charter was signed on 4 May 1821. Copies were sent to every town.", "4 May 1821"),
    ("In what year did Alden Regatta begin?", "Alden Regatta has been held annually since 1904. It draws crowds from the coast.", "1904"),
    ("Who founded the Granite Society?", "The Granite Society was founded by Mara Venn in 1877. Its members met weekly.", "Mara Venn"),
    ("How many bridges does Riverton have?", "Riverton has 14 bridges. Most of them are made of stone.", "14"),
    ("Where is the Ashford Museum located?", "The Ashford Museum is located in Brenton. It opened to visitors long ago.", "Brenton"),
];

pub fn reference_id(family: &str) -> String {
    format!("synth-ref-{family}")
}

const NOUNS: &[&str] = &["treaty", "accord", "statute", "decree", "compact", "pact", "constitution", "covenant"];
const SIGN_VERBS: &[&str] = &["signed", "ratified", "adopted", "approved", "enacted", "drafted"];
const ADVERBIAL: &[&str] = &["in public", "with ceremony", "at dawn", "after debate"];
const TOWNS: &[&str] = &["Alden", "Brookfield", "Carver", "Dunmore", "Elston", "Fairhaven", "Glenrock", "Halden", "Inverby", "Jarrow", "Kellam", "Lorne"];
const EVENTS: &[&str] = &["Regatta", "Fair", "Carnival", "Marathon", "Jamboree", "Rodeo"];
const ORGS: &[&str] = &["Society", "Guild", "Academy", "Institute", "League", "Union"];
const ORG_ADJ: &[&str] = &["Granite", "Harbor", "Lantern", "Meridian", "Orchard", "Summit", "Willow", "Cedar"];
const FOUND_VERBS: &[&str] = &["founded", "started", "formed", "created", "organized"];
const FIRST: &[&str] = &["Mara", "Tobias", "Ilse", "Corin", "Wren", "Anselm", "Petra", "Lucan", "Odile", "Bram"];
const LAST: &[&str] = &["Venn", "Holt", "Marsh", "Quint", "Rowe", "Sable", "Thorne", "Vale"];
const THINGS: &[&str] = &["bridges", "schools", "churches", "parks", "libraries", "markets", "towers", "fountains"];
const SITES: &[&str] = &["Museum", "Observatory", "Gallery", "Archive", "Conservatory", "Arsenal"];
const MONTHS: &[&str] = &["January", "February", "March", "April", "May", "June", "July", "August", "September", "October", "November", "December"];
const FILLERS: &[&str] = &[
    "Local papers covered the story for weeks.",
    "Many residents still remember it.",
    "The weather that season was mild.",
    "Historians disagree about the details.",
    "A small plaque marks the place today.",
];

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).expect("word lists are non-empty")
}

fn year(rng: &mut ChaCha8Rng) -> String {
    rng.gen_range(1700..2000).to_string()
}

fn date(rng: &mut ChaCha8Rng) -> String {
    let d = rng.gen_range(1..=28);
    let m = pick(rng, MONTHS);
    let y = year(rng);
    if rng.gen_bool(0.5) {
        format!("{d} {m} {y}")
    } else {
        format!("{m} {d}, {y}")
    }
}

fn person(rng: &mut ChaCha8Rng) -> String {
    format!("{} {}", pick(rng, FIRST), pick(rng, LAST))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phrasing {
    Reference,
    Loose,
    Unrelated,
}

/// Question, context sentence and answer for one family.
fn family(rng: &mut ChaCha8Rng, fam: usize, ph: Phrasing) -> (String, String, String) {
    match fam {
        0 => {
            let n = pick(rng, NOUNS);
            let v = pick(rng, SIGN_VERBS);
            let a = date(rng);
            match ph {
                Phrasing::Reference => (format!("When was the {n} {v}?"), format!("The {n} was {v} on {a}."), a),
                Phrasing::Loose => (format!("When was the {n} {v}?"), format!("The {n} was {v} {} on {a}.", pick(rng, ADVERBIAL)), a),
                Phrasing::Unrelated => (format!("On what date did officials sign the {n}?"), format!("Officials put their names to the {n} on {a}."), a),
            }
        }
        1 => {
            let x = format!("{} {}", pick(rng, TOWNS), pick(rng, EVENTS));
            let a = year(rng);
            match ph {
                Phrasing::Reference => (format!("In what year did {x} begin?"), format!("{x} has been held annually since {a}."), a),
                Phrasing::Loose => (format!("In what year did {x} begin?"), format!("{x} has been held annually since about {a}."), a),
                Phrasing::Unrelated => (format!("How old is the {x} tradition?"), format!("The first {x} took place in {a}."), a),
            }
        }
        2 => {
            let org = format!("{} {}", pick(rng, ORG_ADJ), pick(rng, ORGS));
            let v = pick(rng, FOUND_VERBS);
            let a = person(rng);
            let y = year(rng);
            match ph {
                Phrasing::Reference => (format!("Who {v} the {org}?"), format!("The {org} was {v} by {a} in {y}."), a),
                Phrasing::Loose => (format!("Who {v} the {org}?"), format!("The {org} was {v} in {y} by {a}."), a),
                Phrasing::Unrelated => (format!("Whose idea was the {org}?"), format!("{a} dreamed up the {org} in {y}."), a),
            }
        }
        3 => {
            let town = pick(rng, TOWNS);
            let thing = pick(rng, THINGS);
            let a = rng.gen_range(2..60).to_string();
            match ph {
                Phrasing::Reference => (format!("How many {thing} does {town} have?"), format!("{town} has {a} {thing}."), a),
                Phrasing::Loose => (format!("How many {thing} does {town} have?"), format!("{town} today still has {a} {thing}."), a),
                Phrasing::Unrelated => (format!("What is the count of {thing} in {town}?"), format!("There are {a} {thing} in {town}."), a),
            }
        }
        _ => {
            let site = format!("{} {}", pick(rng, TOWNS), pick(rng, SITES));
            let a = pick(rng, TOWNS).to_string();
            match ph {
                Phrasing::Reference => (format!("Where is the {site} located?"), format!("The {site} is located in {a}."), a),
                Phrasing::Loose => (format!("Where is the {site} located?"), format!("The {site} is located near the river in {a}."), a),
                Phrasing::Unrelated => (format!("Where can one visit the {site}?"), format!("Visitors reach the {site} by train from {a}."), a),
            }
        }
    }
}

fn instance(rng: &mut ChaCha8Rng, id: String) -> Instance {
    let fam = rng.gen_range(0..EXPLANATIONS.len());
    let ph = match rng.gen_range(0..10) {
        0..=2 => Phrasing::Reference,
        3..=5 => Phrasing::Loose,
        _ => Phrasing::Unrelated,
    };
    let (q, sentence, answer) = family(rng, fam, ph);
    let filler = pick(rng, FILLERS);
    let context = if rng.gen_bool(0.5) { format!("{filler} {sentence}") } else { format!("{sentence} {filler}") };
    Instance::with_answer_text(id, &q, &context, Some(&answer))
}

/// A labeled corpus of `n` instances (the references included), its
/// explanations and a disjoint held-out set with gold answers.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub corpus: Corpus,
    pub explanations: Vec<ExplanationRecord>,
    pub heldout: Vec<Instance>,
}

pub fn generate(seed: u64, n: usize, heldout: usize) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = Corpus::new();
    let mut explanations = Vec::new();
    for ((fam, text), (q, c, a)) in EXPLANATIONS.iter().zip(REFERENCES) {
        let id = reference_id(fam);
        corpus.push(Instance::with_answer_text(id.clone(), q, c, Some(a)));
        explanations.push(ExplanationRecord { id: format!("synth-{fam}"), instance_id: id, text: text.to_string() });
    }
    for i in corpus.len()..n {
        corpus.push(instance(&mut rng, format!("synth-{i:04}")));
    }
    let heldout = (0..heldout).map(|i| instance(&mut rng, format!("synth-heldout-{i:04}"))).collect();
    SynthCorpus { corpus, explanations, heldout }
}

/// A search problem over random unary and pairwise score tables. The
/// partial score is the Łukasiewicz conjunction of every table whose slots
/// are all bound, so it never increases as bindings are added.
#[derive(Debug, Clone)]
pub struct RandomProblem {
    pub candidates: Vec<Vec<Candidate>>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub slots: Vec<usize>,
    /// Score per candidate-index tuple, row-major over `slots`.
    pub table: Vec<f64>,
}

impl RandomProblem {
    /// At most `max_slots` slots with at most `max_cands` candidates each.
    pub fn random(rng: &mut impl Rng, max_slots: usize, max_cands: usize) -> Self {
        let n = rng.gen_range(1..=max_slots);
        let candidates: Vec<Vec<Candidate>> = (0..n)
            .map(|_| {
                let k = rng.gen_range(1..=max_cands);
                let mut starts: Vec<usize> = (0..20).collect();
                starts.shuffle(rng);
                starts[..k]
                    .iter()
                    .map(|&s| Candidate { span: Span::new(s, s + rng.gen_range(0..3)), prior: rng.gen_range(0..4) as f64 * 0.25 })
                    .collect()
            })
            .collect();
        let levels = [0.0, 0.25, 0.5, 0.75, 0.9375, 1.0];
        let mut constraints = Vec::new();
        for _ in 0..rng.gen_range(1..=4) {
            let slots: Vec<usize> = if n > 1 && rng.gen_bool(0.6) {
                let a = rng.gen_range(0..n);
                let b = (a + rng.gen_range(1..n)) % n;
                vec![a, b]
            } else {
                vec![rng.gen_range(0..n)]
            };
            let size: usize = slots.iter().map(|&s| candidates[s].len()).product();
            let table = (0..size).map(|_| levels[rng.gen_range(0..levels.len())]).collect();
            constraints.push(Constraint { slots, table });
        }
        RandomProblem { candidates, constraints }
    }

    pub fn combinations(&self) -> usize {
        self.candidates.iter().map(Vec::len).product()
    }

    fn index_of(&self, slot: usize, span: Span) -> usize {
        self.candidates[slot].iter().position(|c| c.span == span).expect("bound spans come from the candidate lists")
    }
}

impl Problem for RandomProblem {
    fn num_slots(&self) -> usize {
        self.candidates.len()
    }

    fn propose(&self, slot: usize, _bindings: &[Option<Span>]) -> Vec<Candidate> {
        self.candidates[slot].clone()
    }

    fn score(&self, bindings: &[Option<Span>]) -> f64 {
        let mut z = 1.0;
        for c in &self.constraints {
            let mut idx = 0;
            let mut bound = true;
            for &s in &c.slots {
                match bindings[s] {
                    Some(span) => idx = idx * self.candidates[s].len() + self.index_of(s, span),
                    None => bound = false,
                }
            }
            if bound {
                z = logic_and(z, c.table[idx]).expect("table entries are in [0, 1]");
            }
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_seeded() {
        let a = generate(3, 40, 10);
        let b = generate(3, 40, 10);
        assert_eq!(a.corpus.len(), 40);
        assert_eq!(a.heldout.len(), 10);
        let qa: Vec<_> = a.corpus.iter().map(|i| i.question.text().to_string()).collect();
        let qb: Vec<_> = b.corpus.iter().map(|i| i.question.text().to_string()).collect();
        assert_eq!(qa, qb);
        assert!(a.corpus.iter().all(|i| i.gold.is_some()));
        assert!(a.heldout.iter().all(|i| i.gold.is_some()));
    }

    #[test]
    fn random_problem_scores_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let p = RandomProblem::random(&mut rng, 3, 5);
            let mut b: Vec<Option<Span>> = vec![None; p.num_slots()];
            let mut prev = p.score(&b);
            for s in 0..p.num_slots() {
                b[s] = Some(p.candidates[s][0].span);
                let z = p.score(&b);
                assert!(z <= prev);
                prev = z;
            }
        }
    }
}
