use std::fs;
use std::path::{Path, PathBuf};

use nmt_core::atoms::ExternalVectors;
use nmt_core::corpus::{parse_jsonl_corpus, parse_squad};
use nmt_core::semparser::{parse_explanation, parse_template, Category, Explanation, Lexicon, LogicalForm};
use nmt_core::teacher::{parse_bundles, parse_explanation_records};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

#[test]
fn logical_form_seeds_round_trip() {
    let mut ok = 0;
    for (p, b) in seeds("logical_form") {
        if let Ok(lf) = text(&b).parse::<LogicalForm>() {
            let again: LogicalForm = lf.to_string().parse().unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            assert_eq!(again, lf, "{}", p.display());
            ok += 1;
        }
    }
    assert!(ok >= 10);
}

#[test]
fn category_seeds_round_trip() {
    for (p, b) in seeds("category") {
        if let Ok(cat) = text(&b).parse::<Category>() {
            assert_eq!(cat.to_string().parse::<Category>().unwrap(), cat, "{}", p.display());
        }
    }
}

#[test]
fn template_and_lexicon_seeds() {
    for (_, b) in seeds("lambda_template") {
        let _ = parse_template(text(&b));
    }
    let results: Vec<_> = seeds("lexicon").into_iter().map(|(_, b)| Lexicon::from_json(text(&b)).is_ok()).collect();
    assert!(results.contains(&true) && results.contains(&false));
}

#[test]
fn explanation_seeds() {
    let lex = Lexicon::builtin();
    let mut parsed = 0;
    for (_, b) in seeds("explanation") {
        if let Ok(expl) = Explanation::new("seed", "seed", text(&b)) {
            parsed += parse_explanation(&expl, &lex).is_ok() as usize;
        }
    }
    assert!(parsed >= 4);
}

#[test]
fn data_file_seeds() {
    for (_, b) in seeds("squad") {
        let _ = parse_squad(&b);
    }
    for (_, b) in seeds("jsonl_corpus") {
        let _ = parse_jsonl_corpus(text(&b));
    }
    for (_, b) in seeds("vectors") {
        let _ = ExternalVectors::parse(text(&b));
    }
    for (_, b) in seeds("bundles") {
        let _ = parse_bundles(text(&b));
    }
    for (_, b) in seeds("explanation_records") {
        let _ = parse_explanation_records(text(&b));
    }
}
