//! Rule-based answer-type heuristics over token shapes and small word lists.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::span::Span;
use super::token::{is_numeric_token, Pos, TokenSeq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnswerType {
    Date,
    Year,
    Number,
    Percent,
    PersonLike,
    LocationLike,
    Other,
}

impl AnswerType {
    pub const ALL: [AnswerType; 7] = [
        AnswerType::Date,
        AnswerType::Year,
        AnswerType::Number,
        AnswerType::Percent,
        AnswerType::PersonLike,
        AnswerType::LocationLike,
        AnswerType::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AnswerType::Date => "DATE",
            AnswerType::Year => "YEAR",
            AnswerType::Number => "NUMBER",
            AnswerType::Percent => "PERCENT",
            AnswerType::PersonLike => "PERSON_LIKE",
            AnswerType::LocationLike => "LOCATION_LIKE",
            AnswerType::Other => "OTHER",
        }
    }
}

impl fmt::Display for AnswerType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnswerType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AnswerType::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown answer type {s:?}"))
    }
}

const MONTHS: &[&str] = &[
    "january", "february", "march", "april", "may", "june", "july", "august", "september",
    "october", "november", "december", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep",
    "sept", "oct", "nov", "dec",
];

const WEEKDAYS: &[&str] = &[
    "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday",
];

const ORDINAL_WORDS: &[&str] = &[
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth",
    "tenth", "eleventh", "twelfth", "thirteenth", "fourteenth", "fifteenth", "sixteenth",
    "seventeenth", "eighteenth", "nineteenth", "twentieth", "twenty-first",
];

const PERSON_TITLES: &[&str] = &[
    "mr", "mrs", "ms", "dr", "sir", "lord", "lady", "king", "queen", "prince", "princess",
    "saint", "st", "pope", "president", "general", "captain", "emperor", "duke",
];

const LOCATION_WORDS: &[&str] = &[
    "city", "river", "mountain", "mountains", "island", "islands", "county", "street", "lake",
    "sea", "ocean", "bay", "valley", "state", "province", "kingdom", "republic", "castle",
    "chapel", "church", "park", "bridge", "square", "road", "forest", "desert", "coast",
    "harbor", "harbour", "peninsula", "region", "haven",
];

pub fn is_month(lower: &str) -> bool {
    // "may" and "march" are too ambiguous lowercased, but capitalized forms
    // reach here lowercased as well; the tagger only asks for known names.
    MONTHS.contains(&lower)
}

pub fn is_weekday(lower: &str) -> bool {
    WEEKDAYS.contains(&lower)
}

fn is_year_token(lower: &str) -> bool {
    let digits = lower.trim_end_matches('s');
    if digits.len() == 4 && digits.chars().all(|c| c.is_ascii_digit()) {
        let v: u32 = digits.parse().unwrap_or(0);
        return (1000..=2199).contains(&v);
    }
    false
}

fn is_day_number(lower: &str) -> bool {
    let digits = lower
        .trim_end_matches("st")
        .trim_end_matches("nd")
        .trim_end_matches("rd")
        .trim_end_matches("th");
    if digits.is_empty() || digits.len() > 2 || !digits.chars().all(|c| c.is_ascii_digit()) {
        return false;
    }
    matches!(digits.parse::<u32>(), Ok(1..=31))
}

fn is_ordinal(lower: &str) -> bool {
    if ORDINAL_WORDS.contains(&lower) {
        return true;
    }
    let stripped = ["st", "nd", "rd", "th"].iter().find_map(|s| lower.strip_suffix(s));
    stripped.map_or(false, |d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
}

fn is_century_phrase(lowers: &[&str]) -> bool {
    let body = match lowers.first() {
        Some(&"the") => &lowers[1..],
        _ => lowers,
    };
    matches!(body, [ord, "century"] | [ord, "century", "ad" | "bc"] if is_ordinal(ord))
}

fn is_year_phrase(lowers: &[&str]) -> bool {
    match lowers {
        [y] => is_year_token(y),
        [y, "ad" | "bc" | "bce" | "ce"] => y.chars().all(|c| c.is_ascii_digit()),
        ["the", y] => is_year_token(y) && y.ends_with('s'),
        _ => is_century_phrase(lowers),
    }
}

fn is_date_phrase(lowers: &[&str]) -> bool {
    if lowers.first() == Some(&",") || lowers.last() == Some(&",") {
        return false;
    }
    let mut anchored = false;
    for w in lowers {
        if is_month(w) || is_weekday(w) || is_year_token(w) {
            anchored = true;
        } else if !(is_day_number(w) || matches!(*w, "," | "of" | "the")) {
            return false;
        }
    }
    anchored
}

/// Every answer type the span satisfies. `YEAR` always implies `DATE`;
/// `OTHER` is reported only when nothing else applies.
pub fn classify_answer_type(seq: &TokenSeq, span: Span) -> BTreeSet<AnswerType> {
    let toks = &seq.tokens()[span.start..=span.end];
    let lowers: Vec<&str> = toks.iter().map(|t| t.lower.as_str()).collect();
    let mut out = BTreeSet::new();

    if is_year_phrase(&lowers) {
        out.insert(AnswerType::Year);
        out.insert(AnswerType::Date);
    }
    if is_date_phrase(&lowers) {
        out.insert(AnswerType::Date);
    }

    let has_number = lowers.iter().any(|w| is_numeric_token(w) && !is_ordinal(w));
    let percent_marker = lowers.iter().any(|w| matches!(*w, "%" | "percent" | "per" | "cent"));
    let numeric_only = lowers
        .iter()
        .all(|w| (is_numeric_token(w) && !is_ordinal(w)) || matches!(*w, "," | "." | "about" | "approximately" | "over" | "nearly"));
    if has_number && percent_marker {
        let ok = lowers.iter().all(|w| {
            is_numeric_token(w) || matches!(*w, "%" | "percent" | "per" | "cent" | "." | "about" | "approximately" | "over" | "nearly")
        });
        if ok {
            out.insert(AnswerType::Percent);
        }
    }
    if has_number && numeric_only {
        out.insert(AnswerType::Number);
    }

    if !out.contains(&AnswerType::Date) {
        let capitalized = |t: &super::token::Token| t.pos == Pos::Propn || t.text.chars().next().map_or(false, char::is_uppercase);
        let connector = |w: &str| matches!(w, "of" | "de" | "the" | "'s" | "-" | "and" | "von" | "van" | "da");
        let first_ok = capitalized(&toks[0]);
        let last_ok = capitalized(&toks[toks.len() - 1]);
        let body_ok = toks
            .iter()
            .all(|t| (capitalized(t) && t.pos != Pos::Num) || connector(&t.lower));
        if first_ok && last_ok && body_ok {
            let titled = PERSON_TITLES.contains(&lowers[0]);
            let located = lowers.iter().any(|w| LOCATION_WORDS.contains(w));
            if titled && !located {
                out.insert(AnswerType::PersonLike);
            } else if located && !titled {
                out.insert(AnswerType::LocationLike);
            } else {
                out.insert(AnswerType::PersonLike);
                out.insert(AnswerType::LocationLike);
            }
        }
    }

    if out.is_empty() {
        out.insert(AnswerType::Other);
    }
    out
}
