//! Tokenization with character offsets and a small lexicon/suffix POS tagger.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Coarse part-of-speech tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Noun,
    Propn,
    Verb,
    Adj,
    Adv,
    Num,
    Det,
    Adp,
    Punct,
    Other,
}

impl Pos {
    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Propn => "PROPN",
            Pos::Verb => "VERB",
            Pos::Adj => "ADJ",
            Pos::Adv => "ADV",
            Pos::Num => "NUM",
            Pos::Det => "DET",
            Pos::Adp => "ADP",
            Pos::Punct => "PUNCT",
            Pos::Other => "OTHER",
        }
    }

    /// Nominal tags collapse to one class when comparing structural roles.
    pub fn is_nominal(self) -> bool {
        matches!(self, Pos::Noun | Pos::Propn)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub lower: String,
    /// Offsets count Unicode scalar values, not bytes.
    pub char_start: usize,
    pub char_end: usize,
    pub pos: Pos,
    pub shape: String,
}

/// A tokenized string that keeps the source text so offsets can be mapped back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSeq {
    text: String,
    tokens: Vec<Token>,
    /// Byte offset of every char boundary, plus the final length.
    char_bytes: Vec<usize>,
}

impl TokenSeq {
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Token> {
        self.tokens.get(i)
    }

    pub fn char_len(&self) -> usize {
        self.char_bytes.len() - 1
    }

    /// Substring by character offsets.
    pub fn slice_chars(&self, start: usize, end: usize) -> &str {
        let end = end.min(self.char_len());
        let start = start.min(end);
        &self.text[self.char_bytes[start]..self.char_bytes[end]]
    }

    /// Text between token `i - 1` and token `i` (or the prefix for `i == 0`).
    pub fn gap_before(&self, i: usize) -> &str {
        let start = if i == 0 { 0 } else { self.tokens[i - 1].char_end };
        let end = if i < self.tokens.len() {
            self.tokens[i].char_start
        } else {
            self.char_len()
        };
        self.slice_chars(start, end)
    }

    /// Rebuilds the source text from tokens and the recorded gaps.
    pub fn reconstruct(&self) -> String {
        let mut out = String::with_capacity(self.text.len());
        for (i, tok) in self.tokens.iter().enumerate() {
            out.push_str(self.gap_before(i));
            out.push_str(&tok.text);
        }
        out.push_str(self.gap_before(self.tokens.len()));
        out
    }

    /// Lowercased token texts.
    pub fn lowers(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.lower.as_str()).collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Space,
    Word,
    Punct,
}

fn class_of(c: char) -> CharClass {
    if c.is_whitespace() {
        CharClass::Space
    } else if c.is_alphanumeric() {
        CharClass::Word
    } else {
        CharClass::Punct
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits text into word and punctuation tokens.
///
/// Words may contain internal hyphens, apostrophes, and digit-group
/// separators ("lying-in-state", "O'Neil", "1,000", "3.5"). A trailing
/// possessive "'s" becomes its own token.
pub fn tokenize(text: &str) -> TokenSeq {
    let chars: Vec<char> = text.chars().collect();
    let mut char_bytes: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
    char_bytes.push(text.len());

    let mut spans: Vec<(usize, usize)> = Vec::new();
    let n = chars.len();
    let mut i = 0;
    while i < n {
        match class_of(chars[i]) {
            CharClass::Space => i += 1,
            CharClass::Punct => {
                spans.push((i, i + 1));
                i += 1;
            }
            CharClass::Word => {
                let start = i;
                let mut j = i + 1;
                loop {
                    if j < n && class_of(chars[j]) == CharClass::Word {
                        j += 1;
                        continue;
                    }
                    // Internal connector followed by more word characters.
                    if j + 1 < n && class_of(chars[j + 1]) == CharClass::Word {
                        let c = chars[j];
                        let prev_digit = chars[j - 1].is_ascii_digit();
                        let next_digit = chars[j + 1].is_ascii_digit();
                        let joins = match c {
                            '-' => true,
                            ',' | '.' => prev_digit && next_digit,
                            c if is_apostrophe(c) => {
                                // "Victoria's" splits; "O'Neil" stays.
                                let possessive = (chars[j + 1] == 's' || chars[j + 1] == 'S')
                                    && (j + 2 >= n || class_of(chars[j + 2]) != CharClass::Word);
                                !possessive
                            }
                            _ => false,
                        };
                        if joins {
                            j += 2;
                            continue;
                        }
                    }
                    break;
                }
                spans.push((start, j));
                i = j;
                // Possessive clitic.
                if i + 1 < n
                    && is_apostrophe(chars[i])
                    && (chars[i + 1] == 's' || chars[i + 1] == 'S')
                    && (i + 2 >= n || class_of(chars[i + 2]) != CharClass::Word)
                {
                    spans.push((i, i + 2));
                    i += 2;
                }
            }
        }
    }

    let mut tokens: Vec<Token> = Vec::with_capacity(spans.len());
    for (idx, &(s, e)) in spans.iter().enumerate() {
        let tok_text = &text[char_bytes[s]..char_bytes[e]];
        let lower = tok_text.to_lowercase();
        let sentence_initial = idx == 0 || tokens.last().map_or(false, |t: &Token| t.pos == Pos::Punct && matches!(t.text.as_str(), "." | "!" | "?"));
        let pos = tag(tok_text, &lower, sentence_initial);
        tokens.push(Token {
            text: tok_text.to_string(),
            lower,
            char_start: s,
            char_end: e,
            pos,
            shape: shape_of(tok_text),
        });
    }
    TokenSeq {
        text: text.to_string(),
        tokens,
        char_bytes,
    }
}

/// Word shape with runs of the same class capped at four ("Xxxx", "dddd").
pub fn shape_of(text: &str) -> String {
    let mut out = String::new();
    let mut last: Option<char> = None;
    let mut run = 0;
    for c in text.chars() {
        let s = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_ascii_digit() {
            'd'
        } else {
            c
        };
        if Some(s) == last {
            run += 1;
        } else {
            run = 1;
            last = Some(s);
        }
        if run <= 4 {
            out.push(s);
        }
    }
    out
}

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "his", "her", "its", "their", "our",
    "my", "your", "some", "any", "each", "every", "no", "another", "both", "either", "neither",
];

const ADPOSITIONS: &[&str] = &[
    "in", "on", "at", "of", "by", "for", "with", "from", "to", "into", "onto", "since", "after",
    "before", "during", "around", "about", "against", "between", "through", "over", "under",
    "within", "without", "near", "across", "along", "among", "amongst", "until", "upon", "via",
    "towards", "toward", "behind", "beyond", "beside", "besides", "despite", "except", "inside",
    "outside", "per", "throughout", "unlike", "like", "than", "above", "below", "beneath", "off",
    "past", "till", "amid",
];

const OTHERS: &[&str] = &[
    // pronouns
    "i", "me", "you", "he", "him", "she", "it", "we", "us", "they", "them", "himself",
    "herself", "itself", "themselves", "myself", "yourself", "ourselves", "mine", "yours",
    "hers", "ours", "theirs", "one's",
    // wh-words
    "who", "whom", "whose", "what", "which", "when", "where", "why", "how", "whether",
    // auxiliaries and modals
    "is", "was", "were", "are", "am", "be", "been", "being", "has", "have", "had", "having",
    "do", "does", "did", "done", "will", "would", "shall", "should", "can", "could", "may",
    "might", "must",
    // conjunctions and particles
    "and", "or", "but", "nor", "so", "yet", "if", "then", "because", "while", "although",
    "though", "as", "'s", "not", "n't", "there", "here",
];

const ADVERBS: &[&str] = &[
    "also", "very", "often", "still", "already", "soon", "now", "again", "ever", "never",
    "always", "once", "twice", "later", "then", "thus", "however", "almost", "even", "just",
    "only", "too", "well", "down", "up", "out", "away", "back", "together", "ago",
];

const ADJECTIVES: &[&str] = &[
    "great", "new", "old", "first", "last", "many", "much", "few", "more", "most", "other",
    "same", "such", "own", "large", "small", "big", "long", "high", "low", "good", "bad",
    "early", "late", "major", "minor", "northern", "southern", "eastern", "western", "rare",
    "local", "military", "public", "royal", "several", "main", "national", "international",
    "secret", "annual", "best", "better", "second", "third", "young", "full", "free", "top",
    "amorphous", "nanocrystalline", "various", "different", "important",
];

const VERBS: &[&str] = &[
    "held", "hold", "holds", "begin", "began", "begun", "begins", "born", "built", "build",
    "made", "make", "makes", "found", "find", "known", "know", "led", "lead", "won", "win",
    "took", "take", "gave", "give", "became", "become", "came", "come", "went", "go", "fought",
    "fight", "wrote", "write", "written", "rebel", "rebels", "bound", "sold", "sell", "told",
    "said", "say", "says", "got", "get", "left", "meet", "met", "ran", "run", "saw", "see",
    "seen", "set", "put", "kept", "keep", "brought", "bring", "thought", "bought", "taught",
    "caught", "felt", "lost", "lose", "paid", "pay", "sent", "send", "spent", "stood", "struck",
    "grew", "grow", "grown", "drew", "drawn", "fell", "fall", "fallen", "flew", "rose", "rise",
    "risen", "shot", "sang", "sung", "spoke", "spoken", "stole", "swam", "threw", "thrown",
    "wore", "worn", "broke", "broken", "chose", "chosen", "drove", "driven", "ate", "eaten",
    "forgot", "forgotten", "froze", "hid", "hidden", "rode", "shook", "woke", "die", "dies",
    "live", "lives", "appear", "appears", "declare", "declares", "kill", "kills", "use", "uses",
    "form", "forms", "occur", "occurs", "contain", "contains", "include", "includes",
    "establish", "establishes", "found", "open", "opens", "close", "closes", "recognize",
    "recognise", "regulate", "characterize", "join", "joins", "leave", "leaves", "reach",
    "reaches", "perform", "performs", "raise", "raises", "invade", "invades", "defeat",
    "defeats", "sign", "signs", "elect", "elects", "marry", "marries", "launch", "launches",
    "start", "starts", "end", "ends", "release", "releases", "produce", "produces", "destroy",
    "destroys", "capture", "captures", "discover", "discovers", "publish", "publishes",
];

/// Tags one token from its text alone plus whether it opens a sentence.
pub fn tag(text: &str, lower: &str, sentence_initial: bool) -> Pos {
    let first = match text.chars().next() {
        Some(c) => c,
        None => return Pos::Other,
    };
    if !text.chars().any(char::is_alphanumeric) {
        return Pos::Punct;
    }
    if is_numeric_token(lower) {
        return Pos::Num;
    }
    let in_list = |list: &[&str]| list.contains(&lower);
    if in_list(DETERMINERS) {
        return Pos::Det;
    }
    if in_list(ADPOSITIONS) {
        return Pos::Adp;
    }
    if in_list(OTHERS) {
        return Pos::Other;
    }
    if super::answer_type::is_month(lower) || super::answer_type::is_weekday(lower) {
        return Pos::Propn;
    }
    if first.is_uppercase() {
        // Sentence-initial capitals are ambiguous; closed-class lookups above
        // already caught function words, so treat the rest as names unless a
        // lexicon entry says otherwise.
        if sentence_initial && (in_list(ADVERBS) || in_list(ADJECTIVES) || in_list(VERBS)) {
            return open_class(lower);
        }
        return Pos::Propn;
    }
    open_class(lower)
}

fn open_class(lower: &str) -> Pos {
    let in_list = |list: &[&str]| list.contains(&lower);
    if in_list(VERBS) {
        return Pos::Verb;
    }
    if in_list(ADVERBS) {
        return Pos::Adv;
    }
    if in_list(ADJECTIVES) {
        return Pos::Adj;
    }
    let len = lower.chars().count();
    if len > 4 && lower.ends_with("ly") {
        return Pos::Adv;
    }
    if len > 4 && (lower.ends_with("ed") || lower.ends_with("ing")) {
        return Pos::Verb;
    }
    const ADJ_SUFFIXES: &[&str] = &["ous", "ful", "ive", "ble", "less", "ish"];
    if len > 5 && ADJ_SUFFIXES.iter().any(|s| lower.ends_with(s)) {
        return Pos::Adj;
    }
    Pos::Noun
}

const NUMBER_WORDS: &[&str] = &[
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
    "nineteen", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
    "hundred", "thousand", "million", "billion", "trillion", "dozen",
];

/// Digits (with group separators/decimals), ordinals like "6th", decades
/// like "1990s", and number words.
pub fn is_numeric_token(lower: &str) -> bool {
    if NUMBER_WORDS.contains(&lower) {
        return true;
    }
    let digits: String = lower.chars().take_while(|c| c.is_ascii_digit() || *c == ',' || *c == '.').collect();
    if digits.is_empty() || !digits.chars().next().unwrap().is_ascii_digit() {
        return false;
    }
    let rest = &lower[digits.len()..];
    matches!(rest, "" | "st" | "nd" | "rd" | "th" | "s")
}

/// Value of a plain integer token or small number word.
pub fn number_value(lower: &str) -> Option<i64> {
    if let Ok(v) = lower.parse::<i64>() {
        return Some(v);
    }
    NUMBER_WORDS[..21].iter().position(|w| *w == lower).map(|i| i as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_sentence_tokens() {
        let seq = tokenize("Her funeral was held on Saturday, 2 February");
        let texts: Vec<&str> = seq.tokens().iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, ["Her", "funeral", "was", "held", "on", "Saturday", ",", "2", "February"]);
        assert_eq!(seq.tokens()[6].pos, Pos::Punct);
    }

    #[test]
    fn empty_and_numeric() {
        assert!(tokenize("").is_empty());
        let seq = tokenize("1878");
        assert_eq!(seq.len(), 1);
        assert_eq!(seq.tokens()[0].pos, Pos::Num);
        assert_eq!(seq.tokens()[0].shape, "dddd");
    }

    #[test]
    fn possessive_and_connectors() {
        let seq = tokenize("Queen Victoria's lying-in-state cost 1,000.5 pounds; O'Neil paid.");
        let texts: Vec<&str> = seq.tokens().iter().map(|t| t.text.as_str()).collect();
        assert_eq!(
            texts,
            ["Queen", "Victoria", "'s", "lying-in-state", "cost", "1,000.5", "pounds", ";", "O'Neil", "paid", "."]
        );
    }

    #[test]
    fn offsets_are_chars() {
        let seq = tokenize("café €50 ok");
        let t = &seq.tokens()[1];
        assert_eq!((t.char_start, t.char_end), (5, 6));
        assert_eq!(seq.slice_chars(9, 11), "ok");
        assert_eq!(seq.reconstruct(), "café €50 ok");
    }

    #[test]
    fn tagger_basics() {
        let seq = tokenize("When was independence declared in 1973 ?");
        let tags: Vec<Pos> = seq.tokens().iter().map(|t| t.pos).collect();
        assert_eq!(tags, [Pos::Other, Pos::Other, Pos::Noun, Pos::Verb, Pos::Adp, Pos::Num, Pos::Punct]);
        assert_eq!(tokenize("highly soluble").tokens()[1].pos, Pos::Adj);
        assert_eq!(tokenize("the 6th century").tokens()[1].pos, Pos::Num);
    }

    #[test]
    fn shapes() {
        assert_eq!(shape_of("Saturday"), "Xxxxx");
        assert_eq!(shape_of("6th"), "dxx");
        assert_eq!(shape_of("U.S."), "X.X.");
    }
}
