//! Predicate-argument trees and their textual form.
//!
//! The printed form doubles as the s-expression syntax stored in teacher
//! bundles: `@Is(Answer, @Direct(@Right(X)))`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::corpus::AnswerType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    Is,
    Direct,
    Left,
    Right,
    LessThan,
    And,
    Or,
    StartsWith,
    In,
    AnswerType,
    Between,
}

impl Predicate {
    pub const ALL: [Predicate; 11] = [
        Predicate::Is,
        Predicate::Direct,
        Predicate::Left,
        Predicate::Right,
        Predicate::LessThan,
        Predicate::And,
        Predicate::Or,
        Predicate::StartsWith,
        Predicate::In,
        Predicate::AnswerType,
        Predicate::Between,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::Is => "@Is",
            Predicate::Direct => "@Direct",
            Predicate::Left => "@Left",
            Predicate::Right => "@Right",
            Predicate::LessThan => "@LessThan",
            Predicate::And => "@And",
            Predicate::Or => "@Or",
            Predicate::StartsWith => "@StartsWith",
            Predicate::In => "@In",
            Predicate::AnswerType => "@AnswerType",
            Predicate::Between => "@Between",
        }
    }

    pub fn from_name(name: &str) -> Option<Predicate> {
        Predicate::ALL.iter().copied().find(|p| p.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Predicate::Direct | Predicate::Left | Predicate::Right => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LogicalForm {
    Pred(Predicate, Vec<LogicalForm>),
    Answer,
    Question,
    Variable(String),
    Literal(String),
    Number(i64),
    TypeName(AnswerType),
}

/// Semantic sorts used to reject ill-formed trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    /// Something with a position: the answer, a variable or a literal.
    Entity,
    /// The question as a whole.
    Question,
    /// A positional relation such as `@Right(X)`.
    Relation,
    /// A side-free relation built only from `@Left`/`@Right`.
    Direction,
    Prop,
    Number,
    Type,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message} in {form}")]
pub struct SortError {
    pub form: String,
    pub message: String,
}

pub const VARIABLE_NAMES: [&str; 5] = ["X", "Y", "Z", "W", "V"];

pub fn is_variable_name(s: &str) -> bool {
    VARIABLE_NAMES.contains(&s)
}

impl LogicalForm {
    pub fn pred(p: Predicate, args: Vec<LogicalForm>) -> Self {
        LogicalForm::Pred(p, args)
    }

    pub fn var(name: &str) -> Self {
        LogicalForm::Variable(name.to_string())
    }

    pub fn lit(text: &str) -> Self {
        LogicalForm::Literal(text.to_string())
    }

    pub fn depth(&self) -> usize {
        match self {
            LogicalForm::Pred(_, args) => 1 + args.iter().map(|a| a.depth()).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |n| {
            if let LogicalForm::Variable(v) = n {
                out.insert(v.clone());
            }
        });
        out
    }

    pub fn mentions_answer(&self) -> bool {
        let mut found = false;
        self.visit(&mut |n| found |= matches!(n, LogicalForm::Answer));
        found
    }

    pub fn visit(&self, f: &mut impl FnMut(&LogicalForm)) {
        f(self);
        if let LogicalForm::Pred(_, args) = self {
            for a in args {
                a.visit(f);
            }
        }
    }

    /// Checks sorts bottom-up and returns the sort of the root.
    pub fn sort(&self) -> Result<Sort, SortError> {
        let fail = |msg: &str| Err(SortError { form: self.to_string(), message: msg.to_string() });
        match self {
            LogicalForm::Answer | LogicalForm::Variable(_) | LogicalForm::Literal(_) => Ok(Sort::Entity),
            LogicalForm::Question => Ok(Sort::Question),
            LogicalForm::Number(n) => {
                if *n < 0 {
                    return fail("negative number");
                }
                Ok(Sort::Number)
            }
            LogicalForm::TypeName(_) => Ok(Sort::Type),
            LogicalForm::Pred(p, args) => {
                if args.len() != p.arity() {
                    return fail(&format!("{} takes {} arguments", p.name(), p.arity()));
                }
                let sorts = args.iter().map(|a| a.sort()).collect::<Result<Vec<_>, _>>()?;
                let is_rel = |s: Sort| matches!(s, Sort::Relation | Sort::Direction);
                match p {
                    Predicate::Left | Predicate::Right => match sorts[0] {
                        Sort::Entity => Ok(Sort::Direction),
                        _ => fail("direction needs a positioned argument"),
                    },
                    Predicate::Direct => match sorts[0] {
                        Sort::Direction => Ok(Sort::Relation),
                        _ => fail("@Direct applies to @Left or @Right"),
                    },
                    Predicate::LessThan => match (sorts[0], sorts[1]) {
                        (Sort::Direction, Sort::Number) => Ok(Sort::Relation),
                        _ => fail("@LessThan needs a direction and a number"),
                    },
                    Predicate::Between => match (sorts[0], sorts[1]) {
                        (Sort::Entity, Sort::Entity) => Ok(Sort::Relation),
                        _ => fail("@Between needs two positioned arguments"),
                    },
                    Predicate::Is => match (sorts[0], sorts[1]) {
                        (Sort::Entity, s) if is_rel(s) => Ok(Sort::Prop),
                        _ => fail("@Is needs a positioned subject and a relation"),
                    },
                    Predicate::And | Predicate::Or => match (sorts[0], sorts[1]) {
                        (Sort::Prop, Sort::Prop) => Ok(Sort::Prop),
                        (a, b) if is_rel(a) && is_rel(b) => Ok(Sort::Relation),
                        _ => fail("connective arguments must both be propositions or both relations"),
                    },
                    Predicate::StartsWith => match (&args[0], &args[1]) {
                        (LogicalForm::Question, LogicalForm::Literal(_)) => Ok(Sort::Prop),
                        _ => fail("@StartsWith needs the question and a literal"),
                    },
                    Predicate::In => match (sorts[0], sorts[1]) {
                        (Sort::Prop, Sort::Question) => Ok(Sort::Prop),
                        (Sort::Entity, Sort::Question) if matches!(args[0], LogicalForm::Literal(_) | LogicalForm::Variable(_)) => Ok(Sort::Prop),
                        _ => fail("@In needs a proposition or phrase and the question"),
                    },
                    Predicate::AnswerType => match (sorts[0], sorts[1]) {
                        (Sort::Entity, Sort::Type) if !matches!(args[0], LogicalForm::Literal(_)) => Ok(Sort::Prop),
                        _ => fail("@AnswerType needs the answer or a variable and a type name"),
                    },
                }
            }
        }
    }

    /// A well-formed rule: a proposition at the root.
    pub fn check_rule(&self) -> Result<(), SortError> {
        match self.sort()? {
            Sort::Prop => Ok(()),
            _ => Err(SortError { form: self.to_string(), message: "rule is not a proposition".into() }),
        }
    }
}

fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

impl fmt::Display for LogicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogicalForm::Pred(p, args) => {
                write!(f, "{}(", p.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            LogicalForm::Answer => f.write_str("Answer"),
            LogicalForm::Question => f.write_str("Question"),
            LogicalForm::Variable(v) => f.write_str(v),
            LogicalForm::Literal(s) => write_quoted(f, s),
            LogicalForm::Number(n) => write!(f, "{n}"),
            LogicalForm::TypeName(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot read logical form at offset {offset}: {message}")]
pub struct LfSyntaxError {
    pub offset: usize,
    pub message: String,
}

pub(crate) struct Reader<'a> {
    pub(crate) chars: Vec<(usize, char)>,
    pub(crate) pos: usize,
    pub(crate) src: &'a str,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Reader { chars: src.char_indices().collect(), pos: 0, src }
    }

    pub(crate) fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.src.len(), |c| c.0)
    }

    pub(crate) fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    pub(crate) fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos].1;
            if c.is_alphanumeric() || c == '_' || (c == '@' && self.pos == start) {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.chars[start..self.pos].iter().map(|c| c.1).collect()
    }

    pub(crate) fn quoted(&mut self) -> Result<String, LfSyntaxError> {
        // Opening quote already consumed.
        let mut out = String::new();
        loop {
            let Some(&(_, c)) = self.chars.get(self.pos) else {
                return Err(LfSyntaxError { offset: self.offset(), message: "unterminated string".into() });
            };
            self.pos += 1;
            match c {
                '"' => return Ok(out),
                '\\' => {
                    let Some(&(_, e)) = self.chars.get(self.pos) else {
                        return Err(LfSyntaxError { offset: self.offset(), message: "dangling escape".into() });
                    };
                    self.pos += 1;
                    out.push(e);
                }
                c => out.push(c),
            }
        }
    }

    pub(crate) fn number(&mut self) -> Result<i64, LfSyntaxError> {
        self.skip_ws();
        let start = self.pos;
        if self.chars.get(self.pos).map(|c| c.1) == Some('-') {
            self.pos += 1;
        }
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_ascii_digit() {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        text.parse().map_err(|_| LfSyntaxError { offset: self.offset(), message: format!("bad number {text:?}") })
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> LfSyntaxError {
        LfSyntaxError { offset: self.offset(), message: message.into() }
    }
}

fn read_lf(r: &mut Reader<'_>) -> Result<LogicalForm, LfSyntaxError> {
    match r.peek() {
        None => Err(r.error("unexpected end")),
        Some('"') => {
            r.pos += 1;
            Ok(LogicalForm::Literal(r.quoted()?))
        }
        Some(c) if c.is_ascii_digit() || c == '-' => Ok(LogicalForm::Number(r.number()?)),
        Some(_) => {
            let at = r.offset();
            let name = r.ident();
            if name.is_empty() {
                return Err(r.error("expected a term"));
            }
            if name.starts_with('@') {
                let p = Predicate::from_name(&name).ok_or(LfSyntaxError { offset: at, message: format!("unknown predicate {name}") })?;
                if !r.eat('(') {
                    return Err(r.error("expected '('"));
                }
                let mut args = vec![read_lf(r)?];
                while r.eat(',') {
                    args.push(read_lf(r)?);
                }
                if !r.eat(')') {
                    return Err(r.error("expected ')' or ','"));
                }
                return Ok(LogicalForm::Pred(p, args));
            }
            match name.as_str() {
                "Answer" => Ok(LogicalForm::Answer),
                "Question" => Ok(LogicalForm::Question),
                v if is_variable_name(v) => Ok(LogicalForm::Variable(v.to_string())),
                t => t
                    .parse::<AnswerType>()
                    .map(LogicalForm::TypeName)
                    .map_err(|_| LfSyntaxError { offset: at, message: format!("unknown leaf {t:?}") }),
            }
        }
    }
}

impl FromStr for LogicalForm {
    type Err = LfSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut r = Reader::new(s);
        let lf = read_lf(&mut r)?;
        if r.peek().is_some() {
            return Err(r.error("trailing input"));
        }
        Ok(lf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use LogicalForm as L;

    #[test]
    fn print_and_read() {
        let lf = L::pred(Predicate::Is, vec![L::Answer, L::pred(Predicate::Direct, vec![L::pred(Predicate::Right, vec![L::var("X")])])]);
        assert_eq!(lf.to_string(), "@Is(Answer, @Direct(@Right(X)))");
        assert_eq!(lf.to_string().parse::<L>().unwrap(), lf);
        let lit: L = r#"@In(@Is(X, @LessThan(@Right("when \"was"), 4)), Question)"#.parse().unwrap();
        assert_eq!(lit.to_string().parse::<L>().unwrap(), lit);
        assert_eq!(lit.variables(), BTreeSet::from(["X".to_string()]));
        assert!(lit.check_rule().is_ok());
    }

    #[test]
    fn sorts() {
        let ok: L = "@AnswerType(Answer, DATE)".parse().unwrap();
        assert!(ok.check_rule().is_ok());
        for bad in [
            "@Right(X)",
            "@LessThan(@Direct(@Right(X)), 3)",
            "@Is(Answer, X)",
            "@AnswerType(Answer, Answer)",
            "@StartsWith(Answer, \"when\")",
            "@Direct(X)",
            "@LessThan(@Right(X), -1)",
        ] {
            let lf: L = bad.parse().unwrap();
            assert!(lf.check_rule().is_err(), "{bad}");
        }
    }

    #[test]
    fn read_errors() {
        for bad in ["", "@Nope(X)", "@Is(Answer", "@Is(Answer, X) extra", "\"open", "Q"] {
            assert!(bad.parse::<L>().is_err(), "{bad}");
        }
    }
}
