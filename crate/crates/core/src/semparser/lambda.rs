//! Lambda terms over logical-form predicates, with beta normalization.

use std::fmt;

use super::logical_form::{is_variable_name, LfSyntaxError, LogicalForm, Predicate, Reader};
use crate::corpus::AnswerType;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Lam(String, Box<Term>),
    App(Box<Term>, Box<Term>),
    Pred(Predicate, Vec<Term>),
    Leaf(LogicalForm),
    /// Placeholder filled from the numeric token a surface wildcard matched.
    NumSlot,
}

impl Term {
    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn lam(x: &str, body: Term) -> Term {
        Term::Lam(x.to_string(), Box::new(body))
    }

    pub fn leading_lambdas(&self) -> (usize, &Term) {
        let mut n = 0;
        let mut t = self;
        while let Term::Lam(_, b) = t {
            n += 1;
            t = b;
        }
        (n, t)
    }

    pub fn has_num_slot(&self) -> bool {
        match self {
            Term::NumSlot => true,
            Term::Lam(_, b) => b.has_num_slot(),
            Term::App(f, a) => f.has_num_slot() || a.has_num_slot(),
            Term::Pred(_, args) => args.iter().any(Term::has_num_slot),
            _ => false,
        }
    }

    pub fn fill_number(&self, n: i64) -> Term {
        match self {
            Term::NumSlot => Term::Leaf(LogicalForm::Number(n)),
            Term::Lam(x, b) => Term::Lam(x.clone(), Box::new(b.fill_number(n))),
            Term::App(f, a) => Term::app(f.fill_number(n), a.fill_number(n)),
            Term::Pred(p, args) => Term::Pred(*p, args.iter().map(|a| a.fill_number(n)).collect()),
            other => other.clone(),
        }
    }

    pub fn free_vars(&self) -> Vec<String> {
        fn go(t: &Term, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match t {
                Term::Var(x) => {
                    if !bound.contains(x) && !out.contains(x) {
                        out.push(x.clone());
                    }
                }
                Term::Lam(x, b) => {
                    bound.push(x.clone());
                    go(b, bound, out);
                    bound.pop();
                }
                Term::App(f, a) => {
                    go(f, bound, out);
                    go(a, bound, out);
                }
                Term::Pred(_, args) => args.iter().for_each(|a| go(a, bound, out)),
                Term::Leaf(_) | Term::NumSlot => {}
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Substitutes `value` for free occurrences of `x`. Bound names produced
    /// by the parser never clash with free names in `value`, so no renaming
    /// is needed.
    fn subst(&self, x: &str, value: &Term) -> Term {
        match self {
            Term::Var(y) if y == x => value.clone(),
            Term::Lam(y, _) if y == x => self.clone(),
            Term::Lam(y, b) => Term::Lam(y.clone(), Box::new(b.subst(x, value))),
            Term::App(f, a) => Term::app(f.subst(x, value), a.subst(x, value)),
            Term::Pred(p, args) => Term::Pred(*p, args.iter().map(|a| a.subst(x, value)).collect()),
            other => other.clone(),
        }
    }

    /// Normal-order beta reduction with a step budget.
    pub fn normalize(&self) -> Option<Term> {
        let mut budget = 10_000usize;
        self.norm(&mut budget)
    }

    fn norm(&self, budget: &mut usize) -> Option<Term> {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        Some(match self {
            Term::App(f, a) => {
                let f = f.norm(budget)?;
                match f {
                    Term::Lam(x, body) => body.subst(&x, a).norm(budget)?,
                    f => Term::app(f, a.norm(budget)?),
                }
            }
            Term::Lam(x, b) => Term::Lam(x.clone(), Box::new(b.norm(budget)?)),
            Term::Pred(p, args) => Term::Pred(*p, args.iter().map(|a| a.norm(budget)).collect::<Option<_>>()?),
            other => other.clone(),
        })
    }

    /// Renames bound variables by binding depth so alpha-equivalent terms
    /// compare equal.
    pub fn canonical(&self) -> Term {
        fn go(t: &Term, env: &mut Vec<(String, String)>) -> Term {
            match t {
                Term::Var(x) => match env.iter().rev().find(|(from, _)| from == x) {
                    Some((_, to)) => Term::Var(to.clone()),
                    None => t.clone(),
                },
                Term::Lam(x, b) => {
                    let name = format!("#d{}", env.len());
                    env.push((x.clone(), name.clone()));
                    let body = go(b, env);
                    env.pop();
                    Term::Lam(name, Box::new(body))
                }
                Term::App(f, a) => Term::app(go(f, env), go(a, env)),
                Term::Pred(p, args) => Term::Pred(*p, args.iter().map(|a| go(a, env)).collect()),
                other => other.clone(),
            }
        }
        go(self, &mut Vec::new())
    }

    /// Converts a fully reduced closed term into a logical form.
    pub fn to_logical_form(&self) -> Option<LogicalForm> {
        match self {
            Term::Pred(p, args) => Some(LogicalForm::Pred(*p, args.iter().map(Term::to_logical_form).collect::<Option<_>>()?)),
            Term::Leaf(lf) => Some(lf.clone()),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::Lam(x, b) => write!(f, "λ{x}.{b}"),
            Term::App(g, a) => write!(f, "({g} {a})"),
            Term::Pred(p, args) => {
                write!(f, "{}(", p.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Term::Leaf(lf) => write!(f, "{lf}"),
            Term::NumSlot => f.write_str("$0"),
        }
    }
}

fn read_term(r: &mut Reader<'_>, bound: &mut Vec<String>) -> Result<Term, LfSyntaxError> {
    if matches!(r.peek(), Some('λ' | '\\')) {
        r.pos += 1;
        let x = r.ident();
        if x.is_empty() || x.starts_with('@') {
            return Err(r.error("expected a lambda variable"));
        }
        if !r.eat('.') {
            return Err(r.error("expected '.' after lambda variable"));
        }
        bound.push(x.clone());
        let body = read_term(r, bound);
        bound.pop();
        return Ok(Term::lam(&x, body?));
    }
    let mut t = read_atom(r, bound)?;
    while let Some(c) = r.peek() {
        if matches!(c, ',' | ')') {
            break;
        }
        let a = read_atom(r, bound)?;
        t = Term::app(t, a);
    }
    Ok(t)
}

fn read_atom(r: &mut Reader<'_>, bound: &mut Vec<String>) -> Result<Term, LfSyntaxError> {
    match r.peek() {
        None => Err(r.error("unexpected end")),
        Some('(') => {
            r.pos += 1;
            let t = read_term(r, bound)?;
            if !r.eat(')') {
                return Err(r.error("expected ')'"));
            }
            Ok(t)
        }
        Some('"') => {
            r.pos += 1;
            Ok(Term::Leaf(LogicalForm::Literal(r.quoted()?)))
        }
        Some('$') => {
            r.pos += 1;
            if r.eat('0') {
                Ok(Term::NumSlot)
            } else {
                Err(r.error("only $0 is supported"))
            }
        }
        Some(c) if c.is_ascii_digit() => Ok(Term::Leaf(LogicalForm::Number(r.number()?))),
        Some('λ' | '\\') => read_term(r, bound),
        Some(_) => {
            let at = r.offset();
            let name = r.ident();
            if name.is_empty() {
                return Err(r.error("expected a term"));
            }
            if let Some(stripped) = name.strip_prefix('@') {
                let p = Predicate::from_name(&name)
                    .ok_or(LfSyntaxError { offset: at, message: format!("unknown predicate @{stripped}") })?;
                if !r.eat('(') {
                    return Err(r.error("expected '('"));
                }
                let mut args = vec![read_term(r, bound)?];
                while r.eat(',') {
                    args.push(read_term(r, bound)?);
                }
                if !r.eat(')') {
                    return Err(r.error("expected ')' or ','"));
                }
                if args.len() != p.arity() {
                    return Err(LfSyntaxError { offset: at, message: format!("{} takes {} arguments", p.name(), p.arity()) });
                }
                return Ok(Term::Pred(p, args));
            }
            if bound.contains(&name) {
                return Ok(Term::Var(name));
            }
            match name.as_str() {
                "Answer" => Ok(Term::Leaf(LogicalForm::Answer)),
                "Question" => Ok(Term::Leaf(LogicalForm::Question)),
                v if is_variable_name(v) => Ok(Term::Leaf(LogicalForm::Variable(v.to_string()))),
                t => match t.parse::<AnswerType>() {
                    Ok(ty) => Ok(Term::Leaf(LogicalForm::TypeName(ty))),
                    Err(_) => Err(LfSyntaxError { offset: at, message: format!("unbound name {t:?}") }),
                },
            }
        }
    }
}

/// Reads a semantics template such as `λp.λs.@Is(s, p)` (`\` may stand in
/// for `λ`; `$0` marks the matched number).
pub fn parse_template(src: &str) -> Result<Term, LfSyntaxError> {
    let mut r = Reader::new(src);
    let t = read_term(&mut r, &mut Vec::new())?;
    if r.peek().is_some() {
        return Err(r.error("trailing input"));
    }
    Ok(t)
}
