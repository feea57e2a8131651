//! CKY chart parsing over explanation tokens.

use indexmap::IndexMap;

use super::category::Category;
use super::explanation::ExplToken;
use super::lambda::Term;
use super::lexicon::{Lexicon, SurfaceToken, NUM_WILDCARD};
use super::logical_form::LogicalForm;

/// Most tokens a single parse may leave out.
pub const MAX_SKIPS: usize = 2;

/// One complete analysis of a sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct Parse {
    pub lf: LogicalForm,
    /// Token positions left out of the derivation.
    pub skipped: Vec<usize>,
    pub priority: i32,
    /// Widest sentence-valued argument consumed anywhere in the derivation.
    pub scope: usize,
}

#[derive(Debug, Clone)]
struct Item {
    cat: Category,
    term: Term,
    priority: i32,
    scope: usize,
}

type Cell = IndexMap<(Category, Term), Item>;

fn insert(cell: &mut Cell, item: Item) {
    let key = (item.cat.clone(), item.term.clone());
    match cell.get_mut(&key) {
        Some(old) => {
            if (item.priority, item.scope) > (old.priority, old.scope) {
                *old = item;
            }
        }
        None => {
            cell.insert(key, item);
        }
    }
}

/// Lexical items starting at `i`, as `(length, item)`.
fn lexical_at(tokens: &[&ExplToken], i: usize, lex: &Lexicon) -> Vec<(usize, Item)> {
    let mut out = Vec::new();
    let leaf_np = |lf: LogicalForm| Item { cat: Category::NP, term: Term::Leaf(lf), priority: 0, scope: 0 };
    let key = match tokens[i] {
        ExplToken::Quoted(s) => {
            out.push((1, leaf_np(LogicalForm::Literal(s.clone()))));
            return out;
        }
        ExplToken::Var(v) => {
            out.push((1, leaf_np(LogicalForm::Variable(v.clone()))));
            return out;
        }
        ExplToken::Word(w) => w.as_str(),
        ExplToken::Number(_) => NUM_WILDCARD,
    };
    'entries: for entry in lex.starting_with(key) {
        let n = entry.surface.len();
        if i + n > tokens.len() {
            continue;
        }
        let mut number = None;
        for (s, t) in entry.surface.iter().zip(&tokens[i..i + n]) {
            match (s, t) {
                (SurfaceToken::Word(a), ExplToken::Word(b)) if a == b => {}
                (SurfaceToken::Number, ExplToken::Number(v)) => number = Some(*v),
                _ => continue 'entries,
            }
        }
        let term = match number {
            Some(v) => entry.semantics.fill_number(v),
            None => entry.semantics.clone(),
        };
        out.push((n, Item { cat: entry.category.clone(), term: term.canonical(), priority: entry.priority, scope: 0 }));
    }
    out
}

fn reduce(t: Term) -> Option<Term> {
    t.normalize().map(|t| t.canonical())
}

fn combine(a: &Item, a_len: usize, b: &Item, b_len: usize, fresh: &mut usize, out: &mut Vec<Item>) {
    let priority = a.priority + b.priority;
    let base_scope = a.scope.max(b.scope);
    // Forward application: X/Y Y => X
    if let Category::Fwd(res, arg) = &a.cat {
        if **arg == b.cat {
            if let Some(term) = reduce(Term::app(a.term.clone(), b.term.clone())) {
                let scope = if b.cat.is_s() { base_scope.max(b_len) } else { base_scope };
                out.push(Item { cat: (**res).clone(), term, priority, scope });
            }
        }
        // Forward composition: X/Y Y/Z => X/Z
        if let Category::Fwd(b_res, b_arg) = &b.cat {
            if **arg == **b_res {
                *fresh += 1;
                let x = format!("#c{fresh}");
                let body = Term::app(a.term.clone(), Term::app(b.term.clone(), Term::Var(x.clone())));
                if let Some(term) = reduce(Term::lam(&x, body)) {
                    out.push(Item { cat: Category::fwd((**res).clone(), (**b_arg).clone()), term, priority, scope: base_scope });
                }
            }
        }
    }
    // Backward application: Y X\Y => X
    if let Category::Bwd(res, arg) = &b.cat {
        if **arg == a.cat {
            if let Some(term) = reduce(Term::app(b.term.clone(), a.term.clone())) {
                let scope = if a.cat.is_s() { base_scope.max(a_len) } else { base_scope };
                out.push(Item { cat: (**res).clone(), term, priority, scope });
            }
        }
    }
}

fn cky(tokens: &[&ExplToken], lex: &Lexicon) -> Vec<Item> {
    let n = tokens.len();
    if n == 0 {
        return Vec::new();
    }
    // chart[i][len - 1] covers tokens i..i+len
    let mut chart: Vec<Vec<Cell>> = (0..n).map(|i| (0..n - i).map(|_| Cell::new()).collect()).collect();
    for i in 0..n {
        for (len, item) in lexical_at(tokens, i, lex) {
            insert(&mut chart[i][len - 1], item);
        }
    }
    let mut fresh = 0usize;
    for len in 2..=n {
        for i in 0..=n - len {
            let mut produced = Vec::new();
            for split in 1..len {
                let (left, right) = (&chart[i][split - 1], &chart[i + split][len - split - 1]);
                for a in left.values() {
                    for b in right.values() {
                        combine(a, split, b, len - split, &mut fresh, &mut produced);
                    }
                }
            }
            for item in produced {
                insert(&mut chart[i][len - 1], item);
            }
        }
    }
    chart[0][n - 1].values().filter(|it| it.cat.is_s()).cloned().collect()
}

fn covered(tokens: &[ExplToken], lex: &Lexicon) -> Vec<bool> {
    let refs: Vec<&ExplToken> = tokens.iter().collect();
    let mut cov = vec![false; tokens.len()];
    for i in 0..tokens.len() {
        for (len, _) in lexical_at(&refs, i, lex) {
            cov[i..i + len].iter_mut().for_each(|c| *c = true);
        }
    }
    cov
}

fn combinations(n: usize, k: usize, must: &[usize]) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out.retain(|c| must.iter().all(|m| c.contains(m)));
    out
}

/// All sentence-level parses, best first. Parses with fewer skipped tokens
/// are tried first; larger skip sets are explored only when no parse exists
/// with fewer.
pub fn parse_tokens(tokens: &[ExplToken], lex: &Lexicon) -> Vec<Parse> {
    let cov = covered(tokens, lex);
    let uncovered: Vec<usize> = (0..tokens.len()).filter(|&i| !cov[i]).collect();
    if uncovered.len() > MAX_SKIPS {
        return Vec::new();
    }
    let mut results: Vec<Parse> = Vec::new();
    for k in uncovered.len()..=MAX_SKIPS.min(tokens.len()) {
        for skip in combinations(tokens.len(), k, &uncovered) {
            let kept: Vec<&ExplToken> = tokens.iter().enumerate().filter(|(i, _)| !skip.contains(i)).map(|(_, t)| t).collect();
            for item in cky(&kept, lex) {
                let Some(lf) = item.term.to_logical_form() else { continue };
                if lf.check_rule().is_err() {
                    continue;
                }
                results.push(Parse { lf, skipped: skip.clone(), priority: item.priority, scope: item.scope });
            }
        }
        if !results.is_empty() {
            break;
        }
    }
    rank(results)
}

fn rank(mut results: Vec<Parse>) -> Vec<Parse> {
    let mut keyed: Vec<(String, Parse)> = results.drain(..).map(|p| (p.lf.to_string(), p)).collect();
    keyed.sort_by(|(la, a), (lb, b)| {
        a.skipped
            .len()
            .cmp(&b.skipped.len())
            .then(b.priority.cmp(&a.priority))
            .then(b.scope.cmp(&a.scope))
            .then(la.cmp(lb))
            .then(a.skipped.cmp(&b.skipped))
    });
    let mut seen = std::collections::HashSet::new();
    keyed.into_iter().filter(|(s, _)| seen.insert(s.clone())).map(|(_, p)| p).collect()
}
