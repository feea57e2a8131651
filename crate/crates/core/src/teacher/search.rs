//! Beam search over slot assignments.

use std::cmp::Ordering;

use crate::corpus::Span;

/// A proposed binding for one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub span: Span,
    /// Tie-break weight; never enters the score.
    pub prior: f64,
}

/// A (partial) assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub bindings: Vec<Option<Span>>,
    pub z: f64,
    pub prior: f64,
    /// Candidate index chosen at each bound slot.
    pub path: Vec<usize>,
}

impl State {
    fn root(n: usize) -> Self {
        State { bindings: vec![None; n], z: 1.0, prior: 0.0, path: Vec::new() }
    }
}

/// Slots, their candidates and the partial score.
pub trait Problem {
    fn num_slots(&self) -> usize;
    /// Candidates for `slot` given the bindings of earlier slots.
    fn propose(&self, slot: usize, bindings: &[Option<Span>]) -> Vec<Candidate>;
    /// Score of the rules evaluable under `bindings`. Must not increase as
    /// more slots are bound.
    fn score(&self, bindings: &[Option<Span>]) -> f64;
}

/// Ordering used for the beam and for the final result: higher score, then
/// higher prior sum, then lexicographically smaller candidate path.
pub fn state_order(a: &State, b: &State) -> Ordering {
    b.z.total_cmp(&a.z).then(b.prior.total_cmp(&a.prior)).then(a.path.cmp(&b.path))
}

fn expand(p: &dyn Problem, slot: usize, st: &State, threshold: f64, out: &mut Vec<State>) {
    for (i, c) in p.propose(slot, &st.bindings).into_iter().enumerate() {
        let mut bindings = st.bindings.clone();
        bindings[slot] = Some(c.span);
        let z = p.score(&bindings);
        if z > threshold {
            let mut path = st.path.clone();
            path.push(i);
            out.push(State { bindings, z, prior: st.prior + c.prior, path });
        }
    }
}

/// Complete assignments surviving the beam, best first. States whose score
/// drops to `threshold` or below are pruned.
pub fn beam_search(p: &dyn Problem, width: usize, threshold: f64) -> Vec<State> {
    let n = p.num_slots();
    let mut root = State::root(n);
    root.z = p.score(&root.bindings);
    if root.z <= threshold {
        return Vec::new();
    }
    let mut beam = vec![root];
    for slot in 0..n {
        let mut next = Vec::new();
        for st in &beam {
            expand(p, slot, st, threshold, &mut next);
        }
        next.sort_by(state_order);
        next.truncate(width.max(1));
        if next.is_empty() {
            return next;
        }
        beam = next;
    }
    beam
}

/// Every complete assignment scoring above `threshold`, best first.
pub fn exhaustive_search(p: &dyn Problem, threshold: f64) -> Vec<State> {
    let n = p.num_slots();
    let mut frontier = vec![State::root(n)];
    for slot in 0..n {
        let mut next = Vec::new();
        for st in &frontier {
            for (i, c) in p.propose(slot, &st.bindings).into_iter().enumerate() {
                let mut bindings = st.bindings.clone();
                bindings[slot] = Some(c.span);
                let mut path = st.path.clone();
                path.push(i);
                next.push(State { bindings, z: 0.0, prior: st.prior + c.prior, path });
            }
        }
        frontier = next;
    }
    let mut out: Vec<State> = frontier
        .into_iter()
        .map(|mut s| {
            s.z = p.score(&s.bindings);
            s
        })
        .filter(|s| s.z > threshold)
        .collect();
    out.sort_by(state_order);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two slots; the score prefers slot 1 right after slot 0.
    struct Toy;

    impl Problem for Toy {
        fn num_slots(&self) -> usize {
            2
        }
        fn propose(&self, _slot: usize, _b: &[Option<Span>]) -> Vec<Candidate> {
            (0..4).map(|i| Candidate { span: Span::single(i * 2), prior: 0.0 }).collect()
        }
        fn score(&self, b: &[Option<Span>]) -> f64 {
            match (b[0], b[1]) {
                (Some(a), Some(c)) if c.start > a.end => 1.0 - 0.1 * (c.start - a.end - 1) as f64,
                (Some(_), Some(_)) => 0.0,
                _ => 1.0,
            }
        }
    }

    #[test]
    fn matches_exhaustive_when_wide() {
        let beam = beam_search(&Toy, 100, 0.0);
        let all = exhaustive_search(&Toy, 0.0);
        assert_eq!(beam, all);
        assert_eq!(beam[0].bindings, vec![Some(Span::single(0)), Some(Span::single(2))]);
    }

    #[test]
    fn threshold_prunes_everything() {
        assert!(beam_search(&Toy, 10, 1.0).is_empty());
    }
}
