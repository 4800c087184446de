//! Realizability of symbolic traces and embedding of witnesses on a line.

use super::{EntryId, SymLabel};
use crate::constraints::{is_satisfiable, metric_axioms, Assignment, Atom, ConstraintSet, LinConstraint, LinExpr, Q};
use crate::sim::Action;
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

/// All orderings of the items.
pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x.clone());
            out.push(p);
        }
    }
    out
}

/// True if the constraints stay satisfiable with the triangle inequalities over the
/// trace's agents and, for every message heard by several receivers, the receivers
/// ordered by their distance to the sender as they are in the trace.
pub fn check_realizable(trace: &[SymLabel], constraints: &ConstraintSet) -> bool {
    let agents: BTreeSet<String> = trace.iter().map(|l| l.agent.clone()).chain(trace.iter().filter_map(|l| l.peer.clone())).collect();
    let mut cs = constraints.clone();
    cs.extend(metric_axioms(&agents.into_iter().collect::<Vec<_>>()).iter().cloned());
    let mut heard: BTreeMap<&EntryId, Vec<&str>> = BTreeMap::new();
    for l in trace {
        let (Action::Recv(_), Some(e), Some(sender)) = (&l.action, &l.entry, &l.peer) else {
            continue;
        };
        let earlier = heard.entry(e).or_default();
        for r in earlier.iter() {
            cs.push(LinConstraint::le(LinExpr::dist(sender, r), LinExpr::dist(sender, &l.agent)));
        }
        earlier.push(&l.agent);
    }
    matches!(is_satisfiable(&cs), Ok(r) if r.is_sat())
}

fn dist(w: &Assignment, a: &str, b: &str) -> Option<Q> {
    match Atom::dist(a, b) {
        None => Some(Q::zero()),
        Some(at) => w.get(&at).cloned(),
    }
}

/// Positions on a line whose pairwise gaps are the witness distances, trying every
/// ordering of the participants.
pub fn collinear_embed(witness: &Assignment, participants: &[String]) -> Option<BTreeMap<String, Q>> {
    let ps: Vec<String> = participants.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    for order in permutations(&ps) {
        let mut pos = BTreeMap::new();
        let mut x = Q::zero();
        if let Some(first) = order.first() {
            pos.insert(first.clone(), x.clone());
        }
        for w in order.windows(2) {
            x += dist(witness, &w[0], &w[1])?;
            pos.insert(w[1].clone(), x.clone());
        }
        let fits = ps.iter().all(|a| ps.iter().all(|b| dist(witness, a, b) == Some((&pos[a] - &pos[b]).abs())));
        if fits {
            return Some(pos);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::q;

    fn w(pairs: &[(&str, &str, i64)]) -> Assignment {
        pairs.iter().map(|(a, b, d)| (Atom::dist(a, b).unwrap(), q(*d))).collect()
    }

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn line_of_three() {
        let pos = collinear_embed(&w(&[("v", "p", 2), ("v", "i", 1), ("p", "i", 1)]), &names(&["v", "p", "i"])).unwrap();
        assert_eq!((&pos["p"] - &pos["v"]).abs(), q(2));
        assert_eq!((&pos["i"] - &pos["v"]).abs(), q(1));
    }

    #[test]
    fn broken_triangle_has_no_line() {
        assert!(collinear_embed(&w(&[("a", "b", 1), ("b", "c", 1), ("a", "c", 3)]), &names(&["a", "b", "c"])).is_none());
        assert!(collinear_embed(&w(&[("a", "b", 5)]), &names(&["a", "b"])).is_some());
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(&[1, 2, 3, 4]).len(), 24);
        assert_eq!(permutations::<u8>(&[]).len(), 1);
    }
}
