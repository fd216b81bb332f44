use std::collections::BTreeSet;

use crate::engine::NodeId;

use super::Formula;

pub type Conjunct = BTreeSet<NodeId>;

/// Exact disjunctive normal form: a sorted list of conjuncts, any of which
/// makes the formula true. Conjuncts subsumed by smaller ones are dropped
/// as distribution proceeds, which keeps the result equivalent.
pub fn dnf_normalize(formula: &Formula) -> Vec<Conjunct> {
    // Work on dense bitsets; subset tests dominate the cost.
    let vars: Vec<NodeId> = formula.vars().into_iter().collect();
    let words = vars.len().div_ceil(64).max(1);
    let mut out: Vec<Conjunct> = dnf(formula, &vars, words)
        .into_iter()
        .map(|bits| bits.members().map(|i| vars[i]).collect())
        .collect();
    out.sort();
    out
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(words: usize) -> Bits {
        Bits(vec![0; words])
    }

    fn single(words: usize, i: usize) -> Bits {
        let mut b = Bits::empty(words);
        b.0[i / 64] |= 1 << (i % 64);
        b
    }

    fn union(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }

    fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn len(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                (rest != 0).then(|| {
                    let bit = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    w * 64 + bit
                })
            })
        })
    }
}

fn dnf(f: &Formula, vars: &[NodeId], words: usize) -> Vec<Bits> {
    match f {
        Formula::True => vec![Bits::empty(words)],
        Formula::False => Vec::new(),
        Formula::Var(v) => vec![Bits::single(words, vars.binary_search(v).unwrap())],
        Formula::Or(fs) => absorb_bits(fs.iter().flat_map(|g| dnf(g, vars, words)).collect()),
        Formula::And(fs) => {
            let mut acc = vec![Bits::empty(words)];
            for g in fs {
                let rhs = dnf(g, vars, words);
                let mut next = Vec::with_capacity(acc.len() * rhs.len());
                for a in &acc {
                    for b in &rhs {
                        next.push(a.union(b));
                    }
                }
                acc = absorb_bits(next);
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
    }
}

fn absorb_bits(mut sets: Vec<Bits>) -> Vec<Bits> {
    sets.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.0.cmp(&b.0)));
    sets.dedup();
    if sets.first().is_some_and(|s| s.len() == 0) {
        sets.truncate(1);
        return sets;
    }
    // A kept set can only be inside `s` if its lowest member is in `s`, so
    // kept sets are bucketed by lowest member.
    let words = sets.first().map_or(0, |s| s.0.len());
    let mut by_first: Vec<Vec<usize>> = vec![Vec::new(); words * 64];
    let mut kept: Vec<Bits> = Vec::with_capacity(sets.len());
    for s in sets {
        let absorbed = s
            .members()
            .any(|i| by_first[i].iter().any(|k| kept[*k].is_subset(&s)));
        if !absorbed {
            let first = s.members().next().unwrap();
            by_first[first].push(kept.len());
            kept.push(s);
        }
    }
    kept
}

/// Removes duplicates and every conjunct that contains another.
pub(crate) fn absorb(mut sets: Vec<Conjunct>) -> Vec<Conjunct> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut kept: Vec<Conjunct> = Vec::with_capacity(sets.len());
    for s in sets {
        if !kept.iter().any(|k| k.is_subset(&s)) {
            kept.push(s);
        }
    }
    kept
}
