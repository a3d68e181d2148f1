use std::collections::{HashMap, VecDeque};

use super::{Node, ObservationTree};
use crate::mealy::Input;

/// Witness of an apartness pair, kept as the point where the two runs
/// diverge: the word is `path(from -> divergence) · input`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct StoredWitness {
    pub from: Node,
    pub divergence: Node,
    pub input: Input,
}

#[derive(Clone, Copy, Debug)]
enum Fact {
    Apart(StoredWitness),
    /// No witness existed at this tree revision.
    NotApartAt(u64),
}

/// Memoized apartness facts between tree states.
///
/// Positive facts are permanent. Negative facts are only trusted while
/// neither subtree has grown since they were computed.
#[derive(Clone, Debug, Default)]
pub struct ApartnessStore {
    facts: HashMap<u64, Fact>,
    apart_pairs: usize,
}

#[inline]
fn key(a: Node, b: Node) -> u64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    (u64::from(lo.0) << 32) | u64::from(hi.0)
}

impl ApartnessStore {
    /// Number of pairs known to be apart.
    pub fn apart_pairs(&self) -> usize {
        self.apart_pairs
    }

    /// All pairs recorded as apart, each with the smaller node first.
    pub fn known_apart(&self) -> Vec<(Node, Node)> {
        let mut pairs: Vec<(Node, Node)> = self
            .facts
            .iter()
            .filter(|(_, f)| matches!(f, Fact::Apart(_)))
            .map(|(&k, _)| (Node((k >> 32) as u32), Node(k as u32)))
            .collect();
        pairs.sort();
        pairs
    }

    pub(crate) fn check(
        &mut self,
        tree: &ObservationTree,
        a: Node,
        b: Node,
    ) -> Option<StoredWitness> {
        if a == b {
            return None;
        }
        let k = key(a, b);
        let grown = tree.modified[a.index()].max(tree.modified[b.index()]);
        match self.facts.get(&k) {
            Some(Fact::Apart(w)) => return Some(*w),
            Some(Fact::NotApartAt(rev)) if *rev >= grown => return None,
            _ => {}
        }
        let found = simultaneous_walk(tree, a, b);
        match found {
            Some(w) => {
                self.apart_pairs += 1;
                self.facts.insert(k, Fact::Apart(w));
            }
            None => {
                self.facts.insert(k, Fact::NotApartAt(tree.revision));
            }
        }
        found
    }
}

/// Breadth-first walk over the common part of both subtrees; the first
/// transition with differing outputs yields a shortest witness.
fn simultaneous_walk(tree: &ObservationTree, a: Node, b: Node) -> Option<StoredWitness> {
    let mut queue = VecDeque::from([(a, b)]);
    while let Some((x, y)) = queue.pop_front() {
        for i in tree.inputs() {
            if let (Some((ox, nx)), Some((oy, ny))) = (tree.step(x, i), tree.step(y, i)) {
                if ox != oy {
                    return Some(StoredWitness {
                        from: a,
                        divergence: x,
                        input: i,
                    });
                }
                queue.push_back((nx, ny));
            }
        }
    }
    None
}
