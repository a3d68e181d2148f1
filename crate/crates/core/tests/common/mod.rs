//! Brute-force reference implementations shared by the integration tests.
//! None of these reuse the library's search routines.

#![allow(dead_code)]

use std::collections::BTreeMap;

use apartlearn::mealy::{Input, MealyMachine, Output, State};
use apartlearn::obstree::{Node, ObservationTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// All input words defined from `node`, each with its outputs, by depth-first
/// enumeration of the subtree.
pub fn defined_words(tree: &ObservationTree, node: Node) -> BTreeMap<Vec<Input>, Vec<Output>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![(node, Vec::new(), Vec::new())];
    while let Some((n, w, o)) = stack.pop() {
        for i in tree.inputs() {
            if let Some((oi, next)) = tree.step(n, i) {
                let mut w2: Vec<Input> = w.clone();
                w2.push(i);
                let mut o2: Vec<Output> = o.clone();
                o2.push(oi);
                out.insert(w2.clone(), o2.clone());
                stack.push((next, w2, o2));
            }
        }
    }
    out
}

/// Shortest length of a word defined from both nodes on which their outputs
/// differ, if any, found by intersecting the two domains.
pub fn brute_apart(tree: &ObservationTree, a: Node, b: Node) -> Option<usize> {
    let da = defined_words(tree, a);
    let db = defined_words(tree, b);
    da.iter()
        .filter_map(|(w, oa)| db.get(w).filter(|ob| *ob != oa).map(|_| w.len()))
        .min()
}

/// Does `word` witness apartness of `a` and `b`?
pub fn is_witness(tree: &ObservationTree, a: Node, b: Node, word: &[Input]) -> bool {
    match (tree.outputs(a, word), tree.outputs(b, word)) {
        (Some(x), Some(y)) => x != y,
        _ => false,
    }
}

/// Whether the runs of `word` from `a` and `b` produce different outputs
/// at some position where both are still defined.
pub fn differ_on_prefix(tree: &ObservationTree, a: Node, b: Node, word: &[Input]) -> bool {
    let (mut x, mut y) = (a, b);
    for &i in word {
        match (tree.step(x, i), tree.step(y, i)) {
            (Some((ox, nx)), Some((oy, ny))) => {
                if ox != oy {
                    return true;
                }
                x = nx;
                y = ny;
            }
            _ => return false,
        }
    }
    false
}

/// Whether the map sending the root to the initial state and following
/// transitions preserves every output of the tree.
pub fn functional_simulation_exists(tree: &ObservationTree, m: &MealyMachine) -> bool {
    let mut stack = vec![(Node::ROOT, m.initial())];
    while let Some((t, q)) = stack.pop() {
        for i in tree.inputs() {
            if let Some((o, next)) = tree.step(t, i) {
                match m.step(q, i) {
                    Some((o2, q2)) if o2 == o => stack.push((next, q2)),
                    _ => return false,
                }
            }
        }
    }
    true
}

/// Value of one fixed decision tree, given as labels per path.
#[derive(Clone, Debug)]
pub enum Decision {
    Stop,
    Apply(Input, BTreeMap<Output, Decision>),
}

fn groups(tree: &ObservationTree, u: &[Node], i: Input) -> BTreeMap<Output, Vec<Node>> {
    let mut g: BTreeMap<Output, Vec<Node>> = BTreeMap::new();
    for &q in u {
        if let Some((o, p)) = tree.step(q, i) {
            g.entry(o).or_default().push(p);
        }
    }
    g
}

/// Expected number of new apartness pairs of running `d` on `u`.
pub fn decision_value(tree: &ObservationTree, u: &[Node], d: &Decision) -> f64 {
    let Decision::Apply(i, children) = d else {
        return 0.0;
    };
    let g = groups(tree, u, *i);
    let defined: usize = g.values().map(Vec::len).sum();
    if defined == 0 {
        return 0.0;
    }
    g.iter()
        .map(|(o, uo)| {
            let sub = children.get(o).map_or(0.0, |c| decision_value(tree, uo, c));
            uo.len() as f64 * ((defined - uo.len()) as f64 + sub) / defined as f64
        })
        .sum()
}

/// Every decision tree on `u` of at most `depth` levels, enumerated
/// explicitly (children only for outputs that can occur).
pub fn all_decisions(tree: &ObservationTree, u: &[Node], depth: usize) -> Vec<Decision> {
    let mut out = vec![Decision::Stop];
    if depth == 0 {
        return out;
    }
    for i in tree.inputs() {
        let g = groups(tree, u, i);
        let mut partial: Vec<BTreeMap<Output, Decision>> = vec![BTreeMap::new()];
        for (o, uo) in &g {
            let subs = all_decisions(tree, uo, depth - 1);
            let mut next = Vec::with_capacity(partial.len() * subs.len());
            for p in &partial {
                for s in &subs {
                    let mut p2 = p.clone();
                    p2.insert(*o, s.clone());
                    next.push(p2);
                }
            }
            partial = next;
        }
        out.extend(partial.into_iter().map(|c| Decision::Apply(i, c)));
    }
    out
}

/// Maximum expected reward over all decision trees of bounded depth.
pub fn brute_reward(tree: &ObservationTree, u: &[Node], depth: usize) -> f64 {
    all_decisions(tree, u, depth)
        .iter()
        .map(|d| decision_value(tree, u, d))
        .fold(0.0, f64::max)
}

/// A random observation tree: `words` random words of length at most
/// `max_len` from the root, fresh transitions getting random outputs.
pub fn random_tree(
    rng: &mut ChaCha8Rng,
    k: usize,
    p: u32,
    words: usize,
    max_len: usize,
) -> ObservationTree {
    let mut tree = ObservationTree::new(k);
    for _ in 0..words {
        let len = rng.gen_range(1..=max_len);
        let word: Vec<Input> = (0..len)
            .map(|_| Input(rng.gen_range(0..k as u32)))
            .collect();
        let mut node = Node::ROOT;
        let mut outs = Vec::new();
        for &i in &word {
            match tree.step(node, i) {
                Some((o, next)) => {
                    outs.push(o);
                    node = next;
                }
                None => break,
            }
        }
        while outs.len() < word.len() {
            outs.push(Output(rng.gen_range(0..p)));
        }
        tree.extend(Node::ROOT, &word, &outs)
            .expect("fresh outputs only");
    }
    tree
}

/// Tree recording `words` random queries of length at most `max_len`
/// against `m`.
pub fn tree_from_machine(
    rng: &mut ChaCha8Rng,
    m: &MealyMachine,
    words: usize,
    max_len: usize,
) -> ObservationTree {
    let k = m.num_inputs();
    let mut tree = ObservationTree::new(k);
    for _ in 0..words {
        let len = rng.gen_range(1..=max_len);
        let word: Vec<Input> = (0..len)
            .map(|_| Input(rng.gen_range(0..k as u32)))
            .collect();
        let outs = m.output_word(&word).expect("complete machine");
        tree.extend(Node::ROOT, &word, &outs)
            .expect("answers of one machine agree");
    }
    tree
}

/// Shortest-word semantic equivalence of two states of one machine, by
/// exhaustive enumeration up to length `n` (enough for `n` states).
pub fn states_equivalent(m: &MealyMachine, a: State, b: State) -> bool {
    let n = m.num_states();
    let mut layer = vec![(a, b)];
    for _ in 0..n {
        let mut next = Vec::new();
        for &(x, y) in &layer {
            for i in m.input_symbols() {
                let (ox, x2) = m.step(x, i).unwrap();
                let (oy, y2) = m.step(y, i).unwrap();
                if ox != oy {
                    return false;
                }
                if !next.contains(&(x2, y2)) {
                    next.push((x2, y2));
                }
            }
        }
        layer = next;
    }
    true
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
