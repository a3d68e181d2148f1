//! Small hand-built machines and observation trees used throughout the test
//! suites and examples.
//!
//! Inputs are named `a`, `b`. Outputs of [`example_machine`] are `A`, `B`, `C`
//! (indices 0, 1, 2); outputs of [`ads_example_machine`] are `0`, `1`, `2`.

use crate::mealy::{Input, MealyMachine, Output, State, SymbolTable};
use crate::obstree::{Node, ObservationTree};

fn ab() -> SymbolTable {
    SymbolTable::from_names(["a", "b"])
}

/// Converts `"b b a"` / `"B B C"` style strings into symbol indices: inputs
/// `a`, `b`, ... and outputs `A`, `B`, ... or decimal digits.
pub fn words(inputs: &str, outputs: &str) -> (Vec<Input>, Vec<Output>) {
    let ins = inputs
        .split_whitespace()
        .map(|s| Input(u32::from(s.as_bytes()[0] - b'a')))
        .collect();
    let outs = outputs
        .split_whitespace()
        .map(|s| match s.parse::<u32>() {
            Ok(v) => Output(v),
            Err(_) => Output(u32::from(s.as_bytes()[0] - b'A')),
        })
        .collect();
    (ins, outs)
}

/// Three-state machine: `q0 -a/A-> q0`, `q0 -b/B-> q1`, `q1 -a/A-> q0`,
/// `q1 -b/B-> q2`, `q2 -a/C-> q1`, `q2 -b/B-> q2`.
pub fn example_machine() -> MealyMachine {
    let mut m = MealyMachine::new(ab(), SymbolTable::from_names(["A", "B", "C"]));
    let q: Vec<State> = (0..3).map(|i| m.add_state(format!("q{i}"))).collect();
    let (a, b) = (Input(0), Input(1));
    let (oa, ob, oc) = (Output(0), Output(1), Output(2));
    m.set_transition(q[0], a, oa, q[0]);
    m.set_transition(q[0], b, ob, q[1]);
    m.set_transition(q[1], a, oa, q[0]);
    m.set_transition(q[1], b, ob, q[2]);
    m.set_transition(q[2], a, oc, q[1]);
    m.set_transition(q[2], b, ob, q[2]);
    m
}

/// Observation tree for [`example_machine`] with nodes `t0`..`t5` numbered as
/// `t0 -a/A-> t1`, `t0 -b/B-> t2 -b/B-> t3 -a/C-> t4`, `t2 -a/A-> t5`.
/// Only the root is in the basis.
pub fn example_tree() -> (ObservationTree, SymbolTable) {
    let mut tree = ObservationTree::new(2);
    for (w, o) in [("a", "A"), ("b b a", "B B C"), ("b a", "B A")] {
        let (w, o) = words(w, o);
        tree.extend(Node::ROOT, &w, &o).expect("consistent");
    }
    (tree, ab())
}

/// Five-state machine consistent with [`ads_example_tree`], mapping `t_j` to
/// `s_j` for the basis and sending the frontier state `t5` to `s2`.
pub fn ads_example_machine() -> MealyMachine {
    let mut m = MealyMachine::new(ab(), SymbolTable::from_names(["0", "1", "2"]));
    let s: Vec<State> = (0..5).map(|i| m.add_state(format!("s{i}"))).collect();
    let (a, b) = (Input(0), Input(1));
    let o = Output;
    m.set_transition(s[0], b, o(0), s[1]);
    m.set_transition(s[0], a, o(0), s[0]);
    m.set_transition(s[1], b, o(1), s[2]);
    m.set_transition(s[1], a, o(1), s[2]);
    m.set_transition(s[2], b, o(0), s[3]);
    m.set_transition(s[2], a, o(0), s[1]);
    m.set_transition(s[3], b, o(1), s[4]);
    m.set_transition(s[3], a, o(1), s[3]);
    m.set_transition(s[4], a, o(2), s[2]);
    m.set_transition(s[4], b, o(0), s[0]);
    m
}

/// Observation tree with basis `t0`..`t4` (a `b`-chain) and frontier
/// `t5, t6, t8, t10, t12`, numbered as in the ADS example: the basis is
/// separated by `a`, `a a` and `a b`.
pub fn ads_example_tree() -> (ObservationTree, SymbolTable) {
    let mut tree = ObservationTree::new(2);
    let script: [(u32, &str, &str); 9] = [
        (0, "b", "0"),
        (1, "b", "1"),
        (2, "b", "0"),
        (3, "b", "1"),
        (4, "a", "2"),
        (0, "a a", "0 0"),
        (1, "a b", "1 0"),
        (2, "a a", "0 1"),
        (3, "a b", "1 1"),
    ];
    for (start, w, o) in script {
        let (w, o) = words(w, o);
        tree.extend(Node(start), &w, &o).expect("consistent");
    }
    for t in 1..5 {
        tree.promote(Node(t)).expect("isolated");
    }
    (tree, ab())
}
