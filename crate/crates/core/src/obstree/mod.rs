//! The observation tree: a tree-shaped partial Mealy machine holding every
//! answer received so far, together with the basis/frontier split, the
//! apartness relation between tree states and the progress norm.

mod apartness;
mod dot;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mealy::{Input, Output};

pub use apartness::ApartnessStore;

/// A state of the observation tree. The root is `Node(0)`; ids follow
/// creation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Node(pub u32);

impl Node {
    pub const ROOT: Node = Node(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("output conflict at {node} on input {input}: tree has {old}, teacher said {new}")]
    OutputConflict {
        node: Node,
        input: Input,
        old: Output,
        new: Output,
    },
    #[error("word has {inputs} inputs but {outputs} outputs")]
    LengthMismatch { inputs: usize, outputs: usize },
    #[error("{0} is not in the frontier")]
    NotInFrontier(Node),
    #[error("{0} is not apart from every basis state")]
    NotIsolated(Node),
}

/// Classification of a frontier state against the basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FrontierStatus {
    /// Apart from every basis state.
    Isolated,
    /// Apart from all basis states but this one.
    Identified(Node),
    /// Not apart from at least two basis states (ascending node order).
    Ambiguous(Vec<Node>),
}

/// The three summands of the progress norm and their sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormSnapshot {
    /// `|S|(|S|+1)/2`
    pub sq: u64,
    /// Defined transitions out of the basis.
    pub sdef: u64,
    /// Apart (basis, frontier) pairs.
    pub sapart: u64,
    pub total: u64,
}

impl NormSnapshot {
    /// Upper bound on the norm of any observation tree for a machine with
    /// `n` equivalence classes and `k` inputs.
    pub fn bound(n: u64, k: u64) -> u64 {
        n * (n + 1) / 2 + k * n + (n.saturating_sub(1)) * (k * n + 1)
    }
}

#[derive(Clone, Debug)]
pub struct ObservationTree {
    num_inputs: usize,
    parent: Vec<Option<(Node, Input)>>,
    succ: Vec<Option<(Output, Node)>>,
    /// Revision at which the subtree below a node last grew.
    modified: Vec<u64>,
    revision: u64,
    basis: Vec<Node>,
    in_basis: Vec<bool>,
    frontier: BTreeSet<Node>,
    apartness: ApartnessStore,
}

impl ObservationTree {
    /// A tree with only the root, which is also the sole basis state.
    pub fn new(num_inputs: usize) -> Self {
        assert!(num_inputs > 0, "input alphabet must not be empty");
        Self {
            num_inputs,
            parent: vec![None],
            succ: vec![None; num_inputs],
            modified: vec![0],
            revision: 0,
            basis: vec![Node::ROOT],
            in_basis: vec![true],
            frontier: BTreeSet::new(),
            apartness: ApartnessStore::default(),
        }
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_nodes(&self) -> usize {
        self.parent.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> {
        (0..self.num_nodes() as u32).map(Node)
    }

    pub fn inputs(&self) -> impl Iterator<Item = Input> {
        (0..self.num_inputs).map(Input::from_index)
    }

    /// Incremented every time a node is created.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    #[inline]
    pub fn step(&self, node: Node, input: Input) -> Option<(Output, Node)> {
        self.succ[node.index() * self.num_inputs + input.index()]
    }

    pub fn successor(&self, node: Node, input: Input) -> Option<Node> {
        self.step(node, input).map(|(_, n)| n)
    }

    pub fn parent(&self, node: Node) -> Option<(Node, Input)> {
        self.parent[node.index()]
    }

    /// Node reached by `word` from `from`, if the whole word is defined.
    pub fn run(&self, from: Node, word: &[Input]) -> Option<Node> {
        word.iter().try_fold(from, |n, &i| self.successor(n, i))
    }

    /// Outputs produced by `word` from `from`, if the whole word is defined.
    pub fn outputs(&self, from: Node, word: &[Input]) -> Option<Vec<Output>> {
        let mut node = from;
        let mut outs = Vec::with_capacity(word.len());
        for &i in word {
            let (o, next) = self.step(node, i)?;
            outs.push(o);
            node = next;
        }
        Some(outs)
    }

    /// The unique input word leading from the root to `node`.
    pub fn access(&self, node: Node) -> Vec<Input> {
        self.path_between(Node::ROOT, node)
            .expect("every node is below the root")
    }

    /// Input word from `ancestor` down to `node`, if `ancestor` is one.
    pub fn path_between(&self, ancestor: Node, node: Node) -> Option<Vec<Input>> {
        let mut word = Vec::new();
        let mut at = node;
        while at != ancestor {
            let (p, i) = self.parent[at.index()]?;
            word.push(i);
            at = p;
        }
        word.reverse();
        Some(word)
    }

    pub fn depth(&self, node: Node) -> usize {
        let mut d = 0;
        let mut at = node;
        while let Some((p, _)) = self.parent[at.index()] {
            d += 1;
            at = p;
        }
        d
    }

    fn add_child(&mut self, parent: Node, input: Input, output: Output) -> Node {
        let node = Node(u32::try_from(self.num_nodes()).expect("tree too large"));
        self.parent.push(Some((parent, input)));
        self.succ.extend(std::iter::repeat_n(None, self.num_inputs));
        self.modified.push(self.revision);
        self.in_basis.push(false);
        self.succ[parent.index() * self.num_inputs + input.index()] = Some((output, node));
        if self.in_basis[parent.index()] {
            self.frontier.insert(node);
        }
        node
    }

    /// Records that `word` from `start` produced `outputs`, creating nodes as
    /// needed, and returns the node reached. The tree is left untouched when
    /// an existing transition disagrees with the supplied outputs.
    pub fn extend(
        &mut self,
        start: Node,
        word: &[Input],
        outputs: &[Output],
    ) -> Result<Node, TreeError> {
        if word.len() != outputs.len() {
            return Err(TreeError::LengthMismatch {
                inputs: word.len(),
                outputs: outputs.len(),
            });
        }
        let mut node = start;
        let mut pos = 0;
        while pos < word.len() {
            match self.step(node, word[pos]) {
                Some((old, next)) => {
                    if old != outputs[pos] {
                        return Err(TreeError::OutputConflict {
                            node,
                            input: word[pos],
                            old,
                            new: outputs[pos],
                        });
                    }
                    node = next;
                    pos += 1;
                }
                None => break,
            }
        }
        if pos == word.len() {
            return Ok(node);
        }
        self.revision += 1;
        let mut at = Some(node);
        while let Some(a) = at {
            self.modified[a.index()] = self.revision;
            at = self.parent[a.index()].map(|(p, _)| p);
        }
        for (&i, &o) in word[pos..].iter().zip(&outputs[pos..]) {
            node = self.add_child(node, i, o);
        }
        Ok(node)
    }

    /// Basis states in promotion order.
    pub fn basis(&self) -> &[Node] {
        &self.basis
    }

    pub fn is_basis(&self, node: Node) -> bool {
        self.in_basis[node.index()]
    }

    /// Frontier states in ascending node order.
    pub fn frontier(&self) -> impl Iterator<Item = Node> + '_ {
        self.frontier.iter().copied()
    }

    pub fn frontier_len(&self) -> usize {
        self.frontier.len()
    }

    pub fn is_frontier(&self, node: Node) -> bool {
        self.frontier.contains(&node)
    }

    /// First basis state (lowest node id) lacking a transition, with the
    /// lowest such input.
    pub fn incomplete_basis(&self) -> Option<(Node, Input)> {
        let mut basis = self.basis.clone();
        basis.sort();
        basis.into_iter().find_map(|q| {
            self.inputs()
                .find(|&i| self.step(q, i).is_none())
                .map(|i| (q, i))
        })
    }

    pub fn is_basis_complete(&self) -> bool {
        self.incomplete_basis().is_none()
    }

    /// Moves an isolated frontier state into the basis.
    pub fn promote(&mut self, node: Node) -> Result<(), TreeError> {
        if !self.is_frontier(node) {
            return Err(TreeError::NotInFrontier(node));
        }
        if self.frontier_status(node)? != FrontierStatus::Isolated {
            return Err(TreeError::NotIsolated(node));
        }
        self.frontier.remove(&node);
        self.basis.push(node);
        self.in_basis[node.index()] = true;
        for i in 0..self.num_inputs {
            if let Some((_, child)) = self.succ[node.index() * self.num_inputs + i] {
                self.frontier.insert(child);
            }
        }
        Ok(())
    }

    /// Witness of `a # b`, if the current tree shows one.
    pub fn is_apart(&mut self, a: Node, b: Node) -> Option<Vec<Input>> {
        let mut store = std::mem::take(&mut self.apartness);
        let witness = store.check(self, a, b);
        self.apartness = store;
        witness.map(|w| self.materialize(w))
    }

    pub fn apart(&mut self, a: Node, b: Node) -> bool {
        let mut store = std::mem::take(&mut self.apartness);
        let apart = store.check(self, a, b).is_some();
        self.apartness = store;
        apart
    }

    pub fn apartness(&self) -> &ApartnessStore {
        &self.apartness
    }

    /// Basis states not (yet) apart from `node`, ascending by node id.
    pub fn candidates(&mut self, node: Node) -> Vec<Node> {
        let mut basis = self.basis.clone();
        basis.sort();
        basis
            .into_iter()
            .filter(|&b| !self.apart(node, b))
            .collect()
    }

    pub fn frontier_status(&mut self, node: Node) -> Result<FrontierStatus, TreeError> {
        if !self.is_frontier(node) {
            return Err(TreeError::NotInFrontier(node));
        }
        let mut cands = self.candidates(node);
        Ok(match cands.len() {
            0 => FrontierStatus::Isolated,
            1 => FrontierStatus::Identified(cands.pop().unwrap()),
            _ => FrontierStatus::Ambiguous(cands),
        })
    }

    pub fn norm(&mut self) -> NormSnapshot {
        let s = self.basis.len() as u64;
        let sq = s * (s + 1) / 2;
        let sdef = self
            .basis
            .iter()
            .map(|&q| self.inputs().filter(|&i| self.step(q, i).is_some()).count() as u64)
            .sum();
        let basis = self.basis.clone();
        let frontier: Vec<Node> = self.frontier().collect();
        let mut sapart = 0;
        for &q in &basis {
            for &f in &frontier {
                if self.apart(q, f) {
                    sapart += 1;
                }
            }
        }
        NormSnapshot {
            sq,
            sdef,
            sapart,
            total: sq + sdef + sapart,
        }
    }

    fn materialize(&self, w: apartness::StoredWitness) -> Vec<Input> {
        let mut word = self
            .path_between(w.from, w.divergence)
            .expect("divergence point lies below the witness origin");
        word.push(w.input);
        word
    }
}
