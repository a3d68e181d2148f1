use std::collections::{BTreeMap, HashMap, VecDeque};

use super::LearnError;
use crate::mealy::{Input, MealyMachine, State, SymbolTable};
use crate::obstree::{Node, ObservationTree};

/// A complete machine folded from the basis and frontier of a tree.
#[derive(Clone, Debug)]
pub struct Hypothesis {
    machine: MealyMachine,
    node_of_state: Vec<Node>,
    state_of_node: HashMap<Node, State>,
    choice: BTreeMap<Node, Node>,
}

impl Hypothesis {
    pub fn machine(&self) -> &MealyMachine {
        &self.machine
    }

    pub fn into_machine(self) -> MealyMachine {
        self.machine
    }

    /// Basis node represented by a hypothesis state.
    pub fn node_of(&self, state: State) -> Node {
        self.node_of_state[state.index()]
    }

    pub fn state_of(&self, basis_node: Node) -> Option<State> {
        self.state_of_node.get(&basis_node).copied()
    }

    /// The folding map from frontier nodes to basis nodes.
    pub fn choice(&self) -> &BTreeMap<Node, Node> {
        &self.choice
    }

    /// Basis node that the hypothesis reaches after `word`.
    pub fn node_after(&self, word: &[Input]) -> Node {
        self.node_of(self.machine.reach(word).expect("hypotheses are complete"))
    }
}

/// Folds every frontier node onto a basis node it is not apart from: the
/// unique one if identified, otherwise the lowest. States are numbered by
/// ascending basis node, so the root becomes the initial state 0.
pub fn build_hypothesis(
    tree: &mut ObservationTree,
    inputs: &SymbolTable,
    outputs: &SymbolTable,
) -> Result<Hypothesis, LearnError> {
    if let Some((q, _)) = tree.incomplete_basis() {
        return Err(LearnError::IncompleteBasis(q));
    }
    let mut basis = tree.basis().to_vec();
    basis.sort();
    let frontier: Vec<Node> = tree.frontier().collect();
    let mut choice = BTreeMap::new();
    for f in frontier {
        match tree.candidates(f).first() {
            Some(&b) => {
                choice.insert(f, b);
            }
            None => return Err(LearnError::IsolatedFrontier(f)),
        }
    }

    let mut machine = MealyMachine::new(inputs.clone(), outputs.clone());
    let mut state_of_node = HashMap::new();
    for &q in &basis {
        state_of_node.insert(q, machine.add_state(q.to_string()));
    }
    for &q in &basis {
        for i in tree.inputs() {
            let (o, p) = tree.step(q, i).expect("basis is complete");
            let target = if tree.is_basis(p) { p } else { choice[&p] };
            machine.set_transition(state_of_node[&q], i, o, state_of_node[&target]);
        }
    }
    Ok(Hypothesis {
        machine,
        node_of_state: basis,
        state_of_node,
        choice,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Consistency {
    Consistent,
    /// A word whose tree end is apart from its hypothesis end.
    Conflict(Vec<Input>),
}

/// Breadth-first search through pairs (tree node, hypothesis state) from
/// the roots. Reports the access sequence of the first tree node found
/// apart from the basis node of its paired state.
pub fn check_consistency(tree: &mut ObservationTree, hyp: &Hypothesis) -> Consistency {
    let mut queue = VecDeque::from([(Node::ROOT, hyp.machine.initial())]);
    while let Some((q, r)) = queue.pop_front() {
        if tree.apart(q, hyp.node_of(r)) {
            return Consistency::Conflict(tree.access(q));
        }
        for i in tree.inputs() {
            if let Some(p) = tree.successor(q, i) {
                let next = hyp
                    .machine
                    .successor(r, i)
                    .expect("hypotheses are complete");
                queue.push_back((p, next));
            }
        }
    }
    Consistency::Consistent
}

/// Shortest prefix of `rho` whose tree end is apart from its hypothesis
/// end. `rho` must already be recorded in the tree.
pub fn shortest_conflict_prefix(
    tree: &mut ObservationTree,
    hyp: &Hypothesis,
    rho: &[Input],
) -> Result<Vec<Input>, LearnError> {
    let mut t = Node::ROOT;
    let mut h = hyp.machine.initial();
    for len in 0..=rho.len() {
        if tree.apart(t, hyp.node_of(h)) {
            return Ok(rho[..len].to_vec());
        }
        if len < rho.len() {
            t = tree.successor(t, rho[len]).ok_or(LearnError::NoConflict)?;
            h = hyp
                .machine
                .successor(h, rho[len])
                .expect("hypotheses are complete");
        }
    }
    Err(LearnError::NoConflict)
}
