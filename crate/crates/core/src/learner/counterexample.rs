use super::{output_query, Hypothesis, LearnError};
use crate::mealy::Input;
use crate::obstree::{Node, ObservationTree};
use crate::oracle::Teacher;

/// Number of inputs of `sigma` that lead outside basis and frontier, i.e.
/// the distance of its tree end from the frontier. `sigma` must be defined
/// in the tree.
pub fn frontier_distance(tree: &ObservationTree, sigma: &[Input]) -> usize {
    sigma.len() - frontier_prefix_len(tree, sigma)
}

/// Length of the prefix of `sigma` that ends in the frontier, or all of
/// `sigma` if it never leaves the basis.
fn frontier_prefix_len(tree: &ObservationTree, sigma: &[Input]) -> usize {
    let mut node = Node::ROOT;
    for (n, &i) in sigma.iter().enumerate() {
        node = tree.successor(node, i).expect("word recorded in the tree");
        if !tree.is_basis(node) {
            return n + 1;
        }
    }
    sigma.len()
}

/// Binary search on a conflict `sigma` until the conflict sits on a
/// frontier node, so that `hyp` stops being a hypothesis for the tree.
/// Returns the number of output queries sent to the teacher.
pub fn process_counterexample<T: Teacher + ?Sized>(
    tree: &mut ObservationTree,
    teacher: &mut T,
    hyp: &Hypothesis,
    sigma: &[Input],
) -> Result<u64, LearnError> {
    let mut sigma = sigma.to_vec();
    let mut queries = 0;
    loop {
        let q = hyp.node_after(&sigma);
        let r = tree.run(Node::ROOT, &sigma).ok_or(LearnError::NoConflict)?;
        if tree.is_basis(r) || tree.is_frontier(r) {
            return Ok(queries);
        }
        let rho = frontier_prefix_len(tree, &sigma);
        let h = (rho + sigma.len()) / 2;
        let (sigma1, sigma2) = sigma.split_at(h);
        let q1 = hyp.node_after(sigma1);
        let r1 = tree
            .run(Node::ROOT, sigma1)
            .expect("prefix of a recorded word");
        let eta = tree.is_apart(q, r).ok_or(LearnError::NoConflict)?;

        let mut word = tree.access(q1);
        word.extend_from_slice(sigma2);
        word.extend_from_slice(&eta);
        if output_query(tree, teacher, &word)? {
            queries += 1;
        }

        sigma = if tree.apart(q1, r1) {
            sigma1.to_vec()
        } else {
            let mut next = tree.access(q1);
            next.extend_from_slice(sigma2);
            next
        };
    }
}
