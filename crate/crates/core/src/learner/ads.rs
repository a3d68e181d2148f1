//! Adaptive distinguishing sequences computed from the observation tree.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, ToPrimitive, Zero};

use crate::mealy::{Input, Output};
use crate::obstree::{Node, ObservationTree};
use crate::oracle::Teacher;

/// Exact non-negative rational. Stays on machine integers until an
/// operation would overflow.
#[derive(Clone, Debug)]
pub enum Reward {
    Small(Ratio<u128>),
    Big(BigRational),
}

impl Reward {
    pub fn zero() -> Self {
        Reward::Small(Ratio::zero())
    }

    pub fn from_integer(n: u64) -> Self {
        Reward::Small(Ratio::from_integer(u128::from(n)))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Reward::Small(r) => r.is_zero(),
            Reward::Big(r) => r.is_zero(),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Reward::Small(r) => {
                BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
            }
            Reward::Big(r) => r.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Reward::Small(r) => r.to_f64().unwrap_or(f64::NAN),
            Reward::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    fn combine(
        &self,
        other: &Reward,
        small: impl Fn(&Ratio<u128>, &Ratio<u128>) -> Option<Ratio<u128>>,
        big: impl Fn(&BigRational, &BigRational) -> BigRational,
    ) -> Reward {
        if let (Reward::Small(a), Reward::Small(b)) = (self, other) {
            if let Some(r) = small(a, b) {
                return Reward::Small(r);
            }
        }
        Reward::Big(big(&self.to_big(), &other.to_big()))
    }

    fn add(&self, other: &Reward) -> Reward {
        self.combine(other, |a, b| a.checked_add(b), |a, b| a + b)
    }

    fn mul(&self, other: &Reward) -> Reward {
        self.combine(other, |a, b| a.checked_mul(b), |a, b| a * b)
    }

    fn div(&self, other: &Reward) -> Reward {
        self.combine(other, |a, b| a.checked_div(b), |a, b| a / b)
    }
}

impl From<usize> for Reward {
    fn from(n: usize) -> Self {
        Reward::from_integer(n as u64)
    }
}

impl PartialEq for Reward {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Reward {}

impl PartialOrd for Reward {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Reward {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Reward::Small(a), Reward::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl fmt::Display for Reward {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reward::Small(r) => write!(f, "{r}"),
            Reward::Big(r) => write!(f, "{r}"),
        }
    }
}

/// One node of an adaptive decision tree over tree states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdsNode {
    /// The current state set: tree nodes reached from the initial set by the
    /// inputs and outputs on the path to this node.
    pub states: Vec<Node>,
    /// Input to apply next; `None` at leaves.
    pub input: Option<Input>,
    pub children: BTreeMap<Output, AdsNode>,
    /// Expected number of apartness pairs gained by running this subtree.
    pub score: Reward,
}

impl AdsNode {
    fn leaf(states: Vec<Node>) -> Self {
        AdsNode {
            states,
            input: None,
            children: BTreeMap::new(),
            score: Reward::zero(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.input.is_none()
    }

    pub fn child(&self, output: Output) -> Option<&AdsNode> {
        self.children.get(&output)
    }

    /// Number of nodes in the decision tree.
    pub fn size(&self) -> usize {
        1 + self.children.values().map(AdsNode::size).sum::<usize>()
    }

    /// Every root-to-leaf path as (inputs, outputs).
    pub fn paths(&self) -> Vec<(Vec<Input>, Vec<Output>)> {
        let Some(i) = self.input else {
            return vec![(Vec::new(), Vec::new())];
        };
        let mut out = Vec::new();
        for (&o, child) in &self.children {
            for (mut ins, mut outs) in child.paths() {
                ins.insert(0, i);
                outs.insert(0, o);
                out.push((ins, outs));
            }
        }
        out
    }
}

/// The decision tree `Ads(U)` together with its expected reward.
///
/// An input is chosen only among those defined for some state of the set;
/// ties go to the lowest input. Sets with at most one state are leaves,
/// since nothing is left to separate.
pub fn build_ads(tree: &ObservationTree, states: &[Node]) -> AdsNode {
    let mut u = states.to_vec();
    u.sort();
    u.dedup();
    build(tree, u)
}

/// `E(U)`: the largest expected number of new apartness pairs an adaptive
/// query can gain on `states`.
pub fn ads_expected_reward(tree: &ObservationTree, states: &[Node]) -> Reward {
    build_ads(tree, states).score
}

fn build(tree: &ObservationTree, u: Vec<Node>) -> AdsNode {
    if u.len() <= 1 {
        return AdsNode::leaf(u);
    }
    let mut best: Option<(Input, Reward, BTreeMap<Output, AdsNode>)> = None;
    for i in tree.inputs() {
        let mut groups: BTreeMap<Output, Vec<Node>> = BTreeMap::new();
        for &q in &u {
            if let Some((o, p)) = tree.step(q, i) {
                groups.entry(o).or_default().push(p);
            }
        }
        let defined: usize = groups.values().map(Vec::len).sum();
        if defined == 0 {
            continue;
        }
        let mut total = Reward::zero();
        let mut children = BTreeMap::new();
        for (o, uo) in groups {
            let size = uo.len();
            let child = build(tree, uo);
            // |U→i/o| · (|U→i| − |U→i/o| + E(U→i/o)) / |U→i|
            let term = child
                .score
                .add(&Reward::from(defined - size))
                .mul(&Reward::from(size))
                .div(&Reward::from(defined));
            total = total.add(&term);
            children.insert(o, child);
        }
        if best.as_ref().is_none_or(|(_, r, _)| total > *r) {
            best = Some((i, total, children));
        }
    }
    match best {
        None => AdsNode::leaf(u),
        Some((i, score, children)) => AdsNode {
            states: u,
            input: Some(i),
            children,
            score,
        },
    }
}

/// Resets the system, feeds `prefix`, then walks `ads` along the outputs
/// actually observed. Stops at a leaf or at an output the decision tree
/// does not expect. Returns the complete trace.
pub fn run_adaptive_query<T: Teacher + ?Sized>(
    teacher: &mut T,
    prefix: &[Input],
    ads: &AdsNode,
) -> (Vec<Input>, Vec<Output>) {
    teacher.reset();
    let mut inputs = prefix.to_vec();
    let mut outputs: Vec<Output> = prefix.iter().map(|&i| teacher.step(i)).collect();
    let mut at = ads;
    while let Some(i) = at.input {
        let o = teacher.step(i);
        inputs.push(i);
        outputs.push(o);
        match at.child(o) {
            Some(next) => at = next,
            None => break,
        }
    }
    (inputs, outputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{ads_example_machine, ads_example_tree, example_tree};
    use crate::oracle::{Counters, SimulatedTeacher};

    #[test]
    fn ads_example_reward_is_four() {
        let (tree, _) = ads_example_tree();
        let basis: Vec<Node> = (0..5).map(Node).collect();
        assert_eq!(ads_expected_reward(&tree, &basis), Reward::from_integer(4));
    }

    #[test]
    fn ads_example_decision_tree_shape() {
        let (tree, _) = ads_example_tree();
        let ads = build_ads(&tree, &(0..5).map(Node).collect::<Vec<_>>());
        let (a, b) = (Input(0), Input(1));
        assert_eq!(ads.input, Some(a));
        let zero = ads.child(Output(0)).unwrap();
        let one = ads.child(Output(1)).unwrap();
        let two = ads.child(Output(2)).unwrap();
        assert_eq!(zero.input, Some(a));
        assert_eq!(one.input, Some(b));
        assert!(two.is_leaf());
        assert_eq!(two.states.len(), 1);
        assert_eq!(ads.children.len(), 3);
        // four leaves below the two inner nodes, one per remaining state
        for inner in [zero, one] {
            assert_eq!(inner.children.len(), 2);
            assert!(inner
                .children
                .values()
                .all(|c| c.is_leaf() && c.states.len() == 1));
        }
    }

    #[test]
    fn singleton_and_empty_sets_are_leaves() {
        let (tree, _) = ads_example_tree();
        assert!(build_ads(&tree, &[Node(0)]).is_leaf());
        assert!(build_ads(&tree, &[]).is_leaf());
        assert!(ads_expected_reward(&tree, &[Node(2)]).is_zero());
    }

    #[test]
    fn states_without_transitions_score_zero() {
        let (tree, _) = example_tree();
        // t1, t4, t5 are leaves of the fig. 1 tree
        let ads = build_ads(&tree, &[Node(1), Node(4), Node(5)]);
        assert!(ads.is_leaf());
        assert!(ads.score.is_zero());
    }

    #[test]
    fn apart_states_have_positive_reward() {
        let (tree, _) = example_tree();
        assert!(ads_expected_reward(&tree, &[Node(0), Node(2)]) > Reward::zero());
    }

    #[test]
    fn reward_falls_back_to_bignum() {
        let huge = Reward::Small(Ratio::new(u128::MAX - 1, 3));
        let sum = huge.add(&huge);
        assert!(matches!(sum, Reward::Big(_)));
        assert!(sum > huge);
        let back = sum.div(&Reward::from_integer(2));
        assert_eq!(back, huge);
    }

    #[test]
    fn adaptive_query_on_ads_example() {
        let (tree, _) = ads_example_tree();
        let ads = build_ads(&tree, &(0..5).map(Node).collect::<Vec<_>>());
        let mut teacher = SimulatedTeacher::exact(ads_example_machine()).unwrap();
        let prefix = tree.access(Node(5));
        assert_eq!(ads_example_machine().show_inputs(&prefix), "b b b b a");
        let (ins, outs) = run_adaptive_query(&mut teacher, &prefix, &ads);
        assert_eq!(ins.len(), outs.len());
        assert_eq!(ins.len(), prefix.len() + 2);
        assert_eq!(
            teacher.learning_cost(),
            Counters {
                resets: 1,
                symbols: 7
            }
        );
    }

    #[test]
    fn adaptive_query_with_leaf_is_prefix_only() {
        let (tree, _) = ads_example_tree();
        let ads = build_ads(&tree, &[Node(3)]);
        let mut teacher = SimulatedTeacher::exact(ads_example_machine()).unwrap();
        let (ins, _) = run_adaptive_query(&mut teacher, &[Input(1)], &ads);
        assert_eq!(ins, vec![Input(1)]);
    }
}
