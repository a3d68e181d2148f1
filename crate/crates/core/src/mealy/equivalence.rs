use std::collections::{HashMap, VecDeque};

use super::symbols::{Input, Output, State};
use super::{MealyError, MealyMachine};

/// Outcome of comparing two complete machines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    /// A shortest word on which the two machines produce different outputs.
    Counterexample(Vec<Input>),
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent)
    }
}

fn check_inputs(m1: &MealyMachine, m2: &MealyMachine) -> Result<(), MealyError> {
    if m1.inputs() != m2.inputs() {
        return Err(MealyError::AlphabetMismatch);
    }
    Ok(())
}

/// Maps each output index of `m2` onto the index of the same name in `m1`.
fn output_translation(m1: &MealyMachine, m2: &MealyMachine) -> Vec<Option<Output>> {
    if m1.outputs() == m2.outputs() {
        return (0..m2.outputs().len())
            .map(|o| Some(Output::from_index(o)))
            .collect();
    }
    m2.outputs()
        .names()
        .map(|name| m1.outputs().output(name))
        .collect()
}

/// Breadth-first search through the product of two complete machines starting
/// at `(q1, q2)`. Returns a shortest separating word of length at most
/// `depth` (unbounded when `None`).
pub fn separating_word(
    m1: &MealyMachine,
    q1: State,
    m2: &MealyMachine,
    q2: State,
    depth: Option<usize>,
) -> Result<Option<Vec<Input>>, MealyError> {
    m1.require_complete()?;
    m2.require_complete()?;
    check_inputs(m1, m2)?;
    let translate = output_translation(m1, m2);
    let n2 = m2.num_states();
    let pair = |a: State, b: State| a.index() * n2 + b.index();

    // parent[pair] = (previous pair, input)
    let mut parent: HashMap<usize, (usize, Input)> = HashMap::new();
    let mut seen = vec![false; m1.num_states() * n2];
    let mut queue = VecDeque::from([(q1, q2, 0usize)]);
    seen[pair(q1, q2)] = true;

    let rebuild = |mut at: usize, last: Input, parent: &HashMap<usize, (usize, Input)>| {
        let mut word = vec![last];
        while let Some(&(prev, i)) = parent.get(&at) {
            word.push(i);
            at = prev;
        }
        word.reverse();
        word
    };

    while let Some((a, b, dist)) = queue.pop_front() {
        if depth.is_some_and(|d| dist >= d) {
            continue;
        }
        for i in m1.input_symbols() {
            let (o1, a2) = m1.step(a, i).expect("complete");
            let (o2, b2) = m2.step(b, i).expect("complete");
            if translate[o2.index()] != Some(o1) {
                return Ok(Some(rebuild(pair(a, b), i, &parent)));
            }
            let next = pair(a2, b2);
            if !seen[next] {
                seen[next] = true;
                parent.insert(next, (pair(a, b), i));
                queue.push_back((a2, b2, dist + 1));
            }
        }
    }
    Ok(None)
}

/// True iff no word of length at most `depth` separates `q1` and `q2`.
/// With `depth >= |Q1|·|Q2|` the answer is exact semantic equality, since
/// every pair of the product is reached by a word shorter than that.
pub fn semantics_equal(
    m1: &MealyMachine,
    q1: State,
    m2: &MealyMachine,
    q2: State,
    depth: usize,
) -> Result<bool, MealyError> {
    Ok(separating_word(m1, q1, m2, q2, Some(depth))?.is_none())
}

/// Decides whether a bisimulation relates the initial states of both
/// machines; otherwise yields a shortest counterexample.
pub fn bisimilar(m1: &MealyMachine, m2: &MealyMachine) -> Result<Equivalence, MealyError> {
    Ok(
        match separating_word(m1, m1.initial(), m2, m2.initial(), None)? {
            None => Equivalence::Equivalent,
            Some(word) => Equivalence::Counterexample(word),
        },
    )
}

/// Partition of the states of a complete machine into equivalence classes.
/// Returns the class index of every state; classes are numbered in order of
/// their smallest member.
pub fn equivalence_classes(m: &MealyMachine) -> Result<Vec<usize>, MealyError> {
    m.require_complete()?;
    let n = m.num_states();
    let count = |class: &[usize]| class.iter().max().map_or(0, |c| c + 1);
    let canonical = |signatures: Vec<Vec<u32>>| -> Vec<usize> {
        let mut ids: HashMap<Vec<u32>, usize> = HashMap::new();
        signatures
            .into_iter()
            .map(|sig| {
                let next = ids.len();
                *ids.entry(sig).or_insert(next)
            })
            .collect()
    };

    let mut class = canonical(
        m.states()
            .map(|q| {
                m.input_symbols()
                    .map(|i| m.output(q, i).unwrap().0)
                    .collect()
            })
            .collect(),
    );
    loop {
        let refined = canonical(
            m.states()
                .map(|q| {
                    let mut sig = vec![class[q.index()] as u32];
                    sig.extend(
                        m.input_symbols()
                            .map(|i| class[m.successor(q, i).unwrap().index()] as u32),
                    );
                    sig
                })
                .collect(),
        );
        // signatures include the old class, so an unchanged count means an
        // unchanged partition
        let stable = count(&refined) == count(&class);
        class = refined;
        if stable || count(&class) == n {
            break;
        }
    }
    Ok(class)
}

/// Minimal machine with one state per equivalence class of reachable states.
/// Each class keeps the name of its smallest member.
pub fn minimize(m: &MealyMachine) -> Result<MealyMachine, MealyError> {
    m.require_complete()?;
    let (m, _) = m.restrict_to_reachable();
    let class = equivalence_classes(&m)?;
    let count = class.iter().max().map_or(0, |c| c + 1);
    let mut representative = vec![None; count];
    for q in m.states() {
        representative[class[q.index()]].get_or_insert(q);
    }
    let mut out = MealyMachine::new(m.inputs().clone(), m.outputs().clone());
    for rep in &representative {
        out.add_state(m.state_name(rep.unwrap()));
    }
    for (c, rep) in representative.iter().enumerate() {
        let rep = rep.unwrap();
        for i in m.input_symbols() {
            let (o, p) = m.step(rep, i).unwrap();
            out.set_transition(
                State::from_index(c),
                i,
                o,
                State::from_index(class[p.index()]),
            );
        }
    }
    out.set_initial(State::from_index(class[m.initial().index()]));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_machine;
    use crate::mealy::random_machine;

    /// Brute force: compare outputs on every word up to `len`.
    fn brute_separates(
        m1: &MealyMachine,
        q1: State,
        m2: &MealyMachine,
        q2: State,
        len: usize,
    ) -> bool {
        let k = m1.num_inputs() as u32;
        let mut words: Vec<Vec<Input>> = vec![vec![]];
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &words {
                for i in 0..k {
                    let mut w2 = w.clone();
                    w2.push(Input(i));
                    let a = m1.transfer(q1, &w2).outputs;
                    let b = m2.transfer(q2, &w2).outputs;
                    let an: Vec<_> = a.iter().map(|o| m1.outputs().name(o.0)).collect();
                    let bn: Vec<_> = b.iter().map(|o| m2.outputs().name(o.0)).collect();
                    if an != bn {
                        return true;
                    }
                    next.push(w2);
                }
            }
            words = next;
        }
        false
    }

    #[test]
    fn reflexive() {
        let m = example_machine();
        for q in m.states() {
            assert!(semantics_equal(&m, q, &m, q, 9).unwrap());
        }
    }

    #[test]
    fn example_q0_q1_differ() {
        let m = example_machine();
        let q0 = m.state_by_name("q0").unwrap();
        let q1 = m.state_by_name("q1").unwrap();
        assert!(brute_separates(&m, q0, &m, q1, 3));
        assert!(!semantics_equal(&m, q0, &m, q1, 9).unwrap());
        let w = separating_word(&m, q0, &m, q1, None).unwrap().unwrap();
        assert_eq!(m.show_inputs(&w), "b a");
    }

    #[test]
    fn isomorphic_copy_is_equivalent() {
        let m = example_machine();
        // reverse the state numbering
        let mut copy = MealyMachine::new(m.inputs().clone(), m.outputs().clone());
        let n = m.num_states();
        let mut ids = vec![State(0); n];
        for q in (0..n).rev() {
            ids[q] = copy.add_state(format!("c{q}"));
        }
        for q in m.states() {
            for i in m.input_symbols() {
                let (o, p) = m.step(q, i).unwrap();
                copy.set_transition(ids[q.index()], i, o, ids[p.index()]);
            }
        }
        copy.set_initial(ids[m.initial().index()]);
        assert!(bisimilar(&m, &copy).unwrap().is_equivalent());
    }

    #[test]
    fn flipped_output_is_found() {
        let m = random_machine(6, 2, 3, 1).unwrap();
        let mut flipped = m.clone();
        let q = State(4);
        let i = Input(1);
        let (o, p) = m.step(q, i).unwrap();
        flipped.set_transition(q, i, Output((o.0 + 1) % 3), p);
        match bisimilar(&m, &flipped).unwrap() {
            Equivalence::Counterexample(w) => {
                assert_ne!(m.output_word(&w), flipped.output_word(&w));
                // the last step must take the flipped transition
                let before = m.reach(&w[..w.len() - 1]).unwrap();
                assert_eq!((before, *w.last().unwrap()), (q, i));
            }
            Equivalence::Equivalent => panic!("flip not detected"),
        }
    }

    #[test]
    fn agrees_with_brute_force_on_small_machines() {
        for seed in 0..40u64 {
            let n1 = 1 + (seed % 4) as usize;
            let n2 = 1 + (seed % 3) as usize;
            let m1 = random_machine(n1, 2, 2, seed).unwrap();
            let m2 = random_machine(n2, 2, 2, seed + 100).unwrap();
            let bound = n1 * n2;
            let verdict = bisimilar(&m1, &m2).unwrap();
            let brute = brute_separates(&m1, m1.initial(), &m2, m2.initial(), bound);
            assert_eq!(!verdict.is_equivalent(), brute, "seed {seed}");
        }
    }

    #[test]
    fn minimize_merges_duplicate() {
        // copy a state and divert one of its incoming edges to the copy,
        // keeping both reachable
        let mut checked = 0;
        for seed in 0..50 {
            let m = random_machine(5, 2, 3, seed).unwrap();
            let target = State(2);
            let incoming: Vec<(State, Input)> = m
                .states()
                .filter(|&q| q != target)
                .flat_map(|q| m.input_symbols().map(move |i| (q, i)))
                .filter(|&(q, i)| m.successor(q, i) == Some(target))
                .collect();
            if incoming.len() < 2 {
                continue;
            }
            let mut dup = m.clone();
            let copy = dup.add_state("copy");
            for i in m.input_symbols() {
                let (o, p) = m.step(target, i).unwrap();
                dup.set_transition(copy, i, o, p);
            }
            let (from, input) = incoming[0];
            let (o, _) = m.step(from, input).unwrap();
            dup.set_transition(from, input, o, copy);
            if dup.restrict_to_reachable().0.num_states() != 6 {
                continue;
            }
            let min = minimize(&dup).unwrap();
            assert_eq!(min.num_states(), 5);
            assert!(bisimilar(&dup, &min).unwrap().is_equivalent());
            checked += 1;
        }
        assert!(checked > 5);
    }

    #[test]
    fn minimize_example_keeps_three_states() {
        let m = example_machine();
        let min = minimize(&m).unwrap();
        assert_eq!(min.num_states(), 3);
        // brute-force pairwise distinctness
        for a in m.states() {
            for b in m.states() {
                assert_eq!(a == b, !brute_separates(&m, a, &m, b, 4));
            }
        }
        assert!(bisimilar(&m, &min).unwrap().is_equivalent());
        let again = minimize(&min).unwrap();
        assert_eq!(again, min);
    }

    #[test]
    fn partial_machines_are_rejected() {
        let mut m = example_machine();
        m.add_state("hole");
        assert!(matches!(bisimilar(&m, &m), Err(MealyError::Partial)));
        assert!(matches!(minimize(&m), Err(MealyError::Partial)));
    }
}
