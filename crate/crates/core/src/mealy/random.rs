use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::equivalence::equivalence_classes;
use super::symbols::{Input, Output, State, SymbolTable};
use super::{MealyError, MealyMachine};

/// Rejection-sampling cap of [`random_machine`].
pub const MAX_ATTEMPTS: usize = 10_000;

/// Input names used by generated machines: `a`..`z`, then `i26`, `i27`, ...
pub fn default_input_names(k: usize) -> SymbolTable {
    SymbolTable::from_names((0..k).map(|i| {
        if i < 26 {
            char::from(b'a' + i as u8).to_string()
        } else {
            format!("i{i}")
        }
    }))
}

/// Draws a complete, reachable and minimal machine with exactly `n` states,
/// `k` inputs and outputs from a pool of `p` symbols.
///
/// A random spanning tree rooted at the initial state makes every state
/// reachable; all remaining transitions and every output are uniform.
/// Candidates that are not minimal are rejected.
pub fn random_machine(n: usize, k: usize, p: usize, seed: u64) -> Result<MealyMachine, MealyError> {
    if n == 0 || k == 0 || p < 2 {
        return Err(MealyError::InvalidParameters(format!(
            "need n >= 1, k >= 1, p >= 2 (got n={n}, k={k}, p={p})"
        )));
    }
    sample(n, k, p, seed, MAX_ATTEMPTS)
}

fn sample(
    n: usize,
    k: usize,
    p: usize,
    seed: u64,
    attempts: usize,
) -> Result<MealyMachine, MealyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..attempts {
        let candidate = draw(n, k, p, &mut rng);
        let classes = equivalence_classes(&candidate)?;
        if classes.iter().max().map_or(0, |c| c + 1) == n {
            return Ok(candidate);
        }
    }
    Err(MealyError::GaveUp { attempts })
}

fn draw(n: usize, k: usize, p: usize, rng: &mut ChaCha8Rng) -> MealyMachine {
    let outputs = SymbolTable::from_names((0..p).map(|o| format!("o{o}")));
    let mut m = MealyMachine::new(default_input_names(k), outputs);
    for q in 0..n {
        m.add_state(format!("s{q}"));
    }
    let mut targets: Vec<Option<usize>> = vec![None; n * k];
    // states in random discovery order, state 0 first
    let mut order: Vec<usize> = (1..n).collect();
    order.shuffle(rng);
    let mut discovered = vec![0usize];
    for &q in &order {
        let open: Vec<usize> = discovered
            .iter()
            .flat_map(|&s| (0..k).map(move |i| s * k + i))
            .filter(|&slot| targets[slot].is_none())
            .collect();
        let slot = open[rng.gen_range(0..open.len())];
        targets[slot] = Some(q);
        discovered.push(q);
    }
    for (slot, target) in targets.iter().enumerate() {
        let to = target.unwrap_or_else(|| rng.gen_range(0..n));
        let out = Output::from_index(rng.gen_range(0..p));
        m.set_transition(
            State::from_index(slot / k),
            Input::from_index(slot % k),
            out,
            State::from_index(to),
        );
    }
    m
}
