use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EqAnswer, EqOracleConfig, OracleError, SulSession};
use crate::mealy::{separating_word, Input, MealyMachine, State};

/// Randomized conformance testing in the style of a state cover followed by
/// a random infix and a distinguishing suffix.
///
/// Each test word is `access(q) · infix · suffix` where `q` is a uniformly
/// chosen hypothesis state, the infix length is drawn as
/// `U(0..=extra_states) + U(0..=infix_length)` and the suffix is a shortest
/// word separating a random pair of hypothesis states.
#[derive(Clone, Debug)]
pub struct RandomWalkOracle {
    config: EqOracleConfig,
    rng: ChaCha8Rng,
}

impl RandomWalkOracle {
    pub fn new(config: EqOracleConfig) -> Self {
        Self {
            config,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
        }
    }

    pub fn find_counterexample(
        &mut self,
        sul: &mut SulSession,
        hyp: &MealyMachine,
    ) -> Result<EqAnswer, OracleError> {
        hyp.require_complete()?;
        let access: Vec<Vec<Input>> = hyp.access_sequences().into_iter().flatten().collect();
        let suffixes = separating_suffixes(hyp)?;
        let k = hyp.num_inputs() as u32;

        for _ in 0..self.config.budget {
            let mut word = access.choose(&mut self.rng).cloned().unwrap_or_default();
            let len = self.rng.gen_range(0..=self.config.extra_states)
                + self.rng.gen_range(0..=self.config.infix_length);
            word.extend((0..len).map(|_| Input(self.rng.gen_range(0..k))));
            if let Some(suffix) = suffixes.choose(&mut self.rng) {
                word.extend_from_slice(suffix);
            }
            if let Some(cex) = self.test(sul, hyp, &word) {
                return Ok(EqAnswer::Counterexample(cex));
            }
        }
        log::warn!(
            "no counterexample within {} tests; accepting hypothesis approximately",
            self.config.budget
        );
        Ok(EqAnswer::Yes { approximate: true })
    }

    /// Runs one test, stopping at the first output mismatch; returns the
    /// prefix up to and including the mismatching input.
    fn test(&self, sul: &mut SulSession, hyp: &MealyMachine, word: &[Input]) -> Option<Vec<Input>> {
        sul.reset();
        let mut state = hyp.initial();
        for (n, &i) in word.iter().enumerate() {
            let actual = sul.step(i);
            let (expected, next) = hyp.step(state, i).expect("complete");
            if sul.machine().outputs().name(actual.0) != hyp.outputs().name(expected.0) {
                return Some(word[..=n].to_vec());
            }
            state = next;
        }
        None
    }
}

/// Distinct shortest separating words for all pairs of hypothesis states.
fn separating_suffixes(hyp: &MealyMachine) -> Result<Vec<Vec<Input>>, OracleError> {
    let mut out: Vec<Vec<Input>> = Vec::new();
    let n = hyp.num_states() as u32;
    for a in 0..n {
        for b in a + 1..n {
            if let Some(w) = separating_word(hyp, State(a), hyp, State(b), None)? {
                if !out.contains(&w) {
                    out.push(w);
                }
            }
        }
    }
    Ok(out)
}
