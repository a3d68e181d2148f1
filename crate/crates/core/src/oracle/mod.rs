//! The teacher side of the learning game: a simulated system under learning
//! with reset/step semantics and query accounting, plus equivalence oracles.

mod random_walk;
mod sul;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mealy::{bisimilar, Equivalence, Input, MealyError, MealyMachine, Output, SymbolTable};

pub use random_walk::RandomWalkOracle;
pub use sul::{Counters, Phase, SulSession};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Mealy(#[from] MealyError),
    #[error("counterexample {0:?} does not separate hypothesis and system")]
    BogusCounterexample(Vec<Input>),
}

/// Answer to an equivalence query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqAnswer {
    /// Hypothesis accepted. `approximate` is set when acceptance only means
    /// that a finite test budget found no difference.
    Yes {
        approximate: bool,
    },
    Counterexample(Vec<Input>),
}

/// Everything the learner may ask of the teacher.
pub trait Teacher {
    fn inputs(&self) -> &SymbolTable;

    /// Output alphabet observed so far.
    fn outputs(&self) -> &SymbolTable;

    fn reset(&mut self);

    fn step(&mut self, input: Input) -> Output;

    /// One reset followed by the inputs of `word`.
    fn output_query(&mut self, word: &[Input]) -> Vec<Output> {
        self.reset();
        word.iter().map(|&i| self.step(i)).collect()
    }

    fn equivalence_query(&mut self, hypothesis: &MealyMachine) -> Result<EqAnswer, OracleError>;

    /// Learning-phase resets and symbols spent so far.
    fn learning_cost(&self) -> Counters;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    /// White-box product search against the hidden machine.
    Exact,
    /// Randomized conformance testing.
    RandomWalk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqOracleConfig {
    pub kind: OracleKind,
    pub extra_states: usize,
    pub infix_length: usize,
    /// Maximum number of test words per equivalence query.
    pub budget: usize,
    pub seed: u64,
}

impl Default for EqOracleConfig {
    fn default() -> Self {
        Self {
            kind: OracleKind::Exact,
            extra_states: 10,
            infix_length: 10,
            budget: 10_000,
            seed: 0,
        }
    }
}

/// Exact equivalence check of `hypothesis` against the hidden machine; on
/// failure the counterexample is a shortest one.
pub fn exact_equivalence(
    hidden: &MealyMachine,
    hypothesis: &MealyMachine,
) -> Result<EqAnswer, OracleError> {
    Ok(match bisimilar(hidden, hypothesis)? {
        Equivalence::Equivalent => EqAnswer::Yes { approximate: false },
        Equivalence::Counterexample(word) => EqAnswer::Counterexample(word),
    })
}

/// Checks that `word` really separates the two machines (compared by
/// output names).
pub fn separates(hidden: &MealyMachine, hypothesis: &MealyMachine, word: &[Input]) -> bool {
    let names = |m: &MealyMachine| {
        m.output_word(word).map(|w| {
            w.iter()
                .map(|o| m.outputs().name(o.0).to_string())
                .collect::<Vec<_>>()
        })
    };
    names(hidden) != names(hypothesis)
}

/// A teacher backed by a known machine: output queries run on a
/// [`SulSession`], equivalence queries use the configured oracle.
#[derive(Clone, Debug)]
pub struct SimulatedTeacher {
    session: SulSession,
    config: EqOracleConfig,
    random: RandomWalkOracle,
    eq_queries: u64,
}

impl SimulatedTeacher {
    pub fn new(machine: MealyMachine, config: EqOracleConfig) -> Result<Self, OracleError> {
        Ok(Self {
            session: SulSession::new(machine)?,
            random: RandomWalkOracle::new(config),
            config,
            eq_queries: 0,
        })
    }

    pub fn exact(machine: MealyMachine) -> Result<Self, OracleError> {
        Self::new(machine, EqOracleConfig::default())
    }

    pub fn session(&self) -> &SulSession {
        &self.session
    }

    pub fn machine(&self) -> &MealyMachine {
        self.session.machine()
    }

    pub fn equivalence_queries(&self) -> u64 {
        self.eq_queries
    }
}

impl Teacher for SimulatedTeacher {
    fn inputs(&self) -> &SymbolTable {
        self.session.machine().inputs()
    }

    fn outputs(&self) -> &SymbolTable {
        self.session.machine().outputs()
    }

    fn reset(&mut self) {
        self.session.reset();
    }

    fn step(&mut self, input: Input) -> Output {
        self.session.step(input)
    }

    fn equivalence_query(&mut self, hypothesis: &MealyMachine) -> Result<EqAnswer, OracleError> {
        self.eq_queries += 1;
        let answer = match self.config.kind {
            OracleKind::Exact => exact_equivalence(self.session.machine(), hypothesis)?,
            OracleKind::RandomWalk => {
                self.session.set_phase(Phase::Testing);
                let answer = self
                    .random
                    .find_counterexample(&mut self.session, hypothesis);
                self.session.set_phase(Phase::Learning);
                answer?
            }
        };
        if let EqAnswer::Counterexample(word) = &answer {
            if !separates(self.session.machine(), hypothesis, word) {
                return Err(OracleError::BogusCounterexample(word.clone()));
            }
        }
        Ok(answer)
    }

    fn learning_cost(&self) -> Counters {
        self.session.learning()
    }
}
