use serde::{Deserialize, Serialize};

use crate::mealy::{Input, MealyError, MealyMachine, Output, State};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub resets: u64,
    pub symbols: u64,
}

/// Which counters a session charges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Phase {
    #[default]
    Learning,
    Testing,
}

/// A hidden complete machine driven through `reset` and `step`.
#[derive(Clone, Debug)]
pub struct SulSession {
    machine: MealyMachine,
    current: State,
    phase: Phase,
    learning: Counters,
    testing: Counters,
}

impl SulSession {
    pub fn new(machine: MealyMachine) -> Result<Self, MealyError> {
        machine.require_complete()?;
        Ok(Self {
            current: machine.initial(),
            machine,
            phase: Phase::Learning,
            learning: Counters::default(),
            testing: Counters::default(),
        })
    }

    pub fn machine(&self) -> &MealyMachine {
        &self.machine
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    fn counters(&mut self) -> &mut Counters {
        match self.phase {
            Phase::Learning => &mut self.learning,
            Phase::Testing => &mut self.testing,
        }
    }

    pub fn reset(&mut self) {
        self.counters().resets += 1;
        self.current = self.machine.initial();
    }

    pub fn step(&mut self, input: Input) -> Output {
        self.counters().symbols += 1;
        let (o, next) = self
            .machine
            .step(self.current, input)
            .expect("complete machine");
        self.current = next;
        o
    }

    pub fn output_query(&mut self, word: &[Input]) -> Vec<Output> {
        self.reset();
        word.iter().map(|&i| self.step(i)).collect()
    }

    pub fn learning(&self) -> Counters {
        self.learning
    }

    pub fn testing(&self) -> Counters {
        self.testing
    }
}
