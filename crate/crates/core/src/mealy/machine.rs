use std::collections::VecDeque;

use super::symbols::{Input, Output, State, SymbolTable};
use super::MealyError;

/// Result of running an input word from some state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferResult {
    pub outputs: Vec<Output>,
    pub end: State,
    /// Number of input symbols actually executed before running into an
    /// undefined transition (equals the word length on a full run).
    pub consumed: usize,
}

impl TransferResult {
    pub fn is_complete_run(&self, word: &[Input]) -> bool {
        self.consumed == word.len()
    }
}

/// A possibly partial deterministic Mealy machine.
///
/// Transitions live in a dense `state * inputs + input` table, each entry
/// holding the output together with the successor, so the output function and
/// the transition function are always defined on the same domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MealyMachine {
    inputs: SymbolTable,
    outputs: SymbolTable,
    state_names: Vec<String>,
    initial: State,
    trans: Vec<Option<(Output, State)>>,
}

impl MealyMachine {
    /// Creates a machine without states. Add at least one state before use;
    /// the first state added becomes the initial state.
    pub fn new(inputs: SymbolTable, outputs: SymbolTable) -> Self {
        Self {
            inputs,
            outputs,
            state_names: Vec::new(),
            initial: State(0),
            trans: Vec::new(),
        }
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> State {
        let state = State::from_index(self.state_names.len());
        self.state_names.push(name.into());
        self.trans
            .extend(std::iter::repeat_n(None, self.inputs.len()));
        state
    }

    pub fn set_initial(&mut self, state: State) {
        assert!(state.index() < self.num_states(), "unknown state {state}");
        self.initial = state;
    }

    pub fn set_transition(&mut self, from: State, input: Input, output: Output, to: State) {
        assert!(to.index() < self.num_states(), "unknown state {to}");
        assert!(
            output.index() < self.outputs.len(),
            "unknown output {output}"
        );
        let slot = self.slot(from, input);
        self.trans[slot] = Some((output, to));
    }

    /// Interns an output name, growing the output alphabet if needed.
    pub fn intern_output(&mut self, name: impl Into<String>) -> Output {
        Output(self.outputs.intern(name))
    }

    #[inline]
    fn slot(&self, state: State, input: Input) -> usize {
        debug_assert!(input.index() < self.inputs.len());
        state.index() * self.inputs.len() + input.index()
    }

    pub fn inputs(&self) -> &SymbolTable {
        &self.inputs
    }

    pub fn outputs(&self) -> &SymbolTable {
        &self.outputs
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn initial(&self) -> State {
        self.initial
    }

    pub fn states(&self) -> impl Iterator<Item = State> {
        (0..self.num_states()).map(State::from_index)
    }

    pub fn input_symbols(&self) -> impl Iterator<Item = Input> {
        (0..self.num_inputs()).map(Input::from_index)
    }

    pub fn state_name(&self, state: State) -> &str {
        &self.state_names[state.index()]
    }

    pub fn state_by_name(&self, name: &str) -> Option<State> {
        self.state_names
            .iter()
            .position(|n| n == name)
            .map(State::from_index)
    }

    #[inline]
    pub fn step(&self, state: State, input: Input) -> Option<(Output, State)> {
        self.trans[self.slot(state, input)]
    }

    pub fn output(&self, state: State, input: Input) -> Option<Output> {
        self.step(state, input).map(|(o, _)| o)
    }

    pub fn successor(&self, state: State, input: Input) -> Option<State> {
        self.step(state, input).map(|(_, q)| q)
    }

    /// True iff every state has a transition for every input.
    pub fn is_complete(&self) -> bool {
        self.num_states() > 0 && self.trans.iter().all(Option::is_some)
    }

    pub(crate) fn require_complete(&self) -> Result<(), MealyError> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(MealyError::Partial)
        }
    }

    /// Runs `word` from `start`, stopping at the first undefined transition.
    pub fn transfer(&self, start: State, word: &[Input]) -> TransferResult {
        let mut outputs = Vec::with_capacity(word.len());
        let mut state = start;
        for &input in word {
            match self.step(state, input) {
                Some((o, next)) => {
                    outputs.push(o);
                    state = next;
                }
                None => break,
            }
        }
        let consumed = outputs.len();
        TransferResult {
            outputs,
            end: state,
            consumed,
        }
    }

    /// Output word from the initial state, if fully defined.
    pub fn output_word(&self, word: &[Input]) -> Option<Vec<Output>> {
        let run = self.transfer(self.initial, word);
        run.is_complete_run(word).then_some(run.outputs)
    }

    /// State reached from the initial state, if fully defined.
    pub fn reach(&self, word: &[Input]) -> Option<State> {
        let run = self.transfer(self.initial, word);
        run.is_complete_run(word).then_some(run.end)
    }

    /// States reachable from the initial state, in BFS order.
    pub fn reachable_states(&self) -> Vec<State> {
        if self.num_states() == 0 {
            return Vec::new();
        }
        let mut seen = vec![false; self.num_states()];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial.index()] = true;
        while let Some(q) = queue.pop_front() {
            order.push(q);
            for i in self.input_symbols() {
                if let Some((_, p)) = self.step(q, i) {
                    if !seen[p.index()] {
                        seen[p.index()] = true;
                        queue.push_back(p);
                    }
                }
            }
        }
        order
    }

    /// Copy of the machine restricted to reachable states, plus the names of
    /// the states that were dropped.
    pub fn restrict_to_reachable(&self) -> (MealyMachine, Vec<String>) {
        let reachable = self.reachable_states();
        let mut renumber = vec![None; self.num_states()];
        let mut out = MealyMachine::new(self.inputs.clone(), self.outputs.clone());
        // keep the original relative order of states
        let mut kept: Vec<State> = reachable.clone();
        kept.sort();
        for &q in &kept {
            renumber[q.index()] = Some(out.add_state(self.state_name(q)));
        }
        for &q in &kept {
            for i in self.input_symbols() {
                if let Some((o, p)) = self.step(q, i) {
                    let from = renumber[q.index()].unwrap();
                    let to = renumber[p.index()].unwrap();
                    out.set_transition(from, i, o, to);
                }
            }
        }
        if let Some(init) = renumber.get(self.initial.index()).copied().flatten() {
            out.set_initial(init);
        }
        let dropped = self
            .states()
            .filter(|q| renumber[q.index()].is_none())
            .map(|q| self.state_name(q).to_string())
            .collect();
        (out, dropped)
    }

    /// Shortest access sequence for every reachable state (BFS, inputs in
    /// ascending order).
    pub fn access_sequences(&self) -> Vec<Option<Vec<Input>>> {
        let mut access: Vec<Option<Vec<Input>>> = vec![None; self.num_states()];
        if self.num_states() == 0 {
            return access;
        }
        access[self.initial.index()] = Some(Vec::new());
        let mut queue = VecDeque::from([self.initial]);
        while let Some(q) = queue.pop_front() {
            for i in self.input_symbols() {
                if let Some((_, p)) = self.step(q, i) {
                    if access[p.index()].is_none() {
                        let mut word = access[q.index()].clone().unwrap();
                        word.push(i);
                        access[p.index()] = Some(word);
                        queue.push_back(p);
                    }
                }
            }
        }
        access
    }

    /// Renders an input word using this machine's symbol names.
    pub fn show_inputs(&self, word: &[Input]) -> String {
        self.inputs.render_inputs(word)
    }

    pub fn show_outputs(&self, word: &[Output]) -> String {
        self.outputs.render_outputs(word)
    }
}
