//! Mealy machines: representation, semantics, equivalence, minimization,
//! random generation and DOT I/O.

mod dot;
mod equivalence;
mod machine;
mod random;
mod symbols;

use thiserror::Error;

pub use dot::{parse_dot, parse_dot_with_warnings, render_dot, DotError};
pub use equivalence::{
    bisimilar, equivalence_classes, minimize, semantics_equal, separating_word, Equivalence,
};
pub use machine::{MealyMachine, TransferResult};
pub use random::{default_input_names, random_machine, MAX_ATTEMPTS};
pub use symbols::{Input, Output, State, SymbolTable};

pub(crate) use dot::quote as dot_quote;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MealyError {
    #[error("operation requires a complete machine")]
    Partial,
    #[error("machines have different input alphabets")]
    AlphabetMismatch,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("no reachable minimal machine found after {attempts} attempts")]
    GaveUp { attempts: usize },
}
