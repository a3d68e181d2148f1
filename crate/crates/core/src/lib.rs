//! Active learning of Mealy machines by growing an observation tree and an
//! apartness relation between its states.

pub mod fixtures;
pub mod learner;
pub mod mealy;
pub mod obstree;
pub mod oracle;
