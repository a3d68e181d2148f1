use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! index_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }

            #[inline]
            pub fn from_index(index: usize) -> Self {
                Self(u32::try_from(index).expect("index exceeds u32 range"))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

index_type!(
    /// Interned input symbol.
    Input
);
index_type!(
    /// Interned output symbol.
    Output
);
index_type!(
    /// State of a [`MealyMachine`](super::MealyMachine).
    State
);

/// Bijective interning table between symbol names and dense indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    names: Vec<String>,
    lookup: HashMap<String, u32>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut table = Self::new();
        for name in names {
            table.intern(name);
        }
        table
    }

    /// Returns the index of `name`, adding it if it is new.
    pub fn intern(&mut self, name: impl Into<String>) -> u32 {
        let name = name.into();
        if let Some(&idx) = self.lookup.get(&name) {
            return idx;
        }
        let idx = u32::try_from(self.names.len()).expect("symbol table overflow");
        self.lookup.insert(name.clone(), idx);
        self.names.push(name);
        idx
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, idx: u32) -> &str {
        &self.names[idx as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn input(&self, name: &str) -> Option<Input> {
        self.get(name).map(Input)
    }

    pub fn output(&self, name: &str) -> Option<Output> {
        self.get(name).map(Output)
    }

    /// Parses a whitespace separated word of input names.
    pub fn parse_inputs(&self, word: &str) -> Option<Vec<Input>> {
        word.split_whitespace().map(|s| self.input(s)).collect()
    }

    /// Parses a whitespace separated word of output names.
    pub fn parse_outputs(&self, word: &str) -> Option<Vec<Output>> {
        word.split_whitespace().map(|s| self.output(s)).collect()
    }

    pub fn render_inputs(&self, word: &[Input]) -> String {
        self.render(word.iter().map(|i| i.0))
    }

    pub fn render_outputs(&self, word: &[Output]) -> String {
        self.render(word.iter().map(|o| o.0))
    }

    fn render(&self, word: impl Iterator<Item = u32>) -> String {
        word.map(|i| self.name(i)).collect::<Vec<_>>().join(" ")
    }
}
