//! Reading and writing Mealy machines in a small subset of Graphviz DOT.
//!
//! Transitions are edges `src -> dst [label="in/out"]`. The initial state is
//! the target of an edge leaving a node whose name starts with `__start`,
//! falling back to the source of the first transition. Node statements and
//! graph/node/edge attribute statements are accepted and ignored.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::symbols::{Input, Output, State, SymbolTable};
use super::MealyMachine;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DotError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate transition for state {state:?} on input {input:?}")]
    DuplicateTransition {
        line: usize,
        state: String,
        input: String,
    },
    #[error("no states")]
    NoStates,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Arrow,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Eq,
    Semi,
    Comma,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            chars: text.chars().peekable(),
            line: 1,
        }
    }

    fn err(&self, message: impl Into<String>) -> DotError {
        DotError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next();
        if c == Some('\n') {
            self.line += 1;
        }
        c
    }

    fn skip_trivia(&mut self) -> Result<(), DotError> {
        let mut at_line_start = self.line == 1;
        while let Some(&c) = self.chars.peek() {
            match c {
                '\n' => {
                    self.bump();
                    at_line_start = true;
                }
                c if c.is_whitespace() => {
                    self.bump();
                }
                '#' if at_line_start => {
                    while self.chars.peek().is_some_and(|&c| c != '\n') {
                        self.bump();
                    }
                }
                '/' => {
                    let mut ahead = self.chars.clone();
                    ahead.next();
                    match ahead.next() {
                        Some('/') => {
                            while self.chars.peek().is_some_and(|&c| c != '\n') {
                                self.bump();
                            }
                        }
                        Some('*') => {
                            self.bump();
                            self.bump();
                            let mut prev = ' ';
                            loop {
                                match self.bump() {
                                    Some('/') if prev == '*' => break,
                                    Some(c) => prev = c,
                                    None => return Err(self.err("unterminated comment")),
                                }
                            }
                        }
                        _ => return Ok(()),
                    }
                }
                _ => return Ok(()),
            }
        }
        Ok(())
    }

    /// Next token together with the line it starts on.
    fn next_token(&mut self) -> Result<Option<(Tok, usize)>, DotError> {
        self.skip_trivia()?;
        let line = self.line;
        let Some(c) = self.bump() else {
            return Ok(None);
        };
        let tok = match c {
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '=' => Tok::Eq,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '-' if self.chars.peek() == Some(&'>') => {
                self.bump();
                Tok::Arrow
            }
            '-' if self.chars.peek() == Some(&'-') => {
                return Err(self.err("undirected edge '--' in digraph"));
            }
            '"' => {
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('\n') => {}
                            Some(other) => {
                                s.push('\\');
                                s.push(other);
                            }
                            None => return Err(self.err("unterminated string")),
                        },
                        Some(c) => s.push(c),
                        None => return Err(self.err("unterminated string")),
                    }
                }
                Tok::Ident(s)
            }
            c if is_id_char(c) || c == '-' => {
                let mut s = String::from(c);
                while let Some(&c) = self.chars.peek() {
                    if is_id_char(c) {
                        s.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            other => return Err(self.err(format!("unexpected character {other:?}"))),
        };
        Ok(Some((tok, line)))
    }
}

fn is_id_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.'
}

struct RawEdge {
    src: String,
    dst: String,
    label: Option<String>,
    line: usize,
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<(Tok, usize)>,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Result<Option<&Tok>, DotError> {
        if self.peeked.is_none() {
            self.peeked = self.lexer.next_token()?;
        }
        Ok(self.peeked.as_ref().map(|(t, _)| t))
    }

    fn next(&mut self) -> Result<Option<(Tok, usize)>, DotError> {
        match self.peeked.take() {
            Some(t) => Ok(Some(t)),
            None => self.lexer.next_token(),
        }
    }

    fn err_at(&self, line: usize, message: impl Into<String>) -> DotError {
        DotError::Syntax {
            line,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<usize, DotError> {
        match self.next()? {
            Some((tok, line)) if tok == want => Ok(line),
            Some((tok, line)) => {
                Err(self.err_at(line, format!("expected {want:?}, found {tok:?}")))
            }
            None => Err(self
                .lexer
                .err(format!("expected {want:?}, found end of input"))),
        }
    }

    fn ident(&mut self) -> Result<(String, usize), DotError> {
        match self.next()? {
            Some((Tok::Ident(s), line)) => Ok((s, line)),
            Some((tok, line)) => {
                Err(self.err_at(line, format!("expected identifier, found {tok:?}")))
            }
            None => Err(self.lexer.err("expected identifier, found end of input")),
        }
    }

    fn attributes(&mut self) -> Result<Vec<(String, String)>, DotError> {
        let mut attrs = Vec::new();
        while self.peek()? == Some(&Tok::LBracket) {
            self.next()?;
            loop {
                match self.peek()? {
                    Some(Tok::RBracket) => {
                        self.next()?;
                        break;
                    }
                    Some(Tok::Comma) | Some(Tok::Semi) => {
                        self.next()?;
                    }
                    _ => {
                        let (key, _) = self.ident()?;
                        self.expect(Tok::Eq)?;
                        let (value, _) = self.ident()?;
                        attrs.push((key, value));
                    }
                }
            }
        }
        Ok(attrs)
    }

    /// Edges plus every node name in order of first mention.
    fn graph(&mut self) -> Result<(Vec<RawEdge>, Vec<String>), DotError> {
        let mut mentions = Vec::new();
        let (mut kw, mut line) = self.ident()?;
        if kw.eq_ignore_ascii_case("strict") {
            (kw, line) = self.ident()?;
        }
        if !kw.eq_ignore_ascii_case("digraph") {
            return Err(self.err_at(line, format!("expected 'digraph', found {kw:?}")));
        }
        if matches!(self.peek()?, Some(Tok::Ident(_))) {
            self.next()?;
        }
        self.expect(Tok::LBrace)?;
        let mut edges = Vec::new();
        loop {
            let Some((tok, line)) = self.next()? else {
                return Err(self.lexer.err("missing closing '}'"));
            };
            match tok {
                Tok::RBrace => break,
                Tok::Semi => continue,
                Tok::Ident(name) => match self.peek()? {
                    Some(Tok::Arrow) => {
                        self.next()?;
                        let (dst, _) = self.ident()?;
                        if self.peek()? == Some(&Tok::Arrow) {
                            return Err(self.err_at(line, "edge chains are not supported"));
                        }
                        let attrs = self.attributes()?;
                        let label = attrs
                            .into_iter()
                            .find(|(k, _)| k == "label")
                            .map(|(_, v)| v);
                        mentions.push(name.clone());
                        mentions.push(dst.clone());
                        edges.push(RawEdge {
                            src: name,
                            dst,
                            label,
                            line,
                        });
                    }
                    Some(Tok::Eq) => {
                        // graph attribute `key = value`
                        self.next()?;
                        self.ident()?;
                    }
                    _ => {
                        // node or attribute statement
                        self.attributes()?;
                        if !matches!(name.as_str(), "graph" | "node" | "edge") {
                            mentions.push(name);
                        }
                    }
                },
                other => return Err(self.err_at(line, format!("unexpected {other:?}"))),
            }
        }
        if let Some((tok, line)) = self.next()? {
            return Err(self.err_at(line, format!("trailing content after graph: {tok:?}")));
        }
        Ok((edges, mentions))
    }
}

/// Parses a machine from DOT text, dropping unreachable states with a
/// warning. Dropped state names are returned alongside the machine.
pub fn parse_dot_with_warnings(text: &str) -> Result<(MealyMachine, Vec<String>), DotError> {
    let mut parser = Parser {
        lexer: Lexer::new(text),
        peeked: None,
    };
    let (edges, mentions) = parser.graph()?;

    let mut inputs = SymbolTable::new();
    let mut outputs = SymbolTable::new();
    // states are numbered by first mention, but only names used by a
    // transition (or as the initial state) become states
    let mut used: HashMap<&str, bool> = HashMap::new();
    for edge in &edges {
        if !edge.src.starts_with("__start") {
            used.insert(&edge.src, true);
        }
        used.insert(&edge.dst, true);
    }
    let mut state_ids: HashMap<String, usize> = HashMap::new();
    let mut state_names: Vec<String> = Vec::new();
    for name in &mentions {
        if used.contains_key(name.as_str()) && !state_ids.contains_key(name) {
            state_ids.insert(name.clone(), state_names.len());
            state_names.push(name.clone());
        }
    }
    let mut initial: Option<String> = None;
    let mut transitions = Vec::new();
    let mut intern_state = |name: &str| -> usize {
        *state_ids.entry(name.to_string()).or_insert_with(|| {
            state_names.push(name.to_string());
            state_names.len() - 1
        })
    };

    for edge in &edges {
        if edge.src.starts_with("__start") {
            initial.get_or_insert_with(|| edge.dst.clone());
            intern_state(&edge.dst);
            continue;
        }
        let Some(label) = &edge.label else {
            return Err(DotError::Syntax {
                line: edge.line,
                message: format!("edge {} -> {} has no label", edge.src, edge.dst),
            });
        };
        let Some((input, output)) = label.split_once('/') else {
            return Err(DotError::Syntax {
                line: edge.line,
                message: format!("label {label:?} is not of the form \"input/output\""),
            });
        };
        let (input, output) = (input.trim(), output.trim());
        if input.is_empty() || output.is_empty() {
            return Err(DotError::Syntax {
                line: edge.line,
                message: format!("label {label:?} has an empty input or output"),
            });
        }
        let src = intern_state(&edge.src);
        let dst = intern_state(&edge.dst);
        let i = inputs.intern(input);
        let o = outputs.intern(output);
        transitions.push((src, i, o, dst, edge.line));
    }

    if state_names.is_empty() {
        return Err(DotError::NoStates);
    }
    let initial = match initial {
        Some(name) => state_ids[&name],
        None => transitions.first().map_or(0, |t| t.0),
    };

    let mut m = MealyMachine::new(inputs, outputs);
    for name in &state_names {
        m.add_state(name.clone());
    }
    for (src, i, o, dst, line) in transitions {
        let (src, i) = (State::from_index(src), Input(i));
        if m.step(src, i).is_some() {
            return Err(DotError::DuplicateTransition {
                line,
                state: m.state_name(src).to_string(),
                input: m.inputs().name(i.0).to_string(),
            });
        }
        m.set_transition(src, i, Output(o), State::from_index(dst));
    }
    m.set_initial(State::from_index(initial));

    let (m, dropped) = m.restrict_to_reachable();
    for name in &dropped {
        log::warn!("dropping unreachable state {name:?}");
    }
    Ok((m, dropped))
}

pub fn parse_dot(text: &str) -> Result<MealyMachine, DotError> {
    parse_dot_with_warnings(text).map(|(m, _)| m)
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Renders `m` in the DOT subset accepted by [`parse_dot`].
pub fn render_dot(m: &MealyMachine) -> String {
    let mut out = String::from("digraph g {\n");
    let _ = writeln!(out, "    __start0 [label=\"\" shape=\"none\"];");
    for q in m.states() {
        let _ = writeln!(out, "    {} [shape=\"circle\"];", quote(m.state_name(q)));
    }
    let _ = writeln!(out, "    __start0 -> {};", quote(m.state_name(m.initial())));
    for q in m.states() {
        for i in m.input_symbols() {
            if let Some((o, p)) = m.step(q, i) {
                let label = format!("{}/{}", m.inputs().name(i.0), m.outputs().name(o.0));
                let _ = writeln!(
                    out,
                    "    {} -> {} [label={}];",
                    quote(m.state_name(q)),
                    quote(m.state_name(p)),
                    quote(&label)
                );
            }
        }
    }
    out.push_str("}\n");
    out
}
