//! Reader for the DOT subset used to exchange transition systems.
//!
//! Accepted: one `digraph`, node statements, edge statements (chains allowed),
//! graph attribute statements and `graph`/`node`/`edge` default lists.
//! Only the `label`, `facets` and `init` attributes mean anything, the rest
//! are kept in [`DotDocument`] and otherwise ignored. Subgraphs, ports and
//! undirected edges are rejected.
//!
//! SPIN's `pan -D` output marks the start state with a pseudo node declared
//! `shape=box,style=dotted` and one unlabelled edge to the real initial state;
//! that marker is recognised and dropped.

use std::fmt;

use crate::label::Label;
use crate::lts::{Lts, LtsError, StateId, Transition};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DotError {
    #[error("{pos}: {message}")]
    Syntax { pos: Position, message: String },
    #[error("graph has no nodes and no edges")]
    EmptyGraph,
    #[error("two nodes are marked init=true: `{0}` and `{1}`")]
    MultipleInitial(String, String),
    #[error("cannot determine the initial state: no edges and no init=true node")]
    NoInitial,
    #[error(transparent)]
    Lts(#[from] LtsError),
}

pub type Attrs = Vec<(String, String)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotEdge {
    pub source: String,
    pub target: String,
    pub attrs: Attrs,
}

/// The syntax tree of a DOT file, before any transition-system reading.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DotDocument {
    pub name: Option<String>,
    pub nodes: Vec<(String, Attrs)>,
    pub edges: Vec<DotEdge>,
}

fn attr<'a>(attrs: &'a Attrs, key: &str) -> Option<&'a str> {
    attrs.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

impl DotDocument {
    pub fn parse(text: &str) -> Result<Self, DotError> {
        Parser::new(text).document()
    }

    /// Node names in order of first appearance, declarations and edges alike.
    pub fn node_names(&self) -> Vec<&str> {
        let mentions = self
            .nodes
            .iter()
            .map(|(n, _)| n.as_str())
            .chain(self.edges.iter().flat_map(|e| [e.source.as_str(), e.target.as_str()]));
        let mut seen: Vec<&str> = Vec::new();
        for n in mentions {
            if !seen.contains(&n) {
                seen.push(n);
            }
        }
        seen
    }

    fn is_start_marker(&self, name: &str) -> bool {
        self.nodes.iter().any(|(n, a)| n == name && attr(a, "shape") == Some("box") && attr(a, "style") == Some("dotted"))
    }

    /// Reads the document as a transition system.
    pub fn to_lts(&self) -> Result<Lts, DotError> {
        if self.nodes.is_empty() && self.edges.is_empty() {
            return Err(DotError::EmptyGraph);
        }
        let mut initial: Option<&str> = None;
        for (n, a) in &self.nodes {
            if attr(a, "init").is_some_and(|v| v.eq_ignore_ascii_case("true")) {
                match initial {
                    Some(prev) if prev != n => return Err(DotError::MultipleInitial(prev.to_string(), n.clone())),
                    _ => initial = Some(n),
                }
            }
        }
        let initial = initial
            .or_else(|| self.edges.iter().find(|e| self.is_start_marker(&e.source)).map(|e| e.target.as_str()))
            .or_else(|| self.edges.iter().find(|e| !self.is_start_marker(&e.source)).map(|e| e.source.as_str()))
            .ok_or(DotError::NoInitial)?;

        let states = self
            .node_names()
            .into_iter()
            .filter(|n| !self.is_start_marker(n))
            .map(StateId::new)
            .collect::<Result<Vec<_>, _>>()?;
        let mut transitions = Vec::with_capacity(self.edges.len());
        for e in self.edges.iter().filter(|e| !self.is_start_marker(&e.source)) {
            let mut label = match attr(&e.attrs, "label") {
                Some(raw) => Label::parse(&strip_decoration(raw)),
                None => Label::tau(),
            };
            if let Some(f) = attr(&e.attrs, "facets") {
                label.extend_facets(f);
            }
            transitions.push(Transition::new(StateId::new(&e.source)?, label, StateId::new(&e.target)?));
        }
        Ok(Lts::new(states, StateId::new(initial)?, transitions)?)
    }
}

/// Parses DOT text straight into a transition system.
pub fn parse_dot(text: &str) -> Result<Lts, DotError> {
    DotDocument::parse(text)?.to_lts()
}

/// Removes typographic decoration around a label: `{\red x!}`, nested quotes.
fn strip_decoration(raw: &str) -> String {
    let mut s = raw.trim();
    loop {
        let before = s;
        if s.len() >= 2 && s.starts_with('{') && s.ends_with('}') {
            s = s[1..s.len() - 1].trim();
            if let Some(rest) = s.strip_prefix('\\') {
                let cmd_len = rest.chars().take_while(|c| c.is_ascii_alphabetic()).count();
                s = rest[cmd_len..].trim();
            }
        }
        if s.len() >= 2 && s.starts_with('"') && s.ends_with('"') {
            s = s[1..s.len() - 1].trim();
        }
        if s == before {
            return s.to_string();
        }
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Self {
        Self { chars: text.chars().collect(), pos: 0 }
    }

    fn position_of(&self, index: usize) -> Position {
        let mut line = 1;
        let mut column = 1;
        for &c in &self.chars[..index.min(self.chars.len())] {
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        Position { line, column }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, DotError> {
        Err(DotError::Syntax { pos: self.position_of(self.pos), message: message.into() })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => self.pos += 1,
                Some('/') if self.peek_at(1) == Some('/') => self.skip_line(),
                Some('#') if self.at_line_start() => self.skip_line(),
                Some('/') if self.peek_at(1) == Some('*') => {
                    self.pos += 2;
                    while self.pos < self.chars.len() && !(self.peek() == Some('*') && self.peek_at(1) == Some('/')) {
                        self.pos += 1;
                    }
                    self.pos = (self.pos + 2).min(self.chars.len());
                }
                _ => return,
            }
        }
    }

    fn at_line_start(&self) -> bool {
        self.chars[..self.pos].iter().rev().take_while(|c| **c != '\n').all(|c| c.is_whitespace())
    }

    fn skip_line(&mut self) {
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_trivia();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), DotError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.error(format!("expected `{c}`"))
        }
    }

    fn is_id_char(c: char) -> bool {
        c.is_alphanumeric() || c == '_' || c == '.'
    }

    /// An identifier, number or quoted string. Returns None when the next
    /// token is not an ID.
    fn id(&mut self) -> Result<Option<String>, DotError> {
        self.skip_trivia();
        match self.peek() {
            Some('"') => self.quoted().map(Some),
            Some(c) if Self::is_id_char(c) || (c == '-' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())) => {
                let start = self.pos;
                self.pos += 1;
                while self.peek().is_some_and(Self::is_id_char) {
                    self.pos += 1;
                }
                Ok(Some(self.chars[start..self.pos].iter().collect()))
            }
            _ => Ok(None),
        }
    }

    fn quoted(&mut self) -> Result<String, DotError> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.peek() {
                None => {
                    self.pos = start;
                    return self.error("unterminated string");
                }
                Some('"') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some('\\') if matches!(self.peek_at(1), Some('"') | Some('\\')) => {
                    out.push(self.peek_at(1).unwrap());
                    self.pos += 2;
                }
                Some('\\') if self.peek_at(1) == Some('\n') => self.pos += 2,
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    /// The right-hand side of `key=value`: a quoted string, a brace group or a
    /// bare run up to the next separator. Bare runs accept characters plain
    /// DOT does not (`KO?`), as hand-written models use them.
    fn value(&mut self) -> Result<String, DotError> {
        self.skip_trivia();
        match self.peek() {
            Some('"') => self.quoted(),
            Some(open @ ('{' | '<')) => {
                let close = if open == '{' { '}' } else { '>' };
                let start = self.pos;
                let mut depth = 0usize;
                while let Some(c) = self.peek() {
                    self.pos += 1;
                    if c == open {
                        depth += 1;
                    } else if c == close {
                        depth -= 1;
                        if depth == 0 {
                            return Ok(self.chars[start..self.pos].iter().collect());
                        }
                    }
                }
                self.pos = start;
                self.error(format!("unbalanced `{open}`"))
            }
            _ => {
                let start = self.pos;
                while self.peek().is_some_and(|c| !c.is_whitespace() && !matches!(c, ',' | ';' | ']' | '[' | '}')) {
                    self.pos += 1;
                }
                if start == self.pos {
                    return self.error("expected attribute value");
                }
                Ok(self.chars[start..self.pos].iter().collect())
            }
        }
    }

    fn attr_list(&mut self) -> Result<Attrs, DotError> {
        let mut attrs = Vec::new();
        while self.eat('[') {
            loop {
                if self.eat(']') {
                    break;
                }
                let Some(key) = self.id()? else {
                    return self.error("expected attribute name");
                };
                self.expect('=')?;
                let value = self.value()?;
                attrs.push((key, value));
                if !self.eat(',') {
                    self.eat(';');
                }
            }
        }
        Ok(attrs)
    }

    fn arrow(&mut self) -> Result<bool, DotError> {
        self.skip_trivia();
        if self.peek() == Some('-') && self.peek_at(1) == Some('>') {
            self.pos += 2;
            return Ok(true);
        }
        if self.peek() == Some('-') && self.peek_at(1) == Some('-') {
            return self.error("undirected edges are not supported");
        }
        Ok(false)
    }

    fn document(mut self) -> Result<DotDocument, DotError> {
        let mut doc = DotDocument::default();
        let mut kw = self.id()?;
        if kw.as_deref() == Some("strict") {
            kw = self.id()?;
        }
        match kw.as_deref() {
            Some("digraph") => {}
            Some("graph") => return self.error("undirected graphs are not supported"),
            _ => return self.error("expected `digraph`"),
        }
        self.skip_trivia();
        if self.peek() != Some('{') {
            doc.name = self.id()?;
        }
        self.expect('{')?;
        loop {
            if self.eat('}') {
                break;
            }
            self.skip_trivia();
            if self.peek().is_none() {
                return self.error("expected `}`");
            }
            self.statement(&mut doc)?;
            while self.eat(';') {}
        }
        self.skip_trivia();
        if self.peek().is_some() {
            return self.error("trailing input after graph");
        }
        Ok(doc)
    }

    fn statement(&mut self, doc: &mut DotDocument) -> Result<(), DotError> {
        let start = self.pos;
        let Some(first) = self.id()? else {
            if self.peek() == Some('{') {
                return self.error("subgraphs are not supported");
            }
            return self.error("expected a statement");
        };
        let quoted = self.chars[start..].iter().find(|c| !c.is_whitespace()) == Some(&'"');
        if !quoted {
            match first.as_str() {
                "graph" | "node" | "edge" => {
                    self.attr_list()?;
                    return Ok(());
                }
                "subgraph" => return self.error("subgraphs are not supported"),
                _ => {}
            }
        }
        if self.eat('=') {
            self.value()?;
            return Ok(());
        }
        self.skip_trivia();
        if self.peek() == Some(':') {
            return self.error("node ports are not supported");
        }
        let mut chain = vec![first];
        while self.arrow()? {
            match self.id()? {
                Some(next) => chain.push(next),
                None => return self.error("expected node after `->`"),
            }
        }
        let attrs = self.attr_list()?;
        if chain.len() == 1 {
            doc.nodes.push((chain.pop().unwrap(), attrs));
        } else {
            for pair in chain.windows(2) {
                doc.edges.push(DotEdge { source: pair[0].clone(), target: pair[1].clone(), attrs: attrs.clone() });
            }
        }
        Ok(())
    }
}
