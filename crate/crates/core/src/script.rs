//! The composition script language.
//!
//! One statement per line, `#` starts a comment:
//!
//! ```text
//! dc   = dot("dataCollector.dot")
//! dtctrl1 = rename(rename(dc, connection, connect), readState, sendState)
//! sys  = compose(dtctrl1, spv, rpt1)
//! channel buf async 2
//! check(sys, "A[] not deadlock")
//! emit_uppaal(sys, "system.xml")
//! ```
//!
//! Bindings take expressions (`dot`, `compose`, `rename`, `replace`,
//! `remove`, `select`, `filter`); commands (`chans`, `check`, `traces`,
//! `emit_uppaal`, `emit_dot`, `emit_lotos`, `channel`) stand alone.

use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScriptError {
    #[error("{span}: {message}")]
    Syntax { span: Span, message: String },
    #[error("{span}: `{name}` is used before it is bound")]
    Unbound { span: Span, name: String },
    #[error("{span}: unknown function `{name}`")]
    UnknownFunction { span: Span, name: String },
}

/// What a function argument must be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ArgKind {
    /// A bound name or a nested expression.
    Value,
    /// A bare channel or instance name.
    Token,
    /// A quoted string.
    Text,
    /// Facet names, as `[a, b]` or bare names.
    Facets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Expression,
    Command,
}

struct Signature {
    name: &'static str,
    role: Role,
    args: &'static [ArgKind],
    /// The last argument kind may repeat.
    variadic: bool,
}

use ArgKind::*;

const SIGNATURES: &[Signature] = &[
    Signature { name: "dot", role: Role::Expression, args: &[Text], variadic: false },
    Signature { name: "compose", role: Role::Expression, args: &[Value], variadic: true },
    Signature { name: "rename", role: Role::Expression, args: &[Value, Token, Token], variadic: false },
    Signature { name: "replace", role: Role::Expression, args: &[Value, Token, Value], variadic: false },
    Signature { name: "remove", role: Role::Expression, args: &[Value, Token], variadic: false },
    Signature { name: "select", role: Role::Expression, args: &[Value, Token], variadic: false },
    Signature { name: "filter", role: Role::Expression, args: &[Value, Facets], variadic: false },
    Signature { name: "chans", role: Role::Command, args: &[Value], variadic: false },
    Signature { name: "traces", role: Role::Command, args: &[Value], variadic: false },
    Signature { name: "check", role: Role::Command, args: &[Value, Text], variadic: false },
    Signature { name: "emit_uppaal", role: Role::Command, args: &[Value, Text], variadic: false },
    Signature { name: "emit_dot", role: Role::Command, args: &[Value, Text], variadic: false },
    Signature { name: "emit_lotos", role: Role::Command, args: &[Value, Text], variadic: false },
];

fn signature(name: &str) -> Option<&'static Signature> {
    SIGNATURES.iter().find(|s| s.name == name)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    Value(Expr),
    Token(String),
    Text(String),
    Facets(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Var(String),
    Call { function: String, args: Vec<Arg> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub span: Span,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeDecl {
    Sync,
    Async(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatementKind {
    Bind { name: String, expr: Expr },
    Channel { name: String, mode: ModeDecl },
    /// A command, or an expression evaluated for display.
    Run(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub span: Span,
    pub kind: StatementKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScriptProgram {
    pub statements: Vec<Statement>,
}

impl ScriptProgram {
    pub fn parse(text: &str) -> Result<Self, ScriptError> {
        let mut bound = BTreeSet::new();
        let mut statements = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let mut cursor = Cursor { chars: line.chars().collect(), pos: 0, line: i + 1 };
            cursor.skip_ws();
            if cursor.at_end() {
                continue;
            }
            let stmt = cursor.statement(&bound)?;
            cursor.skip_ws();
            if !cursor.at_end() {
                return cursor.error("unexpected text after statement");
            }
            if let StatementKind::Bind { name, .. } = &stmt.kind {
                bound.insert(name.clone());
            }
            statements.push(stmt);
        }
        Ok(ScriptProgram { statements })
    }
}

pub fn parse_script(text: &str) -> Result<ScriptProgram, ScriptError> {
    ScriptProgram::parse(text)
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn span(&self) -> Span {
        Span { line: self.line, column: self.pos + 1 }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ScriptError> {
        Err(ScriptError::Syntax { span: self.span(), message: message.into() })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn at_end(&self) -> bool {
        self.peek().is_none_or(|c| c == '#')
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ScriptError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.error(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, ScriptError> {
        match self.ident() {
            Some(s) => Ok(s),
            None => self.error(format!("expected {what}")),
        }
    }

    fn string(&mut self) -> Result<String, ScriptError> {
        self.skip_ws();
        if self.peek() != Some('"') {
            return self.error("expected a quoted string");
        }
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return self.error("unterminated string"),
                Some('"') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some('\\') if matches!(self.chars.get(self.pos + 1), Some('"') | Some('\\')) => {
                    out.push(self.chars[self.pos + 1]);
                    self.pos += 2;
                }
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    fn statement(&mut self, bound: &BTreeSet<String>) -> Result<Statement, ScriptError> {
        let span = self.span();
        let save = self.pos;
        let first = self.expect_ident("a statement")?;
        if first == "channel" {
            let name = self.expect_ident("a channel name")?;
            let mode = match self.ident().as_deref() {
                Some("sync") => ModeDecl::Sync,
                Some("async") => {
                    let cap = self.ident().and_then(|n| n.parse::<usize>().ok());
                    match cap {
                        Some(c) if c >= 1 => ModeDecl::Async(c),
                        _ => return self.error("expected a capacity of at least 1 after `async`"),
                    }
                }
                _ => return self.error("expected `sync` or `async <capacity>`"),
            };
            return Ok(Statement { span, kind: StatementKind::Channel { name, mode } });
        }
        if self.eat('=') {
            let expr = self.expr(bound)?;
            if let ExprKind::Call { function, .. } = &expr.kind {
                if signature(function).is_some_and(|s| s.role == Role::Command) {
                    return Err(ScriptError::Syntax {
                        span: expr.span,
                        message: format!("`{function}` is a command and yields no value"),
                    });
                }
            }
            return Ok(Statement { span, kind: StatementKind::Bind { name: first, expr } });
        }
        self.pos = save;
        let expr = self.expr(bound)?;
        if matches!(expr.kind, ExprKind::Var(_)) {
            return self.error("expected `=` or a call");
        }
        Ok(Statement { span, kind: StatementKind::Run(expr) })
    }

    fn expr(&mut self, bound: &BTreeSet<String>) -> Result<Expr, ScriptError> {
        self.skip_ws();
        let span = self.span();
        let name = self.expect_ident("a name or a call")?;
        if !self.eat('(') {
            if !bound.contains(&name) {
                return Err(ScriptError::Unbound { span, name });
            }
            return Ok(Expr { span, kind: ExprKind::Var(name) });
        }
        let Some(sig) = signature(&name) else {
            return Err(ScriptError::UnknownFunction { span, name });
        };
        let mut args = Vec::new();
        if !self.eat(')') {
            loop {
                let kind = match sig.args.get(args.len()) {
                    Some(k) => *k,
                    None if sig.variadic => *sig.args.last().unwrap(),
                    None => return self.error(format!("too many arguments to `{name}`")),
                };
                args.push(self.arg(kind, bound)?);
                if kind == Facets {
                    self.expect(')')?;
                    break;
                }
                if self.eat(')') {
                    break;
                }
                self.expect(',')?;
            }
        }
        if args.len() < sig.args.len() {
            return Err(ScriptError::Syntax {
                span,
                message: format!("`{name}` takes {} argument(s), got {}", sig.args.len(), args.len()),
            });
        }
        Ok(Expr { span, kind: ExprKind::Call { function: name, args } })
    }

    fn arg(&mut self, kind: ArgKind, bound: &BTreeSet<String>) -> Result<Arg, ScriptError> {
        match kind {
            Value => Ok(Arg::Value(self.expr(bound)?)),
            Token => Ok(Arg::Token(self.expect_ident("a channel or instance name")?)),
            Text => Ok(Arg::Text(self.string()?)),
            Facets => {
                let bracketed = self.eat('[');
                let mut names = Vec::new();
                let close = if bracketed { ']' } else { ')' };
                self.skip_ws();
                if self.peek() != Some(close) {
                    loop {
                        let name = self.expect_ident("a facet name")?;
                        names.push(name);
                        if !self.eat(',') {
                            break;
                        }
                    }
                }
                if bracketed {
                    self.expect(']')?;
                }
                Ok(Arg::Facets(names))
            }
        }
    }
}
