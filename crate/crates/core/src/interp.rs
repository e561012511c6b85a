//! Script interpreter: evaluates a [`ScriptProgram`] statement by statement,
//! printing verdicts and writing emitted files.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::algebra::{self, AlgebraError, ChannelMode, Part, Process, SystemNet};
use crate::checker::{self, CheckError, Outcome, Query, QueryError, Verdict};
use crate::dot::{DotDocument, DotError};
use crate::emit::{self, UppaalError};
use crate::label::{is_ident, FacetName};
use crate::script::{Arg, Expr, ExprKind, ModeDecl, ScriptError, ScriptProgram, StatementKind};
use crate::semantics::{self, SemanticsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VerdictFormat {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Global state bound for `check`, `traces` and product emission.
    pub bound: Option<usize>,
    pub trace_len: usize,
    /// Directory `dot("...")` paths are resolved against.
    pub input_dir: PathBuf,
    /// Directory emitted files are written to.
    pub out_dir: PathBuf,
    pub format: VerdictFormat,
    /// When false, `emit_*` statements are evaluated but nothing is written.
    pub write_files: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            bound: None,
            trace_len: 10,
            input_dir: PathBuf::from("."),
            out_dir: PathBuf::from("."),
            format: VerdictFormat::Json,
            write_files: true,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunErrorKind {
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error("cannot read `{path}`: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write `{path}`: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("in `{path}`: {source}")]
    Dot { path: PathBuf, source: DotError },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Uppaal(#[from] UppaalError),
    #[error("unknown facet `{0}` (expected guard, time, data or other)")]
    UnknownFacet(String),
    #[error("`{function}` expects {expected}")]
    Type { function: String, expected: &'static str },
    #[error("console output failed: {0}")]
    Console(io::Error),
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Parse(ScriptError),
    #[error("line {line}: {kind}")]
    At { line: usize, kind: RunErrorKind },
}

impl RunError {
    pub fn line(&self) -> usize {
        match self {
            RunError::Parse(ScriptError::Syntax { span, .. })
            | RunError::Parse(ScriptError::Unbound { span, .. })
            | RunError::Parse(ScriptError::UnknownFunction { span, .. }) => span.line,
            RunError::At { line, .. } => *line,
        }
    }
}

/// What a script run produced.
#[derive(Debug, Default)]
pub struct RunReport {
    pub verdicts: Vec<Verdict>,
    pub written: Vec<PathBuf>,
}

impl RunReport {
    /// 0 when every check held, 1 when one failed, 3 when none failed but
    /// one was left unknown.
    pub fn exit_code(&self) -> i32 {
        if self.verdicts.iter().any(|v| v.outcome == Outcome::False) {
            1
        } else if self.verdicts.iter().any(|v| v.outcome == Outcome::Unknown) {
            3
        } else {
            0
        }
    }
}

/// Exit status for a failed run.
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone)]
enum Value {
    Process(Process),
    Net(SystemNet),
}

impl Value {
    fn into_part(self) -> Part {
        match self {
            Value::Process(p) => Part::Process(p),
            Value::Net(n) => Part::Net(n),
        }
    }
}

struct Interpreter<'a> {
    options: &'a RunOptions,
    console: &'a mut dyn Write,
    env: BTreeMap<String, Value>,
    modes: BTreeMap<String, ChannelMode>,
    report: RunReport,
}

/// Parses and runs a script. Console output goes to `console`.
pub fn run_script(text: &str, options: &RunOptions, console: &mut dyn Write) -> Result<RunReport, RunError> {
    let program = ScriptProgram::parse(text).map_err(RunError::Parse)?;
    run_program(&program, options, console)
}

/// Reads and runs the script at `path`.
pub fn run_script_file(path: &Path, options: &RunOptions, console: &mut dyn Write) -> Result<RunReport, RunError> {
    let text = fs::read_to_string(path)
        .map_err(|source| RunError::At { line: 0, kind: RunErrorKind::Read { path: path.to_path_buf(), source } })?;
    run_script(&text, options, console)
}

pub fn run_program(program: &ScriptProgram, options: &RunOptions, console: &mut dyn Write) -> Result<RunReport, RunError> {
    let mut interp =
        Interpreter { options, console, env: BTreeMap::new(), modes: BTreeMap::new(), report: RunReport::default() };
    for stmt in &program.statements {
        interp.statement(&stmt.kind).map_err(|kind| RunError::At { line: stmt.span.line, kind })?;
    }
    Ok(interp.report)
}

/// Loads a DOT file as a process named after the graph, or after the file
/// when the graph is anonymous.
pub fn load_dot(path: &Path) -> Result<Process, RunErrorKind> {
    let text = fs::read_to_string(path).map_err(|source| RunErrorKind::Read { path: path.to_path_buf(), source })?;
    let doc = DotDocument::parse(&text).map_err(|source| RunErrorKind::Dot { path: path.to_path_buf(), source })?;
    let body = doc.to_lts().map_err(|source| RunErrorKind::Dot { path: path.to_path_buf(), source })?;
    let name = doc
        .name
        .filter(|n| is_ident(n))
        .or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "process".into());
    Ok(Process::new(name, body))
}

type Eval<T> = Result<T, RunErrorKind>;

fn value_arg(args: &[Arg], i: usize) -> &Expr {
    match &args[i] {
        Arg::Value(e) => e,
        other => unreachable!("parser guarantees a value argument, got {other:?}"),
    }
}

fn token_arg(args: &[Arg], i: usize) -> &str {
    match &args[i] {
        Arg::Token(t) | Arg::Text(t) => t,
        other => unreachable!("parser guarantees a token argument, got {other:?}"),
    }
}

impl Interpreter<'_> {
    fn statement(&mut self, stmt: &StatementKind) -> Eval<()> {
        match stmt {
            StatementKind::Bind { name, expr } => {
                let value = match self.eval(expr)? {
                    // Binding a process instantiates it under the bound name.
                    Value::Process(p) => Value::Process(p.with_name(name.as_str())),
                    net => net,
                };
                self.env.insert(name.clone(), value);
            }
            StatementKind::Channel { name, mode } => {
                let mode = match mode {
                    ModeDecl::Sync => ChannelMode::Sync,
                    ModeDecl::Async(c) => ChannelMode::asynchronous(*c)?,
                };
                self.modes.insert(name.clone(), mode);
            }
            StatementKind::Run(expr) => self.run(expr)?,
        }
        Ok(())
    }

    fn say(&mut self, text: &str) -> Eval<()> {
        self.console.write_all(text.as_bytes()).map_err(RunErrorKind::Console)
    }

    fn eval(&mut self, expr: &Expr) -> Eval<Value> {
        let (function, args) = match &expr.kind {
            ExprKind::Var(name) => return Ok(self.env[name].clone()),
            ExprKind::Call { function, args } => (function.as_str(), args.as_slice()),
        };
        match function {
            "dot" => {
                let path = self.options.input_dir.join(token_arg(args, 0));
                Ok(Value::Process(load_dot(&path)?))
            }
            "compose" => {
                let parts = args
                    .iter()
                    .enumerate()
                    .map(|(i, _)| self.eval(value_arg(args, i)).map(Value::into_part))
                    .collect::<Eval<Vec<_>>>()?;
                Ok(Value::Net(algebra::compose(parts)?))
            }
            "rename" => {
                let (old, new) = (token_arg(args, 1), token_arg(args, 2));
                Ok(match self.eval(value_arg(args, 0))? {
                    Value::Process(p) => Value::Process(p.rename(old, new)),
                    Value::Net(n) => Value::Net(n.rename(old, new)),
                })
            }
            "select" => {
                let net = self.net_arg(function, value_arg(args, 0))?;
                Ok(Value::Process(algebra::select(&net, token_arg(args, 1))?))
            }
            "remove" => {
                let net = self.net_arg(function, value_arg(args, 0))?;
                Ok(Value::Net(algebra::remove(&net, token_arg(args, 1))?))
            }
            "replace" => {
                let net = self.net_arg(function, value_arg(args, 0))?;
                let new = self.eval(value_arg(args, 2))?.into_part();
                Ok(Value::Net(algebra::replace(&net, token_arg(args, 1), new)?))
            }
            "filter" => {
                let Arg::Facets(names) = &args[1] else { unreachable!("parser guarantees a facet list") };
                let keep = names
                    .iter()
                    .map(|n| n.parse::<FacetName>().map_err(|_| RunErrorKind::UnknownFacet(n.clone())))
                    .collect::<Eval<Vec<_>>>()?;
                Ok(match self.eval(value_arg(args, 0))? {
                    Value::Process(p) => Value::Process(p.filter_facets(&keep)),
                    Value::Net(n) => Value::Net(n.filter_facets(&keep)),
                })
            }
            _ => unreachable!("commands are rejected in expression position by the parser"),
        }
    }

    fn net_arg(&mut self, function: &str, expr: &Expr) -> Eval<SystemNet> {
        match self.eval(expr)? {
            Value::Net(n) => Ok(n),
            Value::Process(_) => Err(RunErrorKind::Type { function: function.into(), expected: "a composed system" }),
        }
    }

    /// The value as a net with the script's channel declarations applied.
    fn system(&mut self, expr: &Expr) -> Eval<SystemNet> {
        let net = match self.eval(expr)? {
            Value::Net(n) => n,
            Value::Process(p) => SystemNet::single(p),
        };
        let channels = net.channels();
        Ok(self.modes.iter().filter(|(c, _)| channels.contains(*c)).fold(net, |n, (c, m)| n.with_mode(c.clone(), *m)))
    }

    fn write_file(&mut self, name: &str, contents: &str) -> Eval<()> {
        let path = self.options.out_dir.join(name);
        if !self.options.write_files {
            return self.say(&format!("(dry run) would write {}\n", path.display()));
        }
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|source| RunErrorKind::Write { path: path.clone(), source })?;
        }
        fs::write(&path, contents).map_err(|source| RunErrorKind::Write { path: path.clone(), source })?;
        self.report.written.push(path);
        Ok(())
    }

    fn run(&mut self, expr: &Expr) -> Eval<()> {
        let ExprKind::Call { function, args } = &expr.kind else {
            unreachable!("parser rejects bare names as statements")
        };
        match function.as_str() {
            "chans" => {
                let chans = match self.eval(value_arg(args, 0))? {
                    Value::Process(p) => algebra::extract_chan(&p),
                    Value::Net(n) => n.channels().into_iter().collect(),
                };
                self.say(&format!("[{}]\n", chans.join(", ")))
            }
            "traces" => {
                let net = self.system(value_arg(args, 0))?;
                let traces = semantics::traces(&net, self.options.trace_len);
                let mut text = String::new();
                for t in traces {
                    let t: Vec<String> = t.iter().map(ToString::to_string).collect();
                    text.push_str(&format!("<{}>\n", t.join(" . ")));
                }
                self.say(&text)
            }
            "check" => {
                let net = self.system(value_arg(args, 0))?;
                let query = Query::parse(token_arg(args, 1))?;
                let verdict = checker::check(&net, &query, self.options.bound)?;
                let text = match self.options.format {
                    VerdictFormat::Json => verdict.to_json() + "\n",
                    VerdictFormat::Text => verdict.to_text(),
                };
                self.say(&text)?;
                self.report.verdicts.push(verdict);
                Ok(())
            }
            "emit_uppaal" => {
                let net = self.system(value_arg(args, 0))?;
                let xml = emit::emit_uppaal(&net)?;
                self.write_file(token_arg(args, 1), &xml)
            }
            "emit_dot" => {
                let text = match self.eval(value_arg(args, 0))? {
                    Value::Process(p) => emit::emit_process_dot(&p),
                    Value::Net(_) => {
                        let net = self.system(value_arg(args, 0))?;
                        emit::emit_dot("product", &semantics::product(&net, self.options.bound)?)
                    }
                };
                self.write_file(token_arg(args, 1), &text)
            }
            "emit_lotos" => match self.eval(value_arg(args, 0))? {
                Value::Process(p) => {
                    let text = emit::emit_lotos(&p);
                    self.write_file(token_arg(args, 1), &text)
                }
                Value::Net(_) => Err(RunErrorKind::Type { function: function.clone(), expected: "a single process" }),
            },
            _ => {
                // Expression statement: show the value.
                let text = match self.eval(expr)? {
                    Value::Process(p) => emit::emit_process_dot(&p),
                    Value::Net(n) => {
                        let mut s = String::new();
                        for (inst, p) in n.components() {
                            s.push_str(&format!("{inst}: [{}]\n", p.interface().iter().cloned().collect::<Vec<_>>().join(", ")));
                        }
                        s
                    }
                };
                self.say(&text)
            }
        }
    }
}
