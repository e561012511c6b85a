//! Deadlock-freedom and reachability checking over the global state space.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::algebra::SystemNet;
use crate::label::is_ident;
use crate::lts::StateId;
use crate::semantics::{Config, Engine, GlobalTransition, RawKind, StepRecord, DEFAULT_STATE_BOUND};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("query syntax error: {0}")]
    Syntax(String),
    #[error("instance `{0}` appears twice in the query")]
    DuplicateInstance(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("query names unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("instance `{instance}` has no state `{state}`")]
    UnknownState { instance: String, state: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    /// `A[] not deadlock`
    DeadlockFree,
    /// `E<> i1.s1 and i2.s2 ...`
    Reach(Vec<(String, StateId)>),
}

impl Query {
    pub fn parse(text: &str) -> Result<Query, QueryError> {
        let text = text.trim();
        if let Some(rest) = text.strip_prefix("A[]") {
            let words: Vec<&str> = rest.split_whitespace().collect();
            return match words.as_slice() {
                ["not", "deadlock"] => Ok(Query::DeadlockFree),
                _ => Err(QueryError::Syntax(format!("expected `A[] not deadlock`, found `{text}`"))),
            };
        }
        let Some(rest) = text.strip_prefix("E<>") else {
            return Err(QueryError::Syntax(format!("query must start with `A[]` or `E<>`: `{text}`")));
        };
        let words: Vec<&str> = rest.split_whitespace().collect();
        if words.is_empty() {
            return Err(QueryError::Syntax("`E<>` needs at least one `instance.state` atom".into()));
        }
        let mut conjuncts: Vec<(String, StateId)> = Vec::new();
        for (i, word) in words.iter().enumerate() {
            if i % 2 == 1 {
                if *word != "and" {
                    return Err(QueryError::Syntax(format!("expected `and`, found `{word}`")));
                }
                continue;
            }
            let atom = word.split_once('.').filter(|(a, b)| is_ident(a) && is_ident(b));
            let Some((inst, state)) = atom else {
                return Err(QueryError::Syntax(format!("expected `instance.state`, found `{word}`")));
            };
            if conjuncts.iter().any(|(c, _)| c == inst) {
                return Err(QueryError::DuplicateInstance(inst.to_string()));
            }
            conjuncts.push((inst.to_string(), StateId::new(state).expect("identifier")));
        }
        if words.len().is_multiple_of(2) {
            return Err(QueryError::Syntax("dangling `and`".into()));
        }
        Ok(Query::Reach(conjuncts))
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::DeadlockFree => f.write_str("A[] not deadlock"),
            Query::Reach(atoms) => {
                let atoms: Vec<String> = atoms.iter().map(|(i, s)| format!("{i}.{s}")).collect();
                write!(f, "E<> {}", atoms.join(" and "))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    True,
    False,
    /// The state bound was hit before the question was settled.
    Unknown,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::True => "true",
            Outcome::False => "false",
            Outcome::Unknown => "unknown",
        })
    }
}

/// Result of a check. The witness is a shortest path from the initial state:
/// to a deadlock when `A[] not deadlock` fails, to a matching state when an
/// `E<>` query holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub query: Query,
    pub outcome: Outcome,
    pub witness: Option<Vec<GlobalTransition>>,
    pub states_explored: usize,
}

#[derive(Serialize)]
struct VerdictJson {
    query: String,
    holds: bool,
    outcome: Outcome,
    witness: Option<Vec<StepRecord>>,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::True
    }

    pub fn to_json(&self) -> String {
        let view = VerdictJson {
            query: self.query.to_string(),
            holds: self.holds(),
            outcome: self.outcome,
            witness: self.witness.as_ref().map(|w| w.iter().map(StepRecord::from).collect()),
        };
        serde_json::to_string_pretty(&view).expect("verdicts always serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}: {}\n", self.query, self.outcome);
        if let Some(w) = &self.witness {
            if let Some(first) = w.first() {
                out.push_str(&format!("  {}\n", first.source));
            }
            for step in w {
                out.push_str(&format!("  --{}--> {}\n", step.kind.label(), step.target));
            }
        }
        out
    }
}

/// Checks `query` on the reachable state space of `net`, exploring at most
/// `bound` global states.
pub fn check(net: &SystemNet, query: &Query, bound: Option<usize>) -> Result<Verdict, CheckError> {
    let engine = Engine::new(net);
    let targets = match query {
        Query::DeadlockFree => Vec::new(),
        Query::Reach(atoms) => resolve_atoms(&engine, atoms)?,
    };
    let bound = bound.unwrap_or(DEFAULT_STATE_BOUND);

    let mut index: HashMap<Config, usize> = HashMap::new();
    let mut states: Vec<Config> = vec![engine.initial().clone()];
    let mut parent: Vec<Option<(usize, RawKind<'_>)>> = vec![None];
    index.insert(engine.initial().clone(), 0);
    let mut queue = VecDeque::from([0usize]);
    let mut truncated = false;

    while let Some(current) = queue.pop_front() {
        let cfg = states[current].clone();
        let successors = engine.successors(&cfg);
        let found = match query {
            Query::DeadlockFree => successors.is_empty(),
            Query::Reach(_) => targets.iter().all(|&(c, s)| engine.local_of(&cfg, c) == s),
        };
        if found {
            let witness = rebuild(&engine, &states, &parent, current);
            let outcome = if *query == Query::DeadlockFree { Outcome::False } else { Outcome::True };
            return Ok(Verdict { query: query.clone(), outcome, witness: Some(witness), states_explored: states.len() });
        }
        for (kind, next) in successors {
            if index.contains_key(&next) {
                continue;
            }
            if states.len() >= bound {
                truncated = true;
                break;
            }
            index.insert(next.clone(), states.len());
            states.push(next);
            parent.push(Some((current, kind)));
            queue.push_back(states.len() - 1);
        }
        if truncated {
            break;
        }
    }
    let outcome = match (truncated, query) {
        (true, _) => Outcome::Unknown,
        (false, Query::DeadlockFree) => Outcome::True,
        (false, Query::Reach(_)) => Outcome::False,
    };
    Ok(Verdict { query: query.clone(), outcome, witness: None, states_explored: states.len() })
}

fn resolve_atoms(engine: &Engine<'_>, atoms: &[(String, StateId)]) -> Result<Vec<(usize, u32)>, CheckError> {
    atoms
        .iter()
        .map(|(inst, state)| {
            let c = engine.instance_index(inst).ok_or_else(|| CheckError::UnknownInstance(inst.clone()))?;
            let s = engine
                .state_index(c, state.as_str())
                .ok_or_else(|| CheckError::UnknownState { instance: inst.clone(), state: state.to_string() })?;
            Ok((c, s))
        })
        .collect()
}

fn rebuild<'a>(
    engine: &Engine<'a>,
    states: &[Config],
    parent: &[Option<(usize, RawKind<'a>)>],
    mut at: usize,
) -> Vec<GlobalTransition> {
    let mut path = Vec::new();
    while let Some((from, kind)) = &parent[at] {
        path.push(engine.to_transition(&states[*from], kind, &states[at]));
        at = *from;
    }
    path.reverse();
    path
}
