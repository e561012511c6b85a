//! Interaction semantics: the reachable global transition system of a net.
//!
//! Rules, for a component sitting at a local state with an outgoing action:
//! - internal actions, and sends/receives on a channel no other component has
//!   in its interface, interleave freely as local steps;
//! - a send on a shared synchronous channel fires only together with a
//!   receive on the same channel by a different component (handshake); every
//!   ready sender/receiver pair gives its own global step;
//! - a send on a shared asynchronous channel appends a token to the channel's
//!   FIFO when it is not full; a receive pops the head and is disabled while
//!   the buffer is empty.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::algebra::{ChannelMode, SystemNet};
use crate::label::{ChannelAction, Direction, Label};
use crate::lts::{Lts, StateId, Transition};

pub const DEFAULT_STATE_BOUND: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemanticsError {
    #[error("state space exceeds the bound of {bound} global states ({frontier} states still unexplored)")]
    BoundExceeded { bound: usize, frontier: usize },
    #[error("global state does not match the system: {0}")]
    InconsistentState(String),
}

/// One local state per component (canonical instance order) plus the content
/// of every shared asynchronous channel. Buffer tokens are sender instance
/// names; no data travels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalState {
    pub locals: Vec<(String, StateId)>,
    pub buffers: BTreeMap<String, Vec<String>>,
}

impl GlobalState {
    pub fn local(&self, instance: &str) -> Option<&StateId> {
        self.locals.iter().find(|(i, _)| i == instance).map(|(_, s)| s)
    }
}

impl fmt::Display for GlobalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let locals: Vec<String> = self.locals.iter().map(|(i, s)| format!("<{i}:{s}>")).collect();
        f.write_str(&locals.join(","))?;
        for (chan, tokens) in &self.buffers {
            write!(f, ";{chan}=[{}]", tokens.join("."))?;
        }
        Ok(())
    }
}

/// What a global step does. Variant order is the canonical step order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StepKind {
    Handshake { channel: String, sender: String, receiver: String },
    AsyncSend { channel: String, instance: String },
    AsyncReceive { channel: String, instance: String },
    Local { instance: String, label: Label },
}

impl StepKind {
    /// The label this step carries in the product system.
    pub fn label(&self) -> Label {
        match self {
            StepKind::Handshake { channel, sender, receiver } => {
                Label::plain(ChannelAction::internal(format!("{channel}#{sender}>{receiver}")))
            }
            StepKind::AsyncSend { channel, instance } => {
                Label::plain(ChannelAction::internal(format!("{channel}!@{instance}")))
            }
            StepKind::AsyncReceive { channel, instance } => {
                Label::plain(ChannelAction::internal(format!("{channel}?@{instance}")))
            }
            StepKind::Local { label, .. } => label.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalTransition {
    pub kind: StepKind,
    pub source: GlobalState,
    pub target: GlobalState,
}

/// Serializable view of a step, used for witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub from: String,
    pub action: String,
    pub to: String,
}

impl From<&GlobalTransition> for StepRecord {
    fn from(t: &GlobalTransition) -> Self {
        StepRecord { from: t.source.to_string(), action: t.kind.label().to_string(), to: t.target.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Medium {
    Local,
    Sync,
    Async(usize),
}

#[derive(Debug, Clone)]
struct Move<'a> {
    label: &'a Label,
    target: u32,
    direction: Direction,
    medium: Medium,
}

/// Compact global state: local state indices and buffers of sender indices.
/// Indices follow name order, so the derived order matches [`GlobalState`]'s.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Config {
    locals: Vec<u32>,
    buffers: Vec<VecDeque<u16>>,
}

/// Internal step kind, ordered exactly like [`StepKind`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum RawKind<'a> {
    Handshake { channel: &'a str, sender: u32, receiver: u32 },
    AsyncSend { channel: &'a str, instance: u32 },
    AsyncReceive { channel: &'a str, instance: u32 },
    Local { instance: u32, label: &'a Label },
}

/// A net prepared for exploration.
pub(crate) struct Engine<'a> {
    instances: Vec<&'a str>,
    states: Vec<Vec<&'a StateId>>,
    moves: Vec<Vec<Vec<Move<'a>>>>,
    initial: Config,
    async_channels: Vec<(&'a str, usize)>,
}

impl<'a> Engine<'a> {
    pub(crate) fn new(net: &'a SystemNet) -> Self {
        let shared = net.shared_channels();
        let async_channels: Vec<(&'a str, usize)> = net
            .declared_modes()
            .iter()
            .filter(|(c, _)| shared.contains(c.as_str()))
            .filter_map(|(c, m)| match m {
                ChannelMode::Async { capacity } => Some((c.as_str(), capacity.get())),
                ChannelMode::Sync => None,
            })
            .collect();
        let mut instances = Vec::new();
        let mut states = Vec::new();
        let mut moves = Vec::new();
        let mut initial = Vec::new();
        for (name, process) in net.components() {
            let body = process.body();
            let list: Vec<&StateId> = body.states().iter().collect();
            let index: HashMap<&StateId, u32> = list.iter().enumerate().map(|(i, s)| (*s, i as u32)).collect();
            let mut out = vec![Vec::new(); list.len()];
            for t in body.transitions() {
                let comm = t.label.comm();
                let medium = if !comm.is_communication() || !shared.contains(&comm.channel) {
                    Medium::Local
                } else {
                    match async_channels.iter().position(|(c, _)| *c == comm.channel) {
                        Some(i) => Medium::Async(i),
                        None => Medium::Sync,
                    }
                };
                out[index[&t.source] as usize].push(Move {
                    label: &t.label,
                    target: index[&t.target],
                    direction: comm.direction,
                    medium,
                });
            }
            initial.push(index[body.initial()]);
            instances.push(name.as_str());
            states.push(list);
            moves.push(out);
        }
        let initial = Config { locals: initial, buffers: vec![VecDeque::new(); async_channels.len()] };
        Self { instances, states, moves, initial, async_channels }
    }

    pub(crate) fn initial(&self) -> &Config {
        &self.initial
    }

    /// Enabled steps from `cfg`, in canonical order, duplicates removed.
    pub(crate) fn successors(&self, cfg: &Config) -> Vec<(RawKind<'a>, Config)> {
        let mut out = Vec::new();
        for (i, &local) in cfg.locals.iter().enumerate() {
            for mv in &self.moves[i][local as usize] {
                match (mv.medium, mv.direction) {
                    (Medium::Local, _) => {
                        out.push((RawKind::Local { instance: i as u32, label: mv.label }, self.step(cfg, i, mv.target)));
                    }
                    (Medium::Sync, Direction::Send) => {
                        let channel = mv.label.comm().channel.as_str();
                        for (j, &other) in cfg.locals.iter().enumerate() {
                            if j == i {
                                continue;
                            }
                            for rx in &self.moves[j][other as usize] {
                                if rx.medium == Medium::Sync
                                    && rx.direction == Direction::Receive
                                    && rx.label.comm().channel == channel
                                {
                                    let mut next = self.step(cfg, i, mv.target);
                                    next.locals[j] = rx.target;
                                    out.push((
                                        RawKind::Handshake { channel, sender: i as u32, receiver: j as u32 },
                                        next,
                                    ));
                                }
                            }
                        }
                    }
                    (Medium::Sync, _) => {}
                    (Medium::Async(b), Direction::Send) => {
                        if cfg.buffers[b].len() < self.async_channels[b].1 {
                            let mut next = self.step(cfg, i, mv.target);
                            next.buffers[b].push_back(i as u16);
                            out.push((RawKind::AsyncSend { channel: self.async_channels[b].0, instance: i as u32 }, next));
                        }
                    }
                    (Medium::Async(b), _) => {
                        if !cfg.buffers[b].is_empty() {
                            let mut next = self.step(cfg, i, mv.target);
                            next.buffers[b].pop_front();
                            out.push((
                                RawKind::AsyncReceive { channel: self.async_channels[b].0, instance: i as u32 },
                                next,
                            ));
                        }
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn step(&self, cfg: &Config, component: usize, target: u32) -> Config {
        let mut next = cfg.clone();
        next.locals[component] = target;
        next
    }

    pub(crate) fn instance_index(&self, name: &str) -> Option<usize> {
        self.instances.iter().position(|i| *i == name)
    }

    pub(crate) fn state_index(&self, component: usize, name: &str) -> Option<u32> {
        self.states[component].iter().position(|s| s.as_str() == name).map(|i| i as u32)
    }

    pub(crate) fn local_of(&self, cfg: &Config, component: usize) -> u32 {
        cfg.locals[component]
    }

    pub(crate) fn to_global(&self, cfg: &Config) -> GlobalState {
        GlobalState {
            locals: cfg
                .locals
                .iter()
                .enumerate()
                .map(|(i, &s)| (self.instances[i].to_string(), self.states[i][s as usize].clone()))
                .collect(),
            buffers: self
                .async_channels
                .iter()
                .zip(&cfg.buffers)
                .map(|((c, _), buf)| (c.to_string(), buf.iter().map(|&i| self.instances[i as usize].to_string()).collect()))
                .collect(),
        }
    }

    pub(crate) fn to_kind(&self, raw: &RawKind<'a>) -> StepKind {
        let name = |i: &u32| self.instances[*i as usize].to_string();
        match raw {
            RawKind::Handshake { channel, sender, receiver } => {
                StepKind::Handshake { channel: channel.to_string(), sender: name(sender), receiver: name(receiver) }
            }
            RawKind::AsyncSend { channel, instance } => {
                StepKind::AsyncSend { channel: channel.to_string(), instance: name(instance) }
            }
            RawKind::AsyncReceive { channel, instance } => {
                StepKind::AsyncReceive { channel: channel.to_string(), instance: name(instance) }
            }
            RawKind::Local { instance, label } => StepKind::Local { instance: name(instance), label: (*label).clone() },
        }
    }

    pub(crate) fn to_transition(&self, from: &Config, kind: &RawKind<'a>, to: &Config) -> GlobalTransition {
        GlobalTransition { kind: self.to_kind(kind), source: self.to_global(from), target: self.to_global(to) }
    }

    fn config_of(&self, g: &GlobalState) -> Result<Config, SemanticsError> {
        let bad = |m: String| Err(SemanticsError::InconsistentState(m));
        if g.locals.len() != self.instances.len() {
            return bad(format!("{} local states for {} components", g.locals.len(), self.instances.len()));
        }
        let mut locals = Vec::with_capacity(g.locals.len());
        for (i, (inst, state)) in g.locals.iter().enumerate() {
            if inst != self.instances[i] {
                return bad(format!("expected instance `{}` at position {i}, found `{inst}`", self.instances[i]));
            }
            match self.state_index(i, state.as_str()) {
                Some(s) => locals.push(s),
                None => return bad(format!("`{state}` is not a state of `{inst}`")),
            }
        }
        let expected: BTreeSet<&str> = self.async_channels.iter().map(|(c, _)| *c).collect();
        let given: BTreeSet<&str> = g.buffers.keys().map(String::as_str).collect();
        if expected != given {
            return bad("buffers do not match the asynchronous shared channels".to_string());
        }
        let mut buffers = Vec::new();
        for (chan, cap) in &self.async_channels {
            let tokens = &g.buffers[*chan];
            if tokens.len() > *cap {
                return bad(format!("buffer `{chan}` holds {} tokens, capacity {cap}", tokens.len()));
            }
            let mut buf = VecDeque::new();
            for t in tokens {
                match self.instance_index(t) {
                    Some(i) => buf.push_back(i as u16),
                    None => return bad(format!("buffer `{chan}` holds unknown sender `{t}`")),
                }
            }
            buffers.push(buf);
        }
        Ok(Config { locals, buffers })
    }
}

/// The global state where every component is at its initial state and every
/// buffer is empty.
pub fn initial_state(net: &SystemNet) -> GlobalState {
    let engine = Engine::new(net);
    engine.to_global(engine.initial())
}

/// Global steps enabled in `state`, canonically ordered.
pub fn enabled(net: &SystemNet, state: &GlobalState) -> Result<Vec<GlobalTransition>, SemanticsError> {
    let engine = Engine::new(net);
    let cfg = engine.config_of(state)?;
    Ok(engine.successors(&cfg).iter().map(|(k, next)| engine.to_transition(&cfg, k, next)).collect())
}

/// Reachable global states in breadth-first order with their outgoing steps.
pub(crate) struct Exploration<'a> {
    pub(crate) states: Vec<Config>,
    pub(crate) edges: Vec<Vec<(RawKind<'a>, usize)>>,
}

pub(crate) fn explore<'a>(engine: &Engine<'a>, bound: usize) -> Result<Exploration<'a>, SemanticsError> {
    let mut index: HashMap<Config, usize> = HashMap::new();
    let mut states = vec![engine.initial().clone()];
    index.insert(engine.initial().clone(), 0);
    let mut edges = Vec::new();
    let mut next = 0;
    while next < states.len() {
        let mut out = Vec::new();
        for (kind, target) in engine.successors(&states[next]) {
            let id = match index.get(&target) {
                Some(&id) => id,
                None => {
                    if states.len() >= bound {
                        return Err(SemanticsError::BoundExceeded { bound, frontier: states.len() - next });
                    }
                    states.push(target.clone());
                    index.insert(target, states.len() - 1);
                    states.len() - 1
                }
            };
            out.push((kind, id));
        }
        edges.push(out);
        next += 1;
    }
    Ok(Exploration { states, edges })
}

/// The reachable synchronous product of the net as a transition system.
pub fn product(net: &SystemNet, bound: Option<usize>) -> Result<Lts, SemanticsError> {
    let engine = Engine::new(net);
    let exp = explore(&engine, bound.unwrap_or(DEFAULT_STATE_BOUND))?;
    let names: Vec<StateId> = exp
        .states
        .iter()
        .map(|c| StateId::new(engine.to_global(c).to_string()).expect("global state names are never empty"))
        .collect();
    let transitions = exp.edges.iter().enumerate().flat_map(|(s, out)| {
        let names = &names;
        let engine = &engine;
        out.iter().map(move |(kind, t)| Transition::new(names[s].clone(), engine.to_kind(kind).label(), names[*t].clone()))
    });
    Ok(Lts::new(names.iter().cloned(), names[0].clone(), transitions.collect::<Vec<_>>())
        .expect("product states cover every transition"))
}

/// All label sequences of length at most `k` the net can perform.
pub fn traces(net: &SystemNet, k: usize) -> BTreeSet<Vec<Label>> {
    let engine = Engine::new(net);
    let mut out = BTreeSet::new();
    let mut prefix = Vec::new();
    collect_traces(&engine, engine.initial(), k, &mut prefix, &mut out);
    out
}

fn collect_traces(engine: &Engine<'_>, cfg: &Config, k: usize, prefix: &mut Vec<Label>, out: &mut BTreeSet<Vec<Label>>) {
    out.insert(prefix.clone());
    if k == 0 {
        return;
    }
    for (kind, next) in engine.successors(cfg) {
        prefix.push(engine.to_kind(&kind).label());
        collect_traces(engine, &next, k - 1, prefix, out);
        prefix.pop();
    }
}

/// Decides whether two systems have the same traces up to length `k`
/// without enumerating them: both systems are determinised in lockstep and
/// every pair of macro-states reached by a word shorter than `k` must offer
/// the same labels.
pub fn bounded_trace_equivalent(a: &Lts, b: &Lts, k: usize) -> bool {
    type Macro<'a> = BTreeSet<&'a StateId>;
    fn offers<'a>(lts: &'a Lts, set: &Macro<'a>) -> BTreeMap<&'a Label, Macro<'a>> {
        let mut m: BTreeMap<&Label, Macro<'a>> = BTreeMap::new();
        for s in set {
            for t in lts.outgoing(s) {
                m.entry(&t.label).or_default().insert(&t.target);
            }
        }
        m
    }
    let start = (BTreeSet::from([a.initial()]), BTreeSet::from([b.initial()]));
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some(((sa, sb), depth)) = queue.pop_front() {
        if depth >= k {
            continue;
        }
        let (oa, ob) = (offers(a, &sa), offers(b, &sb));
        if !oa.keys().eq(ob.keys()) {
            return false;
        }
        for ((_, na), (_, nb)) in oa.into_iter().zip(ob) {
            let pair = (na, nb);
            if seen.insert(pair.clone()) {
                queue.push_back((pair, depth + 1));
            }
        }
    }
    true
}
