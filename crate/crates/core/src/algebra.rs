//! The net-level algebra: processes, flat nets of named instances, and the
//! `compose`, `select`, `rename`, `remove`, `replace` and `extract_chan`
//! operators.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::num::NonZeroUsize;

use crate::label::FacetName;
use crate::lts::Lts;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("compose needs at least one process")]
    EmptyComposition,
    #[error("channel `{channel}` is {first} in one part and {second} in another")]
    ModeConflict { channel: String, first: ChannelMode, second: ChannelMode },
    #[error("no instance named `{0}` in the system")]
    UnknownInstance(String),
    #[error("cannot remove `{0}`: it is the last process of the system")]
    RemoveLast(String),
    #[error("replacement for `{0}` shares no channel with the system")]
    NoSharedChannel(String),
    #[error("process `{process}` uses channel `{channel}` missing from its declared interface")]
    InterfaceMissing { process: String, channel: String },
    #[error("asynchronous channel capacity must be at least 1")]
    ZeroCapacity,
}

/// How a channel communicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ChannelMode {
    /// Rendezvous between one sender and one receiver.
    #[default]
    Sync,
    /// FIFO buffer holding at most `capacity` messages.
    Async { capacity: NonZeroUsize },
}

impl ChannelMode {
    pub fn asynchronous(capacity: usize) -> Result<Self, AlgebraError> {
        NonZeroUsize::new(capacity).map(|capacity| ChannelMode::Async { capacity }).ok_or(AlgebraError::ZeroCapacity)
    }
}

impl fmt::Display for ChannelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelMode::Sync => f.write_str("sync"),
            ChannelMode::Async { capacity } => write!(f, "async {capacity}"),
        }
    }
}

/// A named transition system with its channel interface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Process {
    name: String,
    interface: BTreeSet<String>,
    body: Lts,
}

impl Process {
    /// A process whose interface is exactly the channels its body uses.
    pub fn new(name: impl Into<String>, body: Lts) -> Self {
        Self { name: name.into(), interface: body.channels(), body }
    }

    /// A process with a declared interface. The declaration may list extra
    /// channels but must cover every channel of the body; an empty
    /// declaration means "infer".
    pub fn with_interface(
        name: impl Into<String>,
        interface: impl IntoIterator<Item = String>,
        body: Lts,
    ) -> Result<Self, AlgebraError> {
        let name = name.into();
        let interface: BTreeSet<String> = interface.into_iter().collect();
        if interface.is_empty() {
            return Ok(Self::new(name, body));
        }
        if let Some(missing) = body.channels().into_iter().find(|c| !interface.contains(c)) {
            return Err(AlgebraError::InterfaceMissing { process: name, channel: missing });
        }
        Ok(Self { name, interface, body })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn interface(&self) -> &BTreeSet<String> {
        &self.interface
    }

    pub fn body(&self) -> &Lts {
        &self.body
    }

    pub fn with_name(&self, name: impl Into<String>) -> Process {
        Process { name: name.into(), ..self.clone() }
    }

    /// `P rename old as new`.
    pub fn rename(&self, old: &str, new: &str) -> Process {
        let mut interface = self.interface.clone();
        if interface.remove(old) {
            interface.insert(new.to_string());
        }
        Process { name: self.name.clone(), interface, body: self.body.rename_channel(old, new) }
    }

    /// Channels used inside the body, sorted.
    pub fn extract_chan(&self) -> Vec<String> {
        self.body.channels().into_iter().collect()
    }

    pub fn filter_facets(&self, keep: &[FacetName]) -> Process {
        Process { body: self.body.filter_facets(keep), ..self.clone() }
    }
}

/// A flat collection of named process instances plus the channel modes the
/// composition declared. Channels without a declared mode are synchronous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemNet {
    components: BTreeMap<String, Process>,
    modes: BTreeMap<String, ChannelMode>,
}

impl SystemNet {
    /// The degenerate net holding one process, instance-named after it.
    pub fn single(process: Process) -> Self {
        let mut components = BTreeMap::new();
        components.insert(process.name.clone(), process);
        Self { components, modes: BTreeMap::new() }
    }

    pub fn components(&self) -> &BTreeMap<String, Process> {
        &self.components
    }

    pub fn instance_names(&self) -> impl Iterator<Item = &str> {
        self.components.keys().map(String::as_str)
    }

    pub fn declared_modes(&self) -> &BTreeMap<String, ChannelMode> {
        &self.modes
    }

    pub fn mode(&self, channel: &str) -> ChannelMode {
        self.modes.get(channel).copied().unwrap_or_default()
    }

    /// Declares a channel mode, replacing any previous declaration.
    pub fn with_mode(mut self, channel: impl Into<String>, mode: ChannelMode) -> Self {
        self.modes.insert(channel.into(), mode);
        self
    }

    /// Every channel of every component interface.
    pub fn channels(&self) -> BTreeSet<String> {
        self.components.values().flat_map(|p| p.interface.iter().cloned()).collect()
    }

    /// Channels that occur in the interfaces of at least two components.
    pub fn shared_channels(&self) -> BTreeSet<String> {
        let mut count: BTreeMap<&str, usize> = BTreeMap::new();
        for p in self.components.values() {
            for c in &p.interface {
                *count.entry(c).or_default() += 1;
            }
        }
        count.into_iter().filter(|&(_, n)| n >= 2).map(|(c, _)| c.to_string()).collect()
    }

    pub fn is_shared(&self, channel: &str) -> bool {
        self.components.values().filter(|p| p.interface.contains(channel)).take(2).count() == 2
    }

    /// Renames a channel in every component (and its mode declaration).
    pub fn rename(&self, old: &str, new: &str) -> SystemNet {
        let components = self.components.iter().map(|(k, p)| (k.clone(), p.rename(old, new))).collect();
        let mut modes = self.modes.clone();
        if let Some(m) = modes.remove(old) {
            modes.insert(new.to_string(), m);
        }
        SystemNet { components, modes }
    }

    pub fn filter_facets(&self, keep: &[FacetName]) -> SystemNet {
        SystemNet {
            components: self.components.iter().map(|(k, p)| (k.clone(), p.filter_facets(keep))).collect(),
            modes: self.modes.clone(),
        }
    }
}

/// An argument of `compose` or `replace`: a process or an existing net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Part {
    Process(Process),
    Net(SystemNet),
}

impl Part {
    fn channels(&self) -> BTreeSet<String> {
        match self {
            Part::Process(p) => p.interface.clone(),
            Part::Net(n) => n.channels(),
        }
    }

    fn describe(&self) -> String {
        match self {
            Part::Process(p) => p.name.clone(),
            Part::Net(n) => n.instance_names().collect::<Vec<_>>().join(", "),
        }
    }
}

impl From<Process> for Part {
    fn from(p: Process) -> Self {
        Part::Process(p)
    }
}

impl From<SystemNet> for Part {
    fn from(n: SystemNet) -> Self {
        Part::Net(n)
    }
}

/// Picks `base`, or `base_2`, `base_3`, ... when taken.
fn unique_instance_name(base: &str, taken: &BTreeMap<String, Process>) -> String {
    if !taken.contains_key(base) {
        return base.to_string();
    }
    (2..).map(|k| format!("{base}_{k}")).find(|n| !taken.contains_key(n)).unwrap()
}

/// Parallel composition. Nets among the arguments are flattened, so nesting
/// does not matter.
pub fn compose(parts: impl IntoIterator<Item = Part>) -> Result<SystemNet, AlgebraError> {
    let mut components = BTreeMap::new();
    let mut modes: BTreeMap<String, ChannelMode> = BTreeMap::new();
    let mut any = false;
    for part in parts {
        any = true;
        let (members, part_modes) = match part {
            Part::Process(p) => (vec![(p.name.clone(), p)], BTreeMap::new()),
            Part::Net(n) => (n.components.into_iter().collect(), n.modes),
        };
        for (base, p) in members {
            let name = unique_instance_name(&base, &components);
            components.insert(name, p);
        }
        for (channel, mode) in part_modes {
            match modes.get(&channel) {
                Some(&existing) if existing != mode => {
                    return Err(AlgebraError::ModeConflict { channel, first: existing, second: mode });
                }
                _ => {
                    modes.insert(channel, mode);
                }
            }
        }
    }
    if !any {
        return Err(AlgebraError::EmptyComposition);
    }
    Ok(SystemNet { components, modes })
}

/// `net ▷ instance`.
pub fn select(net: &SystemNet, instance: &str) -> Result<Process, AlgebraError> {
    net.components.get(instance).cloned().ok_or_else(|| AlgebraError::UnknownInstance(instance.to_string()))
}

/// `net ↓ instance`.
pub fn remove(net: &SystemNet, instance: &str) -> Result<SystemNet, AlgebraError> {
    if !net.components.contains_key(instance) {
        return Err(AlgebraError::UnknownInstance(instance.to_string()));
    }
    if net.components.len() < 2 {
        return Err(AlgebraError::RemoveLast(instance.to_string()));
    }
    let mut out = net.clone();
    out.components.remove(instance);
    Ok(out)
}

/// Channels of `old` that must be cut when it is replaced by `new`: those it
/// shares with the other components or with the newcomer.
pub fn channels_to_hide(net: &SystemNet, old: &str, new: &Part) -> Result<BTreeSet<String>, AlgebraError> {
    let old_p = net.components.get(old).ok_or_else(|| AlgebraError::UnknownInstance(old.to_string()))?;
    let mut others: BTreeSet<String> = net
        .components
        .iter()
        .filter(|(k, _)| k.as_str() != old)
        .flat_map(|(_, p)| p.interface.iter().cloned())
        .collect();
    others.extend(new.channels());
    Ok(old_p.interface.intersection(&others).cloned().collect())
}

/// Fresh names `__hidden_<k>_<orig>` for each channel, with `k` the smallest
/// positive integer giving a name unused in the net, the newcomer, and the
/// names already handed out.
pub fn fresh_channel_names(
    channels: &BTreeSet<String>,
    net: &SystemNet,
    new: &Part,
) -> BTreeMap<String, String> {
    let mut used = net.channels();
    used.extend(new.channels());
    let mut out = BTreeMap::new();
    for c in channels {
        let fresh = (1..).map(|k| format!("__hidden_{k}_{c}")).find(|n| !used.contains(n)).unwrap();
        used.insert(fresh.clone());
        out.insert(c.clone(), fresh);
    }
    out
}

/// `replace(net, old, new)`: the channels `old` shares are renamed inside
/// `old` to fresh names, which cuts it off, and `new` is composed in. The
/// isolated `old` stays in the net; apply [`remove`] to drop it.
pub fn replace(net: &SystemNet, old: &str, new: Part) -> Result<SystemNet, AlgebraError> {
    let hide = channels_to_hide(net, old, &new)?;
    if new.channels().is_disjoint(&net.shared_channels()) {
        return Err(AlgebraError::NoSharedChannel(new.describe()));
    }
    let renaming = fresh_channel_names(&hide, net, &new);
    let mut isolated = net.components[old].clone();
    for (from, to) in &renaming {
        isolated = isolated.rename(from, to);
    }
    let mut cut = net.clone();
    cut.components.insert(old.to_string(), isolated);
    compose([Part::Net(cut), new])
}

/// `extractChan(p)`.
pub fn extract_chan(process: &Process) -> Vec<String> {
    process.extract_chan()
}
