//! Faceted transition labels.
//!
//! A label is a stack of layers: the communication layer is always present and
//! is the only one with executable meaning, the remaining layers (`guard`,
//! `time`, `data`, `other`) are carried along as raw text.
//!
//! Text form: `comm ('|' name ':' payload)*` where `comm` is `chan!`, `chan?`
//! or a bare action name.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

/// Name of the silent action used for unlabelled edges.
pub const TAU: &str = "tau";

/// Returns true for non-empty identifier tokens (letters, digits, underscore).
pub fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Direction {
    Send,
    Receive,
    Internal,
}

/// The communication layer of a label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelAction {
    pub channel: String,
    pub direction: Direction,
}

impl ChannelAction {
    pub fn send(channel: impl Into<String>) -> Self {
        Self { channel: channel.into(), direction: Direction::Send }
    }

    pub fn receive(channel: impl Into<String>) -> Self {
        Self { channel: channel.into(), direction: Direction::Receive }
    }

    pub fn internal(name: impl Into<String>) -> Self {
        Self { channel: name.into(), direction: Direction::Internal }
    }

    /// True for sends and receives, the actions that name a channel.
    pub fn is_communication(&self) -> bool {
        self.direction != Direction::Internal
    }
}

impl fmt::Display for ChannelAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.direction {
            Direction::Send => write!(f, "{}!", self.channel),
            Direction::Receive => write!(f, "{}?", self.channel),
            Direction::Internal => f.write_str(&self.channel),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FacetName {
    Guard,
    Time,
    Data,
    Other,
}

impl FacetName {
    pub const ALL: [FacetName; 4] = [FacetName::Guard, FacetName::Time, FacetName::Data, FacetName::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            FacetName::Guard => "guard",
            FacetName::Time => "time",
            FacetName::Data => "data",
            FacetName::Other => "other",
        }
    }
}

impl FromStr for FacetName {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "guard" => Ok(FacetName::Guard),
            "time" => Ok(FacetName::Time),
            "data" => Ok(FacetName::Data),
            "other" => Ok(FacetName::Other),
            _ => Err(()),
        }
    }
}

impl fmt::Display for FacetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("facet `{0}` appears twice in one label")]
pub struct DuplicateFacet(pub FacetName);

/// A transition label: a communication action plus named facets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    comm: ChannelAction,
    facets: Vec<(FacetName, String)>,
}

impl Label {
    pub fn new(comm: ChannelAction, facets: Vec<(FacetName, String)>) -> Result<Self, DuplicateFacet> {
        for (i, (name, _)) in facets.iter().enumerate() {
            if facets[..i].iter().any(|(n, _)| n == name) {
                return Err(DuplicateFacet(*name));
            }
        }
        Ok(Self { comm, facets })
    }

    /// A label with no facets.
    pub fn plain(comm: ChannelAction) -> Self {
        Self { comm, facets: Vec::new() }
    }

    pub fn send(channel: &str) -> Self {
        Self::plain(ChannelAction::send(channel))
    }

    pub fn receive(channel: &str) -> Self {
        Self::plain(ChannelAction::receive(channel))
    }

    pub fn internal(name: &str) -> Self {
        Self::plain(ChannelAction::internal(name))
    }

    pub fn tau() -> Self {
        Self::internal(TAU)
    }

    pub fn comm(&self) -> &ChannelAction {
        &self.comm
    }

    pub fn facets(&self) -> &[(FacetName, String)] {
        &self.facets
    }

    pub fn facet(&self, name: FacetName) -> Option<&str> {
        self.facets.iter().find(|(n, _)| *n == name).map(|(_, p)| p.as_str())
    }

    /// Keeps the communication layer and only the facets named in `keep`.
    pub fn retain_facets(&self, keep: &[FacetName]) -> Label {
        Label {
            comm: self.comm.clone(),
            facets: self.facets.iter().filter(|(n, _)| keep.contains(n)).cloned().collect(),
        }
    }

    pub(crate) fn with_comm(&self, comm: ChannelAction) -> Label {
        Label { comm, facets: self.facets.clone() }
    }

    /// Renders only the facet layers, `name:payload` joined by `|`.
    pub fn facets_text(&self) -> String {
        self.facets.iter().map(|(n, p)| format!("{n}:{p}")).collect::<Vec<_>>().join("|")
    }

    /// Parses the label text grammar. Never fails: text that is not a
    /// recognizable action becomes a `tau` action whose raw text is kept in
    /// the `other` facet.
    pub fn parse(text: &str) -> Label {
        let mut segments = text.split('|');
        let comm_text = segments.next().unwrap_or("").trim();
        let mut builder = FacetBuilder::default();
        let comm = parse_comm(comm_text, &mut builder);
        for seg in segments {
            builder.push_segment(seg.trim());
        }
        Label { comm, facets: builder.facets }
    }

    /// Adds facets parsed from `name:payload|...` text to this label.
    /// Used by the DOT reader for the separate `facets` attribute.
    pub fn extend_facets(&mut self, text: &str) {
        let mut builder = FacetBuilder { facets: std::mem::take(&mut self.facets) };
        for seg in text.split('|') {
            builder.push_segment(seg.trim());
        }
        self.facets = builder.facets;
    }
}

impl From<ChannelAction> for Label {
    fn from(comm: ChannelAction) -> Self {
        Label::plain(comm)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.comm)?;
        for (name, payload) in &self.facets {
            write!(f, "|{name}:{payload}")?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct FacetBuilder {
    facets: Vec<(FacetName, String)>,
}

impl FacetBuilder {
    fn push_segment(&mut self, seg: &str) {
        if let Some((name, payload)) = seg.split_once(':') {
            if let Ok(name) = name.trim().parse::<FacetName>() {
                if !self.facets.iter().any(|(n, _)| *n == name) {
                    self.facets.push((name, payload.trim().to_string()));
                    return;
                }
            }
        }
        self.push_other(seg);
    }

    // Unnamed payloads, unknown names and repeated names all land in `other`.
    fn push_other(&mut self, raw: &str) {
        match self.facets.iter_mut().find(|(n, _)| *n == FacetName::Other) {
            Some((_, payload)) => {
                payload.push('|');
                payload.push_str(raw);
            }
            None => self.facets.push((FacetName::Other, raw.to_string())),
        }
    }
}

fn parse_comm(text: &str, facets: &mut FacetBuilder) -> ChannelAction {
    if text.is_empty() {
        return ChannelAction::internal(TAU);
    }
    if is_ident(text) {
        return ChannelAction::internal(text);
    }
    let split = text.find(['!', '?']);
    if let Some(pos) = split {
        let (chan, rest) = text.split_at(pos);
        if is_ident(chan) {
            let direction = if rest.starts_with('!') { Direction::Send } else { Direction::Receive };
            // SPIN-style `ch!1` / `ch?x`: the tail goes to `other`.
            let tail = rest[1..].trim();
            if !tail.is_empty() {
                facets.push_other(tail);
            }
            return ChannelAction { channel: chan.to_string(), direction };
        }
    }
    facets.push_other(text);
    ChannelAction::internal(TAU)
}
