//! Labelled transition systems `<S, L, ->`, the common semantic domain every
//! imported model is embedded into.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::label::{FacetName, Label};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LtsError {
    #[error("invalid state name `{0}`")]
    InvalidStateName(String),
    #[error("initial state `{0}` is not a state of the system")]
    UnknownInitial(String),
    #[error("transition {from} -> {to} references an unknown state")]
    DanglingTransition { from: String, to: String },
}

/// Name of a state.
///
/// Parsed models only ever produce identifier tokens; derived systems (the
/// global product) use richer names, so the only hard rule here is: non-empty,
/// no whitespace, no quote.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(String);

impl StateId {
    pub fn new(name: impl Into<String>) -> Result<Self, LtsError> {
        let name = name.into();
        if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c.is_control() || c == '"') {
            return Err(LtsError::InvalidStateName(name));
        }
        Ok(StateId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for StateId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: StateId,
    pub label: Label,
    pub target: StateId,
}

impl Transition {
    pub fn new(source: StateId, label: Label, target: StateId) -> Self {
        Self { source, label, target }
    }
}

/// A labelled transition system. Transitions form a set: relabelling that makes
/// two triples equal merges them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    states: BTreeSet<StateId>,
    initial: StateId,
    transitions: BTreeSet<Transition>,
}

impl Lts {
    pub fn new(
        states: impl IntoIterator<Item = StateId>,
        initial: StateId,
        transitions: impl IntoIterator<Item = Transition>,
    ) -> Result<Self, LtsError> {
        let states: BTreeSet<StateId> = states.into_iter().collect();
        if !states.contains(&initial) {
            return Err(LtsError::UnknownInitial(initial.0));
        }
        let transitions: BTreeSet<Transition> = transitions.into_iter().collect();
        for t in &transitions {
            if !states.contains(&t.source) || !states.contains(&t.target) {
                return Err(LtsError::DanglingTransition { from: t.source.0.clone(), to: t.target.0.clone() });
            }
        }
        Ok(Self { states, initial, transitions })
    }

    /// Builds an LTS whose states are the initial state plus every transition
    /// endpoint.
    pub fn from_transitions(initial: StateId, transitions: impl IntoIterator<Item = Transition>) -> Self {
        let transitions: BTreeSet<Transition> = transitions.into_iter().collect();
        let mut states = BTreeSet::new();
        states.insert(initial.clone());
        for t in &transitions {
            states.insert(t.source.clone());
            states.insert(t.target.clone());
        }
        Self { states, initial, transitions }
    }

    pub fn states(&self) -> &BTreeSet<StateId> {
        &self.states
    }

    pub fn initial(&self) -> &StateId {
        &self.initial
    }

    pub fn transitions(&self) -> &BTreeSet<Transition> {
        &self.transitions
    }

    pub fn outgoing<'a>(&'a self, state: &'a StateId) -> impl Iterator<Item = &'a Transition> + 'a {
        self.transitions.iter().filter(move |t| &t.source == state)
    }

    pub fn contains_state(&self, name: &str) -> bool {
        self.states.contains(name)
    }

    /// Channels named by send and receive actions. Internal actions do not
    /// count.
    pub fn channels(&self) -> BTreeSet<String> {
        self.transitions
            .iter()
            .filter(|t| t.label.comm().is_communication())
            .map(|t| t.label.comm().channel.clone())
            .collect()
    }

    /// Drops every facet not listed in `keep`. The communication layer always
    /// survives.
    pub fn filter_facets(&self, keep: &[FacetName]) -> Lts {
        self.map_labels(|l| l.retain_facets(keep))
    }

    /// Renames channel `old` to `new` in every send and receive.
    pub fn rename_channel(&self, old: &str, new: &str) -> Lts {
        self.map_labels(|l| {
            let comm = l.comm();
            if comm.is_communication() && comm.channel == old {
                let mut renamed = comm.clone();
                renamed.channel = new.to_string();
                l.with_comm(renamed)
            } else {
                l.clone()
            }
        })
    }

    fn map_labels(&self, f: impl Fn(&Label) -> Label) -> Lts {
        Lts {
            states: self.states.clone(),
            initial: self.initial.clone(),
            transitions: self
                .transitions
                .iter()
                .map(|t| Transition::new(t.source.clone(), f(&t.label), t.target.clone()))
                .collect(),
        }
    }

    /// True when some bijection between the state sets maps the initial state
    /// to the initial state and transitions exactly onto transitions.
    pub fn is_isomorphic(&self, other: &Lts) -> bool {
        if self.states.len() != other.states.len() || self.transitions.len() != other.transitions.len() {
            return false;
        }
        let a = Indexed::new(self);
        let b = Indexed::new(other);
        let (ca, cb) = refine_colours(&a, &b);
        let mut map = vec![usize::MAX; a.n];
        let mut used = vec![false; b.n];
        // Try the states with the fewest candidates first.
        let mut order: Vec<usize> = (0..a.n).collect();
        let mut class_size: HashMap<u64, usize> = HashMap::new();
        for &c in &cb {
            *class_size.entry(c).or_default() += 1;
        }
        order.sort_by_key(|&s| (class_size.get(&ca[s]).copied().unwrap_or(0), s));
        if order.iter().any(|&s| !class_size.contains_key(&ca[s])) {
            return false;
        }
        extend_mapping(&a, &b, &ca, &cb, &order, 0, &mut map, &mut used)
    }
}

struct Indexed {
    n: usize,
    initial: usize,
    /// Per source: (label id, target); label ids index `labels`.
    out: Vec<Vec<(usize, usize)>>,
    edges: BTreeSet<(usize, usize, usize)>,
    labels: Vec<Label>,
}

impl Indexed {
    fn new(lts: &Lts) -> Self {
        let index: BTreeMap<&StateId, usize> = lts.states.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut labels: Vec<Label> = lts.transitions.iter().map(|t| t.label.clone()).collect();
        labels.sort();
        labels.dedup();
        let mut out = vec![Vec::new(); lts.states.len()];
        let mut edges = BTreeSet::new();
        for t in &lts.transitions {
            let l = labels.binary_search(&t.label).unwrap();
            let (s, d) = (index[&t.source], index[&t.target]);
            out[s].push((l, d));
            edges.insert((s, l, d));
        }
        Self { n: lts.states.len(), initial: index[&lts.initial], out, edges, labels }
    }
}

fn hash_of<T: std::hash::Hash>(v: &T) -> u64 {
    use std::hash::Hasher;
    let mut h = std::collections::hash_map::DefaultHasher::new();
    v.hash(&mut h);
    h.finish()
}

/// Colour refinement run on both systems in lockstep so colours are comparable.
fn refine_colours(a: &Indexed, b: &Indexed) -> (Vec<u64>, Vec<u64>) {
    let init = |g: &Indexed| -> Vec<u64> { (0..g.n).map(|s| hash_of(&(s == g.initial))).collect() };
    let (mut ca, mut cb) = (init(a), init(b));
    let classes = |c: &[u64]| c.iter().collect::<BTreeSet<_>>().len();
    loop {
        let step = |g: &Indexed, c: &[u64]| -> Vec<u64> {
            let mut incoming: Vec<Vec<(&Label, u64)>> = vec![Vec::new(); g.n];
            let mut next = Vec::with_capacity(g.n);
            for (s, out) in g.out.iter().enumerate() {
                for &(l, d) in out {
                    incoming[d].push((&g.labels[l], c[s]));
                }
            }
            for s in 0..g.n {
                let mut outs: Vec<(&Label, u64)> = g.out[s].iter().map(|&(l, d)| (&g.labels[l], c[d])).collect();
                outs.sort();
                incoming[s].sort();
                next.push(hash_of(&(c[s], &outs, &incoming[s])));
            }
            next
        };
        let (na, nb) = (step(a, &ca), step(b, &cb));
        let stable = classes(&na) == classes(&ca) && classes(&nb) == classes(&cb);
        ca = na;
        cb = nb;
        if stable {
            return (ca, cb);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn extend_mapping(
    a: &Indexed,
    b: &Indexed,
    ca: &[u64],
    cb: &[u64],
    order: &[usize],
    depth: usize,
    map: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    let Some(&s) = order.get(depth) else {
        return true;
    };
    for cand in 0..b.n {
        if used[cand] || cb[cand] != ca[s] || ((s == a.initial) != (cand == b.initial)) {
            continue;
        }
        map[s] = cand;
        if consistent(a, b, s, map) {
            used[cand] = true;
            if extend_mapping(a, b, ca, cb, order, depth + 1, map, used) {
                return true;
            }
            used[cand] = false;
        }
        map[s] = usize::MAX;
    }
    false
}

/// Every edge between already-mapped states touching `s` must exist on the
/// other side with the same label.
fn consistent(a: &Indexed, b: &Indexed, s: usize, map: &[usize]) -> bool {
    let lookup = |l: usize| b.labels.binary_search(&a.labels[l]).ok();
    a.edges.iter().filter(|&&(x, _, y)| x == s || y == s).all(|&(x, l, y)| {
        if map[x] == usize::MAX || map[y] == usize::MAX {
            return true;
        }
        match lookup(l) {
            Some(lb) => b.edges.contains(&(map[x], lb, map[y])),
            None => false,
        }
    })
}
