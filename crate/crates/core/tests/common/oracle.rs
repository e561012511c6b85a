//! Brute-force reference semantics: enumerate every global state a net could
//! be in, build the step relation straight from the interaction rules, then
//! compute reachability and distances by fixpoint iteration.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use hetcomp_core::{ChannelMode, Direction, GlobalState, GlobalTransition, Outcome, Query, StepKind, SystemNet, Verdict};

/// Local state names in instance order, and buffer contents per async channel.
pub type Key = (Vec<String>, BTreeMap<String, Vec<String>>);

pub struct Oracle {
    pub instances: Vec<String>,
    pub states: Vec<Key>,
    pub index: HashMap<Key, usize>,
    pub steps: Vec<BTreeSet<(String, usize)>>,
    pub initial: usize,
    pub reachable: Vec<bool>,
    pub distance: Vec<Option<usize>>,
}

fn sequences(alphabet: &[String], max_len: usize) -> Vec<Vec<String>> {
    let mut all = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for seq in &layer {
            for a in alphabet {
                let mut s: Vec<String> = seq.clone();
                s.push(a.clone());
                next.push(s);
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}

pub fn step_name(kind: &StepKind) -> String {
    match kind {
        StepKind::Handshake { channel, sender, receiver } => format!("sync {channel} {sender} {receiver}"),
        StepKind::AsyncSend { channel, instance } => format!("put {channel} {instance}"),
        StepKind::AsyncReceive { channel, instance } => format!("get {channel} {instance}"),
        StepKind::Local { instance, label } => format!("local {instance} {label}"),
    }
}

pub fn key_of(g: &GlobalState) -> Key {
    (g.locals.iter().map(|(_, s)| s.to_string()).collect(), g.buffers.clone())
}

impl Oracle {
    pub fn new(net: &SystemNet) -> Self {
        let comps: Vec<_> = net.components().iter().collect();
        let instances: Vec<String> = comps.iter().map(|(n, _)| n.to_string()).collect();
        let mut owners: BTreeMap<String, usize> = BTreeMap::new();
        for (_, p) in &comps {
            for c in p.interface() {
                *owners.entry(c.clone()).or_default() += 1;
            }
        }
        let shared = |c: &str| owners.get(c).copied().unwrap_or(0) >= 2;
        let capacity = |c: &str| match net.mode(c) {
            ChannelMode::Async { capacity } if shared(c) => Some(capacity.get()),
            _ => None,
        };
        let async_chans: Vec<(String, usize)> =
            owners.keys().filter_map(|c| capacity(c).map(|k| (c.clone(), k))).collect();

        // Every combination of local states and buffer contents.
        let mut locals: Vec<Vec<String>> = vec![vec![]];
        for (_, p) in &comps {
            locals = locals
                .into_iter()
                .flat_map(|prefix| {
                    p.body().states().iter().map(move |s| {
                        let mut v = prefix.clone();
                        v.push(s.to_string());
                        v
                    })
                })
                .collect();
        }
        let mut buffers: Vec<BTreeMap<String, Vec<String>>> = vec![BTreeMap::new()];
        for (c, cap) in &async_chans {
            let senders: Vec<String> = comps
                .iter()
                .filter(|(_, p)| p.body().transitions().iter().any(|t| t.label.comm().channel == *c && t.label.comm().direction == Direction::Send))
                .map(|(n, _)| n.to_string())
                .collect();
            let contents = sequences(&senders, *cap);
            buffers = buffers
                .into_iter()
                .flat_map(|m| {
                    contents.iter().map(move |seq| {
                        let mut m = m.clone();
                        m.insert(c.clone(), seq.clone());
                        m
                    })
                })
                .collect();
        }
        let mut states = Vec::new();
        for l in &locals {
            for b in &buffers {
                states.push((l.clone(), b.clone()));
            }
        }
        let index: HashMap<Key, usize> = states.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();

        let mut steps = Vec::with_capacity(states.len());
        for (loc, buf) in &states {
            let mut out = BTreeSet::new();
            for (i, (name, p)) in comps.iter().enumerate() {
                for t in p.body().transitions().iter().filter(|t| t.source.as_str() == loc[i]) {
                    let comm = t.label.comm();
                    let c = comm.channel.as_str();
                    let mut next_loc = loc.clone();
                    next_loc[i] = t.target.to_string();
                    if comm.direction == Direction::Internal || !shared(c) {
                        out.insert((format!("local {name} {}", t.label), index[&(next_loc, buf.clone())]));
                    } else if let Some(cap) = capacity(c) {
                        let mut next_buf = buf.clone();
                        let queue = next_buf.get_mut(c).unwrap();
                        if comm.direction == Direction::Send && queue.len() < cap {
                            queue.push(name.to_string());
                            out.insert((format!("put {c} {name}"), index[&(next_loc, next_buf)]));
                        } else if comm.direction == Direction::Receive && !queue.is_empty() {
                            queue.remove(0);
                            out.insert((format!("get {c} {name}"), index[&(next_loc, next_buf)]));
                        }
                    } else if comm.direction == Direction::Send {
                        for (j, (other, q)) in comps.iter().enumerate() {
                            if j == i {
                                continue;
                            }
                            for r in q.body().transitions() {
                                if r.source.as_str() == loc[j]
                                    && r.label.comm().direction == Direction::Receive
                                    && r.label.comm().channel == c
                                {
                                    let mut both = next_loc.clone();
                                    both[j] = r.target.to_string();
                                    out.insert((format!("sync {c} {name} {other}"), index[&(both, buf.clone())]));
                                }
                            }
                        }
                    }
                }
            }
            steps.push(out);
        }

        let init_loc: Vec<String> = comps.iter().map(|(_, p)| p.body().initial().to_string()).collect();
        let init_buf: BTreeMap<String, Vec<String>> = async_chans.iter().map(|(c, _)| (c.clone(), vec![])).collect();
        let initial = index[&(init_loc, init_buf)];

        let n = states.len();
        let mut reachable = vec![false; n];
        reachable[initial] = true;
        let mut distance: Vec<Option<usize>> = vec![None; n];
        distance[initial] = Some(0);
        loop {
            let mut changed = false;
            for s in 0..n {
                let Some(d) = distance[s] else { continue };
                for (_, t) in &steps[s] {
                    if distance[*t].is_none_or(|e| e > d + 1) {
                        distance[*t] = Some(d + 1);
                        reachable[*t] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        Oracle { instances, states, index, steps, initial, reachable, distance }
    }

    pub fn reachable_count(&self) -> usize {
        self.reachable.iter().filter(|r| **r).count()
    }

    fn targets(&self, query: &Query) -> Vec<usize> {
        (0..self.states.len())
            .filter(|&s| self.reachable[s])
            .filter(|&s| match query {
                Query::DeadlockFree => self.steps[s].is_empty(),
                Query::Reach(conds) => conds.iter().all(|(inst, st)| {
                    let i = self.instances.iter().position(|n| n == inst).unwrap();
                    self.states[s].0[i] == st.as_str()
                }),
            })
            .collect()
    }

    /// Expected outcome and, when a witness is due, its length.
    pub fn expect(&self, query: &Query) -> (Outcome, Option<usize>) {
        let hits = self.targets(query);
        let shortest = hits.iter().filter_map(|&s| self.distance[s]).min();
        match query {
            Query::DeadlockFree if hits.is_empty() => (Outcome::True, None),
            Query::DeadlockFree => (Outcome::False, shortest),
            Query::Reach(_) if hits.is_empty() => (Outcome::False, None),
            Query::Reach(_) => (Outcome::True, shortest),
        }
    }

    /// Compares a verdict with the oracle. A witness must be a real path from
    /// the initial state to a target state and as short as possible.
    pub fn judge(&self, verdict: &Verdict) -> Result<(), String> {
        let (outcome, length) = self.expect(&verdict.query);
        if verdict.outcome != outcome {
            return Err(format!("outcome {:?}, oracle says {:?}", verdict.outcome, outcome));
        }
        match (&verdict.witness, length) {
            (None, None) => Ok(()),
            (Some(w), Some(len)) => {
                if w.len() != len {
                    return Err(format!("witness has {} steps, shortest is {len}", w.len()));
                }
                self.follow(w, &verdict.query)
            }
            (w, len) => Err(format!("witness presence mismatch: {:?} vs expected length {len:?}", w.as_ref().map(Vec::len))),
        }
    }

    fn follow(&self, path: &[GlobalTransition], query: &Query) -> Result<(), String> {
        let mut at = self.initial;
        for step in path {
            let from = self.index.get(&key_of(&step.source)).ok_or("witness state unknown to oracle")?;
            if *from != at {
                return Err(format!("witness step starts at {} instead of {:?}", step.source, self.states[at]));
            }
            let to = *self.index.get(&key_of(&step.target)).ok_or("witness state unknown to oracle")?;
            if !self.steps[at].contains(&(step_name(&step.kind), to)) {
                return Err(format!("witness step {} not in the oracle relation", step_name(&step.kind)));
            }
            at = to;
        }
        if self.targets(query).contains(&at) {
            Ok(())
        } else {
            Err("witness does not end in a target state".into())
        }
    }
}
