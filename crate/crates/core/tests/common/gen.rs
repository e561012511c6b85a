//! Random models for property tests and the acceptance run.

use hetcomp_core::{compose, ChannelMode, FacetName, Label, Lts, Process, StateId, SystemNet, Transition};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

pub fn state(i: usize) -> StateId {
    StateId::new(format!("s{i}")).unwrap()
}

/// Channel actions over `channels` plus two internal names.
pub fn comm_label(channels: &'static [&'static str]) -> impl Strategy<Value = Label> + Clone {
    let chan = proptest::sample::select(channels);
    prop_oneof![
        chan.clone().prop_map(Label::send),
        chan.prop_map(Label::receive),
        proptest::sample::select(&["t", "u"][..]).prop_map(Label::internal),
    ]
}

fn payload() -> impl Strategy<Value = String> + Clone {
    "([a-z0-9<>=\"&']{1,3}( [a-z0-9<>=]{1,2})?)?"
}

/// A label with up to three distinct facets.
pub fn faceted_label(channels: &'static [&'static str]) -> impl Strategy<Value = Label> + Clone {
    (comm_label(channels), proptest::sample::subsequence(FacetName::ALL.to_vec(), 0..=3), proptest::collection::vec(payload(), 3))
        .prop_map(|(base, names, payloads)| {
            let facets = names.into_iter().zip(payloads).collect();
            Label::new(base.comm().clone(), facets).unwrap()
        })
}

/// An Lts on states `s0..s{n-1}`, initial `s0`, labels from `label`.
pub fn lts_with<L>(max_states: usize, max_edges_per_state: usize, label: L) -> impl Strategy<Value = Lts>
where
    L: Strategy<Value = Label> + Clone + 'static,
{
    (1..=max_states).prop_flat_map(move |n| {
        proptest::collection::vec((0..n, label.clone(), 0..n), 0..=n * max_edges_per_state).prop_map(move |edges| {
            let transitions = edges.into_iter().map(|(s, l, t)| Transition::new(state(s), l, state(t)));
            Lts::new((0..n).map(state), state(0), transitions.collect::<Vec<_>>()).unwrap()
        })
    })
}

/// State names that need quoting in DOT.
pub fn odd_state_name() -> impl Strategy<Value = String> {
    "[A-Za-z0-9_<>:,.@#-]{1,6}"
}

/// An Lts with up to `max_states` arbitrarily named states and faceted labels.
pub fn arb_lts(max_states: usize) -> impl Strategy<Value = Lts> {
    proptest::collection::btree_set(odd_state_name(), 1..=max_states).prop_flat_map(|names| {
        let names: Vec<String> = names.into_iter().collect();
        let n = names.len();
        (Just(names), 0..n, proptest::collection::vec((0..n, faceted_label(&["a", "b", "c", "go"]), 0..n), 0..=2 * n))
            .prop_map(|(names, init, edges)| {
                let ids: Vec<StateId> = names.iter().map(|s| StateId::new(s.clone()).unwrap()).collect();
                let ts = edges.into_iter().map(|(s, l, t)| Transition::new(ids[s].clone(), l, ids[t].clone()));
                Lts::new(ids.clone(), ids[init].clone(), ts.collect::<Vec<_>>()).unwrap()
            })
    })
}

pub const NET_CHANNELS: &[&str] = &["a", "b"];

pub fn arb_process(name: &'static str, max_states: usize) -> impl Strategy<Value = Process> {
    lts_with(max_states, 2, comm_label(NET_CHANNELS)).prop_map(move |body| Process::new(name, body))
}

pub fn arb_mode() -> impl Strategy<Value = ChannelMode> {
    prop_oneof![Just(ChannelMode::Sync), (1usize..=2).prop_map(|c| ChannelMode::asynchronous(c).unwrap())]
}

/// 2 or 3 components named P0, P1, P2 with at most `max_states` states over
/// channels `a` and `b`. With `asynchronous` each channel gets a random mode.
pub fn arb_net(max_states: usize, asynchronous: bool) -> impl Strategy<Value = SystemNet> {
    let procs = (2usize..=3).prop_flat_map(move |k| {
        let names = ["P0", "P1", "P2"];
        (0..k).map(|i| arb_process(names[i], max_states)).collect::<Vec<_>>()
    });
    let modes = if asynchronous {
        proptest::collection::vec(arb_mode(), 2).boxed()
    } else {
        Just(vec![ChannelMode::Sync; 2]).boxed()
    };
    (procs, modes).prop_map(|(procs, modes)| {
        let net = compose(procs.into_iter().map(Into::into)).unwrap();
        NET_CHANNELS.iter().zip(modes).fold(net, |n, (c, m)| if m == ChannelMode::Sync { n } else { n.with_mode(*c, m) })
    })
}

/// Sync nets whose labels carry facets, for emitter round trips.
pub fn faceted_net() -> impl Strategy<Value = SystemNet> {
    let body = || lts_with(5, 2, faceted_label(NET_CHANNELS));
    (2usize..=3, body(), body(), body()).prop_map(|(k, a, b, c)| {
        let procs = [Process::new("P0", a), Process::new("P1", b), Process::new("P2", c)];
        compose(procs.into_iter().take(k).map(Into::into)).unwrap()
    })
}

/// Conjunction of one or two `instance.state` constraints chosen from `seeds`.
pub fn reach_query(net: &SystemNet, seeds: &[(usize, usize)]) -> String {
    let comps: Vec<(&String, &Process)> = net.components().iter().collect();
    let mut used = Vec::new();
    let mut parts = Vec::new();
    for &(i, s) in seeds {
        let (name, p) = comps[i % comps.len()];
        if used.contains(name) {
            continue;
        }
        used.push(name.clone());
        let states: Vec<&StateId> = p.body().states().iter().collect();
        parts.push(format!("{name}.{}", states[s % states.len()]));
    }
    format!("E<> {}", parts.join(" and "))
}

/// Draws `n` values from `strategy` with a fixed seed.
pub fn sample<S: Strategy>(strategy: S, n: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..n).map(|_| strategy.new_tree(&mut runner).unwrap().current()).collect()
}
