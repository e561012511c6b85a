//! Algebra laws as plain checks, shared by the property tests and the
//! acceptance run.

use std::collections::BTreeSet;

use hetcomp_core::semantics::bounded_trace_equivalent;
use hetcomp_core::{compose, product, remove, replace, select, AlgebraError, ChannelMode, Process, SystemNet};

pub type Law = Result<(), String>;

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Law {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

pub fn same_traces(a: &SystemNet, b: &SystemNet, k: usize) -> bool {
    bounded_trace_equivalent(&product(a, None).unwrap(), &product(b, None).unwrap(), k)
}

pub fn flattening(a: &Process, b: &Process, c: &Process) -> Law {
    let flat = compose([a.clone().into(), b.clone().into(), c.clone().into()]).unwrap();
    let left = compose([compose([a.clone().into(), b.clone().into()]).unwrap().into(), c.clone().into()]).unwrap();
    let right = compose([a.clone().into(), compose([b.clone().into(), c.clone().into()]).unwrap().into()]).unwrap();
    ensure(left == flat, || "compose(compose(A,B),C) differs from compose(A,B,C)".into())?;
    ensure(right == flat, || "compose(A,compose(B,C)) differs from compose(A,B,C)".into())
}

pub fn symmetry(a: &Process, b: &Process, modes: &[(&str, ChannelMode)]) -> Law {
    let with_modes = |n: SystemNet| modes.iter().fold(n, |n, (c, m)| n.with_mode(*c, *m));
    let ab = with_modes(compose([a.clone().into(), b.clone().into()]).unwrap());
    let ba = with_modes(compose([b.clone().into(), a.clone().into()]).unwrap());
    ensure(same_traces(&ab, &ba, 10), || "compose(P1,P2) and compose(P2,P1) differ in traces up to 10".into())
}

pub fn rename_round_trip(net: &SystemNet, channel: &str) -> Law {
    let fresh = "fresh_z";
    let there = net.rename(channel, fresh);
    ensure(!there.channels().contains(channel), || format!("`{channel}` survived renaming"))?;
    ensure(there.rename(fresh, channel) == *net, || "net rename round trip changed the net".into())?;
    for p in net.components().values() {
        ensure(p.rename(channel, fresh).rename(fresh, channel) == *p, || format!("rename round trip changed {}", p.name()))?;
    }
    Ok(())
}

pub fn remove_after_compose(a: &Process, b: &Process, c: &Process) -> Law {
    let all = compose([a.clone().into(), b.clone().into(), c.clone().into()]).unwrap();
    let without = remove(&all, b.name()).unwrap();
    let names: Vec<&str> = without.instance_names().collect();
    ensure(names == [a.name(), c.name()], || format!("components after remove: {names:?}"))?;
    ensure(without == compose([a.clone().into(), c.clone().into()]).unwrap(), || "remove(compose(A,B,C),B) != compose(A,C)".into())
}

/// compose(Sys minus old, old with its connected channels renamed apart, new),
/// built without calling `replace`.
pub fn replace_by_formula(net: &SystemNet, old: &str, new: &Process) -> SystemNet {
    let old_p = net.components()[old].clone();
    let mut connected: BTreeSet<String> = new.interface().clone();
    for (name, p) in net.components() {
        if name != old {
            connected.extend(p.interface().iter().cloned());
        }
    }
    let mut taken: BTreeSet<String> = net.components().values().flat_map(|p| p.interface().iter().cloned()).collect();
    taken.extend(new.interface().iter().cloned());
    let mut renamed = old_p.clone();
    for c in old_p.interface().intersection(&connected) {
        let mut k = 1;
        while taken.contains(&format!("__hidden_{k}_{c}")) {
            k += 1;
        }
        let fresh = format!("__hidden_{k}_{c}");
        taken.insert(fresh.clone());
        renamed = renamed.rename(c, &fresh);
    }
    let rest = remove(net, old).unwrap();
    compose([rest.into(), renamed.into(), new.clone().into()]).unwrap()
}

/// `Ok(true)` when the law was checked, `Ok(false)` when `new` shares no
/// channel with the net and `replace` rightly refused.
pub fn replace_matches_formula(net: &SystemNet, old: &str, new: &Process) -> Result<bool, String> {
    match replace(net, old, new.clone().into()) {
        Ok(out) => {
            let expected = replace_by_formula(net, old, new);
            let (got, want): (Vec<&str>, Vec<&str>) = (out.instance_names().collect(), expected.instance_names().collect());
            ensure(got == want, || format!("instances {got:?} vs {want:?}"))?;
            ensure(same_traces(&out, &expected, 10), || "replace and its expansion differ in traces up to 10".into())?;
            let hidden = select(&out, old).unwrap();
            let shared = out.shared_channels();
            ensure(hidden.interface().iter().all(|c| !shared.contains(c)), || "replaced component still shares a channel".into())?;
            Ok(true)
        }
        Err(AlgebraError::NoSharedChannel(_)) => {
            ensure(new.interface().is_disjoint(&net.shared_channels()), || "refused a replacement that plugs in".into())?;
            Ok(false)
        }
        Err(e) => Err(e.to_string()),
    }
}
