use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::algebra::Process;
use crate::label::{Direction, Label};
use crate::lts::StateId;

/// LOTOS process names for each state. Characters LOTOS rejects become `_`;
/// names that collide after that get a numeric suffix.
fn process_ids(states: &BTreeSet<StateId>) -> BTreeMap<&StateId, String> {
    let mut taken = BTreeSet::new();
    let mut out = BTreeMap::new();
    for state in states {
        let clean: String = state.as_str().chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
        let base = format!("st_{clean}");
        let id = if taken.contains(&base) {
            (2..).map(|k| format!("{base}_{k}")).find(|n| !taken.contains(n) && !states_clash(states, n)).unwrap()
        } else {
            base
        };
        taken.insert(id.clone());
        out.insert(state, id);
    }
    out
}

// A suffixed name must not be the plain name of a later state.
fn states_clash(states: &BTreeSet<StateId>, candidate: &str) -> bool {
    states.iter().any(|s| format!("st_{}", s.as_str().replace(|c: char| !c.is_ascii_alphanumeric(), "_")) == candidate)
}

fn call(id: &str, gates: &str) -> String {
    if gates.is_empty() {
        id.to_string()
    } else {
        format!("{id} [{gates}]")
    }
}

fn action(label: &Label) -> String {
    let comm = label.comm();
    let mut text = match comm.direction {
        Direction::Send => format!("{} (* ! *)", comm.channel),
        Direction::Receive => format!("{} (* ? *)", comm.channel),
        Direction::Internal => format!("i (* {} *)", comm.channel),
    };
    if !label.facets().is_empty() {
        write!(text, " (* {} *)", label.facets_text().replace("*)", "* )")).unwrap();
    }
    text
}

/// Renders a process as a LOTOS specification with one recursive process per
/// state. LOTOS gates carry no direction, so `!`/`?` survive as comments.
pub fn emit_lotos(process: &Process) -> String {
    let body = process.body();
    let mut directions: BTreeMap<&str, (bool, bool)> = BTreeMap::new();
    for t in body.transitions() {
        let comm = t.label.comm();
        let entry = directions.entry(comm.channel.as_str());
        match comm.direction {
            Direction::Send => entry.or_default().0 = true,
            Direction::Receive => entry.or_default().1 = true,
            Direction::Internal => {}
        }
    }
    let gate_list: Vec<&str> = directions.keys().copied().collect();
    let gates = gate_list.join(", ");
    let annotated: Vec<String> = directions
        .iter()
        .map(|(g, (send, recv))| format!("{g}{}{}", if *send { "!" } else { "" }, if *recv { "?" } else { "" }))
        .collect();

    let mut out = String::new();
    writeln!(out, "(* {} *)", process.name()).unwrap();
    writeln!(out, "(* gate directions: {} *)", annotated.join(", ")).unwrap();
    if gates.is_empty() {
        writeln!(out, "specification {} : noexit", process.name()).unwrap();
    } else {
        writeln!(out, "specification {} [{gates}] : noexit", process.name()).unwrap();
    }
    let ids = process_ids(body.states());
    writeln!(out, "behaviour\n   {}\nwhere", call(&ids[body.initial()], &gates)).unwrap();
    for state in body.states() {
        let header = if gates.is_empty() {
            format!("process {} : noexit :=", ids[state])
        } else {
            format!("process {} [{gates}] : noexit :=", ids[state])
        };
        writeln!(out, "\n   {header}").unwrap();
        let choices: Vec<String> =
            body.outgoing(state).map(|t| format!("{}; {}", action(&t.label), call(&ids[&t.target], &gates))).collect();
        if choices.is_empty() {
            out.push_str("        stop\n");
        }
        for (i, choice) in choices.iter().enumerate() {
            let sep = if i == 0 { "   " } else { "[] " };
            writeln!(out, "     {sep}{choice}").unwrap();
        }
        out.push_str("   endproc\n");
    }
    out.push_str("endspec\n");
    out
}
