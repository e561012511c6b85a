use std::fmt::Write;

use crate::algebra::Process;
use crate::label::is_ident;
use crate::lts::Lts;

fn id(name: &str) -> String {
    if is_ident(name) {
        name.to_string()
    } else {
        quote(name)
    }
}

fn quote(text: &str) -> String {
    format!("\"{}\"", text.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Writes `lts` as a DOT digraph that the DOT reader maps back to an
/// isomorphic system. Nodes are listed in name order with the initial state
/// tagged `init=true`; edges follow the transition order.
pub fn emit_dot(name: &str, lts: &Lts) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", id(name)).unwrap();
    for s in lts.states() {
        if s == lts.initial() {
            writeln!(out, "  {} [init=true];", id(s.as_str())).unwrap();
        } else {
            writeln!(out, "  {};", id(s.as_str())).unwrap();
        }
    }
    for t in lts.transitions() {
        write!(out, "  {} -> {} [label={}", id(t.source.as_str()), id(t.target.as_str()), quote(&t.label.comm().to_string()))
            .unwrap();
        if !t.label.facets().is_empty() {
            write!(out, ", facets={}", quote(&t.label.facets_text())).unwrap();
        }
        out.push_str("];\n");
    }
    out.push_str("}\n");
    out
}

pub fn emit_process_dot(process: &Process) -> String {
    emit_dot(process.name(), process.body())
}
