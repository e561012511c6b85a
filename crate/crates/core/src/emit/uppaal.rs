use std::fmt::Write;

use crate::algebra::{ChannelMode, SystemNet};
use crate::label::Direction;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UppaalError {
    #[error("channel `{0}` is asynchronous; only handshake channels can be written to Uppaal")]
    AsyncChannel(String),
}

const HEADER: &str = "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<!DOCTYPE nta PUBLIC '-//Uppaal Team//DTD Flat System 1.1//EN' 'http://www.it.uu.se/research/group/darts/uppaal/flat-1_1.dtd'>\n";

const SPACING: i64 = 100;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Writes the net as an Uppaal flat-1.1 document: one template per instance,
/// `chan` declarations for the shared channels, and a `system` line listing
/// every instance.
///
/// Sends and receives on shared channels become `synchronisation` labels;
/// everything else becomes an unlabelled edge. When an edge drops part of its
/// label (facets, or an action that is not synchronised) the full label text
/// goes into the edge's `comments`.
pub fn emit_uppaal(net: &SystemNet) -> Result<String, UppaalError> {
    let channels = net.channels();
    for (chan, mode) in net.declared_modes() {
        if matches!(mode, ChannelMode::Async { .. }) && channels.contains(chan) {
            return Err(UppaalError::AsyncChannel(chan.clone()));
        }
    }
    let shared = net.shared_channels();
    let mut out = String::from(HEADER);
    out.push_str("<nta>\n\t<declaration>// Global declarations.\n");
    for c in &shared {
        writeln!(out, "chan {c};").unwrap();
    }
    out.push_str("</declaration>\n");

    let mut next_id = 0usize;
    for (instance, process) in net.components() {
        let body = process.body();
        writeln!(out, "\t<template>\n\t\t<name>{}</name>\n\t\t<declaration>// Local declarations.\n</declaration>", escape(instance))
            .unwrap();
        let columns = (body.states().len() as f64).sqrt().ceil().max(1.0) as usize;
        let mut ids = std::collections::BTreeMap::new();
        let mut coords = std::collections::BTreeMap::new();
        for (i, state) in body.states().iter().enumerate() {
            let id = format!("id{next_id}");
            next_id += 1;
            let (x, y) = ((i % columns) as i64 * SPACING, (i / columns) as i64 * SPACING);
            writeln!(
                out,
                "\t\t<location id=\"{id}\" x=\"{x}\" y=\"{y}\">\n\t\t\t<name x=\"{}\" y=\"{}\">{}</name>\n\t\t</location>",
                x - 10,
                y - 30,
                escape(state.as_str())
            )
            .unwrap();
            ids.insert(state, id);
            coords.insert(state, (x, y));
        }
        writeln!(out, "\t\t<init ref=\"{}\"/>", ids[body.initial()]).unwrap();
        for t in body.transitions() {
            let comm = t.label.comm();
            let synchronised = comm.direction != Direction::Internal && shared.contains(&comm.channel);
            let (sx, sy) = coords[&t.source];
            let (tx, ty) = coords[&t.target];
            let (mx, my) = ((sx + tx) / 2, (sy + ty) / 2);
            writeln!(out, "\t\t<transition>\n\t\t\t<source ref=\"{}\"/>\n\t\t\t<target ref=\"{}\"/>", ids[&t.source], ids[&t.target])
                .unwrap();
            if synchronised {
                writeln!(out, "\t\t\t<label kind=\"synchronisation\" x=\"{mx}\" y=\"{}\">{}</label>", my - 15, escape(&comm.to_string()))
                    .unwrap();
            }
            if !synchronised || !t.label.facets().is_empty() {
                writeln!(out, "\t\t\t<label kind=\"comments\" x=\"{mx}\" y=\"{}\">{}</label>", my + 15, escape(&t.label.to_string()))
                    .unwrap();
            }
            out.push_str("\t\t</transition>\n");
        }
        out.push_str("\t</template>\n");
    }
    let instances: Vec<&str> = net.instance_names().collect();
    writeln!(out, "\t<system>system {};\n</system>\n</nta>", instances.join(", ")).unwrap();
    Ok(out)
}
