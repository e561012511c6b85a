//! Minimal XML reader, enough for Uppaal flat documents, and the mapping from
//! templates back to transition systems.

use std::collections::BTreeMap;

use hetcomp_core::{Label, Lts, StateId, Transition};

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Element(Element),
    Text(String),
}

impl Element {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str())
    }

    pub fn elements<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Element> + 'a {
        self.children.iter().filter_map(move |c| match c {
            Node::Element(e) if e.name == name => Some(e),
            _ => None,
        })
    }

    pub fn child(&self, name: &str) -> Option<&Element> {
        self.children.iter().find_map(|c| match c {
            Node::Element(e) if e.name == name => Some(e),
            _ => None,
        })
    }

    pub fn text(&self) -> String {
        self.children
            .iter()
            .map(|c| match c {
                Node::Text(t) => t.clone(),
                Node::Element(e) => e.text(),
            })
            .collect()
    }
}

fn unescape(raw: &str) -> Result<String, String> {
    let mut out = String::new();
    let mut rest = raw;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        let end = rest[i..].find(';').ok_or("unterminated entity")? + i;
        out.push(match &rest[i + 1..end] {
            "lt" => '<',
            "gt" => '>',
            "amp" => '&',
            "quot" => '"',
            "apos" => '\'',
            other => return Err(format!("unknown entity &{other};")),
        });
        rest = &rest[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

struct Reader<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn skip_past(&mut self, end: &str) -> Result<(), String> {
        let i = self.rest().find(end).ok_or_else(|| format!("missing `{end}`"))?;
        self.pos += i + end.len();
        Ok(())
    }

    fn skip_misc(&mut self) -> Result<(), String> {
        loop {
            self.skip_ws();
            if self.rest().starts_with("<?") {
                self.skip_past("?>")?;
            } else if self.rest().starts_with("<!--") {
                self.skip_past("-->")?;
            } else if self.rest().starts_with("<!DOCTYPE") {
                self.skip_past(">")?;
            } else {
                return Ok(());
            }
        }
    }

    fn name(&mut self) -> Result<String, String> {
        let len = self.rest().find(|c: char| !(c.is_alphanumeric() || "_-:.".contains(c))).unwrap_or(self.rest().len());
        if len == 0 {
            return Err(format!("expected a name at byte {}", self.pos));
        }
        let n = self.rest()[..len].to_string();
        self.pos += len;
        Ok(n)
    }

    fn element(&mut self) -> Result<Element, String> {
        if !self.rest().starts_with('<') {
            return Err(format!("expected `<` at byte {}", self.pos));
        }
        self.pos += 1;
        let name = self.name()?;
        let mut attrs = Vec::new();
        loop {
            self.skip_ws();
            if self.rest().starts_with("/>") {
                self.pos += 2;
                return Ok(Element { name, attrs, children: vec![] });
            }
            if self.rest().starts_with('>') {
                self.pos += 1;
                break;
            }
            let key = self.name()?;
            self.skip_ws();
            if !self.rest().starts_with('=') {
                return Err(format!("attribute `{key}` without value"));
            }
            self.pos += 1;
            self.skip_ws();
            let quote = self.rest().chars().next().filter(|c| *c == '"' || *c == '\'').ok_or("unquoted attribute")?;
            self.pos += 1;
            let end = self.rest().find(quote).ok_or("unterminated attribute")?;
            let value = unescape(&self.rest()[..end])?;
            self.pos += end + 1;
            if attrs.iter().any(|(k, _)| *k == key) {
                return Err(format!("duplicate attribute `{key}`"));
            }
            attrs.push((key, value));
        }
        let mut children = Vec::new();
        loop {
            let text_end = self.rest().find('<').ok_or_else(|| format!("`{name}` is never closed"))?;
            if text_end > 0 {
                children.push(Node::Text(unescape(&self.rest()[..text_end])?));
                self.pos += text_end;
            }
            if self.rest().starts_with("</") {
                self.pos += 2;
                let close = self.name()?;
                if close != name {
                    return Err(format!("`{name}` closed by `{close}`"));
                }
                self.skip_ws();
                if !self.rest().starts_with('>') {
                    return Err("malformed end tag".into());
                }
                self.pos += 1;
                return Ok(Element { name, attrs, children });
            } else if self.rest().starts_with("<!--") {
                self.skip_past("-->")?;
            } else {
                children.push(Node::Element(self.element()?));
            }
        }
    }
}

/// Parses a whole document; fails on anything that is not well formed.
pub fn parse_xml(text: &str) -> Result<Element, String> {
    let mut r = Reader { text, pos: 0 };
    r.skip_misc()?;
    let root = r.element()?;
    r.skip_misc()?;
    if r.pos != text.len() {
        return Err("content after the root element".into());
    }
    Ok(root)
}

pub struct UppaalModel {
    pub channels: Vec<String>,
    pub templates: Vec<(String, Lts)>,
    pub system: Vec<String>,
}

/// Rebuilds each template as an Lts. The edge label is the `comments` text
/// when present, otherwise the synchronisation, otherwise `tau`.
pub fn read_uppaal(text: &str) -> Result<UppaalModel, String> {
    let root = parse_xml(text)?;
    if root.name != "nta" {
        return Err(format!("root is `{}`", root.name));
    }
    let decl = root.child("declaration").map(Element::text).unwrap_or_default();
    let channels = decl
        .lines()
        .filter_map(|l| l.trim().strip_prefix("chan "))
        .flat_map(|l| l.trim_end_matches(';').split(',').map(|c| c.trim().to_string()).collect::<Vec<_>>())
        .collect();
    let mut templates = Vec::new();
    for t in root.elements("template") {
        let name = t.child("name").ok_or("template without name")?.text();
        let mut ids = BTreeMap::new();
        for loc in t.elements("location") {
            let id = loc.attr("id").ok_or("location without id")?;
            let state = loc.child("name").map(Element::text).unwrap_or_else(|| id.to_string());
            ids.insert(id.to_string(), StateId::new(state).map_err(|e| e.to_string())?);
        }
        let init = t.child("init").and_then(|i| i.attr("ref")).ok_or("template without init")?;
        let initial = ids.get(init).ok_or("init refers to no location")?.clone();
        let mut transitions = Vec::new();
        for tr in t.elements("transition") {
            let end = |tag: &str| -> Result<StateId, String> {
                let r = tr.child(tag).and_then(|e| e.attr("ref")).ok_or(format!("transition without {tag}"))?;
                ids.get(r).cloned().ok_or(format!("{tag} refers to no location"))
            };
            let label_of = |kind: &str| tr.elements("label").find(|l| l.attr("kind") == Some(kind)).map(Element::text);
            let label = match (label_of("comments"), label_of("synchronisation")) {
                (Some(full), _) => Label::parse(&full),
                (None, Some(sync)) => Label::parse(&sync),
                (None, None) => Label::tau(),
            };
            transitions.push(Transition::new(end("source")?, label, end("target")?));
        }
        let lts = Lts::new(ids.values().cloned(), initial, transitions).map_err(|e| e.to_string())?;
        templates.push((name, lts));
    }
    let system = root
        .child("system")
        .map(Element::text)
        .unwrap_or_default()
        .trim()
        .strip_prefix("system")
        .ok_or("missing system line")?
        .trim()
        .trim_end_matches(';')
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    Ok(UppaalModel { channels, templates, system })
}
