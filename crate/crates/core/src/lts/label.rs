use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::json;

use crate::error::TermError;
use crate::multiset::Multiset;
use crate::name::Name;

/// `Out(a)` is the output `ā`; `Block(θ)` consumes `θ` atomically, so the
/// empty block is `τ` and a singleton block is an ordinary input.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Out(Name),
    Block(Multiset),
}

impl Label {
    pub fn tau() -> Self {
        Label::Block(Multiset::new())
    }

    pub fn input(a: Name) -> Self {
        Label::Block(Multiset::singleton(a))
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Label::Block(m) if m.is_empty())
    }

    pub fn names(&self) -> Vec<Name> {
        match self {
            Label::Out(a) => vec![a.clone()],
            Label::Block(m) => m.elements(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Label::Out(a) => json!({"kind": "out", "names": [a]}),
            Label::Block(m) => json!({"kind": "block", "names": m.elements()}),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Out(a) => write!(f, "{a}!"),
            Label::Block(m) if m.is_empty() => f.write_str("tau"),
            Label::Block(m) => write!(f, "{m}"),
        }
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_label(&s).map_err(serde::de::Error::custom)
    }
}

fn label_name(s: &str) -> Result<Name, TermError> {
    let s = s.trim();
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| TermError::InvalidName(s.to_string()))
}

/// Parses `a!`, `{a,b}`, `{a}`, `a?` (same as `{a}`) and `tau`.
pub fn parse_label(s: &str) -> Result<Label, TermError> {
    let s = s.trim();
    if s == "tau" || s == "{}" {
        return Ok(Label::tau());
    }
    if let Some(a) = s.strip_suffix('!') {
        return Ok(Label::Out(label_name(a)?));
    }
    if let Some(a) = s.strip_suffix('?') {
        return Ok(Label::input(label_name(a)?));
    }
    if let Some(inner) = s.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
        let mut m = Multiset::new();
        for part in inner.split(',') {
            m.insert(label_name(part)?);
        }
        return Ok(Label::Block(m));
    }
    Err(TermError::Invalid(format!("cannot read label `{s}`")))
}

/// Splits on whitespace or `.`, but never inside braces.
pub fn parse_labels(s: &str) -> Result<Vec<Label>, TermError> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0;
    for c in s.chars() {
        match c {
            '{' => {
                depth += 1;
                cur.push(c);
            }
            '}' => {
                depth -= 1;
                cur.push(c);
            }
            c if depth == 0 && (c.is_whitespace() || c == '.' || c == ';') => {
                if !cur.trim().is_empty() {
                    out.push(parse_label(&cur)?);
                }
                cur.clear();
            }
            c => cur.push(c),
        }
    }
    if !cur.trim().is_empty() {
        out.push(parse_label(&cur)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for s in ["a!", "{a}", "{a,a,b}", "tau"] {
            assert_eq!(parse_label(s).unwrap().to_string(), s);
        }
        assert_eq!(parse_label("b?").unwrap().to_string(), "{b}");
        let v = parse_labels("a! {a, b} . b?").unwrap();
        assert_eq!(v.len(), 3);
        assert!(parse_label("A!").is_err());
    }
}
