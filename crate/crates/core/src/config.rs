//! Minimal `key = value` text format shared by prior and experiment configs.
//!
//! One entry per line, `#` starts a comment, blank lines are ignored. Keys may
//! repeat when the consumer allows it (for example mixture components).

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

impl Entry {
    pub fn error(&self, reason: impl std::fmt::Display) -> Error {
        Error::Config { line: self.line, reason: format!("{}: {reason}", self.key) }
    }

    pub fn parse<T: FromStr>(&self) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.value.parse::<T>().map_err(|e| self.error(format!("cannot parse {:?}: {e}", self.value)))
    }

    /// Comma or whitespace separated list.
    pub fn list<T: FromStr>(&self) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.value
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<T>().map_err(|e| self.error(format!("cannot parse {s:?}: {e}"))))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: Vec<Entry>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::Config { line, reason: format!("expected `key = value`, got {content:?}") })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config { line, reason: "empty key".into() });
            }
            entries.push(Entry { line, key: key.to_string(), value: value.trim().to_string() });
        }
        Ok(Self { entries })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Last entry for `key`.
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().rev().find(|e| e.key == key)
    }

    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.key == key)
    }

    pub fn require(&self, key: &str) -> Result<&Entry> {
        self.get(key).ok_or_else(|| Error::Config { line: 0, reason: format!("missing required key `{key}`") })
    }

    /// Entries whose key starts with `prefix`, with the prefix removed.
    pub fn strip_prefix(&self, prefix: &str) -> KeyValues {
        let entries = self
            .entries
            .iter()
            .filter_map(|e| {
                e.key.strip_prefix(prefix).map(|k| Entry { line: e.line, key: k.to_string(), value: e.value.clone() })
            })
            .collect();
        KeyValues { entries }
    }

    /// Fails on the first key not in `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.iter().find(|e| !allowed.contains(&e.key.as_str())) {
            Some(e) => Err(e.error("unknown key")),
            None => Ok(()),
        }
    }
}
