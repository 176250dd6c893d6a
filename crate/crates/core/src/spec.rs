//! Parsing helpers for `tag:key=value,...` spec strings.

use crate::error::{Error, Result};

/// Key/value parameters of a spec string, consumed one key at a time so
/// that leftovers can be reported as unknown.
#[derive(Debug)]
pub struct Params {
    context: String,
    entries: Vec<(String, f64)>,
}

impl Params {
    pub fn parse(context: &str, text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("{context}: expected key=value, got '{item}'")))?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{context}: '{}' is not a number", v.trim())))?;
            let key = k.trim().to_string();
            if entries.iter().any(|(e, _)| *e == key) {
                return Err(Error::Parse(format!("{context}: duplicate parameter '{key}'")));
            }
            entries.push((key, value));
        }
        Ok(Params {
            context: context.to_string(),
            entries,
        })
    }

    pub fn take(&mut self, key: &str) -> Option<f64> {
        let pos = self.entries.iter().position(|(k, _)| k == key)?;
        Some(self.entries.remove(pos).1)
    }

    pub fn require(&mut self, key: &str) -> Result<f64> {
        self.take(key)
            .ok_or_else(|| Error::Parse(format!("{}: missing parameter '{key}'", self.context)))
    }

    pub fn or(&mut self, key: &str, default: f64) -> f64 {
        self.take(key).unwrap_or(default)
    }

    pub fn finish(self) -> Result<()> {
        match self.entries.first() {
            None => Ok(()),
            Some((k, _)) => Err(Error::Parse(format!("{}: unknown parameter '{k}'", self.context))),
        }
    }
}

/// Split `tag:rest` into its tag and remainder (empty when no colon).
pub fn split_tag(text: &str) -> (&str, &str) {
    match text.trim().split_once(':') {
        Some((tag, rest)) => (tag.trim(), rest.trim()),
        None => (text.trim(), ""),
    }
}
