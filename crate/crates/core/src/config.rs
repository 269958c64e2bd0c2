//! Flat `key = value` configuration files.
//!
//! ```text
//! # comment
//! seed = 7
//! spatial_bandwidth_km = 1.6   # trailing comments are allowed
//! ```
//!
//! Keys are ASCII letters, digits, `_`, `-` and `.`; values are the trimmed
//! remainder of the line and may not be empty. A key may appear once.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let row = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { row, message };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !valid_key(key) {
            return Err(err(format!("invalid key `{key}`")));
        }
        if value.is_empty() {
            return Err(err(format!("empty value for `{key}`")));
        }
        if entries.insert(key.to_string(), value.to_string()).is_some() {
            return Err(err(format!("duplicate key `{key}`")));
        }
    }
    Ok(ConfigFile { entries })
}

impl ConfigFile {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Parses the value under `key`, if present.
    pub fn get_parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::InvalidArgument(format!("config key `{key}` = `{v}`: {e}")))
            })
            .transpose()
    }

    /// Sets `key`, replacing any previous value.
    pub fn set(&mut self, key: &str, value: impl fmt::Display) -> Result<()> {
        let value = value.to_string();
        if !valid_key(key) || value.trim().is_empty() || value.contains(['\n', '#']) {
            return Err(Error::InvalidArgument(format!(
                "cannot set `{key}` to `{value}`"
            )));
        }
        self.entries
            .insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Keys not in `known`, sorted.
    pub fn unknown_keys(&self, known: &[&str]) -> Vec<String> {
        self.keys()
            .filter(|k| !known.contains(k))
            .map(str::to_string)
            .collect()
    }
}

/// Renders sorted `key = value` lines that [`parse_config`] reads back.
impl fmt::Display for ConfigFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
