//! Flat key-value config files.
//!
//! One `key = value` pair per line, `#` starts a comment, blank lines are
//! ignored. No sections, no nesting; dotted keys (`weights.0`) are plain
//! keys. Used for CLI config files, manifest sidecars and oracle profiles.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {0}: expected `key = value`, got {1:?}")]
    BadLine(usize, String),
    #[error("missing key {0:?}")]
    Missing(String),
    #[error("key {key:?}: cannot parse {value:?} as {ty}")]
    BadValue {
        key: String,
        value: String,
        ty: &'static str,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parsed key-value file. Keys keep insertion-independent (sorted) order so
/// serialization is deterministic.
#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::BadLine(i + 1, raw.to_string()))?;
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key).ok_or_else(|| ConfigError::Missing(key.into()))
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| ConfigError::BadValue {
                key: key.into(),
                value: v.into(),
                ty: std::any::type_name::<T>(),
            }),
        }
    }

    pub fn require_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        self.get_parsed(key)?
            .ok_or_else(|| ConfigError::Missing(key.into()))
    }

    /// Comma-separated list value.
    pub fn get_list(&self, key: &str) -> Option<Vec<String>> {
        self.get(key).map(|v| {
            v.split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect()
        })
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| ConfigError::BadValue {
                    key: key.into(),
                    value: v.into(),
                    ty: "list of f64",
                }),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn to_text(&self, header: &str) -> String {
        let mut out = String::new();
        if !header.is_empty() {
            let _ = writeln!(out, "# {header}");
        }
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn save(&self, path: &Path, header: &str) -> Result<(), ConfigError> {
        std::fs::write(path, self.to_text(header))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_lookup() {
        let cfg = KvConfig::parse("# top\ncutoff = 500\nsolvers = a, b ,c\n\nseed=7 # inline\n")
            .unwrap();
        assert_eq!(cfg.require_parsed::<f64>("cutoff").unwrap(), 500.0);
        assert_eq!(cfg.get_list("solvers").unwrap(), ["a", "b", "c"]);
        assert_eq!(cfg.require_parsed::<u64>("seed").unwrap(), 7);
        assert!(cfg.get("missing").is_none());
    }

    #[test]
    fn rejects_bad_line() {
        assert!(matches!(
            KvConfig::parse("just words"),
            Err(ConfigError::BadLine(1, _))
        ));
    }

    #[test]
    fn round_trips() {
        let mut cfg = KvConfig::new();
        cfg.set("b", 2);
        cfg.set("a", "x");
        let text = cfg.to_text("hdr");
        let back = KvConfig::parse(&text).unwrap();
        assert_eq!(back.get("a"), Some("x"));
        assert_eq!(back.get("b"), Some("2"));
    }
}
