//! `key = value` configuration files.
//!
//! Keys are flag names without the leading dashes (`rounds`, `tcf`, ...).
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str, known: &[&str]) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("config line {}: expected `key = value`", n + 1);
            };
            let key = k.trim().replace('_', "-");
            if !known.contains(&key.as_str()) {
                bail!("config line {}: unknown key `{key}`", n + 1);
            }
            let value = v.trim().trim_matches('"').to_string();
            if values.insert(key.clone(), value).is_some() {
                bail!("config line {}: duplicate key `{key}`", n + 1);
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path, known: &[&str]) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text, known).with_context(|| format!("in {}", path.display()))
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow::anyhow!("config key `{key}`: {e}")))
            .transpose()
    }
}
