//! Plain-text `key = value` configuration files.
//!
//! Keys are the long flag names of the command (`burn-in`, `iters`, ...).
//! Blank lines and lines starting with `#` are ignored. Values given on the
//! command line take precedence over the file, which takes precedence over
//! built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", n + 1)))?;
            let key = k.trim().to_string();
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("config key '{key}' given twice")));
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// Rejects keys that the command does not understand.
    pub fn check_keys(&self, allowed: &[&str]) -> CliResult<()> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Config(format!(
                "unknown config key '{k}'; expected one of: {}",
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::Config(format!("config key '{key}': cannot parse '{v}': {e}")))
            })
            .transpose()
    }
}

/// `flag`, else the config file entry, else `default`.
pub fn pick<T: FromStr>(flag: Option<T>, file: &ConfigFile, key: &str, default: T) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    Ok(match flag {
        Some(v) => v,
        None => file.get(key)?.unwrap_or(default),
    })
}

/// Like [`pick`] without a default.
pub fn pick_opt<T: FromStr>(flag: Option<T>, file: &ConfigFile, key: &str) -> CliResult<Option<T>>
where
    T::Err: std::fmt::Display,
{
    Ok(match flag {
        Some(v) => Some(v),
        None => file.get(key)?,
    })
}
