//! Optional `key = value` defaults file. Flags given on the command line
//! take precedence over values read here.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub const KEYS: [&str; 8] = [
    "timeout",
    "max_terms",
    "max_branches",
    "states",
    "wordlen",
    "words",
    "cap",
    "format",
];

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        FileConfig::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<FileConfig> {
        let mut values = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`", k + 1);
            };
            let key = key.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key `{key}`", k + 1);
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Positive integer under `key`, if present.
    pub fn get_positive(&self, key: &str) -> Result<Option<u64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => match v.parse::<u64>() {
                Ok(0) | Err(_) => bail!("`{key}` must be a positive integer, got `{v}`"),
                Ok(n) => Ok(Some(n)),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_rejects_unknown() {
        let c = FileConfig::parse("# caps\ntimeout = 5\nmax-terms=100\n").unwrap();
        assert_eq!(c.get_positive("timeout").unwrap(), Some(5));
        assert_eq!(c.get_positive("max_terms").unwrap(), Some(100));
        assert_eq!(c.get_positive("words").unwrap(), None);
        assert!(FileConfig::parse("speed = 3").is_err());
        assert!(FileConfig::parse("timeout").is_err());
        assert!(FileConfig::parse("timeout = 0").unwrap().get_positive("timeout").is_err());
    }
}
