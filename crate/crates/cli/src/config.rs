//! Optional plain-text `key=value` configuration overriding built-in
//! defaults. Explicit command-line flags win over the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::CliError;

const KNOWN_KEYS: [&str; 10] = [
    "grid",
    "branch",
    "out",
    "seed",
    "pd",
    "pb0",
    "numeric",
    "convention",
    "topology",
    "format",
];

/// Parsed configuration file contents.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config line {}: expected key=value, got {line:?}",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key {key:?}",
                    lineno + 1
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        if let Some(format) = values.get("format") {
            if format != "csv" {
                return Err(CliError::Usage(format!(
                    "unsupported output format {format:?} (only csv)"
                )));
            }
        }
        Ok(Self { values })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::Usage(format!("config key {key}: cannot parse value {raw:?}"))
            }),
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        Ok(self.parsed::<bool>(key)?.unwrap_or(false))
    }
}
