//! Flat key=value config files: the same keys as the long command-line
//! flags, one per line, `#` comments allowed. File values only fill in
//! flags that were not given on the command line.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn empty() -> Self {
        Self {
            values: BTreeMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::usage(format!("cannot read config file {}: {e}", path.display()))
        })?;
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(CliError::usage(format!(
                    "{}:{}: expected `key=value`, got `{line}`",
                    path.display(),
                    lineno + 1
                )));
            };
            let key = line[..eq].trim().to_string();
            let value = line[eq + 1..].trim().to_string();
            if key.is_empty() {
                return Err(CliError::usage(format!(
                    "{}:{}: empty key",
                    path.display(),
                    lineno + 1
                )));
            }
            values.insert(key, value);
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    /// Fills `slot` from the config when the command line left it empty.
    pub fn fill<T, E>(
        &self,
        slot: &mut Option<T>,
        key: &str,
        parse: impl Fn(&str) -> Result<T, E>,
    ) -> Result<(), CliError>
    where
        E: std::fmt::Display,
    {
        if slot.is_none() {
            if let Some(raw) = self.get(key) {
                let value = parse(raw)
                    .map_err(|e| CliError::usage(format!("config key `{key}`: {e}")))?;
                *slot = Some(value);
            }
        }
        Ok(())
    }
}
