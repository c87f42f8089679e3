//! Flat `key=value` config files. Lines starting with `#` and blank lines are
//! ignored; command-line flags override file values.

use std::collections::BTreeMap;
use std::path::Path;

use annulus_lab::Error;

#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::argument(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::argument(format!("config line {} is not key=value: '{line}'", i + 1))
            })?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    /// Fill an unset flag from the file, parsing to the target type.
    pub fn fill<T: std::str::FromStr>(
        &self,
        slot: &mut Option<T>,
        key: &str,
    ) -> Result<(), Error>
    where
        T::Err: std::fmt::Display,
    {
        if slot.is_none() {
            if let Some(raw) = self.get(key) {
                let parsed = raw
                    .parse::<T>()
                    .map_err(|e| Error::argument(format!("config key '{key}': {e}")))?;
                *slot = Some(parsed);
            }
        }
        Ok(())
    }

    pub fn flag(&self, current: bool, key: &str) -> bool {
        current || matches!(self.get(key), Some("true") | Some("1") | Some("yes"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_fill() {
        let cfg = FileConfig::parse("# comment\nlambda=5\n delta = 0.5 \nplot=true\n").unwrap();
        let mut lambda: Option<f64> = None;
        let mut delta: Option<f64> = Some(0.25); // flag wins
        cfg.fill(&mut lambda, "lambda").unwrap();
        cfg.fill(&mut delta, "delta").unwrap();
        assert_eq!(lambda, Some(5.0));
        assert_eq!(delta, Some(0.25));
        assert!(cfg.flag(false, "plot"));
        assert!(!cfg.flag(false, "missing"));
    }

    #[test]
    fn rejects_malformed() {
        assert!(FileConfig::parse("just a line\n").is_err());
    }
}
