//! Flat `key = value` run configuration.
//!
//! One assignment per line; `#` starts a comment; values are scalars or
//! comma-separated lists. The format stays flat so configs diff cleanly
//! inside experiment manifests.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse_file(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Config> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let stripped = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            if stripped.trim().is_empty() {
                continue;
            }
            let eq = stripped.find('=').ok_or(Error::Syntax {
                line,
                column: stripped.len(),
                reason: "expected `key = value`".into(),
            })?;
            let key = stripped[..eq].trim();
            let value = stripped[eq + 1..].trim();
            let key_col = raw.find(key.chars().next().unwrap_or('=')).unwrap_or(0) + 1;
            if key.is_empty()
                || !key
                    .chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
            {
                return Err(Error::Syntax {
                    line,
                    column: key_col,
                    reason: format!("bad key {key:?}: use lowercase, digits, underscores"),
                });
            }
            if value.is_empty() {
                return Err(Error::Syntax {
                    line,
                    column: eq + 2,
                    reason: format!("key `{key}` has no value"),
                });
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Syntax {
                    line,
                    column: key_col,
                    reason: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Config { entries })
    }

    pub fn from_pairs(pairs: &[(&str, &str)]) -> Config {
        Config {
            entries: pairs
                .iter()
                .map(|&(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    /// Overlay `key = value`; used for command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every key must appear in `known`.
    pub fn check_known(&self, known: &[&str]) -> Result<()> {
        for key in self.entries.keys() {
            if !known.contains(&key.as_str()) {
                return Err(Error::Schema {
                    key: key.clone(),
                    reason: format!("unknown key; expected one of {known:?}"),
                });
            }
        }
        Ok(())
    }

    /// Sorted `key = value` lines; the canonical text that gets hashed
    /// into report headers.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    fn parse_scalar<T: std::str::FromStr>(&self, key: &str, value: &str) -> Result<T> {
        value.parse().map_err(|_| Error::Schema {
            key: key.to_string(),
            reason: format!("cannot parse {value:?} as {}", std::any::type_name::<T>()),
        })
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.entries.get(key) {
            Some(v) => self.parse_scalar(key, v),
            None => Ok(default),
        }
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.entries.get(key) {
            Some(v) => self.parse_scalar(key, v),
            None => Ok(default),
        }
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.entries.get(key) {
            Some(v) => self.parse_scalar(key, v),
            None => Ok(default),
        }
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        match self.entries.get(key) {
            Some(v) => self.parse_scalar(key, v),
            None => Err(Error::Schema {
                key: key.to_string(),
                reason: "required key is missing".into(),
            }),
        }
    }

    /// Comma-separated list; a missing key yields the default.
    pub fn get_i64_list(&self, key: &str, default: &[i64]) -> Result<Vec<i64>> {
        match self.entries.get(key) {
            Some(v) => v
                .split(',')
                .map(|s| self.parse_scalar(key, s.trim()))
                .collect(),
            None => Ok(default.to_vec()),
        }
    }

    pub fn get_f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.entries.get(key) {
            Some(v) => v
                .split(',')
                .map(|s| self.parse_scalar(key, s.trim()))
                .collect(),
            None => Ok(default.to_vec()),
        }
    }
}

/// Schema violation for `key`: the value sits outside `range`.
pub fn out_of_range(key: &str, value: f64, range: &str) -> Error {
    Error::Schema {
        key: key.to_string(),
        reason: format!("value {value} outside admissible range {range}"),
    }
}

/// `lo < value < hi`, reported against the open interval on failure.
pub fn check_open_range(key: &str, value: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(value > lo && value < hi) {
        return Err(out_of_range(key, value, &format!("({lo}, {hi})")));
    }
    Ok(value)
}

/// `value > 0`, finite.
pub fn check_positive(key: &str, value: f64) -> Result<f64> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(out_of_range(key, value, "(0, inf)"));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let text = "\
# smallest run that exercises the hypothesis checks
scenario = theorem13
grid_n = 16
lambda_sq = 1   # fundamental shell
b = 0.5
";
        let cfg = Config::parse_str(text).unwrap();
        assert_eq!(cfg.get_str("scenario"), Some("theorem13"));
        assert_eq!(cfg.get_usize("grid_n", 0).unwrap(), 16);
        assert_eq!(cfg.get_f64("b", 0.0).unwrap(), 0.5);
        assert_eq!(cfg.get_f64("missing", 2.5).unwrap(), 2.5);
    }

    #[test]
    fn duplicate_key_is_a_syntax_error() {
        let text = "b = 0.5\ngrid_n = 16\nb = 0.7\n";
        match Config::parse_str(text) {
            Err(Error::Syntax { line, column, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(column, 1);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn missing_equals_is_a_syntax_error() {
        assert!(matches!(
            Config::parse_str("scenario theorem13\n"),
            Err(Error::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn bad_keys_and_values_are_rejected() {
        assert!(matches!(
            Config::parse_str("Grid = 16\n"),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            Config::parse_str("grid_n =\n"),
            Err(Error::Syntax { .. })
        ));
        let cfg = Config::parse_str("b = zebra\n").unwrap();
        assert!(matches!(cfg.get_f64("b", 0.0), Err(Error::Schema { .. })));
    }

    #[test]
    fn unknown_keys_are_rejected_by_schema() {
        let cfg = Config::parse_str("grid_n = 16\nwhirl = 3\n").unwrap();
        let err = cfg.check_known(&["grid_n", "b"]).unwrap_err();
        match err {
            Error::Schema { key, .. } => assert_eq!(key, "whirl"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn range_check_cites_the_interval() {
        let err = check_open_range("b", 1.5, 0.0, 1.0).unwrap_err();
        match err {
            Error::Schema { key, reason } => {
                assert_eq!(key, "b");
                assert!(reason.contains("(0, 1)"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lists_parse_and_default() {
        let cfg = Config::parse_str("lambda_sqs = 1, 4, 9\n").unwrap();
        assert_eq!(cfg.get_i64_list("lambda_sqs", &[]).unwrap(), vec![1, 4, 9]);
        assert_eq!(cfg.get_f64_list("amps", &[1.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn canonical_text_is_sorted_and_stable() {
        let a = Config::parse_str("b = 0.5\na = 1\n").unwrap();
        let b = Config::parse_str("a = 1\nb = 0.5\n").unwrap();
        assert_eq!(a.canonical(), b.canonical());
        assert_eq!(a.canonical(), "a = 1\nb = 0.5\n");
    }
}
