//! Settings merged from an optional `key=value` file and command-line flags
//! (flags win), with typed lookups that report the offending field.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    Flag,
    File { path: PathBuf, line: usize },
    Default,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub origin: Origin,
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(origin: Origin, field: &str, message: impl Into<String>) -> Self {
        Self {
            origin,
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = self.field.replace('_', "-");
        match &self.origin {
            Origin::Flag => write!(f, "--{flag}: {}", self.message),
            Origin::File { path, line } => {
                write!(
                    f,
                    "{}:{line}: field `{}`: {}",
                    path.display(),
                    self.field,
                    self.message
                )
            }
            Origin::Default => write!(f, "field `{}`: {}", self.field, self.message),
        }
    }
}

/// Canonical key: lower case with `_` separators.
pub fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('-', "_")
}

#[derive(Debug, Default, Clone)]
pub struct Settings {
    values: BTreeMap<String, (String, Origin)>,
}

impl Settings {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
    pub fn from_file_text(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let mut s = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let origin = Origin::File {
                path: path.to_path_buf(),
                line: i + 1,
            };
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::new(origin, line, "expected `key = value`"));
            };
            let key = normalize_key(k);
            if key.is_empty() {
                return Err(ConfigError::new(origin, "", "empty key"));
            }
            if let Some((_, Origin::File { line: first, .. })) = s.values.get(&key) {
                let msg = format!("duplicate key, first set on line {first}");
                return Err(ConfigError::new(origin, &key, msg));
            }
            s.values.insert(key, (v.trim().to_string(), origin));
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError::new(
                Origin::File {
                    path: path.to_path_buf(),
                    line: 0,
                },
                "config",
                format!("cannot read file: {e}"),
            )
        })?;
        Self::from_file_text(&text, path)
    }

    pub fn set_flag(&mut self, key: &str, value: String) {
        self.values
            .insert(normalize_key(key), (value, Origin::Flag));
    }

    pub fn raw(&self, key: &str) -> Option<&(String, Origin)> {
        self.values.get(key)
    }

    /// Rejects keys outside `allowed`.
    pub fn check_known(&self, allowed: &BTreeSet<&str>) -> Result<(), ConfigError> {
        for (k, (_, origin)) in &self.values {
            if !allowed.contains(k.as_str()) {
                return Err(ConfigError::new(
                    origin.clone(),
                    k,
                    "unknown field for this experiment",
                ));
            }
        }
        Ok(())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((v, origin)) => v.parse::<T>().map(Some).map_err(|e| {
                ConfigError::new(origin.clone(), key, format!("cannot parse `{v}`: {e}"))
            }),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| ConfigError::new(Origin::Default, key, "required but not set"))
    }

    pub fn get_bool(&self, key: &str) -> Result<bool, ConfigError> {
        match self.values.get(key) {
            None => Ok(false),
            Some((v, origin)) => match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(true),
                "false" | "no" | "0" | "off" => Ok(false),
                _ => Err(ConfigError::new(
                    origin.clone(),
                    key,
                    format!("expected a boolean, got `{v}`"),
                )),
            },
        }
    }

    /// Origin to blame for a semantic error about `key`.
    pub fn origin_of(&self, key: &str) -> Origin {
        self.values
            .get(key)
            .map_or(Origin::Default, |(_, o)| o.clone())
    }

    /// Resolved string values, for the run sidecar.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        self.values
            .iter()
            .map(|(k, (v, _))| (k.clone(), v.clone()))
            .collect()
    }
}
