//! `key = value` settings with `#` comments. Values come from a config file
//! and are overridden by command-line flags; every key is checked against
//! the command's list before anything runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{usage, CliError, CliResult};

#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>, allowed: &[&str]) -> CliResult<Self> {
        let mut settings = Settings::default();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            settings.parse(&text, &path.display().to_string())?;
        }
        settings.check_keys(allowed)?;
        Ok(settings)
    }

    pub fn parse(&mut self, text: &str, origin: &str) -> CliResult<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(usage(format!("{origin}:{}: expected key = value", idx + 1)));
            };
            let key = key.trim().replace('-', "_");
            if key.is_empty() {
                return Err(usage(format!("{origin}:{}: missing key", idx + 1)));
            }
            self.values.insert(key, value.trim().to_string());
        }
        Ok(())
    }

    fn check_keys(&self, allowed: &[&str]) -> CliResult<()> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(usage(format!(
                "unknown config key '{k}' (allowed: {})",
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }

    /// Flag override; `None` leaves the config value in place.
    pub fn set<T: ToString>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v.to_string());
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| usage(format!("invalid value '{v}' for key '{key}'"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn flag(&self, key: &str) -> CliResult<bool> {
        match self.raw(key) {
            None => Ok(false),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => Err(usage(format!("invalid value '{v}' for key '{key}'"))),
        }
    }

    /// Comma-separated list whose items may be inclusive ranges `a-b`.
    pub fn list(&self, key: &str) -> CliResult<Option<Vec<u64>>> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        parse_list(v)
            .map(Some)
            .ok_or_else(|| usage(format!("invalid list '{v}' for key '{key}'")))
    }
}

pub fn parse_list(v: &str) -> Option<Vec<u64>> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
                if a > b {
                    return None;
                }
                out.extend(a..=b);
            }
            None => out.push(item.parse().ok()?),
        }
    }
    (!out.is_empty()).then_some(out)
}
