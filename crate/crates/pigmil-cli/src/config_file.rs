//! Key-value config files: `key = value` per line, `#` comments, blank
//! lines ignored. Keys mirror the CLI flag names; flags override the file.

use std::collections::HashMap;
use std::path::Path;

pub struct ConfigFile {
    values: HashMap<String, String>,
}

/// Every key any subcommand understands; unknown keys are rejected so typos
/// fail loudly.
const KNOWN_KEYS: &[&str] = &[
    "kind",
    "seed",
    "out",
    "data",
    "method",
    "folds",
    "repeats",
    "json",
    "csv",
    "mode",
    "ws-fraction",
    "t-threshold",
    "levels",
    "fractions",
    "ratios",
];

impl ConfigFile {
    pub fn empty() -> Self {
        ConfigFile {
            values: HashMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key = value", lineno + 1))?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(format!("config line {}: unknown key {key:?}", lineno + 1));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| format!("config key {key}: cannot parse {raw:?}")),
        }
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>, String> {
        match self.get(key) {
            None => Ok(None),
            Some("true") | Some("1") => Ok(Some(true)),
            Some("false") | Some("0") => Ok(Some(false)),
            Some(other) => Err(format!("config key {key}: expected true/false, got {other:?}")),
        }
    }

    pub fn get_list(&self, key: &str) -> Result<Option<Vec<f64>>, String> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| format!("config key {key}: bad number {t:?}"))
                })
                .collect::<Result<Vec<f64>, String>>()
                .map(Some),
        }
    }
}
