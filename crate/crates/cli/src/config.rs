//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Recognised keys; tolerance overrides use `tol.<check>.<name>`.
pub const KEYS: [&str; 9] = ["t", "R", "alpha", "lambda", "c", "d", "amplitude", "seed", "samples_per_decade"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, f64>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`", n + 1);
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) && !k.starts_with("tol.") {
                bail!("line {}: unknown key `{k}`", n + 1);
            }
            let x: f64 = v.parse().with_context(|| format!("line {}: `{v}` is not a number", n + 1))?;
            if !x.is_finite() {
                bail!("line {}: `{k}` must be finite", n + 1);
            }
            if values.insert(k.to_string(), x).is_some() {
                bail!("line {}: duplicate key `{k}`", n + 1);
            }
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Config::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn get_or(&self, key: &str, default: f64) -> f64 {
        self.get(key).unwrap_or(default)
    }

    pub fn seed(&self) -> Option<u64> {
        self.get("seed").map(|s| s as u64)
    }

    pub fn entries(&self) -> &BTreeMap<String, f64> {
        &self.values
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.values.insert(key.to_string(), value);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let c = Config::parse("# run\nR = 50\n t=1e-3  # small\n\ntol.cutoff.min_v = -1e-10\n").unwrap();
        assert_eq!(c.get("R"), Some(50.0));
        assert_eq!(c.get("t"), Some(1e-3));
        assert_eq!(c.get("tol.cutoff.min_v"), Some(-1e-10));
        assert_eq!(c.get("alpha"), None);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(Config::parse("R 50").is_err());
        assert!(Config::parse("radius = 1").is_err());
        assert!(Config::parse("R = x").is_err());
        assert!(Config::parse("R = 1\nR = 2").is_err());
        assert!(Config::parse("t = inf").is_err());
    }
}
