//! Flat `key = value` configuration files with one `[section]` per command.
//!
//! ```text
//! # comment
//! [scan]
//! q = 4
//! n-list = 64, 128, 256
//! family = uniform_spline
//! ```
//!
//! Every key in every section must be one the command understands, so a
//! misspelt key fails loudly instead of silently falling back to a default.

use std::collections::BTreeMap;
use std::path::Path;

pub const SECTIONS: [&str; 4] = ["verify", "certify", "scan", "fit"];

/// Keys accepted by each section; they mirror the long flag names.
pub fn allowed_keys(section: &str) -> &'static [&'static str] {
    const RUN: &[&str] =
        &["q", "gamma", "delta", "n", "n-list", "family", "seed", "oversample", "out", "timing", "svg", "column"];
    match section {
        "verify" => &["k1-max", "seed", "out"],
        "certify" | "scan" => RUN,
        "fit" => &["input", "column", "family", "out"],
        _ => &[],
    }
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = ConfigFile::default();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(format!("line {line_no}: unknown section [{name}]"));
                }
                cfg.sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {line_no}: expected 'key = value', found '{line}'"));
            };
            let key = key.trim().replace('_', "-");
            let Some(section) = &current else {
                return Err(format!("line {line_no}: key '{key}' outside any [section]"));
            };
            if !allowed_keys(section).contains(&key.as_str()) {
                return Err(format!("line {line_no}: unknown key '{key}' in [{section}]"));
            }
            let entries = cfg.sections.get_mut(section).expect("section inserted");
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(format!("line {line_no}: duplicate key '{key}' in [{section}]"));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let cfg = ConfigFile::parse("# top\n[scan]\nq = 4 # inline\nn_list = 8, 16\n\n[verify]\nk1-max=10\n").unwrap();
        assert_eq!(cfg.get("scan", "q"), Some("4"));
        assert_eq!(cfg.get("scan", "n-list"), Some("8, 16"));
        assert_eq!(cfg.get("verify", "k1-max"), Some("10"));
        assert_eq!(cfg.get("fit", "column"), None);
    }

    #[test]
    fn rejects_unknown_and_misplaced_keys() {
        assert!(ConfigFile::parse("[scan]\nqq = 4\n").unwrap_err().contains("unknown key"));
        assert!(ConfigFile::parse("q = 4\n").unwrap_err().contains("outside"));
        assert!(ConfigFile::parse("[plot]\n").unwrap_err().contains("unknown section"));
        assert!(ConfigFile::parse("[scan]\nq\n").is_err());
        assert!(ConfigFile::parse("[scan]\nq = 4\nq = 5\n").unwrap_err().contains("duplicate"));
        assert!(ConfigFile::parse("[fit]\ngamma = 0.3\n").is_err());
    }
}
