use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpe::simple_lowercase;
use crate::ingest::split_url;

/// The lookup table shipped with the crate.
pub const DEFAULT_LOOKUP_TOML: &str = include_str!("../../data/platform_lookup.toml");

#[derive(Debug, Error)]
pub enum LookupError {
    #[error("invalid lookup file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{list} value {value:?} of platform {platform} must be lowercase and non-empty")]
    NotLowercase {
        list: &'static str,
        platform: String,
        value: String,
    },
    #[error("{list} value {value:?} appears under both {first} and {second}")]
    Conflict {
        list: &'static str,
        value: String,
        first: String,
        second: String,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct PlatformEntry {
    #[serde(default)]
    target_sw: BTreeSet<String>,
    #[serde(default)]
    keywords: BTreeSet<String>,
    #[serde(default)]
    hosts: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct LookupFile {
    #[serde(default)]
    platforms: BTreeMap<String, PlatformEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct HostPattern {
    host: String,
    path: String,
}

impl HostPattern {
    fn parse(pattern: &str) -> Self {
        match pattern.split_once('/') {
            Some((host, path)) => Self {
                host: host.to_string(),
                path: format!("/{}", path.trim_end_matches('/')),
            },
            None => Self {
                host: pattern.to_string(),
                path: String::new(),
            },
        }
    }

    fn matches(&self, url: &str) -> bool {
        let Some(parts) = split_url(url) else {
            return false;
        };
        let host_ok = parts.host == self.host
            || parts
                .host
                .strip_suffix(self.host.as_str())
                .is_some_and(|rest| rest.ends_with('.'));
        if !host_ok {
            return false;
        }
        if self.path.is_empty() || self.path == "/" {
            return true;
        }
        match parts.path.strip_prefix(self.path.as_str()) {
            Some(rest) => rest.is_empty() || rest.starts_with('/'),
            None => false,
        }
    }
}

/// Per-platform evidence used to tie a CVE to a package manager.
#[derive(Debug, Clone, Default)]
pub struct PlatformLookup {
    pub target_sw_aliases: BTreeMap<String, BTreeSet<String>>,
    pub summary_keywords: BTreeMap<String, BTreeSet<String>>,
    pub reference_hosts: BTreeMap<String, BTreeSet<String>>,
    host_patterns: BTreeMap<String, Vec<HostPattern>>,
}

impl PlatformLookup {
    pub fn from_toml(text: &str) -> Result<Self, LookupError> {
        let file: LookupFile = toml::from_str(text)?;
        let mut lookup = PlatformLookup::default();
        for (platform, entry) in file.platforms {
            lookup.target_sw_aliases.insert(platform.clone(), entry.target_sw);
            lookup.summary_keywords.insert(platform.clone(), entry.keywords);
            lookup.reference_hosts.insert(platform, entry.hosts);
        }
        lookup.validate()?;
        lookup.compile();
        Ok(lookup)
    }

    pub fn builtin() -> Self {
        Self::from_toml(DEFAULT_LOOKUP_TOML).expect("bundled lookup table is valid")
    }

    /// Build from explicit lists, validating them the same way as a file.
    pub fn from_entries<'a>(
        entries: impl IntoIterator<Item = (&'a str, &'a [&'a str], &'a [&'a str], &'a [&'a str])>,
    ) -> Result<Self, LookupError> {
        let set = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        let mut lookup = PlatformLookup::default();
        for (platform, target_sw, keywords, hosts) in entries {
            lookup.target_sw_aliases.insert(platform.into(), set(target_sw));
            lookup.summary_keywords.insert(platform.into(), set(keywords));
            lookup.reference_hosts.insert(platform.into(), set(hosts));
        }
        lookup.validate()?;
        lookup.compile();
        Ok(lookup)
    }

    fn validate(&self) -> Result<(), LookupError> {
        for (list, map) in [
            ("target_sw", &self.target_sw_aliases),
            ("keywords", &self.summary_keywords),
            ("hosts", &self.reference_hosts),
        ] {
            let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
            for (platform, values) in map {
                for value in values {
                    let lowered: String = value.chars().map(simple_lowercase).collect();
                    if value.trim().is_empty() || lowered != *value || value.trim() != value {
                        return Err(LookupError::NotLowercase {
                            list,
                            platform: platform.clone(),
                            value: value.clone(),
                        });
                    }
                    if let Some(first) = owner.insert(value, platform) {
                        return Err(LookupError::Conflict {
                            list,
                            value: value.clone(),
                            first: first.to_string(),
                            second: platform.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn compile(&mut self) {
        self.host_patterns = self
            .reference_hosts
            .iter()
            .map(|(p, hosts)| {
                let patterns = hosts.iter().map(|h| HostPattern::parse(h)).collect();
                (p.clone(), patterns)
            })
            .collect();
    }

    /// Every platform named in any list, sorted.
    pub fn platforms(&self) -> Vec<&str> {
        let mut all: BTreeSet<&str> = BTreeSet::new();
        for map in [&self.target_sw_aliases, &self.summary_keywords, &self.reference_hosts] {
            all.extend(map.keys().map(String::as_str));
        }
        all.into_iter().collect()
    }

    /// First alias of `platform` among the CVE's target_sw values.
    pub fn target_sw_hit<'t>(&self, platform: &str, target_sw: &[&'t str]) -> Option<&'t str> {
        let aliases = self.target_sw_aliases.get(platform)?;
        target_sw.iter().copied().find(|t| aliases.contains(*t))
    }

    /// First keyword of `platform` occurring as a word in `summary_lower`.
    pub fn keyword_hit(&self, platform: &str, summary_lower: &str) -> Option<&str> {
        self.summary_keywords
            .get(platform)?
            .iter()
            .find(|k| contains_word(summary_lower, k))
            .map(String::as_str)
    }

    /// First reference URL matching one of `platform`'s host patterns.
    pub fn reference_hit<'r>(&self, platform: &str, references: &'r [String]) -> Option<&'r str> {
        let patterns = self.host_patterns.get(platform)?;
        references
            .iter()
            .find(|url| patterns.iter().any(|p| p.matches(url)))
            .map(String::as_str)
    }
}

/// Lowercase with the single-character mapping used across the crate.
pub fn lowercase(s: &str) -> String {
    s.chars().map(simple_lowercase).collect()
}

/// Whether `needle` occurs in `haystack` with no alphanumeric character
/// directly before or after it.
pub fn contains_word(haystack: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return false;
    }
    let mut from = 0;
    while let Some(found) = haystack[from..].find(needle) {
        let at = from + found;
        let before = haystack[..at].chars().next_back();
        let after = haystack[at + needle.len()..].chars().next();
        if !before.is_some_and(char::is_alphanumeric) && !after.is_some_and(char::is_alphanumeric) {
            return true;
        }
        // Overlapping occurrences are checked too.
        from = at + haystack[at..].chars().next().map_or(1, char::len_utf8);
    }
    false
}
