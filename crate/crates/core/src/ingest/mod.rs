//! Streaming loaders for the package metadata CSV, the versions CSV and the
//! CVE JSON dump, plus the lookup indexes the matchers run against.

mod cves;
mod index;
mod json_stream;
mod packages;
mod repo;
mod versions;

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cves::{is_valid_cve_id, load_cves, CveFields, CveLoader, CveRecord};
pub use index::{build_indexes, IndexSet};
pub use packages::{load_packages, PackageColumns, PackageLoader, PackageRecord};
pub(crate) use repo::split_url;
pub use repo::{extract_repo_ref, RepoRef, SUPPORTED_PROVIDERS};
pub use versions::{load_versions, VersionColumns, VersionLoader, VersionRecord};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("CSV structure error: {0}")]
    CsvStructure(String),
    #[error("CSV is missing required column {column:?}")]
    MissingColumn { column: String },
    #[error("JSON structure error at byte {offset}: {message}")]
    JsonStructure { offset: u64, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RejectSource {
    Packages,
    Versions,
    Cves,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", content = "detail")]
pub enum RejectReason {
    EmptyId,
    EmptyName,
    EmptyPlatform,
    FieldCount { expected: usize, found: usize },
    InvalidUtf8,
    InvalidDate(String),
    InvalidCveId(String),
    MissingField(String),
    NotAnObject,
    DuplicateKey(String),
}

/// An input row or entry that did not become a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub source: RejectSource,
    /// 1-based data row (CSV) or entry (JSON) number.
    pub row: u64,
    #[serde(flatten)]
    pub reason: RejectReason,
}

/// One outcome per input row: a record or a reject, never both.
#[derive(Debug, Clone, PartialEq)]
pub enum Loaded<T> {
    Record(T),
    Reject(Reject),
}

impl<T> Loaded<T> {
    pub fn record(self) -> Option<T> {
        match self {
            Loaded::Record(r) => Some(r),
            Loaded::Reject(_) => None,
        }
    }
}

/// Canonical report labels for platform names found in the dumps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlatformAliases(BTreeMap<String, String>);

impl Default for PlatformAliases {
    fn default() -> Self {
        let pairs = [
            ("npm", "NPM"),
            ("pypi", "Pypi"),
            ("go", "Go"),
            ("maven", "Maven"),
            ("packagist", "Packagist"),
            ("nuget", "NuGet"),
            ("rubygems", "Ruby"),
        ];
        Self::from_pairs(pairs)
    }
}

impl PlatformAliases {
    pub fn from_pairs<K: AsRef<str>, V: Into<String>>(pairs: impl IntoIterator<Item = (K, V)>) -> Self {
        Self(
            pairs
                .into_iter()
                .map(|(k, v)| (k.as_ref().trim().to_lowercase(), v.into()))
                .collect(),
        )
    }

    /// Merge `other` on top of these aliases.
    pub fn extend(&mut self, other: PlatformAliases) {
        for (k, v) in other.0 {
            self.0.insert(k.trim().to_lowercase(), v);
        }
    }

    /// Alias target for `raw`, or `raw` trimmed when no alias exists.
    pub fn canonical(&self, raw: &str) -> String {
        let raw = raw.trim();
        match self.0.get(&raw.to_lowercase()) {
            Some(c) => c.clone(),
            None => raw.to_string(),
        }
    }
}

/// Tracks keys already seen so duplicates can be turned into rejects.
///
/// Kept outside the loaders: it grows with the number of distinct keys, which
/// the streaming loaders must not.
#[derive(Debug, Default)]
pub struct KeyGuard {
    seen: HashSet<String>,
}

impl KeyGuard {
    /// Returns a reject when `key` was already admitted.
    pub fn admit(&mut self, source: RejectSource, row: u64, key: &str) -> Option<Reject> {
        if self.seen.insert(key.to_string()) {
            None
        } else {
            Some(Reject {
                source,
                row,
                reason: RejectReason::DuplicateKey(key.to_string()),
            })
        }
    }
}

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// Wrap `reader` in a gzip decoder when it starts with the gzip magic bytes.
pub fn decompress_if_gzip<R: Read + Send + 'static>(reader: R) -> io::Result<Box<dyn BufRead + Send>> {
    let mut buffered = BufReader::with_capacity(1 << 16, reader);
    let head = buffered.fill_buf()?;
    if head.starts_with(&GZIP_MAGIC) {
        Ok(Box::new(BufReader::with_capacity(
            1 << 16,
            MultiGzDecoder::new(buffered),
        )))
    } else {
        Ok(Box::new(buffered))
    }
}

pub fn open_source(path: &Path) -> io::Result<Box<dyn BufRead + Send>> {
    let file = File::open(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    decompress_if_gzip(file)
}

/// Parse the leading `YYYY-MM-DD` of a timestamp such as
/// `2019-07-26T00:15:00.000Z` or `2015-03-04 12:34:56 UTC`.
pub(crate) fn parse_leading_date(s: &str) -> Option<chrono::NaiveDate> {
    let s = s.trim();
    let head = s.get(..10)?;
    if s.len() > 10 && s.as_bytes()[10].is_ascii_digit() {
        return None;
    }
    chrono::NaiveDate::parse_from_str(head, "%Y-%m-%d").ok()
}
