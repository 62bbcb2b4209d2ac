use std::io::Read;

use csv::{ByteRecord, StringRecord};
use serde::{Deserialize, Serialize};

use super::{extract_repo_ref, IngestError, Loaded, PlatformAliases, Reject, RejectReason, RejectSource, RepoRef};
use crate::cpe::normalize_component;

/// One project row of the package metadata dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackageRecord {
    pub package_key: String,
    pub platform: String,
    pub name: String,
    pub keywords: Vec<String>,
    pub license: String,
    pub repo: Option<RepoRef>,
}

impl PackageRecord {
    pub fn repo_link(&self) -> Option<&str> {
        self.repo.as_ref().map(|r| r.repo_link.as_str())
    }
}

/// Header names for the package CSV. Defaults follow the Libraries.io
/// `projects` export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PackageColumns {
    pub id: String,
    pub platform: String,
    pub name: String,
    pub repository_url: String,
    pub keywords: Option<String>,
    pub license: Option<String>,
}

impl Default for PackageColumns {
    fn default() -> Self {
        Self {
            id: "ID".into(),
            platform: "Platform".into(),
            name: "Name".into(),
            repository_url: "Repository URL".into(),
            keywords: Some("Keywords".into()),
            license: Some("Licenses".into()),
        }
    }
}

struct Positions {
    id: usize,
    platform: usize,
    name: usize,
    repository_url: usize,
    keywords: Option<usize>,
    license: Option<usize>,
    width: usize,
}

/// Streaming reader yielding one [`Loaded<PackageRecord>`] per CSV data row.
pub struct PackageLoader<R: Read> {
    reader: csv::Reader<R>,
    positions: Positions,
    aliases: PlatformAliases,
    record: ByteRecord,
    row: u64,
    done: bool,
}

pub(super) fn csv_reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source)
}

pub(super) fn header_index(headers: &StringRecord, name: &str) -> Option<usize> {
    headers
        .iter()
        .position(|h| h.trim_start_matches('\u{feff}').trim() == name)
}

pub(super) fn require_column(headers: &StringRecord, name: &str) -> Result<usize, IngestError> {
    header_index(headers, name).ok_or_else(|| IngestError::MissingColumn {
        column: name.to_string(),
    })
}

pub(super) fn read_headers<R: Read>(reader: &mut csv::Reader<R>) -> Result<StringRecord, IngestError> {
    reader
        .headers()
        .cloned()
        .map_err(|e| IngestError::CsvStructure(format!("header row: {e}")))
}

pub(super) fn next_row<R: Read>(reader: &mut csv::Reader<R>, record: &mut ByteRecord) -> Result<bool, IngestError> {
    reader.read_byte_record(record).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => IngestError::Io(io),
        other => IngestError::CsvStructure(format!("{other:?}")),
    })
}

/// A UTF-8 field; `Err` when the bytes are not valid UTF-8.
pub(super) fn field(record: &ByteRecord, idx: usize) -> Result<&str, RejectReason> {
    std::str::from_utf8(record.get(idx).unwrap_or_default()).map_err(|_| RejectReason::InvalidUtf8)
}

impl<R: Read> PackageLoader<R> {
    pub fn new(source: R, columns: &PackageColumns, aliases: PlatformAliases) -> Result<Self, IngestError> {
        let mut reader = csv_reader(source);
        let headers = read_headers(&mut reader)?;
        let optional = |c: &Option<String>| c.as_deref().and_then(|c| header_index(&headers, c));
        let positions = Positions {
            id: require_column(&headers, &columns.id)?,
            platform: require_column(&headers, &columns.platform)?,
            name: require_column(&headers, &columns.name)?,
            repository_url: require_column(&headers, &columns.repository_url)?,
            keywords: optional(&columns.keywords),
            license: optional(&columns.license),
            width: headers.len(),
        };
        Ok(Self {
            reader,
            positions,
            aliases,
            record: ByteRecord::new(),
            row: 0,
            done: false,
        })
    }

    fn convert(&self) -> Result<PackageRecord, RejectReason> {
        let rec = &self.record;
        let p = &self.positions;
        if rec.len() != p.width {
            return Err(RejectReason::FieldCount {
                expected: p.width,
                found: rec.len(),
            });
        }
        let id = field(rec, p.id)?.trim();
        if id.is_empty() {
            return Err(RejectReason::EmptyId);
        }
        let platform = field(rec, p.platform)?;
        if platform.trim().is_empty() {
            return Err(RejectReason::EmptyPlatform);
        }
        let name = normalize_component(field(rec, p.name)?);
        if name.is_empty() {
            return Err(RejectReason::EmptyName);
        }
        let keywords = match p.keywords {
            Some(i) => split_keywords(field(rec, i)?),
            None => Vec::new(),
        };
        let license = match p.license {
            Some(i) => field(rec, i)?.trim().to_string(),
            None => String::new(),
        };
        Ok(PackageRecord {
            package_key: id.to_string(),
            platform: self.aliases.canonical(platform),
            name,
            keywords,
            license,
            repo: extract_repo_ref(field(rec, p.repository_url)?),
        })
    }
}

fn split_keywords(raw: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for token in raw.split(',').map(normalize_component) {
        if !token.is_empty() && !out.contains(&token) {
            out.push(token);
        }
    }
    out
}

impl<R: Read> Iterator for PackageLoader<R> {
    type Item = Result<Loaded<PackageRecord>, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match next_row(&mut self.reader, &mut self.record) {
            Ok(true) => {}
            Ok(false) => {
                self.done = true;
                return None;
            }
            Err(e) => {
                self.done = true;
                return Some(Err(e));
            }
        }
        self.row += 1;
        Some(Ok(match self.convert() {
            Ok(r) => Loaded::Record(r),
            Err(reason) => Loaded::Reject(Reject {
                source: RejectSource::Packages,
                row: self.row,
                reason,
            }),
        }))
    }
}

/// Open a streaming package loader over `source`.
pub fn load_packages<R: Read>(
    source: R,
    columns: &PackageColumns,
    aliases: PlatformAliases,
) -> Result<PackageLoader<R>, IngestError> {
    PackageLoader::new(source, columns, aliases)
}
