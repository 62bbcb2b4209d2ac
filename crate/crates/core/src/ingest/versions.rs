use std::io::Read;

use chrono::{Datelike, NaiveDate};
use csv::ByteRecord;
use serde::{Deserialize, Serialize};

use super::packages::{csv_reader, field, next_row, read_headers, require_column};
use super::{parse_leading_date, IngestError, Loaded, PlatformAliases, Reject, RejectReason, RejectSource};

/// One published version of a package.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionRecord {
    pub package_key: String,
    pub platform: String,
    pub version_label: String,
    pub published: NaiveDate,
}

impl VersionRecord {
    pub fn year(&self) -> i32 {
        self.published.year()
    }
}

/// Header names for the versions CSV (Libraries.io `versions` export).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct VersionColumns {
    pub package_key: String,
    pub platform: String,
    pub version: String,
    pub published: String,
}

impl Default for VersionColumns {
    fn default() -> Self {
        Self {
            package_key: "Project ID".into(),
            platform: "Platform".into(),
            version: "Number".into(),
            published: "Published Timestamp".into(),
        }
    }
}

pub struct VersionLoader<R: Read> {
    reader: csv::Reader<R>,
    cols: [usize; 4],
    width: usize,
    aliases: PlatformAliases,
    record: ByteRecord,
    row: u64,
    done: bool,
}

impl<R: Read> VersionLoader<R> {
    pub fn new(source: R, columns: &VersionColumns, aliases: PlatformAliases) -> Result<Self, IngestError> {
        let mut reader = csv_reader(source);
        let headers = read_headers(&mut reader)?;
        let cols = [
            require_column(&headers, &columns.package_key)?,
            require_column(&headers, &columns.platform)?,
            require_column(&headers, &columns.version)?,
            require_column(&headers, &columns.published)?,
        ];
        Ok(Self {
            reader,
            cols,
            width: headers.len(),
            aliases,
            record: ByteRecord::new(),
            row: 0,
            done: false,
        })
    }

    fn convert(&self) -> Result<VersionRecord, RejectReason> {
        let rec = &self.record;
        if rec.len() != self.width {
            return Err(RejectReason::FieldCount {
                expected: self.width,
                found: rec.len(),
            });
        }
        let [key, platform, version, published] = self.cols;
        let key = field(rec, key)?.trim();
        if key.is_empty() {
            return Err(RejectReason::EmptyId);
        }
        let platform = field(rec, platform)?;
        if platform.trim().is_empty() {
            return Err(RejectReason::EmptyPlatform);
        }
        let published_raw = field(rec, published)?;
        let published =
            parse_leading_date(published_raw).ok_or_else(|| RejectReason::InvalidDate(published_raw.to_string()))?;
        Ok(VersionRecord {
            package_key: key.to_string(),
            platform: self.aliases.canonical(platform),
            version_label: field(rec, version)?.trim().to_string(),
            published,
        })
    }
}

impl<R: Read> Iterator for VersionLoader<R> {
    type Item = Result<Loaded<VersionRecord>, IngestError>;

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
            Ok(v) => Loaded::Record(v),
            Err(reason) => Loaded::Reject(Reject {
                source: RejectSource::Versions,
                row: self.row,
                reason,
            }),
        }))
    }
}

pub fn load_versions<R: Read>(
    source: R,
    columns: &VersionColumns,
    aliases: PlatformAliases,
) -> Result<VersionLoader<R>, IngestError> {
    VersionLoader::new(source, columns, aliases)
}
