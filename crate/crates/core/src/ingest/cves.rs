use std::io::BufRead;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::json_stream::JsonValues;
use super::{parse_leading_date, IngestError, Loaded, Reject, RejectReason, RejectSource};
use crate::cpe::{parse_cpe23, CpeRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CveRecord {
    pub cve_id: String,
    pub summary: String,
    pub references: Vec<String>,
    pub published: Option<NaiveDate>,
    pub cpes: Vec<CpeRecord>,
}

impl CveRecord {
    /// Publication year, or the year embedded in the id when no date is known.
    pub fn year(&self) -> i32 {
        match self.published {
            Some(d) => d.year(),
            None => id_year(&self.cve_id).unwrap_or_default(),
        }
    }

    /// Distinct literal product values in CPE order.
    pub fn products(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for p in self.cpes.iter().filter_map(|c| c.product.value()) {
            if !p.is_empty() && !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    /// Distinct literal target_sw values in CPE order.
    pub fn target_software(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for t in self.cpes.iter().filter_map(|c| c.target_sw.value()) {
            if !t.is_empty() && !out.contains(&t) {
                out.push(t);
            }
        }
        out
    }
}

/// `CVE-YYYY-NNNN...` with at least four sequence digits.
pub fn is_valid_cve_id(id: &str) -> bool {
    let Some(rest) = id.strip_prefix("CVE-") else {
        return false;
    };
    let Some((year, seq)) = rest.split_once('-') else {
        return false;
    };
    year.len() == 4
        && year.bytes().all(|b| b.is_ascii_digit())
        && seq.len() >= 4
        && seq.bytes().all(|b| b.is_ascii_digit())
}

fn id_year(id: &str) -> Option<i32> {
    id.get(4..8)?.parse().ok()
}

/// JSON member names of a CVE entry. Defaults follow the CIRCL cve-search
/// dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CveFields {
    pub id: String,
    pub summary: String,
    pub references: String,
    pub published: String,
    pub cpes: String,
}

impl Default for CveFields {
    fn default() -> Self {
        Self {
            id: "id".into(),
            summary: "summary".into(),
            references: "references".into(),
            published: "Published".into(),
            cpes: "vulnerable_configuration".into(),
        }
    }
}

/// Streaming CVE loader over a JSON array or newline-delimited JSON.
pub struct CveLoader<R> {
    values: JsonValues<R>,
    fields: CveFields,
    entry: u64,
    malformed_cpes: u64,
}

impl<R: BufRead> CveLoader<R> {
    pub fn new(source: R, fields: CveFields) -> Self {
        Self {
            values: JsonValues::new(source),
            fields,
            entry: 0,
            malformed_cpes: 0,
        }
    }

    /// CPE strings skipped so far because they failed to parse.
    pub fn malformed_cpes(&self) -> u64 {
        self.malformed_cpes
    }

    fn convert(&mut self, value: Value) -> Result<CveRecord, RejectReason> {
        let Value::Object(obj) = value else {
            return Err(RejectReason::NotAnObject);
        };
        let f = &self.fields;
        let cve_id = match obj.get(&f.id) {
            Some(Value::String(s)) => s.trim().to_string(),
            _ => return Err(RejectReason::MissingField(f.id.clone())),
        };
        if !is_valid_cve_id(&cve_id) {
            return Err(RejectReason::InvalidCveId(cve_id));
        }
        let summary = match obj.get(&f.summary) {
            Some(Value::String(s)) => s.clone(),
            _ => String::new(),
        };
        let references = string_items(&obj, &f.references, &["url"]);
        let published = match obj.get(&f.published) {
            Some(Value::String(s)) => parse_leading_date(s),
            _ => None,
        };
        let mut cpes = Vec::new();
        for raw in string_items(&obj, &f.cpes, &["id", "cpe23Uri", "criteria"]) {
            match parse_cpe23(&raw) {
                Ok(c) => cpes.push(c),
                Err(_) => self.malformed_cpes += 1,
            }
        }
        Ok(CveRecord {
            cve_id,
            summary,
            references,
            published,
            cpes,
        })
    }
}

/// Strings of an array member; object items contribute the first string
/// found under `object_keys`.
fn string_items(obj: &Map<String, Value>, key: &str, object_keys: &[&str]) -> Vec<String> {
    let Some(Value::Array(items)) = obj.get(key) else {
        return Vec::new();
    };
    items
        .iter()
        .filter_map(|item| match item {
            Value::String(s) => Some(s.clone()),
            Value::Object(o) => object_keys
                .iter()
                .find_map(|k| o.get(*k).and_then(Value::as_str))
                .map(str::to_string),
            _ => None,
        })
        .collect()
}

impl<R: BufRead> Iterator for CveLoader<R> {
    type Item = Result<Loaded<CveRecord>, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        let value = match self.values.next()? {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        self.entry += 1;
        Some(Ok(match self.convert(value) {
            Ok(r) => Loaded::Record(r),
            Err(reason) => Loaded::Reject(Reject {
                source: RejectSource::Cves,
                row: self.entry,
                reason,
            }),
        }))
    }
}

pub fn load_cves<R: BufRead>(source: R, fields: CveFields) -> CveLoader<R> {
    CveLoader::new(source, fields)
}
