//! Frequency reports over ingested records and mapping results, with CSV
//! and JSON export.
//!
//! Rows are ranked by count (descending) then by their key values. Top-k
//! reports append an `Others` bucket and, for licenses, an `(unspecified)`
//! bucket after the ranked rows. Percentages keep the exact ratio in memory
//! and are rounded half-to-even to two decimals on export.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::ingest::{CveRecord, PackageRecord, VersionRecord};
use crate::matching::{MappingKind, MappingResult};

pub const OTHERS: &str = "Others";
pub const UNSPECIFIED_LICENSE: &str = "(unspecified)";
pub const DEFAULT_TOP_K: usize = 7;
pub const DEFAULT_TOP_LINKS: usize = 10;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("failed to write report: {0}")]
    SinkWrite(#[from] std::io::Error),
}

impl From<csv::Error> for ReportError {
    fn from(e: csv::Error) -> Self {
        ReportError::SinkWrite(e.into())
    }
}

impl From<serde_json::Error> for ReportError {
    fn from(e: serde_json::Error) -> Self {
        ReportError::SinkWrite(e.into())
    }
}

/// `part / total` as a percentage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Share {
    pub part: u64,
    pub total: u64,
}

impl Share {
    pub fn percent(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.part as f64 * 100.0 / self.total as f64
    }

    /// Percentage in hundredths, rounded half to even with exact integer
    /// arithmetic.
    pub fn hundredths(&self) -> u64 {
        if self.total == 0 {
            return 0;
        }
        let n = u128::from(self.part) * 10_000;
        let d = u128::from(self.total);
        let (q, r) = (n / d, n % d);
        let up = match (2 * r).cmp(&d) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Equal => q % 2 == 1,
            std::cmp::Ordering::Less => false,
        };
        (q + u128::from(up)) as u64
    }
}

impl fmt::Display for Share {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.hundredths();
        write!(f, "{}.{:02}", h / 100, h % 100)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub keys: Vec<String>,
    pub count: u64,
    pub share: Option<Share>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub title: String,
    pub group_columns: Vec<String>,
    pub with_share: bool,
    pub rows: Vec<ReportRow>,
    pub metadata: BTreeMap<String, Value>,
}

impl Report {
    fn new(name: &str, title: &str, group_columns: &[&str], with_share: bool) -> Self {
        Self {
            name: name.to_string(),
            title: title.to_string(),
            group_columns: group_columns.iter().map(|c| c.to_string()).collect(),
            with_share,
            rows: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_metadata(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.count).sum()
    }

    pub fn row(&self, keys: &[&str]) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.keys.iter().map(String::as_str).eq(keys.iter().copied()))
    }

    pub fn count(&self, keys: &[&str]) -> u64 {
        self.row(keys).map_or(0, |r| r.count)
    }

    /// Sum of exact share percentages (100 for non-empty share reports).
    pub fn share_sum(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.share).map(|s| s.percent()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReportKind {
    PlatformShare,
    Licenses,
    VersionsPerYear,
    CvePerYear,
    VulnerablePackages,
    MappedCvePerYear,
    TopRepoLinks,
}

impl ReportKind {
    pub const ALL: [ReportKind; 7] = [
        ReportKind::PlatformShare,
        ReportKind::Licenses,
        ReportKind::VersionsPerYear,
        ReportKind::CvePerYear,
        ReportKind::VulnerablePackages,
        ReportKind::MappedCvePerYear,
        ReportKind::TopRepoLinks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReportKind::PlatformShare => "platform-share",
            ReportKind::Licenses => "licenses",
            ReportKind::VersionsPerYear => "versions-per-year",
            ReportKind::CvePerYear => "cve-per-year",
            ReportKind::VulnerablePackages => "vulnerable-packages",
            ReportKind::MappedCvePerYear => "mapped-cve-per-year",
            ReportKind::TopRepoLinks => "top-repo-links",
        }
    }

    /// Whether the report is computed from mapping output.
    pub fn needs_mappings(self) -> bool {
        matches!(self, ReportKind::VulnerablePackages | ReportKind::MappedCvePerYear)
    }
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReportKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReportKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown report {s:?}"))
    }
}

fn rank_desc(counts: impl IntoIterator<Item = (Vec<String>, u64)>) -> Vec<(Vec<String>, u64)> {
    let mut rows: Vec<_> = counts.into_iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows
}

fn plain_rows(ranked: Vec<(Vec<String>, u64)>) -> Vec<ReportRow> {
    ranked
        .into_iter()
        .map(|(keys, count)| ReportRow {
            keys,
            count,
            share: None,
        })
        .collect()
}

/// Ranked rows limited to `top_k`, then `Others` (if anything was cut) and
/// any trailing buckets; every row carries its share of the grand total.
fn top_k_with_shares(
    counts: HashMap<String, u64>,
    top_k: usize,
    trailing: Vec<(String, u64)>,
) -> (Vec<ReportRow>, u64) {
    let ranked = rank_desc(counts.into_iter().map(|(k, c)| (vec![k], c)));
    let total: u64 = ranked.iter().map(|r| r.1).sum::<u64>() + trailing.iter().map(|t| t.1).sum::<u64>();
    let share = |part| Some(Share { part, total });
    let mut rows = Vec::new();
    let mut others = 0u64;
    let mut others_groups = 0u64;
    for (i, (keys, count)) in ranked.into_iter().enumerate() {
        if i < top_k {
            rows.push(ReportRow {
                keys,
                count,
                share: share(count),
            });
        } else {
            others += count;
            others_groups += 1;
        }
    }
    if others_groups > 0 {
        rows.push(ReportRow {
            keys: vec![OTHERS.to_string()],
            count: others,
            share: share(others),
        });
    }
    for (label, count) in trailing {
        if count > 0 {
            rows.push(ReportRow {
                keys: vec![label],
                count,
                share: share(count),
            });
        }
    }
    (rows, others_groups)
}

/// Projects per platform, top `top_k` plus `Others`.
pub fn platform_project_share(packages: &[PackageRecord], top_k: usize) -> Report {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for p in packages {
        *counts.entry(p.platform.clone()).or_default() += 1;
    }
    let (rows, others_groups) = top_k_with_shares(counts, top_k, Vec::new());
    let mut report = Report::new("platform-share", "Projects per package manager", &["platform"], true)
        .with_metadata("top_k", top_k)
        .with_metadata("others_groups", others_groups)
        .with_metadata("total_packages", packages.len());
    report.rows = rows;
    report
}

/// Packages per license label, top `top_k` plus `Others`; empty labels go to
/// an unranked `(unspecified)` row.
pub fn license_distribution(packages: &[PackageRecord], top_k: usize) -> Report {
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut unspecified = 0u64;
    for p in packages {
        if p.license.trim().is_empty() {
            unspecified += 1;
        } else {
            *counts.entry(p.license.trim().to_string()).or_default() += 1;
        }
    }
    let (rows, others_groups) = top_k_with_shares(counts, top_k, vec![(UNSPECIFIED_LICENSE.to_string(), unspecified)]);
    let mut report = Report::new("licenses", "Packages per license", &["license"], true)
        .with_metadata("top_k", top_k)
        .with_metadata("others_groups", others_groups)
        .with_metadata("unspecified", unspecified);
    report.rows = rows;
    report
}

/// Published versions per (platform, year). Accepts a slice or a stream of
/// owned records.
pub fn versions_per_year<V: Borrow<VersionRecord>>(versions: impl IntoIterator<Item = V>) -> Report {
    let mut counts: HashMap<String, HashMap<i32, u64>> = HashMap::new();
    for v in versions {
        let v = v.borrow();
        if !counts.contains_key(&v.platform) {
            counts.insert(v.platform.clone(), HashMap::new());
        }
        *counts.get_mut(&v.platform).unwrap().entry(v.year()).or_default() += 1;
    }
    let mut report = Report::new(
        "versions-per-year",
        "Published versions per package manager and year",
        &["platform", "year"],
        false,
    );
    report.rows = plain_rows(rank_desc(counts.into_iter().flat_map(|(p, years)| {
        years.into_iter().map(move |(y, c)| (vec![p.clone(), y.to_string()], c))
    })));
    report
}

/// CVE entries per year (published date, falling back to the id year).
pub fn cve_per_year(cves: &[CveRecord]) -> Report {
    let mut counts: HashMap<i32, u64> = HashMap::new();
    let mut from_id = 0u64;
    for c in cves {
        if c.published.is_none() {
            from_id += 1;
        }
        *counts.entry(c.year()).or_default() += 1;
    }
    let mut report =
        Report::new("cve-per-year", "CVE entries per year", &["year"], false).with_metadata("year_from_id", from_id);
    report.rows = plain_rows(rank_desc(counts.into_iter().map(|(y, c)| (vec![y.to_string()], c))));
    report
}

/// Distinct packages per (mapping kind, platform). Metadata also carries
/// (CVE, package) pair counts under `pairs`.
pub fn vulnerable_package_count<'a>(mappings: impl IntoIterator<Item = (MappingKind, &'a [MappingResult])>) -> Report {
    let mut distinct: BTreeMap<(String, String), BTreeSet<&'a str>> = BTreeMap::new();
    let mut pairs: BTreeMap<String, u64> = BTreeMap::new();
    let mut kinds = Vec::new();
    for (kind, results) in mappings {
        kinds.push(kind.label());
        for r in results {
            distinct
                .entry((kind.label().to_string(), r.platform.clone()))
                .or_default()
                .insert(r.package_key.as_str());
            *pairs.entry(format!("{}/{}", kind.label(), r.platform)).or_default() += 1;
        }
    }
    let mut report = Report::new(
        "vulnerable-packages",
        "Vulnerable packages per mapping strategy and package manager",
        &["strategy", "platform"],
        false,
    )
    .with_metadata("counting", "distinct package_key")
    .with_metadata("strategies", kinds)
    .with_metadata("pairs", json!(pairs));
    report.rows = plain_rows(rank_desc(
        distinct
            .into_iter()
            .map(|((s, p), keys)| (vec![s, p], keys.len() as u64)),
    ));
    report
}

/// Distinct mapped CVEs per (platform, year).
pub fn mapped_cve_per_year(mappings: &[MappingResult], cves: &[CveRecord]) -> Report {
    let years: HashMap<&str, i32> = cves.iter().map(|c| (c.cve_id.as_str(), c.year())).collect();
    let mut distinct: HashMap<(String, i32), BTreeSet<&str>> = HashMap::new();
    let mut unknown = 0u64;
    for m in mappings {
        match years.get(m.cve_id.as_str()) {
            Some(&y) => {
                distinct
                    .entry((m.platform.clone(), y))
                    .or_default()
                    .insert(m.cve_id.as_str());
            }
            None => unknown += 1,
        }
    }
    let mut report = Report::new(
        "mapped-cve-per-year",
        "Mapped CVE entries per package manager and year",
        &["platform", "year"],
        false,
    )
    .with_metadata("unknown_cve_results", unknown);
    report.rows = plain_rows(rank_desc(
        distinct
            .into_iter()
            .map(|((p, y), ids)| (vec![p, y.to_string()], ids.len() as u64)),
    ));
    report
}

/// The `k` repository links shared by the most packages.
pub fn top_repo_links(packages: &[PackageRecord], k: usize) -> Report {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for link in packages.iter().filter_map(PackageRecord::repo_link) {
        *counts.entry(link).or_default() += 1;
    }
    let distinct = counts.len();
    let mut ranked = rank_desc(counts.into_iter().map(|(l, c)| (vec![l.to_string()], c)));
    ranked.truncate(k);
    let mut report = Report::new("top-repo-links", "Most common repository links", &["repo_link"], false)
        .with_metadata("k", k)
        .with_metadata("distinct_links", distinct);
    report.rows = plain_rows(ranked);
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Json,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(format!("unknown export format {other:?}")),
        }
    }
}

pub fn export_report<W: Write>(report: &Report, format: ExportFormat, sink: W) -> Result<(), ReportError> {
    match format {
        ExportFormat::Csv => export_csv(report, sink),
        ExportFormat::Json => export_json(report, sink),
    }
}

fn header(report: &Report) -> Vec<&str> {
    let mut h: Vec<&str> = report.group_columns.iter().map(String::as_str).collect();
    h.push("count");
    if report.with_share {
        h.push("share");
    }
    h
}

fn export_csv<W: Write>(report: &Report, sink: W) -> Result<(), ReportError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(header(report))?;
    for row in &report.rows {
        let mut fields = row.keys.clone();
        fields.push(row.count.to_string());
        if report.with_share {
            fields.push(row.share.map(|s| s.to_string()).unwrap_or_default());
        }
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

fn export_json<W: Write>(report: &Report, mut sink: W) -> Result<(), ReportError> {
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (col, key) in report.group_columns.iter().zip(&row.keys) {
                obj.insert(col.clone(), Value::String(key.clone()));
            }
            obj.insert("count".into(), json!(row.count));
            if report.with_share {
                let share = row.share.map(|s| s.hundredths() as f64 / 100.0);
                obj.insert("share".into(), json!(share));
            }
            Value::Object(obj)
        })
        .collect();
    let doc = json!({
        "name": report.name,
        "title": report.title,
        "group_columns": report.group_columns,
        "metadata": report.metadata,
        "rows": rows,
    });
    serde_json::to_writer_pretty(&mut sink, &doc)?;
    sink.write_all(b"\n")?;
    sink.flush()?;
    Ok(())
}
