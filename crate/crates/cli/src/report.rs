use std::path::PathBuf;

use anyhow::bail;
use serde::Serialize;
use vulnmap_core::ingest::{CveRecord, PackageRecord, VersionRecord};
use vulnmap_core::matching::{MappingKind, MappingResult};
use vulnmap_core::report::{self, export_report, Report, ReportKind};
use vulnmap_core::store::{ndjson_reader, read_ndjson, AtomicFile, Workspace, CVES_FILE, PACKAGES_FILE, VERSIONS_FILE};

use crate::ReportArgs;

#[derive(Debug, Serialize)]
struct Exported {
    report: &'static str,
    file: String,
    rows: usize,
}

fn selected_reports(names: &[String]) -> anyhow::Result<Vec<ReportKind>> {
    let mut kinds = Vec::new();
    for name in names {
        if name == "all" {
            kinds.extend(ReportKind::ALL);
        } else {
            match name.parse() {
                Ok(kind) => kinds.push(kind),
                Err(e) => bail!("{e}"),
            }
        }
    }
    kinds.sort();
    kinds.dedup();
    Ok(kinds)
}

/// Lazily loaded workspace inputs, so each report reads only what it needs.
struct Inputs<'w> {
    ws: &'w Workspace,
    packages: Option<Vec<PackageRecord>>,
    cves: Option<Vec<CveRecord>>,
}

impl Inputs<'_> {
    fn packages(&mut self) -> anyhow::Result<&[PackageRecord]> {
        if self.packages.is_none() {
            self.packages = Some(read_ndjson(&self.ws.path(PACKAGES_FILE))?);
        }
        Ok(self.packages.as_deref().unwrap_or_default())
    }

    /// Versions are streamed rather than held; the file is optional.
    fn versions_per_year(&self) -> anyhow::Result<Report> {
        let path = self.ws.path(VERSIONS_FILE);
        if !path.is_file() {
            return Ok(report::versions_per_year(Vec::<VersionRecord>::new()));
        }
        let mut failure = None;
        let records = ndjson_reader::<VersionRecord>(&path)?.map_while(|r| r.map_err(|e| failure = Some(e)).ok());
        let report = report::versions_per_year(records);
        match failure {
            Some(e) => Err(e.into()),
            None => Ok(report),
        }
    }

    fn cves(&mut self) -> anyhow::Result<&[CveRecord]> {
        if self.cves.is_none() {
            self.cves = Some(read_ndjson(&self.ws.path(CVES_FILE))?);
        }
        Ok(self.cves.as_deref().unwrap_or_default())
    }

    fn mappings(&self, kind: MappingKind) -> anyhow::Result<Vec<MappingResult>> {
        Ok(read_ndjson(&self.ws.require_mappings(kind)?)?)
    }
}

fn build(kind: ReportKind, inputs: &mut Inputs<'_>, args: &ReportArgs) -> anyhow::Result<Report> {
    Ok(match kind {
        ReportKind::PlatformShare => report::platform_project_share(inputs.packages()?, args.top_k),
        ReportKind::Licenses => report::license_distribution(inputs.packages()?, args.top_k),
        ReportKind::VersionsPerYear => inputs.versions_per_year()?,
        ReportKind::CvePerYear => report::cve_per_year(inputs.cves()?),
        ReportKind::TopRepoLinks => report::top_repo_links(inputs.packages()?, args.top_links),
        ReportKind::VulnerablePackages => {
            let present: Vec<MappingKind> = MappingKind::ALL
                .into_iter()
                .filter(|k| inputs.ws.mappings_path(*k).is_file())
                .collect();
            if present.is_empty() {
                inputs.ws.require_mappings(MappingKind::Strict)?;
            }
            let loaded = present
                .into_iter()
                .map(|k| Ok((k, inputs.mappings(k)?)))
                .collect::<anyhow::Result<Vec<_>>>()?;
            report::vulnerable_package_count(loaded.iter().map(|(k, r)| (*k, r.as_slice())))
        }
        ReportKind::MappedCvePerYear => {
            let strict = inputs.mappings(MappingKind::Strict)?;
            report::mapped_cve_per_year(&strict, inputs.cves()?)
        }
    })
}

pub fn run(ws: &Workspace, args: &ReportArgs) -> anyhow::Result<()> {
    let kinds = selected_reports(&args.report)?;
    ws.require_store()?;
    // Fail before writing anything when a mapping file is missing.
    for kind in kinds.iter().filter(|k| k.needs_mappings()) {
        if *kind == ReportKind::MappedCvePerYear || MappingKind::ALL.iter().all(|m| !ws.mappings_path(*m).is_file()) {
            ws.require_mappings(MappingKind::Strict)?;
        }
    }

    let mut inputs = Inputs {
        ws,
        packages: None,
        cves: None,
    };
    let mut exported = Vec::new();
    for kind in kinds {
        let report = build(kind, &mut inputs, args)?;
        let path: PathBuf = ws.report_path(kind, args.format);
        let mut file = AtomicFile::create(&path)?;
        export_report(&report, args.format, &mut file)?;
        file.commit()?;
        eprintln!("{kind}: {} rows -> {}", report.rows.len(), path.display());
        exported.push(Exported {
            report: kind.name(),
            file: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            rows: report.rows.len(),
        });
    }
    println!("{}", serde_json::json!({ "reports": exported }));
    Ok(())
}
