use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use vulnmap_core::ingest::{
    load_cves, load_packages, load_versions, open_source, IngestError, KeyGuard, Loaded, Reject, RejectSource,
};
use vulnmap_core::matching::MappingKind;
use vulnmap_core::store::{
    AtomicFile, NdjsonWriter, Workspace, CVES_FILE, INGEST_SUMMARY_FILE, MAP_SUMMARY_FILE, PACKAGES_FILE, REJECTS_FILE,
    VERSIONS_FILE,
};

use crate::schema::Schema;
use crate::IngestArgs;

#[derive(Debug, Default, Serialize)]
struct SourceCounts {
    records: u64,
    rejects: u64,
}

#[derive(Debug, Serialize)]
struct IngestSummary {
    packages: SourceCounts,
    versions: Option<SourceCounts>,
    cves: SourceCounts,
    malformed_cpes: u64,
    rejects_by_reason: BTreeMap<String, u64>,
}

/// Rejects from every source go to one file, in source order.
struct RejectSink {
    out: NdjsonWriter<AtomicFile>,
    by_reason: BTreeMap<String, u64>,
}

impl RejectSink {
    fn push(&mut self, reject: &Reject) -> anyhow::Result<()> {
        let reason = serde_json::to_value(&reject.reason)?;
        let label = reason["reason"].as_str().unwrap_or("unknown").to_string();
        *self.by_reason.entry(label).or_default() += 1;
        self.out.write(reject)?;
        Ok(())
    }
}

/// Reject source, seen keys and key accessor for sources with unique ids.
type Dedup<'g, T> = (RejectSource, &'g mut KeyGuard, fn(&T) -> &str);

/// Stream one source into `output`, routing rejects and duplicate keys. The
/// file is committed by the caller once every source has parsed.
fn drain<T: Serialize>(
    records: impl Iterator<Item = Result<Loaded<T>, IngestError>>,
    input: &Path,
    output: &Path,
    rejects: &mut RejectSink,
    mut dedup: Option<Dedup<'_, T>>,
) -> anyhow::Result<(SourceCounts, AtomicFile)> {
    let mut out = NdjsonWriter::new(AtomicFile::create(output)?);
    let mut counts = SourceCounts::default();
    for item in records {
        match item.with_context(|| format!("{}", input.display()))? {
            Loaded::Record(record) => {
                if let Some((source, guard, key)) = dedup.as_mut() {
                    let row = counts.records + counts.rejects + 1;
                    if let Some(reject) = guard.admit(*source, row, key(&record)) {
                        counts.rejects += 1;
                        rejects.push(&reject)?;
                        continue;
                    }
                }
                counts.records += 1;
                out.write(&record)?;
            }
            Loaded::Reject(reject) => {
                counts.rejects += 1;
                rejects.push(&reject)?;
            }
        }
    }
    Ok((counts, out.into_inner()))
}

pub fn run(ws: &Workspace, args: &IngestArgs) -> anyhow::Result<()> {
    let schema = Schema::load(args.schema.as_deref())?;
    let mut rejects = RejectSink {
        out: NdjsonWriter::new(AtomicFile::create(ws.path(REJECTS_FILE))?),
        by_reason: BTreeMap::new(),
    };

    let source = open_source(&args.packages)?;
    let loader = load_packages(source, &schema.packages, schema.aliases())
        .with_context(|| format!("{}", args.packages.display()))?;
    let mut guard = KeyGuard::default();
    let (packages, packages_out) = drain(
        loader,
        &args.packages,
        &ws.path(PACKAGES_FILE),
        &mut rejects,
        Some((RejectSource::Packages, &mut guard, |p| p.package_key.as_str())),
    )?;
    eprintln!("packages: {} records, {} rejects", packages.records, packages.rejects);

    let versions = match &args.versions {
        Some(path) => {
            let loader = load_versions(open_source(path)?, &schema.versions, schema.aliases())
                .with_context(|| format!("{}", path.display()))?;
            let (counts, out) = drain(loader, path, &ws.path(VERSIONS_FILE), &mut rejects, None)?;
            eprintln!("versions: {} records, {} rejects", counts.records, counts.rejects);
            Some((counts, out))
        }
        None => None,
    };

    let mut loader = load_cves(open_source(&args.cves)?, schema.cves.clone());
    let mut guard = KeyGuard::default();
    let (cves, cves_out) = drain(
        loader.by_ref(),
        &args.cves,
        &ws.path(CVES_FILE),
        &mut rejects,
        Some((RejectSource::Cves, &mut guard, |c| c.cve_id.as_str())),
    )?;
    let malformed_cpes = loader.malformed_cpes();
    eprintln!(
        "cves: {} records, {} rejects, {} malformed CPE strings",
        cves.records, cves.rejects, malformed_cpes
    );

    let RejectSink { out, by_reason } = rejects;
    packages_out.commit()?;
    cves_out.commit()?;
    out.into_inner().commit()?;
    let versions = match versions {
        Some((counts, out)) => {
            out.commit()?;
            Some(counts)
        }
        None => {
            remove_if_present(&ws.path(VERSIONS_FILE))?;
            None
        }
    };

    // Mappings from a previous ingest no longer describe this store.
    for kind in MappingKind::ALL {
        remove_if_present(&ws.mappings_path(kind))?;
    }
    remove_if_present(&ws.path(MAP_SUMMARY_FILE))?;

    let summary = IngestSummary {
        packages,
        versions,
        cves,
        malformed_cpes,
        rejects_by_reason: by_reason,
    };
    vulnmap_core::store::write_json(&ws.path(INGEST_SUMMARY_FILE), &summary)?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

fn remove_if_present(path: &Path) -> anyhow::Result<()> {
    match fs::remove_file(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(e).with_context(|| format!("{}", path.display())),
        _ => Ok(()),
    }
}
