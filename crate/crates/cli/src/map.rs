use std::collections::BTreeMap;
use std::fs;

use anyhow::{bail, Context};
use serde::Serialize;
use vulnmap_core::ingest::{CveRecord, PackageRecord};
use vulnmap_core::matching::{run_selected, Corpus, MapOptions, MappingKind, PlatformLookup, StrategyTally};
use vulnmap_core::store::{
    read_ndjson, write_json, write_ndjson, Workspace, CVES_FILE, MAP_SUMMARY_FILE, PACKAGES_FILE,
};

use crate::{MapArgs, ModeArg, StrategyArg};

#[derive(Debug, Serialize)]
struct MapSummary<'a> {
    cutoff: f64,
    go_last_segment: bool,
    lookup: String,
    strategies: BTreeMap<&'static str, &'a StrategyTally>,
}

/// Mapping kinds selected by `--strategy` and `--mode`.
pub fn selected_kinds(strategies: &[StrategyArg], mode: Option<ModeArg>) -> Vec<MappingKind> {
    let repo: &[MappingKind] = match mode {
        Some(ModeArg::All) => &[MappingKind::RepoAll],
        Some(ModeArg::First) => &[MappingKind::RepoFirst],
        None => &[MappingKind::RepoAll, MappingKind::RepoFirst],
    };
    let mut kinds = Vec::new();
    for s in strategies {
        match s {
            StrategyArg::Strict => kinds.push(MappingKind::Strict),
            StrategyArg::Fuzzy => kinds.push(MappingKind::Fuzzy),
            StrategyArg::Repository => kinds.extend_from_slice(repo),
            StrategyArg::All => {
                kinds.extend_from_slice(&[MappingKind::Strict, MappingKind::Fuzzy]);
                kinds.extend_from_slice(repo);
            }
        }
    }
    kinds.sort();
    kinds.dedup();
    kinds
}

pub fn run(ws: &Workspace, args: &MapArgs) -> anyhow::Result<()> {
    let kinds = selected_kinds(&args.strategy, args.mode);
    if kinds.is_empty() {
        bail!("no strategy selected");
    }
    ws.require_store()?;
    let (lookup, lookup_label) = match &args.lookup {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
            let table = PlatformLookup::from_toml(&text).with_context(|| format!("{}", path.display()))?;
            (table, path.display().to_string())
        }
        None => (PlatformLookup::builtin(), "builtin".to_string()),
    };

    let packages: Vec<PackageRecord> = read_ndjson(&ws.path(PACKAGES_FILE))?;
    let cves: Vec<CveRecord> = read_ndjson(&ws.path(CVES_FILE))?;
    eprintln!("mapping {} CVEs onto {} packages", cves.len(), packages.len());

    let corpus = Corpus::new(&packages, &cves);
    let options = MapOptions {
        cutoff: args.cutoff,
        go_last_segment: args.go_last_segment,
    };
    let run = run_selected(&corpus, &lookup, options, &kinds);
    for (kind, output) in &run.runs {
        let path = ws.mappings_path(*kind);
        write_ndjson(&path, &output.results)?;
        eprintln!(
            "{kind}: {} results for {} of {} CVEs",
            output.tally.results, output.tally.mapped, output.tally.total_cves
        );
    }

    let summary = MapSummary {
        cutoff: args.cutoff,
        go_last_segment: args.go_last_segment,
        lookup: lookup_label,
        strategies: run.runs.iter().map(|(k, r)| (k.label(), &r.tally)).collect(),
    };
    write_json(&ws.path(MAP_SUMMARY_FILE), &summary)?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(())
}
