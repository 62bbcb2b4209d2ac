use rayon::prelude::*;

use super::{Corpus, CveOutcome, Evidence, MappingResult, RepoMode, Strategy, StrategyRun, SKIP_NO_LINK};
use crate::ingest::{extract_repo_ref, CveRecord};

/// `provider/owner/repository` links found in a CVE's references, in
/// reference order without duplicates.
pub fn extract_reference_links(cve: &CveRecord) -> Vec<String> {
    let mut links: Vec<String> = Vec::new();
    for link in cve
        .references
        .iter()
        .filter_map(|url| extract_repo_ref(url))
        .map(|r| r.repo_link)
    {
        if !links.contains(&link) {
            links.push(link);
        }
    }
    links
}

/// Join CVE reference links against package repository links.
///
/// `FirstLink` credits only the first package (source order) of the first
/// link (reference order) that matches any package.
pub fn repository_map(corpus: &Corpus<'_>, mode: RepoMode) -> StrategyRun {
    let outcomes: Vec<CveOutcome> = corpus
        .cves
        .par_iter()
        .map(|cve| {
            let links = extract_reference_links(cve);
            if links.is_empty() {
                return CveOutcome::Skipped(SKIP_NO_LINK);
            }
            let result = |i: usize, link: &str| {
                let pkg = &corpus.packages[i];
                MappingResult {
                    strategy: Strategy::Repository,
                    cve_id: cve.cve_id.clone(),
                    package_key: pkg.package_key.clone(),
                    platform: pkg.platform.clone(),
                    confidence: 1.0,
                    evidence: Evidence::RepoLink { link: link.to_string() },
                }
            };
            let results = match mode {
                // A package has a single repo_link, so distinct links never
                // yield the same package twice.
                RepoMode::AllLinks => links
                    .iter()
                    .flat_map(|link| corpus.index.packages_with_link(link).iter().map(|&i| result(i, link)))
                    .collect(),
                RepoMode::FirstLink => links
                    .iter()
                    .find_map(|link| corpus.index.packages_with_link(link).first().map(|&i| result(i, link)))
                    .into_iter()
                    .collect(),
            };
            CveOutcome::Evaluated(results)
        })
        .collect();
    StrategyRun::collect(outcomes)
}
