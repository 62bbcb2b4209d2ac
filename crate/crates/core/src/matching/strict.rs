use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use super::lookup::lowercase;
use super::{Corpus, CveOutcome, Evidence, MappingResult, PlatformLookup, Strategy, StrategyRun, SKIP_NO_PRODUCT};

/// Canonical label of the Go module ecosystem.
pub const GO_PLATFORM: &str = "Go";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StrictOptions {
    /// Extension: also compare the last path segment of Go module names
    /// (`github.com/owner/repo` -> `repo`) against CPE products. Off by
    /// default, which keeps the full-path comparison.
    pub go_last_segment: bool,
}

/// Map every package whose name equals a CPE product of a CVE, on platforms
/// whose target_sw aliases or summary keywords match that CVE.
pub fn strict_name_map(corpus: &Corpus<'_>, lookup: &PlatformLookup, options: StrictOptions) -> StrategyRun {
    let go_segments = options.go_last_segment.then(|| go_last_segment_index(corpus));
    let platforms = lookup.platforms();

    let outcomes: Vec<CveOutcome> = corpus
        .cves
        .par_iter()
        .map(|cve| {
            let products = cve.products();
            if products.is_empty() {
                return CveOutcome::Skipped(SKIP_NO_PRODUCT);
            }
            let targets = cve.target_software();
            let summary = lowercase(&cve.summary);
            let mut seen = HashSet::new();
            let mut results = Vec::new();
            for platform in &platforms {
                let gate = if let Some(t) = lookup.target_sw_hit(platform, &targets) {
                    Gate::TargetSw(t)
                } else if let Some(k) = lookup.keyword_hit(platform, &summary) {
                    Gate::Keyword(k)
                } else {
                    continue;
                };
                for product in &products {
                    let by_name = corpus.index.packages_named(platform, product).iter();
                    let by_segment = go_segments
                        .as_ref()
                        .filter(|_| *platform == GO_PLATFORM)
                        .and_then(|m| m.get(*product))
                        .into_iter()
                        .flatten();
                    for &i in by_name.chain(by_segment) {
                        if !seen.insert(i) {
                            continue;
                        }
                        let pkg = &corpus.packages[i];
                        results.push(MappingResult {
                            strategy: Strategy::StrictName,
                            cve_id: cve.cve_id.clone(),
                            package_key: pkg.package_key.clone(),
                            platform: pkg.platform.clone(),
                            confidence: 1.0,
                            evidence: gate.evidence(product),
                        });
                    }
                }
            }
            CveOutcome::Evaluated(results)
        })
        .collect();
    StrategyRun::collect(outcomes)
}

/// Which platform clause admitted a CVE.
enum Gate<'a> {
    TargetSw(&'a str),
    Keyword(&'a str),
}

impl Gate<'_> {
    fn evidence(&self, product: &str) -> Evidence {
        match self {
            Gate::TargetSw(t) => Evidence::ProductNameEqual {
                product: product.to_string(),
                target_sw: t.to_string(),
            },
            Gate::Keyword(k) => Evidence::SummaryKeyword { token: k.to_string() },
        }
    }
}

/// Go packages keyed by the last `/` segment of their name, for names that
/// have more than one segment.
fn go_last_segment_index(corpus: &Corpus<'_>) -> HashMap<String, Vec<usize>> {
    let mut map: HashMap<String, Vec<usize>> = HashMap::new();
    for (i, p) in corpus.packages.iter().enumerate() {
        if p.platform != GO_PLATFORM {
            continue;
        }
        if let Some((_, last)) = p.name.rsplit_once('/') {
            if !last.is_empty() {
                map.entry(last.to_string()).or_default().push(i);
            }
        }
    }
    map
}
