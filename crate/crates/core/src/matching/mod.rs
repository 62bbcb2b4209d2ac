//! CVE-to-package mapping strategies.
//!
//! * [`strict_name_map`]: package name equals a CPE product, gated by
//!   platform evidence (target_sw alias or summary keyword).
//! * [`partial_fuzzy_map`]: infer one platform per CVE from summary keywords
//!   and reference hosts, collect packages whose name or keywords contain a
//!   product, and keep the best fuzzy match above a cutoff.
//! * [`repository_map`]: join `provider/owner/repository` links found in CVE
//!   references against package repository links, crediting every package
//!   ([`RepoMode::AllLinks`]) or only the first one ([`RepoMode::FirstLink`]).
//!
//! All strategies are read-only over a [`Corpus`] and shard CVEs across the
//! current rayon pool; output order is CVE input order regardless of worker
//! count.

mod lookup;
mod partial;
mod repository;
mod run;
mod strict;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ingest::{build_indexes, CveRecord, IndexSet, PackageRecord};

pub use lookup::{contains_word, lowercase, LookupError, PlatformLookup, DEFAULT_LOOKUP_TOML};
pub use partial::{infer_platform, partial_fuzzy_map, PlatformInference};
pub use repository::{extract_reference_links, repository_map};
pub use run::{run_all, run_selected, MapOptions, MappingRun};
pub use strict::{strict_name_map, StrictOptions, GO_PLATFORM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    StrictName,
    PartialFuzzy,
    Repository,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RepoMode {
    AllLinks,
    FirstLink,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Evidence {
    /// Name equals the CPE product and the platform's target_sw alias matched.
    ProductNameEqual {
        product: String,
        target_sw: String,
    },
    SummaryKeyword {
        token: String,
    },
    ReferenceUrl {
        url: String,
    },
    RepoLink {
        link: String,
    },
    FuzzyScore {
        query: String,
        candidate: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingResult {
    pub strategy: Strategy,
    pub cve_id: String,
    pub package_key: String,
    pub platform: String,
    pub confidence: f64,
    pub evidence: Evidence,
}

/// One output set of a mapping run; the repository strategy yields two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MappingKind {
    Strict,
    Fuzzy,
    RepoAll,
    RepoFirst,
}

impl MappingKind {
    pub const ALL: [MappingKind; 4] = [
        MappingKind::Strict,
        MappingKind::Fuzzy,
        MappingKind::RepoAll,
        MappingKind::RepoFirst,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MappingKind::Strict => "strict",
            MappingKind::Fuzzy => "fuzzy",
            MappingKind::RepoAll => "repo-all",
            MappingKind::RepoFirst => "repo-first",
        }
    }

    pub fn file_name(self) -> String {
        format!("mappings_{}.ndjson", self.label())
    }

    pub fn strategy(self) -> Strategy {
        match self {
            MappingKind::Strict => Strategy::StrictName,
            MappingKind::Fuzzy => Strategy::PartialFuzzy,
            MappingKind::RepoAll | MappingKind::RepoFirst => Strategy::Repository,
        }
    }
}

impl fmt::Display for MappingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MappingKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MappingKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| format!("unknown mapping kind {s:?}"))
    }
}

/// Ingested records plus their indexes.
#[derive(Debug, Clone)]
pub struct Corpus<'a> {
    pub packages: &'a [PackageRecord],
    pub cves: &'a [CveRecord],
    pub index: IndexSet,
}

impl<'a> Corpus<'a> {
    pub fn new(packages: &'a [PackageRecord], cves: &'a [CveRecord]) -> Self {
        Self {
            packages,
            cves,
            index: build_indexes(packages, cves),
        }
    }
}

/// Per-CVE accounting for one strategy: `skipped + mapped + unmatched ==
/// total_cves`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyTally {
    pub total_cves: u64,
    pub skipped: u64,
    pub mapped: u64,
    pub unmatched: u64,
    pub results: u64,
    pub skip_reasons: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StrategyRun {
    pub results: Vec<MappingResult>,
    pub tally: StrategyTally,
}

pub(crate) enum CveOutcome {
    Skipped(&'static str),
    Evaluated(Vec<MappingResult>),
}

impl StrategyRun {
    pub(crate) fn collect(outcomes: Vec<CveOutcome>) -> Self {
        let mut run = StrategyRun::default();
        for outcome in outcomes {
            run.tally.total_cves += 1;
            match outcome {
                CveOutcome::Skipped(reason) => {
                    run.tally.skipped += 1;
                    *run.tally.skip_reasons.entry(reason.to_string()).or_default() += 1;
                }
                CveOutcome::Evaluated(results) if results.is_empty() => run.tally.unmatched += 1,
                CveOutcome::Evaluated(results) => {
                    run.tally.mapped += 1;
                    run.tally.results += results.len() as u64;
                    run.results.extend(results);
                }
            }
        }
        run
    }
}

pub(crate) const SKIP_NO_PRODUCT: &str = "no_cpe_product";
pub(crate) const SKIP_NO_PLATFORM: &str = "no_platform";
pub(crate) const SKIP_AMBIGUOUS: &str = "ambiguous_platform";
pub(crate) const SKIP_NO_LINK: &str = "no_reference_link";
