use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    partial_fuzzy_map, repository_map, strict_name_map, Corpus, MappingKind, PlatformLookup, RepoMode, StrategyRun,
    StrategyTally, StrictOptions,
};
use crate::fuzzy::DEFAULT_CUTOFF;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapOptions {
    pub cutoff: f64,
    pub go_last_segment: bool,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            cutoff: DEFAULT_CUTOFF,
            go_last_segment: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MappingRun {
    pub runs: BTreeMap<MappingKind, StrategyRun>,
}

impl MappingRun {
    pub fn tallies(&self) -> BTreeMap<MappingKind, &StrategyTally> {
        self.runs.iter().map(|(k, r)| (*k, &r.tally)).collect()
    }
}

/// Run the selected strategies; each kind is computed exactly as its
/// standalone function would.
pub fn run_selected(
    corpus: &Corpus<'_>,
    lookup: &PlatformLookup,
    options: MapOptions,
    kinds: &[MappingKind],
) -> MappingRun {
    let mut run = MappingRun::default();
    for &kind in kinds {
        if run.runs.contains_key(&kind) {
            continue;
        }
        let output = match kind {
            MappingKind::Strict => strict_name_map(
                corpus,
                lookup,
                StrictOptions {
                    go_last_segment: options.go_last_segment,
                },
            ),
            MappingKind::Fuzzy => partial_fuzzy_map(corpus, lookup, options.cutoff),
            MappingKind::RepoAll => repository_map(corpus, RepoMode::AllLinks),
            MappingKind::RepoFirst => repository_map(corpus, RepoMode::FirstLink),
        };
        run.runs.insert(kind, output);
    }
    run
}

/// All three strategies, the repository one in both counting modes.
pub fn run_all(corpus: &Corpus<'_>, lookup: &PlatformLookup, options: MapOptions) -> MappingRun {
    run_selected(corpus, lookup, options, &MappingKind::ALL)
}
