use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

use super::lookup::lowercase;
use super::{
    Corpus, CveOutcome, Evidence, MappingResult, PlatformLookup, Strategy, StrategyRun, SKIP_AMBIGUOUS,
    SKIP_NO_PLATFORM, SKIP_NO_PRODUCT,
};
use crate::fuzzy::best_match;
use crate::ingest::CveRecord;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlatformInference {
    None,
    Unique {
        platform: String,
        evidence: Evidence,
    },
    /// More than one platform matched; the CVE is skipped.
    Ambiguous(Vec<String>),
}

/// Assign a package manager to a CVE from summary keywords (word match) and
/// reference URL hosts.
pub fn infer_platform(cve: &CveRecord, lookup: &PlatformLookup) -> PlatformInference {
    let summary = lowercase(&cve.summary);
    let mut hits: Vec<(&str, Evidence)> = Vec::new();
    for platform in lookup.platforms() {
        if let Some(token) = lookup.keyword_hit(platform, &summary) {
            hits.push((
                platform,
                Evidence::SummaryKeyword {
                    token: token.to_string(),
                },
            ));
        } else if let Some(url) = lookup.reference_hit(platform, &cve.references) {
            hits.push((platform, Evidence::ReferenceUrl { url: url.to_string() }));
        }
    }
    match hits.len() {
        0 => PlatformInference::None,
        1 => {
            let (platform, evidence) = hits.pop().expect("one hit");
            PlatformInference::Unique {
                platform: platform.to_string(),
                evidence,
            }
        }
        _ => PlatformInference::Ambiguous(hits.into_iter().map(|(p, _)| p.to_string()).collect()),
    }
}

struct Plan<'c> {
    platform: String,
    products: Vec<&'c str>,
}

#[derive(Debug, Clone)]
struct Selection {
    package: usize,
    candidate: String,
    score: f64,
}

/// For each CVE with exactly one inferred platform, map each CPE product to
/// the best fuzzy match among that platform's packages whose name or
/// keywords contain the product. At most one result per (CVE, product).
pub fn partial_fuzzy_map(corpus: &Corpus<'_>, lookup: &PlatformLookup, cutoff: f64) -> StrategyRun {
    let plans: Vec<Result<Plan<'_>, &'static str>> = corpus
        .cves
        .par_iter()
        .map(|cve| {
            let platform = match infer_platform(cve, lookup) {
                PlatformInference::Unique { platform, .. } => platform,
                PlatformInference::None => return Err(SKIP_NO_PLATFORM),
                PlatformInference::Ambiguous(_) => return Err(SKIP_AMBIGUOUS),
            };
            let products = cve.products();
            if products.is_empty() {
                return Err(SKIP_NO_PRODUCT);
            }
            Ok(Plan { platform, products })
        })
        .collect();

    let pairs: BTreeSet<(&str, &str)> = plans
        .iter()
        .flatten()
        .flat_map(|p| p.products.iter().map(|prod| (p.platform.as_str(), *prod)))
        .collect();
    let platforms: BTreeSet<&str> = pairs.iter().map(|(p, _)| *p).collect();
    let candidate_index: HashMap<&str, PlatformPackages> = platforms
        .into_par_iter()
        .map(|p| (p, PlatformPackages::build(corpus, p)))
        .collect();
    let selections: HashMap<(&str, &str), Selection> = pairs
        .into_par_iter()
        .filter_map(|(platform, product)| {
            let members = &candidate_index[platform];
            select(corpus, members, product, cutoff).map(|s| ((platform, product), s))
        })
        .collect();

    let outcomes = plans
        .iter()
        .zip(corpus.cves)
        .map(|(plan, cve)| {
            let plan = match plan {
                Ok(p) => p,
                Err(reason) => return CveOutcome::Skipped(reason),
            };
            let mut seen = HashSet::new();
            let mut results = Vec::new();
            for product in &plan.products {
                let Some(sel) = selections.get(&(plan.platform.as_str(), *product)) else {
                    continue;
                };
                if !seen.insert(sel.package) {
                    continue;
                }
                let pkg = &corpus.packages[sel.package];
                results.push(MappingResult {
                    strategy: Strategy::PartialFuzzy,
                    cve_id: cve.cve_id.clone(),
                    package_key: pkg.package_key.clone(),
                    platform: pkg.platform.clone(),
                    confidence: sel.score,
                    evidence: Evidence::FuzzyScore {
                        query: product.to_string(),
                        candidate: sel.candidate.clone(),
                    },
                });
            }
            CveOutcome::Evaluated(results)
        })
        .collect();
    StrategyRun::collect(outcomes)
}

fn select(corpus: &Corpus<'_>, members: &PlatformPackages, product: &str, cutoff: f64) -> Option<Selection> {
    let mut names: Vec<&str> = Vec::new();
    let mut first_package: Vec<usize> = Vec::new();
    let mut seen: HashSet<&str> = HashSet::new();
    for i in members.candidates(corpus, product) {
        let name = corpus.packages[i].name.as_str();
        if seen.insert(name) {
            names.push(name);
            first_package.push(i);
        }
    }
    let m = best_match(product, &names, cutoff)?;
    Some(Selection {
        package: first_package[m.index],
        candidate: m.candidate.to_string(),
        score: m.score,
    })
}

type GramKey = u64;

fn trigrams(s: &str) -> impl Iterator<Item = GramKey> + '_ {
    let chars: Vec<char> = s.chars().collect();
    (0..chars.len().saturating_sub(2)).map(move |i| {
        (u64::from(u32::from(chars[i])) << 42)
            | (u64::from(u32::from(chars[i + 1])) << 21)
            | u64::from(u32::from(chars[i + 2]))
    })
}

/// Packages of one platform with a trigram inverted index over their names
/// and keywords, for substring candidate lookup.
struct PlatformPackages {
    members: Vec<usize>,
    postings: HashMap<GramKey, Vec<u32>>,
}

impl PlatformPackages {
    fn build(corpus: &Corpus<'_>, platform: &str) -> Self {
        let members: Vec<usize> = corpus
            .packages
            .iter()
            .enumerate()
            .filter(|(_, p)| p.platform == platform)
            .map(|(i, _)| i)
            .collect();
        let mut postings: HashMap<GramKey, Vec<u32>> = HashMap::new();
        let mut keys: Vec<GramKey> = Vec::new();
        for (slot, &i) in members.iter().enumerate() {
            let p = &corpus.packages[i];
            keys.clear();
            keys.extend(trigrams(&p.name));
            for k in &p.keywords {
                keys.extend(trigrams(k));
            }
            keys.sort_unstable();
            keys.dedup();
            for &k in &keys {
                postings.entry(k).or_default().push(slot as u32);
            }
        }
        Self { members, postings }
    }

    /// Package positions (source order) whose name or a keyword contains
    /// `product`.
    fn candidates(&self, corpus: &Corpus<'_>, product: &str) -> Vec<usize> {
        let contains = |i: usize| {
            let p = &corpus.packages[i];
            p.name.contains(product) || p.keywords.iter().any(|k| k.contains(product))
        };
        let mut keys: Vec<GramKey> = trigrams(product).collect();
        if keys.is_empty() {
            return self.members.iter().copied().filter(|&i| contains(i)).collect();
        }
        keys.sort_unstable();
        keys.dedup();
        let mut lists = Vec::with_capacity(keys.len());
        for k in &keys {
            match self.postings.get(k) {
                Some(list) => lists.push(list.as_slice()),
                None => return Vec::new(),
            }
        }
        lists.sort_by_key(|l| l.len());
        let (shortest, rest) = lists.split_first().expect("non-empty");
        shortest
            .iter()
            .copied()
            .filter(|slot| rest.iter().all(|l| l.binary_search(slot).is_ok()))
            .map(|slot| self.members[slot as usize])
            .filter(|&i| contains(i))
            .collect()
    }
}
