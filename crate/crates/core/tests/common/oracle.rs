//! Brute-force reference implementations, written against the documented
//! rules rather than the library internals. They loop over every
//! (CVE, package) pair and use `regex`, `url` and `strsim` for the pieces the
//! library implements by hand.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::OnceLock;

use regex::Regex;
use url::Url;
use vulnmap_core::ingest::{CveRecord, PackageRecord};
use vulnmap_core::matching::{Evidence, MappingKind, MappingResult, PlatformLookup, Strategy};

// ---------------------------------------------------------------------------
// Fuzzy similarity

pub fn normalize(s: &str) -> String {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"[^\p{Alphabetic}\p{N}]+").unwrap());
    re.replace_all(&s.to_lowercase(), "-").trim_matches('-').to_string()
}

fn grams(s: &str, n: usize) -> HashMap<String, u64> {
    let padded: Vec<char> = format!("-{s}-").chars().collect();
    let mut out = HashMap::new();
    for w in padded.windows(n) {
        *out.entry(w.iter().collect::<String>()).or_insert(0) += 1;
    }
    out
}

fn cosine(a: &str, b: &str, n: usize) -> f64 {
    let (ga, gb) = (grams(a, n), grams(b, n));
    let dot: u64 = ga.iter().map(|(k, v)| v * gb.get(k).copied().unwrap_or(0)).sum();
    let na: u64 = ga.values().map(|v| v * v).sum();
    let nb: u64 = gb.values().map(|v| v * v).sum();
    dot as f64 / ((na * nb) as f64).sqrt()
}

/// `max(cosine, 1 - lev/maxlen)` on normalized inputs; trigram cosine,
/// bigram when the trigram score is zero.
pub fn similarity(a: &str, b: &str) -> f64 {
    let (a, b) = (normalize(a), normalize(b));
    assert!(!a.is_empty() && !b.is_empty());
    let mut cos = cosine(&a, &b, 3);
    if cos == 0.0 {
        cos = cosine(&a, &b, 2);
    }
    let longest = a.chars().count().max(b.chars().count());
    let edit = 1.0 - strsim::levenshtein(&a, &b) as f64 / longest as f64;
    cos.max(edit)
}

/// Linear scan: best score, then shorter, then lexicographic, then earlier.
pub fn best_match(query: &str, candidates: &[String], cutoff: f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if normalize(c).is_empty() {
            continue;
        }
        let s = similarity(query, c);
        if s < cutoff {
            continue;
        }
        let better = match best {
            None => true,
            Some((j, t)) => {
                let cj = &candidates[j];
                s > t
                    || (s == t && c.chars().count() < cj.chars().count())
                    || (s == t && c.chars().count() == cj.chars().count() && c < cj)
            }
        };
        if better {
            best = Some((i, s));
        }
    }
    best
}

// ---------------------------------------------------------------------------
// URLs

/// `provider/owner/repository` for URLs on a supported host.
pub fn repo_link(raw: &str) -> Option<String> {
    let raw = raw.trim();
    static SCP: OnceLock<Regex> = OnceLock::new();
    let scp = SCP.get_or_init(|| Regex::new(r"^([\w.+-]+@)?([\w.-]+):([^/\d][^:]*)$").unwrap());
    let normalized = if raw.contains("://") {
        raw.to_string()
    } else if let Some(c) = scp.captures(raw) {
        format!("ssh://{}{}/{}", c.get(1).map_or("", |m| m.as_str()), &c[2], &c[3])
    } else {
        format!("http://{raw}")
    };
    let url = Url::parse(&normalized).ok()?;
    let host = url.host_str()?.to_lowercase();
    let host = host.strip_prefix("www.").unwrap_or(&host);
    if !["github.com", "gitlab.com", "bitbucket.org"].contains(&host) {
        return None;
    }
    let segments: Vec<String> = url
        .path_segments()?
        .filter(|s| !s.is_empty())
        .take(2)
        .map(|s| s.to_lowercase())
        .collect();
    if segments.len() < 2 {
        return None;
    }
    let repo = segments[1].strip_suffix(".git").unwrap_or(&segments[1]);
    if repo.is_empty() {
        return None;
    }
    Some(format!("{host}/{}/{repo}", segments[0]))
}

fn host_pattern_matches(pattern: &str, raw: &str) -> bool {
    let Ok(url) = Url::parse(raw) else {
        return false;
    };
    let Some(host) = url.host_str() else {
        return false;
    };
    let (p_host, p_path) = match pattern.split_once('/') {
        Some((h, p)) => (h, format!("/{p}")),
        None => (pattern, String::new()),
    };
    let host = host.to_lowercase();
    let host_ok = host == p_host || host.ends_with(&format!(".{p_host}"));
    let path = url.path();
    host_ok && (p_path.is_empty() || path == p_path || path.starts_with(&format!("{p_path}/")))
}

// ---------------------------------------------------------------------------
// Lookup evidence

pub fn platforms(lookup: &PlatformLookup) -> Vec<String> {
    let mut all: BTreeSet<String> = BTreeSet::new();
    all.extend(lookup.target_sw_aliases.keys().cloned());
    all.extend(lookup.summary_keywords.keys().cloned());
    all.extend(lookup.reference_hosts.keys().cloned());
    all.into_iter().collect()
}

pub fn word_match(summary: &str, keyword: &str) -> bool {
    thread_local! {
        static CACHE: RefCell<HashMap<String, Regex>> = RefCell::new(HashMap::new());
    }
    CACHE.with(|cache| {
        let mut cache = cache.borrow_mut();
        let re = cache.entry(keyword.to_string()).or_insert_with(|| {
            let pattern = format!(
                r"(?:^|[^\p{{Alphabetic}}\p{{N}}]){}(?:$|[^\p{{Alphabetic}}\p{{N}}])",
                regex::escape(keyword)
            );
            Regex::new(&pattern).unwrap()
        });
        re.is_match(&summary.to_lowercase())
    })
}

fn keyword_hit(lookup: &PlatformLookup, platform: &str, summary: &str) -> Option<String> {
    lookup
        .summary_keywords
        .get(platform)?
        .iter()
        .find(|k| word_match(summary, k))
        .cloned()
}

fn reference_hit(lookup: &PlatformLookup, platform: &str, refs: &[String]) -> Option<String> {
    let hosts = lookup.reference_hosts.get(platform)?;
    refs.iter()
        .find(|r| hosts.iter().any(|h| host_pattern_matches(h, r)))
        .cloned()
}

fn products(cve: &CveRecord) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for c in &cve.cpes {
        if let Some(p) = c.product.value() {
            if !out.iter().any(|o| o == p) {
                out.push(p.to_string());
            }
        }
    }
    out
}

fn target_sw(cve: &CveRecord) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for c in &cve.cpes {
        if let Some(t) = c.target_sw.value() {
            if !out.iter().any(|o| o == t) {
                out.push(t.to_string());
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Strategies

pub fn strict(packages: &[PackageRecord], cves: &[CveRecord], lookup: &PlatformLookup) -> Vec<MappingResult> {
    let mut out = Vec::new();
    for cve in cves {
        let products = products(cve);
        let targets = target_sw(cve);
        let mut emitted: BTreeSet<&str> = BTreeSet::new();
        for platform in platforms(lookup) {
            let alias = lookup
                .target_sw_aliases
                .get(&platform)
                .and_then(|aliases| targets.iter().find(|t| aliases.contains(*t)));
            let evidence = |product: &str| match alias {
                Some(t) => Some(Evidence::ProductNameEqual {
                    product: product.to_string(),
                    target_sw: t.clone(),
                }),
                None => keyword_hit(lookup, &platform, &cve.summary).map(|token| Evidence::SummaryKeyword { token }),
            };
            for product in &products {
                for pkg in packages {
                    if pkg.platform != platform || pkg.name != *product {
                        continue;
                    }
                    let Some(evidence) = evidence(product) else { continue };
                    if emitted.insert(&pkg.package_key) {
                        out.push(MappingResult {
                            strategy: Strategy::StrictName,
                            cve_id: cve.cve_id.clone(),
                            package_key: pkg.package_key.clone(),
                            platform: pkg.platform.clone(),
                            confidence: 1.0,
                            evidence,
                        });
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Inferred {
    None,
    Unique(String, Evidence),
    Ambiguous,
}

pub fn infer(cve: &CveRecord, lookup: &PlatformLookup) -> Inferred {
    let mut hits = Vec::new();
    for platform in platforms(lookup) {
        if let Some(token) = keyword_hit(lookup, &platform, &cve.summary) {
            hits.push((platform, Evidence::SummaryKeyword { token }));
        } else if let Some(url) = reference_hit(lookup, &platform, &cve.references) {
            hits.push((platform, Evidence::ReferenceUrl { url }));
        }
    }
    match hits.len() {
        0 => Inferred::None,
        1 => {
            let (p, e) = hits.pop().unwrap();
            Inferred::Unique(p, e)
        }
        _ => Inferred::Ambiguous,
    }
}

pub fn partial(
    packages: &[PackageRecord],
    cves: &[CveRecord],
    lookup: &PlatformLookup,
    cutoff: f64,
) -> Vec<MappingResult> {
    let mut out = Vec::new();
    for cve in cves {
        let Inferred::Unique(platform, _) = infer(cve, lookup) else {
            continue;
        };
        let mut emitted: BTreeSet<String> = BTreeSet::new();
        for product in products(cve) {
            // Candidate names in source order, each with its first package.
            let mut names: Vec<String> = Vec::new();
            let mut owners: Vec<&PackageRecord> = Vec::new();
            for pkg in packages {
                let hit = pkg.platform == platform
                    && (pkg.name.contains(&product) || pkg.keywords.iter().any(|k| k.contains(&product)));
                if hit && !names.contains(&pkg.name) {
                    names.push(pkg.name.clone());
                    owners.push(pkg);
                }
            }
            let Some((i, score)) = best_match(&product, &names, cutoff) else {
                continue;
            };
            let pkg = owners[i];
            if emitted.insert(pkg.package_key.clone()) {
                out.push(MappingResult {
                    strategy: Strategy::PartialFuzzy,
                    cve_id: cve.cve_id.clone(),
                    package_key: pkg.package_key.clone(),
                    platform: pkg.platform.clone(),
                    confidence: score,
                    evidence: Evidence::FuzzyScore {
                        query: product.clone(),
                        candidate: names[i].clone(),
                    },
                });
            }
        }
    }
    out
}

pub fn reference_links(cve: &CveRecord) -> Vec<String> {
    let mut links: Vec<String> = Vec::new();
    for r in &cve.references {
        if let Some(l) = repo_link(r) {
            if !links.contains(&l) {
                links.push(l);
            }
        }
    }
    links
}

pub fn repository(packages: &[PackageRecord], cves: &[CveRecord], first_only: bool) -> Vec<MappingResult> {
    let mut out = Vec::new();
    for cve in cves {
        'links: for link in reference_links(cve) {
            for pkg in packages {
                if pkg.repo_link() != Some(link.as_str()) {
                    continue;
                }
                out.push(MappingResult {
                    strategy: Strategy::Repository,
                    cve_id: cve.cve_id.clone(),
                    package_key: pkg.package_key.clone(),
                    platform: pkg.platform.clone(),
                    confidence: 1.0,
                    evidence: Evidence::RepoLink { link: link.clone() },
                });
                if first_only {
                    break 'links;
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Comparison

fn key(r: &MappingResult) -> String {
    format!(
        "{:?}|{}|{}|{}|{:?}",
        r.strategy, r.cve_id, r.package_key, r.platform, r.evidence
    )
}

/// Differences between two result sets; confidences must agree to 1e-12.
pub fn differences(expected: &[MappingResult], actual: &[MappingResult]) -> Vec<String> {
    let index = |rs: &[MappingResult]| -> HashMap<String, f64> { rs.iter().map(|r| (key(r), r.confidence)).collect() };
    let (e, a) = (index(expected), index(actual));
    let mut diffs = Vec::new();
    if e.len() != expected.len() {
        diffs.push("duplicate entries in oracle output".to_string());
    }
    if a.len() != actual.len() {
        diffs.push("duplicate entries in library output".to_string());
    }
    for (k, c) in &e {
        match a.get(k) {
            None => diffs.push(format!("missing: {k}")),
            Some(d) if (c - d).abs() > 1e-12 => diffs.push(format!("confidence {d} != {c}: {k}")),
            _ => {}
        }
    }
    for k in a.keys() {
        if !e.contains_key(k) {
            diffs.push(format!("unexpected: {k}"));
        }
    }
    diffs.sort();
    diffs
}

/// Brute-force distinct package count per (kind, platform).
pub fn distinct_packages(kind: MappingKind, results: &[MappingResult]) -> BTreeMap<(String, String), u64> {
    let mut sets: BTreeMap<(String, String), BTreeSet<&str>> = BTreeMap::new();
    for r in results {
        sets.entry((kind.label().to_string(), r.platform.clone()))
            .or_default()
            .insert(&r.package_key);
    }
    sets.into_iter().map(|(k, v)| (k, v.len() as u64)).collect()
}
