//! Small random corpora drawn from tight vocabularies so that names,
//! products, keywords and repository links collide often.

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use vulnmap_core::cpe::parse_cpe23;
use vulnmap_core::ingest::{extract_repo_ref, CveRecord, PackageRecord};

pub const NAMES: &[&str] = &[
    "lodash",
    "lodash-es",
    "lodash.merge",
    "react",
    "react-dom",
    "create-react-app",
    "flask",
    "flask-cors",
    "gin",
    "github.com/gin-gonic/gin",
    "express",
    "requests",
    "http-parser",
    "json",
];
pub const PLATFORMS: &[&str] = &["NPM", "Pypi", "Go", "Maven", "Cargo"];
pub const REPO_URLS: &[&str] = &[
    "https://github.com/a/b",
    "https://github.com/a/c.git",
    "git@github.com:a/b.git",
    "https://gitlab.com/x/y",
    "https://bitbucket.org/p/q",
    "https://example.com/a/b",
    "",
];
pub const PACKAGE_KEYWORDS: &[&str] = &["react", "json", "http", "parser", "lodash"];
pub const TARGET_SW: &[&str] = &["*", "-", "node.js", "python", "go", "java", "rust"];
pub const SUMMARY_WORDS: &[&str] = &[
    "npm", "python", "golang", "maven", "pip", "npmjs", "Node.js", "composer",
];
pub const REFERENCES: &[&str] = &[
    "https://github.com/a/b/issues/1",
    "https://github.com/A/C.git",
    "https://www.github.com/a/b/commit/1",
    "https://gitlab.com/x/y/-/merge_requests/2",
    "https://bitbucket.org/p/q/src",
    "https://github.com/zz/none",
    "https://pypi.org/project/flask/",
    "https://www.npmjs.com/package/react",
    "https://pkg.go.dev/github.com/gin-gonic/gin",
    "https://nvd.nist.gov/vuln/detail/x",
];

pub fn cpe_escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if !(c.is_ascii_alphanumeric() || "_-.".contains(c)) {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

pub fn cpe_string(product: &str, target_sw: &str) -> String {
    format!("cpe:2.3:a:vendor:{}:*:*:*:*:*:{target_sw}:*:*", cpe_escape(product))
}

fn package_strategy() -> impl Strategy<Value = (usize, usize, usize, Vec<usize>)> {
    (
        0..NAMES.len(),
        0..PLATFORMS.len(),
        0..REPO_URLS.len(),
        proptest::sample::subsequence((0..PACKAGE_KEYWORDS.len()).collect::<Vec<_>>(), 0..3),
    )
}

type CveShape = (Vec<(usize, usize)>, Vec<usize>, Vec<usize>);

fn cve_strategy() -> impl Strategy<Value = CveShape> {
    (
        proptest::collection::vec((0..NAMES.len() + 1, 0..TARGET_SW.len()), 0..4),
        proptest::collection::vec(0..SUMMARY_WORDS.len(), 0..3),
        proptest::collection::vec(0..REFERENCES.len(), 0..4),
    )
}

pub fn corpus_strategy(
    max_packages: usize,
    max_cves: usize,
) -> impl Strategy<Value = (Vec<PackageRecord>, Vec<CveRecord>)> {
    (
        proptest::collection::vec(package_strategy(), 0..=max_packages),
        proptest::collection::vec(cve_strategy(), 0..=max_cves),
    )
        .prop_map(|(pkgs, cves)| (build_packages(&pkgs), build_cves(&cves)))
}

fn build_packages(shapes: &[(usize, usize, usize, Vec<usize>)]) -> Vec<PackageRecord> {
    shapes
        .iter()
        .enumerate()
        .map(|(i, (name, platform, url, kws))| PackageRecord {
            package_key: format!("{}", 100 + i),
            platform: PLATFORMS[*platform].to_string(),
            name: NAMES[*name].to_string(),
            keywords: kws.iter().map(|k| PACKAGE_KEYWORDS[*k].to_string()).collect(),
            license: String::new(),
            repo: extract_repo_ref(REPO_URLS[*url]),
        })
        .collect()
}

fn build_cves(shapes: &[CveShape]) -> Vec<CveRecord> {
    shapes
        .iter()
        .enumerate()
        .map(|(i, (cpes, words, refs))| {
            let cpes = cpes
                .iter()
                .map(|(p, t)| {
                    let product = NAMES.get(*p).copied().unwrap_or("zzz");
                    parse_cpe23(&cpe_string(product, TARGET_SW[*t])).unwrap()
                })
                .collect();
            let mut summary = String::from("Flaw");
            for w in words {
                summary.push_str(&format!(" in the {} module", SUMMARY_WORDS[*w]));
            }
            CveRecord {
                cve_id: format!("CVE-2020-{:04}", 1000 + i),
                summary,
                references: refs.iter().map(|r| REFERENCES[*r].to_string()).collect(),
                published: None,
                cpes,
            }
        })
        .collect()
}

/// `count` corpora from a fixed seed, for use outside the proptest runner.
pub fn seeded_corpora(count: usize, max_packages: usize, max_cves: usize) -> Vec<(Vec<PackageRecord>, Vec<CveRecord>)> {
    let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &[7; 32]);
    let mut runner = TestRunner::new_with_rng(Config::default(), rng);
    let strategy = corpus_strategy(max_packages, max_cves);
    (0..count)
        .map(|_| strategy.new_tree(&mut runner).unwrap().current())
        .collect()
}

/// Non-empty (after normalization) strings for similarity properties.
pub fn fuzzy_word() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z]{1,12}",
        "[a-z0-9]{1,6}[-._][a-z0-9]{1,6}",
        "[a-zA-Z0-9 ._/-]{1,16}",
        "[abc]{1,6}",
        "\\PC{1,8}",
    ]
    .prop_filter("normalizes to empty", |s| !vulnmap_core::fuzzy::normalize(s).is_empty())
}

/// (query, candidates, cutoff) for best-match comparisons.
pub fn candidate_set() -> impl Strategy<Value = (String, Vec<String>, f64)> {
    (
        "[a-z]{1,8}(-[a-z]{1,5})?",
        proptest::collection::vec(prop_oneof!["[a-z]{1,8}(-[a-z]{1,5})?", "[abc]{1,4}"], 0..30),
        prop_oneof![Just(vulnmap_core::fuzzy::DEFAULT_CUTOFF), 0.0f64..=1.0],
    )
}
