//! Shared helpers for the integration tests: fixture loading, random corpora
//! and brute-force reference implementations of every mapping strategy.
#![allow(dead_code)]

pub mod cpe_cases;
pub mod oracle;
pub mod random;

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use vulnmap_core::ingest::{
    load_cves, load_packages, load_versions, CveFields, CveRecord, Loaded, PackageColumns, PackageRecord,
    PlatformAliases, VersionColumns, VersionRecord,
};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn read_packages(path: &Path) -> Vec<PackageRecord> {
    let file = File::open(path).unwrap();
    load_packages(file, &PackageColumns::default(), PlatformAliases::default())
        .unwrap()
        .map(|r| r.unwrap())
        .filter_map(Loaded::record)
        .collect()
}

pub fn read_versions(path: &Path) -> Vec<VersionRecord> {
    let file = File::open(path).unwrap();
    load_versions(file, &VersionColumns::default(), PlatformAliases::default())
        .unwrap()
        .map(|r| r.unwrap())
        .filter_map(Loaded::record)
        .collect()
}

pub fn read_cves(path: &Path) -> Vec<CveRecord> {
    let file = BufReader::new(File::open(path).unwrap());
    load_cves(file, CveFields::default())
        .map(|r| r.unwrap())
        .filter_map(Loaded::record)
        .collect()
}

pub struct AcceptanceCorpus {
    pub packages: Vec<PackageRecord>,
    pub cves: Vec<CveRecord>,
    pub versions: Vec<VersionRecord>,
}

pub fn acceptance_corpus() -> AcceptanceCorpus {
    AcceptanceCorpus {
        packages: read_packages(&fixture("acceptance_packages.csv")),
        cves: read_cves(&fixture("acceptance_cves.json")),
        versions: read_versions(&fixture("acceptance_versions.csv")),
    }
}
