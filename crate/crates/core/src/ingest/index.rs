use std::collections::HashMap;

use indexmap::IndexMap;

use super::{CveRecord, PackageRecord};

/// Lookup tables over an ingested corpus.
///
/// Entries are positions into the package and CVE slices the index was built
/// from, so each one resolves to exactly one record (and its `package_key` or
/// `cve_id`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexSet {
    /// `(platform, name)` to packages.
    pub by_name: HashMap<(String, String), Vec<usize>>,
    /// `repo_link` to packages; keys in first-seen order, values in source
    /// order.
    pub by_repo_link: IndexMap<String, Vec<usize>>,
    /// CPE product to CVEs (each CVE listed once per product).
    pub by_product: HashMap<String, Vec<usize>>,
}

impl IndexSet {
    pub fn packages_named(&self, platform: &str, name: &str) -> &[usize] {
        // Tuple keys can't be borrowed as (&str, &str); the allocation is cheap
        // next to the lookups it guards.
        self.by_name
            .get(&(platform.to_string(), name.to_string()))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn packages_with_link(&self, link: &str) -> &[usize] {
        self.by_repo_link.get(link).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn cves_with_product(&self, product: &str) -> &[usize] {
        self.by_product.get(product).map(Vec::as_slice).unwrap_or(&[])
    }
}

pub fn build_indexes(packages: &[PackageRecord], cves: &[CveRecord]) -> IndexSet {
    let mut index = IndexSet::default();
    for (i, p) in packages.iter().enumerate() {
        index
            .by_name
            .entry((p.platform.clone(), p.name.clone()))
            .or_default()
            .push(i);
        if let Some(link) = p.repo_link() {
            index.by_repo_link.entry(link.to_string()).or_default().push(i);
        }
    }
    for (i, c) in cves.iter().enumerate() {
        for product in c.products() {
            index.by_product.entry(product.to_string()).or_default().push(i);
        }
    }
    index
}
