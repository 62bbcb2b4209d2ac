use serde::{Deserialize, Serialize};

use crate::cpe::simple_lowercase;

pub const SUPPORTED_PROVIDERS: [&str; 3] = ["github.com", "bitbucket.org", "gitlab.com"];

/// A source repository on one of the supported hosts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RepoRef {
    pub provider: String,
    pub owner: String,
    pub repository: String,
    /// `provider/owner/repository`, the join key between packages and CVE
    /// references.
    pub repo_link: String,
}

impl RepoRef {
    fn new(provider: &str, owner: String, repository: String) -> Self {
        let repo_link = format!("{provider}/{owner}/{repository}");
        Self {
            provider: provider.to_string(),
            owner,
            repository,
            repo_link,
        }
    }
}

/// Host and path of a loosely formatted URL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct UrlParts<'a> {
    /// Lowercased, without `www.`, userinfo or port.
    pub host: String,
    /// Everything after the host up to `?` or `#`; empty or starting with `/`.
    pub path: &'a str,
}

/// Split a URL into host and path while ignoring the scheme, userinfo, port
/// and a `www.` prefix. Understands scp-style `git@host:owner/repo` too.
pub(crate) fn split_url(url: &str) -> Option<UrlParts<'_>> {
    let s = url.trim();
    let rest = match s.find("://") {
        Some(i) => &s[i + 3..],
        None => s,
    };
    let rest = rest.split(['?', '#']).next().unwrap_or("");
    let authority_end = rest.find('/').unwrap_or(rest.len());
    let (mut authority, mut path) = rest.split_at(authority_end);
    if let Some(at) = authority.rfind('@') {
        authority = &authority[at + 1..];
    }
    if let Some(colon) = authority.find(':') {
        let after = &authority[colon + 1..];
        if after.is_empty() || after.bytes().all(|b| b.is_ascii_digit()) {
            authority = &authority[..colon];
        } else {
            // scp-like: host:owner/repo
            let start = rest.len() - path.len() - after.len();
            path = &rest[start - 1..];
            authority = &authority[..colon];
        }
    }
    let host: String = authority.chars().map(simple_lowercase).collect();
    let host = host.strip_prefix("www.").map(str::to_string).unwrap_or(host);
    if host.is_empty() {
        return None;
    }
    Some(UrlParts { host, path })
}

/// Extract `provider/owner/repository` from a repository or reference URL.
pub fn extract_repo_ref(url: &str) -> Option<RepoRef> {
    let parts = split_url(url)?;
    let provider = SUPPORTED_PROVIDERS.iter().find(|p| **p == parts.host)?;
    let mut segments = parts.path.split(['/', ':']).filter(|seg| !seg.trim().is_empty());
    let owner = lower(segments.next()?);
    let repository = lower(segments.next()?);
    let repository = repository
        .strip_suffix(".git")
        .map(str::to_string)
        .unwrap_or(repository);
    if owner.is_empty() || repository.is_empty() {
        return None;
    }
    Some(RepoRef::new(provider, owner, repository))
}

fn lower(s: &str) -> String {
    s.trim().chars().map(simple_lowercase).collect()
}
