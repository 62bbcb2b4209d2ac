//! Approximate string matching for package-name candidates.
//!
//! The score is the larger of two views of the same pair of normalized
//! strings: the cosine similarity of padded character n-gram counts (size 3,
//! falling back to size 2 when the trigram vectors share nothing) and the
//! normalized Levenshtein similarity `1 - d / max(len)`.

use std::cmp::Ordering;
use std::collections::HashMap;

use thiserror::Error;

use crate::cpe::simple_lowercase;

/// Cutoff applied when a caller does not configure one.
pub const DEFAULT_CUTOFF: f64 = 0.3;

const PAD: char = '-';
const PRIMARY_GRAM: usize = 3;
const FALLBACK_GRAM: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuzzyError {
    #[error("input is empty after normalization")]
    EmptyInput,
    #[error("gram size must be at least 2, got {0}")]
    GramSize(usize),
}

/// Lowercase and collapse every run of non-alphanumeric characters into a
/// single `-`. Leading and trailing separators are removed.
pub fn normalize(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending_sep = false;
    for c in s.chars() {
        if c.is_alphanumeric() {
            if pending_sep && !out.is_empty() {
                out.push(PAD);
            }
            pending_sep = false;
            out.push(simple_lowercase(c));
        } else {
            pending_sep = true;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramProfile {
    pub grams: HashMap<String, u32>,
    pub magnitude: f64,
    pub source: String,
    sum_squares: u64,
}

impl GramProfile {
    pub fn count(&self, gram: &str) -> u32 {
        self.grams.get(gram).copied().unwrap_or(0)
    }

    pub fn cosine(&self, other: &GramProfile) -> f64 {
        let (small, large) = if self.grams.len() <= other.grams.len() {
            (self, other)
        } else {
            (other, self)
        };
        let dot: u64 = small
            .grams
            .iter()
            .map(|(g, &c)| u64::from(c) * u64::from(large.count(g)))
            .sum();
        if dot == 0 {
            return 0.0;
        }
        // Integer dot and norms keep the result exactly symmetric.
        let denom = ((u128::from(self.sum_squares) * u128::from(other.sum_squares)) as f64).sqrt();
        (dot as f64 / denom).min(1.0)
    }
}

pub fn gram_profile(s: &str, gram_size: usize) -> Result<GramProfile, FuzzyError> {
    if gram_size < 2 {
        return Err(FuzzyError::GramSize(gram_size));
    }
    let source = normalize(s);
    if source.is_empty() {
        return Err(FuzzyError::EmptyInput);
    }
    Ok(profile_of_normalized(source, gram_size))
}

fn profile_of_normalized(source: String, gram_size: usize) -> GramProfile {
    let padded: Vec<char> = std::iter::once(PAD)
        .chain(source.chars())
        .chain(std::iter::once(PAD))
        .collect();
    let mut grams: HashMap<String, u32> = HashMap::new();
    if padded.len() <= gram_size {
        grams.insert(padded.iter().collect(), 1);
    } else {
        for w in padded.windows(gram_size) {
            *grams.entry(w.iter().collect()).or_default() += 1;
        }
    }
    let sum_squares = grams.values().map(|&c| u64::from(c) * u64::from(c)).sum();
    GramProfile {
        grams,
        magnitude: (sum_squares as f64).sqrt(),
        source,
        sum_squares,
    }
}

/// Levenshtein distance over chars.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// A query normalized and profiled once, for scoring many candidates.
#[derive(Debug, Clone)]
pub struct PreparedQuery {
    tri: GramProfile,
    bi: GramProfile,
    len: usize,
}

impl PreparedQuery {
    pub fn new(query: &str) -> Result<Self, FuzzyError> {
        let source = normalize(query);
        if source.is_empty() {
            return Err(FuzzyError::EmptyInput);
        }
        Ok(Self {
            len: source.chars().count(),
            tri: profile_of_normalized(source.clone(), PRIMARY_GRAM),
            bi: profile_of_normalized(source, FALLBACK_GRAM),
        })
    }

    pub fn normalized(&self) -> &str {
        &self.tri.source
    }

    pub fn score(&self, other: &PreparedQuery) -> f64 {
        let mut cosine = self.tri.cosine(&other.tri);
        if cosine == 0.0 {
            cosine = self.bi.cosine(&other.bi);
        }
        let longest = self.len.max(other.len);
        let distance = levenshtein(self.normalized(), other.normalized());
        let edit = 1.0 - distance as f64 / longest as f64;
        cosine.max(edit).clamp(0.0, 1.0)
    }
}

pub fn similarity(a: &str, b: &str) -> Result<f64, FuzzyError> {
    Ok(PreparedQuery::new(a)?.score(&PreparedQuery::new(b)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyMatch<'a> {
    pub index: usize,
    pub candidate: &'a str,
    pub score: f64,
}

/// Pick the highest-scoring candidate at or above `cutoff`. Ties go to the
/// shorter candidate, then the lexicographically smaller one, then the
/// earlier position. Candidates that normalize to nothing are ignored.
pub fn best_match<'a, S: AsRef<str>>(query: &str, candidates: &'a [S], cutoff: f64) -> Option<FuzzyMatch<'a>> {
    let query = PreparedQuery::new(query).ok()?;
    let mut best: Option<FuzzyMatch<'a>> = None;
    for (index, candidate) in candidates.iter().enumerate() {
        let candidate = candidate.as_ref();
        let Ok(prepared) = PreparedQuery::new(candidate) else {
            continue;
        };
        let score = query.score(&prepared);
        if score < cutoff {
            continue;
        }
        let here = FuzzyMatch {
            index,
            candidate,
            score,
        };
        best = match best {
            Some(b) if rank(&b, &here) != Ordering::Greater => Some(b),
            _ => Some(here),
        };
    }
    best
}

/// `Less` means `a` is preferred over `b`.
fn rank(a: &FuzzyMatch<'_>, b: &FuzzyMatch<'_>) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.candidate.chars().count().cmp(&b.candidate.chars().count()))
        .then_with(|| a.candidate.cmp(b.candidate))
        .then_with(|| a.index.cmp(&b.index))
}
