//! CPE 2.3 formatted-string parsing.
//!
//! A formatted string looks like
//! `cpe:2.3:part:vendor:product:version:update:edition:language:sw_edition:target_sw:target_hw:other`.
//! Components are split on unescaped colons; a backslash quotes the next
//! character. The logical value `*` (ANY) and `-` (NA) are kept as
//! distinguished values so callers can skip them deliberately.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

const PREFIX: &str = "cpe:2.3:";
const LEGACY_PREFIX: &str = "cpe:/";
const ATTRIBUTE_COUNT: usize = 11;

/// Why a string was rejected as a CPE 2.3 formatted string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CpeDefect {
    EmptyInput,
    /// `cpe:/` URIs are not converted.
    LegacyUri,
    BadPrefix,
    FieldCount(usize),
    InvalidPart(String),
    EmptyField(usize),
    DanglingEscape,
}

impl fmt::Display for CpeDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CpeDefect::EmptyInput => write!(f, "empty input"),
            CpeDefect::LegacyUri => write!(f, "CPE 2.2 URI binding is not accepted"),
            CpeDefect::BadPrefix => write!(f, "missing `{PREFIX}` prefix"),
            CpeDefect::FieldCount(n) => {
                write!(f, "expected {ATTRIBUTE_COUNT} attribute fields, found {n}")
            }
            CpeDefect::InvalidPart(p) => write!(f, "invalid part value {p:?}"),
            CpeDefect::EmptyField(i) => write!(f, "attribute field {i} is empty"),
            CpeDefect::DanglingEscape => write!(f, "trailing unpaired backslash"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed CPE {input:?}: {defect}")]
pub struct MalformedCpe {
    pub input: String,
    pub defect: CpeDefect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CpePart {
    Application,
    OperatingSystem,
    Hardware,
    Any,
    NotApplicable,
}

impl CpePart {
    fn from_field(raw: &str) -> Option<Self> {
        match raw {
            "a" | "A" => Some(CpePart::Application),
            "o" | "O" => Some(CpePart::OperatingSystem),
            "h" | "H" => Some(CpePart::Hardware),
            "*" => Some(CpePart::Any),
            "-" => Some(CpePart::NotApplicable),
            _ => None,
        }
    }
}

impl fmt::Display for CpePart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CpePart::Application => "a",
            CpePart::OperatingSystem => "o",
            CpePart::Hardware => "h",
            CpePart::Any => "*",
            CpePart::NotApplicable => "-",
        })
    }
}

/// One attribute value of a CPE name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CpeValue {
    /// Unquoted `*`.
    Any,
    /// Unquoted `-`.
    NotApplicable,
    /// Normalized literal text (escapes resolved, lowercased).
    Value(String),
}

impl CpeValue {
    fn from_field(raw: &str) -> Self {
        match raw {
            "*" => CpeValue::Any,
            "-" => CpeValue::NotApplicable,
            other => CpeValue::Value(normalize_component(other)),
        }
    }

    /// The literal text, or `None` for ANY / NA.
    pub fn value(&self) -> Option<&str> {
        match self {
            CpeValue::Value(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_logical(&self) -> bool {
        !matches!(self, CpeValue::Value(_))
    }
}

impl fmt::Display for CpeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CpeValue::Any => f.write_str("*"),
            CpeValue::NotApplicable => f.write_str("-"),
            CpeValue::Value(v) => f.write_str(v),
        }
    }
}

impl PartialEq<str> for CpeValue {
    fn eq(&self, other: &str) -> bool {
        match self {
            CpeValue::Any => other == "*",
            CpeValue::NotApplicable => other == "-",
            CpeValue::Value(v) => v == other,
        }
    }
}

impl PartialEq<&str> for CpeValue {
    fn eq(&self, other: &&str) -> bool {
        self == *other
    }
}

/// A parsed CPE 2.3 name. Serializes as its original text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CpeRecord {
    pub part: CpePart,
    pub vendor: CpeValue,
    pub product: CpeValue,
    pub version: CpeValue,
    pub update: CpeValue,
    pub edition: CpeValue,
    pub language: CpeValue,
    pub sw_edition: CpeValue,
    pub target_sw: CpeValue,
    pub target_hw: CpeValue,
    pub other: CpeValue,
    pub raw: String,
}

impl CpeRecord {
    pub fn parse(uri: &str) -> Result<Self, MalformedCpe> {
        parse_cpe23(uri)
    }
}

impl FromStr for CpeRecord {
    type Err = MalformedCpe;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_cpe23(s)
    }
}

impl fmt::Display for CpeRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl Serialize for CpeRecord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.raw)
    }
}

impl<'de> Deserialize<'de> for CpeRecord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        parse_cpe23(&raw).map_err(serde::de::Error::custom)
    }
}

/// Parse a CPE 2.3 formatted string.
pub fn parse_cpe23(uri: &str) -> Result<CpeRecord, MalformedCpe> {
    let fail = |defect| MalformedCpe {
        input: uri.to_string(),
        defect,
    };

    if uri.trim().is_empty() {
        return Err(fail(CpeDefect::EmptyInput));
    }
    let has_prefix = uri.get(..PREFIX.len()).is_some_and(|p| p.eq_ignore_ascii_case(PREFIX));
    if !has_prefix {
        let legacy = uri
            .get(..LEGACY_PREFIX.len())
            .is_some_and(|p| p.eq_ignore_ascii_case(LEGACY_PREFIX));
        return Err(fail(if legacy {
            CpeDefect::LegacyUri
        } else {
            CpeDefect::BadPrefix
        }));
    }

    let fields = split_unescaped(&uri[PREFIX.len()..]).map_err(fail)?;
    if fields.len() != ATTRIBUTE_COUNT {
        return Err(fail(CpeDefect::FieldCount(fields.len())));
    }
    if let Some(i) = fields.iter().position(|f| f.is_empty()) {
        return Err(fail(CpeDefect::EmptyField(i)));
    }

    let part = CpePart::from_field(fields[0]).ok_or_else(|| fail(CpeDefect::InvalidPart(fields[0].to_string())))?;
    let v = |i: usize| CpeValue::from_field(fields[i]);

    Ok(CpeRecord {
        part,
        vendor: v(1),
        product: v(2),
        version: v(3),
        update: v(4),
        edition: v(5),
        language: v(6),
        sw_edition: v(7),
        target_sw: v(8),
        target_hw: v(9),
        other: v(10),
        raw: uri.to_string(),
    })
}

/// Split on colons not preceded by an escaping backslash. Field slices keep
/// their escapes.
fn split_unescaped(s: &str) -> Result<Vec<&str>, CpeDefect> {
    let mut fields = Vec::with_capacity(ATTRIBUTE_COUNT);
    let mut start = 0;
    let mut chars = s.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => {
                if chars.next().is_none() {
                    return Err(CpeDefect::DanglingEscape);
                }
            }
            ':' => {
                fields.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    fields.push(&s[start..]);
    Ok(fields)
}

/// Lowercase, resolve backslash escapes and trim surrounding whitespace.
///
/// Escaped backslashes and an unpaired trailing backslash are dropped, so the
/// output never contains a backslash and the function is idempotent.
pub fn normalize_component(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        let c = if c == '\\' {
            match chars.next() {
                Some('\\') | None => continue,
                Some(escaped) => escaped,
            }
        } else {
            c
        };
        out.push(simple_lowercase(c));
    }
    out.trim().to_string()
}

/// Single-character lowercase mapping; never expands a character.
pub(crate) fn simple_lowercase(c: char) -> char {
    if c.is_ascii() {
        return c.to_ascii_lowercase();
    }
    // U+0130 is the only character whose full lowercase mapping differs from
    // the simple one.
    if c == '\u{130}' {
        return 'i';
    }
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}
