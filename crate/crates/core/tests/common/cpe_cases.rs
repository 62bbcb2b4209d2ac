//! Grammar-derived CPE 2.3 cases and a generator of valid names.

use proptest::prelude::*;
use vulnmap_core::cpe::{CpeDefect, CpePart, CpeRecord, CpeValue};

fn lit(s: &str) -> CpeValue {
    CpeValue::Value(s.to_string())
}

/// (input, expected vendor, product, version, target_sw)
pub const VALID: &[(&str, [&str; 4])] = &[
    (
        "cpe:2.3:a:lodash:lodash:4.17.11:*:*:*:*:node.js:*:*",
        ["lodash", "lodash", "4.17.11", "node.js"],
    ),
    (
        "cpe:2.3:a:microsoft:internet_explorer:8.0.6001:beta:*:*:*:*:*:*",
        ["microsoft", "internet_explorer", "8.0.6001", "*"],
    ),
    ("cpe:2.3:a:foo\\:bar:baz:*:*:*:*:*:*:*:*", ["foo:bar", "baz", "*", "*"]),
    (
        "cpe:2.3:a:hp:insight_diagnostics:7.4.0.1570:-:*:*:online:win2003:x64:*",
        ["hp", "insight_diagnostics", "7.4.0.1570", "win2003"],
    ),
    (
        "cpe:2.3:a:Vendor:Product:1.0:*:*:*:*:Node.JS:*:*",
        ["vendor", "product", "1.0", "node.js"],
    ),
    ("CPE:2.3:a:v:p:*:*:*:*:*:*:*:*", ["v", "p", "*", "*"]),
    ("cpe:2.3:a:v:\\*:*:*:*:*:*:*:*:*", ["v", "\u{0}*", "*", "*"]),
    ("cpe:2.3:a:v:\\-:-:*:*:*:*:*:*:*", ["v", "\u{0}-", "-", "*"]),
    (
        "cpe:2.3:a:golang:github.com\\/gin-gonic\\/gin:*:*:*:*:*:go:*:*",
        ["golang", "github.com/gin-gonic/gin", "*", "go"],
    ),
    (
        "cpe:2.3:a:a\\\\b:c\\:\\:d:1\\.2:*:*:*:*:*:*:*",
        ["ab", "c::d", "1.2", "*"],
    ),
    (
        "cpe:2.3:o:linux:linux_kernel:*:*:*:*:*:*:*:*",
        ["linux", "linux_kernel", "*", "*"],
    ),
    (
        "cpe:2.3:h:cisco:router\\!:-:*:*:*:*:*:*:*",
        ["cisco", "router!", "-", "*"],
    ),
    ("cpe:2.3:*:v:p:*:*:*:*:*:*:*:*", ["v", "p", "*", "*"]),
    ("cpe:2.3:a:v:p:*:*:*:*:*:\\*:*:*", ["v", "p", "*", "\u{0}*"]),
    ("cpe:2.3:a:v: p :*:*:*:*:*:*:*:*", ["v", "p", "*", "*"]),
];

/// Logical `*` / `-` unless prefixed with NUL, which marks a quoted literal.
pub fn expect(s: &str) -> CpeValue {
    match s {
        "*" => CpeValue::Any,
        "-" => CpeValue::NotApplicable,
        other => lit(other.strip_prefix('\u{0}').unwrap_or(other)),
    }
}

pub fn malformed() -> Vec<(&'static str, CpeDefect)> {
    vec![
        ("", CpeDefect::EmptyInput),
        ("   ", CpeDefect::EmptyInput),
        ("garbage", CpeDefect::BadPrefix),
        ("cpe:2.2:a:v:p:*:*:*:*:*:*:*:*", CpeDefect::BadPrefix),
        ("cpe:/a:lodash:lodash:4.17.11", CpeDefect::LegacyUri),
        ("cpe:2.3:a:v:p", CpeDefect::FieldCount(3)),
        ("cpe:2.3:a:v:p:*:*:*:*:*:*:*", CpeDefect::FieldCount(10)),
        ("cpe:2.3:a:v:p:*:*:*:*:*:*:*:*:*", CpeDefect::FieldCount(12)),
        ("cpe:2.3:a:v\\:p:*:*:*:*:*:*:*:*", CpeDefect::FieldCount(10)),
        ("cpe:2.3:a::p:*:*:*:*:*:*:*:*", CpeDefect::EmptyField(1)),
        ("cpe:2.3:a:v:p:*:*:*:*:*:*:*:", CpeDefect::EmptyField(10)),
        ("cpe:2.3:a:v:p:*:*:*:*:*:*:*:x\\", CpeDefect::DanglingEscape),
        ("cpe:2.3:q:v:p:*:*:*:*:*:*:*:*", CpeDefect::InvalidPart("q".into())),
    ]
}

const PLAIN: &str = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.~";
const QUOTABLE: &str = "!\"#$%&'()+,/:;<=>@[]^`{|}*?-";

/// A literal component as (formatted text, expected value).
fn literal() -> impl Strategy<Value = (String, String)> {
    let plain = proptest::sample::select(PLAIN.chars().collect::<Vec<_>>()).prop_map(|c| (c.to_string(), c));
    let quoted = proptest::sample::select(QUOTABLE.chars().collect::<Vec<_>>()).prop_map(|c| (format!("\\{c}"), c));
    proptest::collection::vec(prop_oneof![3 => plain, 1 => quoted], 1..12).prop_map(|tokens| {
        let raw: String = tokens.iter().map(|t| t.0.as_str()).collect();
        let value: String = tokens.iter().map(|t| t.1.to_ascii_lowercase()).collect();
        (raw, value)
    })
}

fn component() -> impl Strategy<Value = (String, CpeValue)> {
    prop_oneof![
        1 => Just(("*".to_string(), CpeValue::Any)),
        1 => Just(("-".to_string(), CpeValue::NotApplicable)),
        4 => literal().prop_map(|(raw, value)| (raw, CpeValue::Value(value))),
    ]
}

/// A valid formatted name together with the record it must parse to.
pub fn generated_name() -> impl Strategy<Value = (String, CpeRecord)> {
    (
        proptest::sample::select(vec![
            ("a", CpePart::Application),
            ("o", CpePart::OperatingSystem),
            ("h", CpePart::Hardware),
        ]),
        proptest::collection::vec(component(), 10),
    )
        .prop_map(|(part, fields)| {
            let raw = format!(
                "cpe:2.3:{}:{}",
                part.0,
                fields.iter().map(|f| f.0.as_str()).collect::<Vec<_>>().join(":")
            );
            let v = |i: usize| fields[i].1.clone();
            let record = CpeRecord {
                part: part.1,
                vendor: v(0),
                product: v(1),
                version: v(2),
                update: v(3),
                edition: v(4),
                language: v(5),
                sw_edition: v(6),
                target_sw: v(7),
                target_hw: v(8),
                other: v(9),
                raw: raw.clone(),
            };
            (raw, record)
        })
}
