//! Ingestion of organic sequence data: the compact "stripped" value format
//! and a JSONL encoding of the 18-field entry model.
//!
//! Null tracking matters here. A missing field is not an empty field: the
//! textual classification methods must report "inconclusive" when a field is
//! absent, so every field except `oeis_id` and `name` is an `Option`.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::de::{self, Deserializer};
use serde::Deserialize;
use thiserror::Error;

use crate::record::{SequenceRecord, Source};

/// The closed keyword vocabulary. Unknown keywords are preserved on the
/// entry but reported by [`OeisEntry::unknown_keywords`].
pub const KEYWORD_VOCABULARY: [&str; 27] = [
    "base", "bref", "cofr", "cons", "core", "dead", "dumb", "easy", "eigen", "fini", "frac",
    "full", "hard", "hear", "less", "look", "more", "mult", "nice", "nonn", "obsc", "sign",
    "tabf", "tabl", "unkn", "walk", "word",
];

/// One entry of the 18-field model. Every field except `oeis_id` and `name`
/// is nullable.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OeisEntry {
    pub oeis_id: String,
    #[serde(default, deserialize_with = "de_opt_text")]
    pub identification: Option<String>,
    #[serde(default, deserialize_with = "de_opt_values")]
    pub value_list: Option<Vec<BigInt>>,
    #[serde(deserialize_with = "de_text")]
    pub name: String,
    #[serde(default, deserialize_with = "de_opt_text")]
    pub comments: Option<String>,
    #[serde(default, deserialize_with = "de_opt_text")]
    pub detailed_references: Option<String>,
    #[serde(default, deserialize_with = "de_opt_text")]
    pub links: Option<String>,
    #[serde(default, deserialize_with = "de_opt_text")]
    pub formulas: Option<String>,
    #[serde(default, deserialize_with = "de_opt_text")]
    pub examples: Option<String>,
    #[serde(default, deserialize_with = "de_opt_text")]
    pub maple_programs: Option<String>,
    #[serde(default, deserialize_with = "de_opt_text")]
    pub mathematica_programs: Option<String>,
    #[serde(default, deserialize_with = "de_opt_text")]
    pub other_programs: Option<String>,
    #[serde(default, deserialize_with = "de_opt_text")]
    pub cross_references: Option<String>,
    #[serde(default, deserialize_with = "de_opt_keywords")]
    pub keywords: Option<Vec<String>>,
    #[serde(default)]
    pub offset_a: Option<i64>,
    #[serde(default)]
    pub offset_b: Option<i64>,
    #[serde(default, deserialize_with = "de_opt_text")]
    pub author: Option<String>,
    #[serde(default, deserialize_with = "de_opt_text")]
    pub extensions_and_errors: Option<String>,
}

/// Names of the entry fields usable by the textual classification methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TextField {
    Identification,
    Name,
    Comments,
    DetailedReferences,
    Links,
    Formulas,
    Examples,
    MaplePrograms,
    MathematicaPrograms,
    OtherPrograms,
    CrossReferences,
    Keywords,
    Author,
    ExtensionsAndErrors,
}

impl TextField {
    pub const ALL: [TextField; 14] = [
        TextField::Identification,
        TextField::Name,
        TextField::Comments,
        TextField::DetailedReferences,
        TextField::Links,
        TextField::Formulas,
        TextField::Examples,
        TextField::MaplePrograms,
        TextField::MathematicaPrograms,
        TextField::OtherPrograms,
        TextField::CrossReferences,
        TextField::Keywords,
        TextField::Author,
        TextField::ExtensionsAndErrors,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TextField::Identification => "identification",
            TextField::Name => "name",
            TextField::Comments => "comments",
            TextField::DetailedReferences => "detailed_references",
            TextField::Links => "links",
            TextField::Formulas => "formulas",
            TextField::Examples => "examples",
            TextField::MaplePrograms => "maple_programs",
            TextField::MathematicaPrograms => "mathematica_programs",
            TextField::OtherPrograms => "other_programs",
            TextField::CrossReferences => "cross_references",
            TextField::Keywords => "keywords",
            TextField::Author => "author",
            TextField::ExtensionsAndErrors => "extensions_and_errors",
        }
    }
}

impl fmt::Display for TextField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown entry field {found:?}; expected one of the 18-field model's textual fields")]
pub struct UnknownField {
    pub found: String,
}

impl FromStr for TextField {
    type Err = UnknownField;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TextField::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| UnknownField { found: s.to_string() })
    }
}

impl OeisEntry {
    /// Text of one field, `None` when the field is null. Keywords join with
    /// commas so substring searches see the raw keyword list.
    pub fn text(&self, field: TextField) -> Option<Cow<'_, str>> {
        fn plain(s: &Option<String>) -> Option<Cow<'_, str>> {
            s.as_deref().map(Cow::Borrowed)
        }
        match field {
            TextField::Identification => plain(&self.identification),
            TextField::Name => Some(Cow::Borrowed(self.name.as_str())),
            TextField::Comments => plain(&self.comments),
            TextField::DetailedReferences => plain(&self.detailed_references),
            TextField::Links => plain(&self.links),
            TextField::Formulas => plain(&self.formulas),
            TextField::Examples => plain(&self.examples),
            TextField::MaplePrograms => plain(&self.maple_programs),
            TextField::MathematicaPrograms => plain(&self.mathematica_programs),
            TextField::OtherPrograms => plain(&self.other_programs),
            TextField::CrossReferences => plain(&self.cross_references),
            TextField::Keywords => self.keywords.as_ref().map(|k| Cow::Owned(k.join(","))),
            TextField::Author => plain(&self.author),
            TextField::ExtensionsAndErrors => plain(&self.extensions_and_errors),
        }
    }

    /// Keywords outside [`KEYWORD_VOCABULARY`]. Preserved on the entry, but
    /// callers may want to surface them.
    pub fn unknown_keywords(&self) -> Vec<&str> {
        self.keywords
            .as_deref()
            .unwrap_or(&[])
            .iter()
            .map(String::as_str)
            .filter(|k| !KEYWORD_VOCABULARY.contains(k))
            .collect()
    }
}

/// True iff `id` is an "A" followed by exactly six digits.
pub fn is_valid_oeis_id(id: &str) -> bool {
    let bytes = id.as_bytes();
    bytes.len() == 7 && bytes[0] == b'A' && bytes[1..].iter().all(u8::is_ascii_digit)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrippedError {
    #[error("malformed sequence id {found:?}: expected 'A' followed by six digits")]
    MalformedId { found: String },
    #[error("parse error at byte {offset}: {reason}")]
    Malformed { offset: usize, reason: String },
}

/// Parses one line of the stripped format: `Axxxxxx ,v1,v2,...,vk,` with an
/// optional trailing comma. Comment lines (`#`) are the caller's problem.
pub fn parse_stripped(line: &str) -> Result<(String, Vec<BigInt>), StrippedError> {
    let line = line.trim_end();
    let split = line.find(|c: char| c.is_ascii_whitespace()).ok_or(StrippedError::Malformed {
        offset: line.len(),
        reason: "expected whitespace after the sequence id".into(),
    })?;
    let id = &line[..split];
    if !is_valid_oeis_id(id) {
        return Err(StrippedError::MalformedId { found: id.to_string() });
    }
    let mut at = split;
    let rest = line[split..].trim_start();
    at += line.len() - split - rest.len();
    let body = rest.strip_prefix(',').ok_or(StrippedError::Malformed {
        offset: at,
        reason: "expected ',' before the first value".into(),
    })?;
    at += 1;

    let mut values = Vec::new();
    for piece in body.split(',') {
        if piece.is_empty() {
            // Trailing comma; anything after it would re-enter the loop.
            at += 1;
            continue;
        }
        let v = piece.parse::<BigInt>().map_err(|_| StrippedError::Malformed {
            offset: at,
            reason: format!("invalid integer {piece:?}"),
        })?;
        values.push(v);
        at += piece.len() + 1;
    }
    Ok((id.to_string(), values))
}

#[derive(Debug, Error)]
pub enum EntryError {
    #[error("entry is not a JSON object with the 18-field keys: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed oeis_id {found:?}: expected 'A' followed by six digits")]
    MalformedId { found: String },
}

/// Parses one JSONL line of the 18-field model. Missing keys become null;
/// type mismatches report the offending field.
pub fn parse_entry_jsonl(line: &str) -> Result<OeisEntry, EntryError> {
    let entry: OeisEntry = serde_json::from_str(line)?;
    if !is_valid_oeis_id(&entry.oeis_id) {
        return Err(EntryError::MalformedId { found: entry.oeis_id });
    }
    Ok(entry)
}

/// Why an entry produced no record. Skips are data, not errors: callers
/// count them and move on.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SkipReason {
    #[error("entry {id} has a null or empty value_list")]
    NoValues { id: String },
}

/// Converts an entry to an unannotated record: all categories level 0, the
/// membership levels come from the annotators later.
pub fn to_record(entry: &OeisEntry) -> Result<SequenceRecord, SkipReason> {
    let values = match &entry.value_list {
        Some(v) if !v.is_empty() => v.clone(),
        _ => return Err(SkipReason::NoValues { id: entry.oeis_id.clone() }),
    };
    Ok(SequenceRecord {
        id: entry.oeis_id.clone(),
        source: Source::Oeis,
        values,
        formula: None,
        formula_length: None,
        categories: Default::default(),
        offset: entry.offset_a.unwrap_or(0),
        bounded_by: None,
    })
}

fn de_text<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    match TextValue::deserialize(d)? {
        TextValue::One(s) => Ok(s),
        TextValue::Many(v) => Ok(v.join("\n")),
    }
}

fn de_opt_text<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    Ok(match Option::<TextValue>::deserialize(d)? {
        None => None,
        Some(TextValue::One(s)) => Some(s),
        Some(TextValue::Many(v)) => Some(v.join("\n")),
    })
}

/// Textual fields arrive either as one string or as a list of lines.
#[derive(Deserialize)]
#[serde(untagged, expecting = "a string or an array of strings")]
enum TextValue {
    One(String),
    Many(Vec<String>),
}

fn de_opt_keywords<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<String>>, D::Error> {
    Ok(match Option::<TextValue>::deserialize(d)? {
        None => None,
        // A single string is the comma-separated form.
        Some(TextValue::One(s)) => Some(
            s.split(',')
                .map(str::trim)
                .filter(|k| !k.is_empty())
                .map(str::to_string)
                .collect(),
        ),
        Some(TextValue::Many(v)) => Some(v),
    })
}

fn de_opt_values<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<BigInt>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged, expecting = "an integer or a decimal string")]
    enum Raw {
        Int(i64),
        // Serde's arbitrary-precision path is off; large values must come as
        // strings to stay exact.
        Text(String),
    }
    let raw = Option::<Vec<Raw>>::deserialize(d)?;
    raw.map(|items| {
        items
            .into_iter()
            .map(|item| match item {
                Raw::Int(i) => Ok(BigInt::from(i)),
                Raw::Text(s) => s
                    .trim()
                    .parse::<BigInt>()
                    .map_err(|_| de::Error::custom(format!("value_list: invalid integer {s:?}"))),
            })
            .collect()
    })
    .transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::Category;

    #[test]
    fn stripped_parses_fibonacci() {
        let (id, values) = parse_stripped("A000045 ,0,1,1,2,3,5,8,").unwrap();
        assert_eq!(id, "A000045");
        assert_eq!(values, [0, 1, 1, 2, 3, 5, 8].map(BigInt::from));
    }

    #[test]
    fn stripped_parses_zero_sequence() {
        let (id, values) = parse_stripped("A000004 ,0,0,0,").unwrap();
        assert_eq!(id, "A000004");
        assert_eq!(values, [0, 0, 0].map(BigInt::from));
    }

    #[test]
    fn stripped_rejects_malformed_id() {
        assert_eq!(
            parse_stripped("B000001 ,1,").unwrap_err(),
            StrippedError::MalformedId { found: "B000001".into() }
        );
        assert!(matches!(
            parse_stripped("A00004 ,1,"),
            Err(StrippedError::MalformedId { .. })
        ));
    }

    #[test]
    fn stripped_reports_bad_value_offset() {
        let err = parse_stripped("A000045 ,0,x,1,").unwrap_err();
        match err {
            StrippedError::Malformed { offset, .. } => assert_eq!(offset, 11),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stripped_round_trips_large_values_exactly() {
        let big = "170141183460469231731687303715884105727";
        let line = format!("A000668 ,3,7,31,127,{big},");
        let (_, values) = parse_stripped(&line).unwrap();
        assert_eq!(values.last().unwrap().to_string(), big);
        assert_eq!(values.last().unwrap().to_string().len(), 39);
    }

    #[test]
    fn stripped_accepts_negative_values_and_no_trailing_comma() {
        let (_, values) = parse_stripped("A033999 ,1,-1,1,-1").unwrap();
        assert_eq!(values, [1, -1, 1, -1].map(BigInt::from));
    }

    #[test]
    fn minimal_entry_has_null_fields() {
        let entry =
            parse_entry_jsonl(r#"{"oeis_id":"A000004","name":"The zero sequence.","value_list":[0,0,0]}"#)
                .unwrap();
        assert_eq!(entry.oeis_id, "A000004");
        assert_eq!(entry.name, "The zero sequence.");
        assert_eq!(entry.value_list.as_deref(), Some(&[0, 0, 0].map(BigInt::from)[..]));
        // The other 15 fields must be null, not empty.
        assert!(entry.identification.is_none());
        assert!(entry.comments.is_none());
        assert!(entry.detailed_references.is_none());
        assert!(entry.links.is_none());
        assert!(entry.formulas.is_none());
        assert!(entry.examples.is_none());
        assert!(entry.maple_programs.is_none());
        assert!(entry.mathematica_programs.is_none());
        assert!(entry.other_programs.is_none());
        assert!(entry.cross_references.is_none());
        assert!(entry.keywords.is_none());
        assert!(entry.offset_a.is_none());
        assert!(entry.offset_b.is_none());
        assert!(entry.author.is_none());
        assert!(entry.extensions_and_errors.is_none());
    }

    #[test]
    fn keywords_accept_both_encodings() {
        let comma =
            parse_entry_jsonl(r#"{"oeis_id":"A000045","name":"f","keywords":"nonn,easy"}"#).unwrap();
        let listed =
            parse_entry_jsonl(r#"{"oeis_id":"A000045","name":"f","keywords":["nonn","easy"]}"#)
                .unwrap();
        assert_eq!(comma.keywords.as_deref(), Some(&["nonn".to_string(), "easy".to_string()][..]));
        assert_eq!(comma.keywords, listed.keywords);
        assert!(comma.unknown_keywords().is_empty());
    }

    #[test]
    fn unknown_keywords_are_kept_and_flagged() {
        let entry =
            parse_entry_jsonl(r#"{"oeis_id":"A000001","name":"g","keywords":"nonn,futurekw"}"#)
                .unwrap();
        assert_eq!(entry.unknown_keywords(), vec!["futurekw"]);
        assert_eq!(entry.keywords.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn absent_value_list_is_valid_but_skipped() {
        let entry = parse_entry_jsonl(r#"{"oeis_id":"A000002","name":"h"}"#).unwrap();
        assert!(entry.value_list.is_none());
        assert_eq!(
            to_record(&entry).unwrap_err(),
            SkipReason::NoValues { id: "A000002".into() }
        );
    }

    #[test]
    fn large_values_survive_the_json_route_as_strings() {
        let big = "170141183460469231731687303715884105727";
        let line = format!(r#"{{"oeis_id":"A000668","name":"Mersenne primes.","value_list":[3,7,"{big}"]}}"#);
        let entry = parse_entry_jsonl(&line).unwrap();
        let record = to_record(&entry).unwrap();
        assert_eq!(record.values[2].to_string(), big);
    }

    #[test]
    fn record_conversion_sets_offset_and_empty_categories() {
        let entry = parse_entry_jsonl(
            r#"{"oeis_id":"A005843","name":"The nonnegative even numbers: a(n) = 2n.","value_list":[0,2,4,6],"offset_a":0}"#,
        )
        .unwrap();
        let record = to_record(&entry).unwrap();
        assert_eq!(record.offset, 0);
        assert_eq!(record.source, Source::Oeis);
        assert!(record.categories.is_empty());
        assert_eq!(record.level(Category::Polynomial), 0);
        assert!(record.formula.is_none());

        let shifted = parse_entry_jsonl(
            r#"{"oeis_id":"A000040","name":"The prime numbers.","value_list":[2,3,5],"offset_a":1}"#,
        )
        .unwrap();
        assert_eq!(to_record(&shifted).unwrap().offset, 1);
    }

    #[test]
    fn malformed_entry_id_rejected() {
        assert!(matches!(
            parse_entry_jsonl(r#"{"oeis_id":"X123456","name":"bad"}"#),
            Err(EntryError::MalformedId { .. })
        ));
    }

    #[test]
    fn type_mismatch_names_the_field() {
        let err = parse_entry_jsonl(r#"{"oeis_id":"A000001","name":"g","keywords":7}"#).unwrap_err();
        assert!(err.to_string().contains("string or an array of strings"), "{err}");
    }

    #[test]
    fn text_fields_resolve_by_name() {
        let entry = parse_entry_jsonl(
            r#"{"oeis_id":"A098682","name":"Smallest prime larger than n^n.","keywords":["nonn"],"comments":["line one","line two"]}"#,
        )
        .unwrap();
        let field: TextField = "name".parse().unwrap();
        assert!(entry.text(field).unwrap().contains("prime"));
        assert_eq!(entry.text(TextField::Keywords).unwrap(), "nonn");
        assert_eq!(entry.text(TextField::Comments).unwrap(), "line one\nline two");
        assert!(entry.text(TextField::Formulas).is_none());
        assert!("values".parse::<TextField>().is_err());
    }
}
