//! Heuristic category annotation: classification methods produce verdicts,
//! an aggregator folds them into a 5-level membership per category.
//!
//! Methods are total. Whatever the input, they return a [`Verdict`], never
//! an error: a method that cannot run (missing field, too few values) says
//! "inconclusive" and records why in the detail. Config problems (unknown
//! method name, bad regex, bad base) are different: those fail at
//! [`parse_annotator_config`] time, before any record is touched.
//!
//! All numeric methods use exact integer or rational arithmetic. No verdict
//! in this module depends on floating point.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use regex::Regex;
use serde::Deserialize;
use thiserror::Error;

use crate::oeis::{OeisEntry, TextField, UnknownField};
use crate::primes;
use crate::record::{Category, SequenceRecord, LEVEL_MAX};

/// Five-level verdict scale; the numeric value is the membership level the
/// score maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Score {
    StrongNo = 0,
    WeakNo = 1,
    Inconclusive = 2,
    WeakYes = 3,
    StrongYes = 4,
}

impl Score {
    pub fn level(self) -> u8 {
        self as u8
    }
}

/// One method's opinion about one record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub score: Score,
    pub method_name: String,
    pub detail: Option<String>,
}

impl Verdict {
    pub fn new(score: Score, method_name: &str) -> Verdict {
        Verdict {
            score,
            method_name: method_name.to_string(),
            detail: None,
        }
    }

    pub fn with_detail(score: Score, method_name: &str, detail: impl Into<String>) -> Verdict {
        Verdict {
            score,
            method_name: method_name.to_string(),
            detail: Some(detail.into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("need at least two values to take differences, got {len}")]
pub struct TooShort {
    pub len: usize,
}

/// Degree detection by iterated forward differences. The evaluation points
/// are consecutive integers, so divided differences reduce to forward
/// differences and stay in integer arithmetic.
///
/// Returns the smallest `d <= max_degree` whose `(d+1)`-th forward
/// difference vanishes over the whole list, or `None` when no degree up to
/// `min(max_degree, len - 2)` fits.
pub fn degree_by_divided_differences(
    values: &[BigInt],
    max_degree: usize,
) -> Result<Option<usize>, TooShort> {
    let n = values.len();
    if n < 2 {
        return Err(TooShort { len: n });
    }
    let mut row: Vec<BigInt> = values.windows(2).map(|w| &w[1] - &w[0]).collect();
    for d in 0..=max_degree.min(n - 2) {
        // row is the (d+1)-th difference here.
        if row.iter().all(Zero::is_zero) {
            return Ok(Some(d));
        }
        if row.len() < 2 {
            break;
        }
        row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    Ok(None)
}

/// Polynomial check with holdout: detect a candidate degree `d` from the
/// leading `d + 2` values (the first element of the `(d+1)`-th difference
/// vanishes), then verify that the difference table extends exactly across
/// the remaining values.
///
/// `strong_yes` when at least `holdout_min` values beyond the fitting prefix
/// were verified; `weak_yes` on an exact but shorter holdout; `weak_no` on
/// any mismatch or when no candidate degree exists; `inconclusive` when the
/// list is too short to hold anything out (fewer than 4 values).
pub fn polynomial_fit_check(values: &[BigInt], holdout_min: usize) -> Verdict {
    const NAME: &str = "polynomial_fit";
    let n = values.len();
    if n < 4 {
        return Verdict::with_detail(
            Score::Inconclusive,
            NAME,
            format!("{n} values are too few to fit and hold out"),
        );
    }
    // Walk the difference table once; at depth d+1 the first element comes
    // from the leading d+2 values only.
    let mut row: Vec<BigInt> = values.windows(2).map(|w| &w[1] - &w[0]).collect();
    for d in 0..=(n - 4) {
        if !row[0].is_zero() {
            row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
            continue;
        }
        let holdout = n - (d + 1);
        return if row.iter().all(Zero::is_zero) {
            let score = if holdout >= holdout_min { Score::StrongYes } else { Score::WeakYes };
            Verdict::with_detail(score, NAME, format!("degree {d}, {holdout} values verified"))
        } else {
            Verdict::with_detail(
                Score::WeakNo,
                NAME,
                format!("degree {d} fits the leading values but fails on the holdout"),
            )
        };
    }
    Verdict::with_detail(Score::WeakNo, NAME, format!("no degree up to {} fits", n - 4))
}

/// Exponential check on exact quotients `q_i = a_i / a_{i+1}`.
///
/// `strong_yes` when all quotients are equal (pure exponential). Otherwise,
/// with at least `tail + 1` values, `weak_yes` when the last `tail`
/// quotients each sit within `tolerance` of the final one, `weak_no` when
/// they do not. Any zero value, or too short a list, is `inconclusive`.
pub fn exponential_quotient_check(
    values: &[BigInt],
    tail: usize,
    tolerance: &BigRational,
) -> Verdict {
    const NAME: &str = "exponential_quotient";
    let n = values.len();
    if n < 2 {
        return Verdict::with_detail(Score::Inconclusive, NAME, "need at least two values");
    }
    if values.iter().any(Zero::is_zero) {
        return Verdict::with_detail(Score::Inconclusive, NAME, "zero values leave quotients undefined");
    }
    let quotients: Vec<BigRational> = values
        .windows(2)
        .map(|w| BigRational::new(w[0].clone(), w[1].clone()))
        .collect();
    if quotients.windows(2).all(|w| w[0] == w[1]) {
        return Verdict::with_detail(Score::StrongYes, NAME, format!("q = {} for all i", quotients[0]));
    }
    if quotients.len() < tail.max(1) {
        return Verdict::with_detail(
            Score::Inconclusive,
            NAME,
            format!("{n} values are too few for a {tail}-quotient tail"),
        );
    }
    let last = quotients.last().expect("at least one quotient");
    let settled = quotients[quotients.len() - tail.max(1)..]
        .iter()
        .all(|q| (q - last).abs() <= *tolerance);
    if settled {
        Verdict::with_detail(Score::WeakYes, NAME, format!("tail quotients settle near {last}"))
    } else {
        Verdict::with_detail(Score::WeakNo, NAME, "tail quotients do not settle")
    }
}

/// Primality of every value. Values at or above 2^64 fall back to a fixed
/// probabilistic witness set; when that happened the detail says so.
pub fn primality_check(values: &[BigInt]) -> Verdict {
    const NAME: &str = "primality";
    if values.is_empty() {
        return Verdict::with_detail(Score::Inconclusive, NAME, "no values");
    }
    let mut uncertain = 0usize;
    for v in values {
        if v.is_negative() {
            return Verdict::with_detail(Score::WeakNo, NAME, format!("{v} is negative"));
        }
        let p = primes::is_prime(v.magnitude());
        if !p.is_prime {
            return Verdict::with_detail(Score::WeakNo, NAME, format!("{v} is not prime"));
        }
        if !p.certain {
            uncertain += 1;
        }
    }
    if uncertain > 0 {
        Verdict::with_detail(
            Score::StrongYes,
            NAME,
            format!("{uncertain} values at or above 2^64 tested probabilistically"),
        )
    } else {
        Verdict::new(Score::StrongYes, NAME)
    }
}

/// Boundedness of the available prefix: `strong_yes` with the smallest
/// threshold that dominates every |value|, `weak_no` when none does. The
/// detail records that only a prefix was checked.
pub fn boundedness_check(values: &[BigInt], thresholds: &[BigInt]) -> (Verdict, Option<BigInt>) {
    const NAME: &str = "boundedness";
    debug_assert!(thresholds.windows(2).all(|w| w[0] < w[1]), "thresholds must be ascending");
    if values.is_empty() {
        return (Verdict::with_detail(Score::Inconclusive, NAME, "no values"), None);
    }
    let max_abs = values.iter().map(Signed::abs).max().expect("non-empty");
    match thresholds.iter().find(|b| max_abs <= **b) {
        Some(b) => (
            Verdict::with_detail(
                Score::StrongYes,
                NAME,
                format!("bounded by {b} on the available prefix"),
            ),
            Some(b.clone()),
        ),
        None => (
            Verdict::with_detail(Score::WeakNo, NAME, format!("max |value| {max_abs} exceeds all thresholds")),
            None,
        ),
    }
}

/// Palindromic digit strings in the given base, sign excluded. Any negative
/// value fails the check outright.
pub fn palindrome_check(values: &[BigInt], base: u32) -> Verdict {
    const NAME: &str = "palindrome";
    debug_assert!((2..=256).contains(&base), "base must be validated at config time");
    if values.is_empty() {
        return Verdict::with_detail(Score::Inconclusive, NAME, "no values");
    }
    for v in values {
        if v.is_negative() {
            return Verdict::with_detail(Score::WeakNo, NAME, format!("{v} is negative"));
        }
        let digits = v.magnitude().to_radix_be(base);
        if digits.iter().ne(digits.iter().rev()) {
            return Verdict::with_detail(Score::WeakNo, NAME, format!("{v} is not palindromic in base {base}"));
        }
    }
    Verdict::with_detail(Score::StrongYes, NAME, format!("all values palindromic in base {base}"))
}

/// Smallest period `p` with `a(i) = a(i mod p)` for the whole list,
/// restricted to `p <= min(max_period, len / 3)` so at least three full
/// periods are visible. `strong_yes` with the period, else `weak_no`.
pub fn periodicity_check(values: &[BigInt], max_period: usize) -> (Verdict, Option<usize>) {
    const NAME: &str = "periodicity";
    let p_max = max_period.min(values.len() / 3);
    for p in 1..=p_max.max(0) {
        if values.iter().enumerate().all(|(i, v)| *v == values[i % p]) {
            return (
                Verdict::with_detail(Score::StrongYes, NAME, format!("period {p}")),
                Some(p),
            );
        }
    }
    (
        Verdict::with_detail(
            Score::WeakNo,
            NAME,
            format!("no period up to {p_max} shows three full repetitions"),
        ),
        None,
    )
}

/// Substring search over one entry field. A null field is inconclusive: an
/// absent mention is not evidence of absence.
pub fn text_search(
    entry: Option<&OeisEntry>,
    field: TextField,
    needles: &[String],
    case_insensitive: bool,
) -> Verdict {
    const NAME: &str = "text_search";
    let Some(text) = entry.and_then(|e| e.text(field)) else {
        return Verdict::with_detail(Score::Inconclusive, NAME, format!("field {field} is null"));
    };
    let haystack = if case_insensitive { text.to_lowercase() } else { text.into_owned() };
    for needle in needles {
        let needle_cmp = if case_insensitive { needle.to_lowercase() } else { needle.clone() };
        if !needle_cmp.is_empty() && haystack.contains(&needle_cmp) {
            return Verdict::with_detail(Score::WeakYes, NAME, format!("{needle:?} found in {field}"));
        }
    }
    Verdict::with_detail(Score::WeakNo, NAME, format!("no needle found in {field}"))
}

/// Regex search over one entry field; same null semantics as [`text_search`].
pub fn regex_match(entry: Option<&OeisEntry>, field: TextField, pattern: &Regex) -> Verdict {
    const NAME: &str = "regex_match";
    let Some(text) = entry.and_then(|e| e.text(field)) else {
        return Verdict::with_detail(Score::Inconclusive, NAME, format!("field {field} is null"));
    };
    if pattern.is_match(&text) {
        Verdict::with_detail(Score::WeakYes, NAME, format!("pattern matched in {field}"))
    } else {
        Verdict::with_detail(Score::WeakNo, NAME, format!("pattern not found in {field}"))
    }
}

/// The built-in Fibonacci-like formula pattern, usable in configs as
/// `{"builtin": "fibonacci_like"}`: it matches linear recurrences over
/// shifted terms such as `a(n)=2*a(n-3)+5*a(n-5)-17a(n-5)`.
pub const FIBONACCI_LIKE_PATTERN: &str = r"a\(n\)=[0-9]*\*?a\(n[\+\-][0-9]+\)[\+\-][0-9]*\*?a\(n[\+\-][0-9]+\)([\+\-][0-9]*\*?a\(n[\+\-][0-9]+\))*";

/// Membership aggregation policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregator {
    /// Default: drop inconclusive verdicts; all remaining on the yes side →
    /// their max, all on the no side → their min, a conflict or nothing
    /// informative → 2.
    ConfidentMaxConflictDamping,
    Max,
    Min,
}

impl Aggregator {
    /// Resolves a policy by config name. Hyphens and underscores are
    /// interchangeable, and the long form
    /// `confident_max_with_conflict_damping` is accepted too.
    pub fn from_name(name: &str) -> Option<Aggregator> {
        match name.replace('-', "_").as_str() {
            "confident_max_conflict_damping" | "confident_max_with_conflict_damping" => {
                Some(Aggregator::ConfidentMaxConflictDamping)
            }
            "max" => Some(Aggregator::Max),
            "min" => Some(Aggregator::Min),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AggregateError {
    #[error("cannot aggregate an empty verdict list")]
    EmptyVerdicts,
}

/// Folds verdicts into a membership level 0..=4.
pub fn aggregate(verdicts: &[Verdict], policy: Aggregator) -> Result<u8, AggregateError> {
    if verdicts.is_empty() {
        return Err(AggregateError::EmptyVerdicts);
    }
    let levels = || verdicts.iter().map(|v| v.score.level());
    Ok(match policy {
        Aggregator::Max => levels().max().expect("non-empty"),
        Aggregator::Min => levels().min().expect("non-empty"),
        Aggregator::ConfidentMaxConflictDamping => {
            let informative: Vec<u8> = levels().filter(|&l| l != 2).collect();
            if informative.is_empty() {
                2
            } else if informative.iter().all(|&l| l >= 3) {
                *informative.iter().max().expect("non-empty")
            } else if informative.iter().all(|&l| l <= 1) {
                *informative.iter().min().expect("non-empty")
            } else {
                2
            }
        }
    })
}

/// A configured classification method. Parameters are validated when the
/// method is built; running it is total.
#[derive(Debug, Clone)]
pub enum Method {
    DividedDifferenceDegree { max_degree: usize },
    PolynomialFit { holdout_min: usize },
    ExponentialQuotient { tail: usize, tolerance: BigRational },
    Primality,
    Boundedness { thresholds: Vec<BigInt> },
    Palindrome { base: u32 },
    Periodicity { max_period: usize },
    TextSearch { field: TextField, needles: Vec<String>, case_insensitive: bool },
    RegexMatch { field: TextField, pattern: Regex },
}

pub const METHOD_NAMES: [&str; 9] = [
    "divided_difference_degree",
    "polynomial_fit",
    "exponential_quotient",
    "primality",
    "boundedness",
    "palindrome",
    "periodicity",
    "text_search",
    "regex_match",
];

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::DividedDifferenceDegree { .. } => "divided_difference_degree",
            Method::PolynomialFit { .. } => "polynomial_fit",
            Method::ExponentialQuotient { .. } => "exponential_quotient",
            Method::Primality => "primality",
            Method::Boundedness { .. } => "boundedness",
            Method::Palindrome { .. } => "palindrome",
            Method::Periodicity { .. } => "periodicity",
            Method::TextSearch { .. } => "text_search",
            Method::RegexMatch { .. } => "regex_match",
        }
    }

    pub fn run(&self, record: &SequenceRecord, entry: Option<&OeisEntry>) -> Verdict {
        match self {
            Method::DividedDifferenceDegree { max_degree } => {
                match degree_by_divided_differences(&record.values, *max_degree) {
                    Ok(Some(d)) => Verdict::with_detail(Score::StrongYes, self.name(), format!("degree {d}")),
                    Ok(None) => Verdict::with_detail(
                        Score::WeakNo,
                        self.name(),
                        format!("no degree up to {max_degree} fits"),
                    ),
                    Err(e) => Verdict::with_detail(Score::Inconclusive, self.name(), e.to_string()),
                }
            }
            Method::PolynomialFit { holdout_min } => polynomial_fit_check(&record.values, *holdout_min),
            Method::ExponentialQuotient { tail, tolerance } => {
                exponential_quotient_check(&record.values, *tail, tolerance)
            }
            Method::Primality => primality_check(&record.values),
            Method::Boundedness { thresholds } => boundedness_check(&record.values, thresholds).0,
            Method::Palindrome { base } => palindrome_check(&record.values, *base),
            Method::Periodicity { max_period } => periodicity_check(&record.values, *max_period).0,
            Method::TextSearch { field, needles, case_insensitive } => {
                text_search(entry, *field, needles, *case_insensitive)
            }
            Method::RegexMatch { field, pattern } => regex_match(entry, *field, pattern),
        }
    }
}

/// One annotator: a category, its methods, and the aggregation policy.
#[derive(Debug, Clone)]
pub struct Annotator {
    pub category: Category,
    methods: Vec<Method>,
    pub aggregator: Aggregator,
}

impl Annotator {
    pub fn new(category: Category, methods: Vec<Method>, aggregator: Aggregator) -> Result<Annotator, ConfigError> {
        if methods.is_empty() {
            return Err(ConfigError::EmptyMethods(category));
        }
        Ok(Annotator { category, methods, aggregator })
    }

    pub fn methods(&self) -> &[Method] {
        &self.methods
    }

    /// Runs all methods, aggregates, and stores the membership level.
    /// Level-4 labels (generated ground truth) are never downgraded.
    pub fn annotate(&self, record: &mut SequenceRecord, entry: Option<&OeisEntry>) -> u8 {
        if record.level(self.category) == LEVEL_MAX {
            return LEVEL_MAX;
        }
        let mut bound: Option<BigInt> = None;
        let verdicts: Vec<Verdict> = self
            .methods
            .iter()
            .map(|m| {
                if let Method::Boundedness { thresholds } = m {
                    let (v, b) = boundedness_check(&record.values, thresholds);
                    bound = b;
                    v
                } else {
                    m.run(record, entry)
                }
            })
            .collect();
        let level = aggregate(&verdicts, self.aggregator).expect("methods are non-empty");
        record.set_level(self.category, level);
        if self.category == Category::Bounded && level >= 3 {
            record.bounded_by = bound;
        }
        level
    }
}

/// Annotates every record, in parallel. Entries are looked up by record id
/// (organic records carry their entry id; synthetic ids never match).
pub fn annotate_corpus(
    records: &mut [SequenceRecord],
    entries: &HashMap<String, OeisEntry>,
    annotators: &[Annotator],
) {
    records.par_iter_mut().for_each(|record| {
        let entry = entries.get(&record.id);
        for annotator in annotators {
            annotator.annotate(record, entry);
        }
    });
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid annotator config JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown method {0:?}; built-ins are {}", METHOD_NAMES.join(", "))]
    UnknownMethod(String),
    #[error("unknown aggregator {0:?}; built-ins are confident_max_conflict_damping, max, min")]
    UnknownAggregator(String),
    #[error("annotator for {0} has no methods")]
    EmptyMethods(Category),
    #[error("method {method}: {problem}")]
    BadParams { method: &'static str, problem: String },
    #[error(transparent)]
    UnknownField(#[from] UnknownField),
    #[error("invalid regex pattern: {0}")]
    BadPattern(#[from] regex::Error),
}

#[derive(Deserialize)]
struct RawSpec {
    category: Category,
    methods: Vec<RawMethod>,
    #[serde(default)]
    aggregator: Option<RawAggregator>,
}

#[derive(Deserialize)]
struct RawMethod {
    name: String,
    #[serde(default)]
    params: serde_json::Value,
}

#[derive(Deserialize)]
struct RawAggregator {
    name: String,
    #[serde(default)]
    #[allow(dead_code)]
    params: serde_json::Value,
}

/// Parses the annotator config: a JSON array of
/// `{"category": ..., "methods": [{"name": ..., "params": {...}}],
///   "aggregator": {"name": ...}}`.
/// A missing aggregator means the default conflict-damping policy.
pub fn parse_annotator_config(json: &str) -> Result<Vec<Annotator>, ConfigError> {
    let specs: Vec<RawSpec> = serde_json::from_str(json)?;
    specs
        .into_iter()
        .map(|spec| {
            let aggregator = match &spec.aggregator {
                None => Aggregator::ConfidentMaxConflictDamping,
                Some(raw) => Aggregator::from_name(&raw.name)
                    .ok_or_else(|| ConfigError::UnknownAggregator(raw.name.clone()))?,
            };
            let methods = spec
                .methods
                .into_iter()
                .map(|m| method_from_config(&m.name, m.params))
                .collect::<Result<Vec<Method>, ConfigError>>()?;
            Annotator::new(spec.category, methods, aggregator)
        })
        .collect()
}

fn method_from_config(name: &str, params: serde_json::Value) -> Result<Method, ConfigError> {
    /// Numbers in method params may exceed what JSON numbers express
    /// exactly, so big and rational values also come as strings.
    #[derive(Deserialize)]
    #[serde(untagged, expecting = "an integer or a numeric string")]
    enum Num {
        Int(i64),
        Text(String),
    }
    impl Num {
        fn big(&self, method: &'static str) -> Result<BigInt, ConfigError> {
            match self {
                Num::Int(i) => Ok(BigInt::from(*i)),
                Num::Text(s) => s.trim().parse().map_err(|_| ConfigError::BadParams {
                    method,
                    problem: format!("invalid integer {s:?}"),
                }),
            }
        }
        fn rational(&self, method: &'static str) -> Result<BigRational, ConfigError> {
            match self {
                Num::Int(i) => Ok(BigRational::from_integer(BigInt::from(*i))),
                Num::Text(s) => s.trim().parse().map_err(|_| ConfigError::BadParams {
                    method,
                    problem: format!("invalid rational {s:?} (use \"num/den\")"),
                }),
            }
        }
    }

    fn parse<T: serde::de::DeserializeOwned>(
        method: &'static str,
        params: serde_json::Value,
    ) -> Result<T, ConfigError> {
        let params = if params.is_null() { serde_json::json!({}) } else { params };
        serde_json::from_value(params).map_err(|e| ConfigError::BadParams {
            method,
            problem: e.to_string(),
        })
    }

    match name {
        "divided_difference_degree" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                #[serde(default = "default_max_degree")]
                max_degree: usize,
            }
            let p: P = parse("divided_difference_degree", params)?;
            Ok(Method::DividedDifferenceDegree { max_degree: p.max_degree })
        }
        "polynomial_fit" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                #[serde(default = "default_holdout_min")]
                holdout_min: usize,
            }
            let p: P = parse("polynomial_fit", params)?;
            if p.holdout_min == 0 {
                return Err(ConfigError::BadParams {
                    method: "polynomial_fit",
                    problem: "holdout_min must be positive".into(),
                });
            }
            Ok(Method::PolynomialFit { holdout_min: p.holdout_min })
        }
        "exponential_quotient" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                #[serde(default = "default_tail")]
                tail: usize,
                #[serde(default)]
                tolerance: Option<Num>,
            }
            let p: P = parse("exponential_quotient", params)?;
            if p.tail == 0 {
                return Err(ConfigError::BadParams {
                    method: "exponential_quotient",
                    problem: "tail must be positive".into(),
                });
            }
            let tolerance = match p.tolerance {
                None => default_tolerance(),
                Some(n) => n.rational("exponential_quotient")?,
            };
            if tolerance <= BigRational::zero() {
                return Err(ConfigError::BadParams {
                    method: "exponential_quotient",
                    problem: "tolerance must be positive".into(),
                });
            }
            Ok(Method::ExponentialQuotient { tail: p.tail, tolerance })
        }
        "primality" => {
            let _: serde_json::Map<String, serde_json::Value> = parse("primality", params)?;
            Ok(Method::Primality)
        }
        "boundedness" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                #[serde(default)]
                thresholds: Option<Vec<Num>>,
            }
            let p: P = parse("boundedness", params)?;
            let thresholds = match p.thresholds {
                None => default_thresholds(),
                Some(nums) => nums
                    .iter()
                    .map(|n| n.big("boundedness"))
                    .collect::<Result<Vec<BigInt>, ConfigError>>()?,
            };
            let ascending_positive = !thresholds.is_empty()
                && thresholds[0].is_positive()
                && thresholds.windows(2).all(|w| w[0] < w[1]);
            if !ascending_positive {
                return Err(ConfigError::BadParams {
                    method: "boundedness",
                    problem: "thresholds must be non-empty, positive and strictly ascending".into(),
                });
            }
            Ok(Method::Boundedness { thresholds })
        }
        "palindrome" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                #[serde(default = "default_base")]
                base: i64,
            }
            let p: P = parse("palindrome", params)?;
            if !(2..=256).contains(&p.base) {
                return Err(ConfigError::BadParams {
                    method: "palindrome",
                    problem: format!("invalid base {}: need 2 <= base <= 256", p.base),
                });
            }
            Ok(Method::Palindrome { base: p.base as u32 })
        }
        "periodicity" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                #[serde(default = "default_max_period")]
                max_period: usize,
            }
            let p: P = parse("periodicity", params)?;
            if p.max_period == 0 {
                return Err(ConfigError::BadParams {
                    method: "periodicity",
                    problem: "max_period must be positive".into(),
                });
            }
            Ok(Method::Periodicity { max_period: p.max_period })
        }
        "text_search" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                field: String,
                needles: Vec<String>,
                #[serde(default = "default_true")]
                case_insensitive: bool,
            }
            let p: P = parse("text_search", params)?;
            Ok(Method::TextSearch {
                field: p.field.parse::<TextField>()?,
                needles: p.needles,
                case_insensitive: p.case_insensitive,
            })
        }
        "regex_match" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                field: String,
                #[serde(default)]
                pattern: Option<String>,
                #[serde(default)]
                builtin: Option<String>,
            }
            let p: P = parse("regex_match", params)?;
            let pattern = match (p.pattern, p.builtin) {
                (Some(pat), None) => pat,
                (None, Some(name)) if name == "fibonacci_like" => FIBONACCI_LIKE_PATTERN.to_string(),
                (None, Some(name)) => {
                    return Err(ConfigError::BadParams {
                        method: "regex_match",
                        problem: format!("unknown builtin pattern {name:?}; only \"fibonacci_like\" ships"),
                    })
                }
                _ => {
                    return Err(ConfigError::BadParams {
                        method: "regex_match",
                        problem: "exactly one of \"pattern\" or \"builtin\" is required".into(),
                    })
                }
            };
            Ok(Method::RegexMatch {
                field: p.field.parse::<TextField>()?,
                pattern: Regex::new(&pattern)?,
            })
        }
        other => Err(ConfigError::UnknownMethod(other.to_string())),
    }
}

fn default_max_degree() -> usize {
    10
}
fn default_holdout_min() -> usize {
    5
}
fn default_tail() -> usize {
    30
}
fn default_tolerance() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(100))
}
fn default_thresholds() -> Vec<BigInt> {
    [1, 10, 100, 1000, 1_000_000].into_iter().map(BigInt::from).collect()
}
fn default_base() -> i64 {
    10
}
fn default_max_period() -> usize {
    10_000
}
fn default_true() -> bool {
    true
}

/// The annotator set used when no config file is given: exact numeric
/// methods for the categories that have them, text searches for the rest.
/// `increasing` and `unique` have no heuristic method here; synthetic
/// records get those labels at generation time.
pub fn default_annotators() -> Vec<Annotator> {
    let agg = Aggregator::ConfidentMaxConflictDamping;
    let annotator = |category, methods| Annotator::new(category, methods, agg).expect("non-empty methods");
    let search = |field: TextField, needles: &[&str]| Method::TextSearch {
        field,
        needles: needles.iter().map(|s| s.to_string()).collect(),
        case_insensitive: true,
    };
    vec![
        annotator(
            Category::Polynomial,
            vec![
                Method::DividedDifferenceDegree { max_degree: default_max_degree() },
                Method::PolynomialFit { holdout_min: default_holdout_min() },
            ],
        ),
        annotator(
            Category::Exponential,
            vec![Method::ExponentialQuotient { tail: default_tail(), tolerance: default_tolerance() }],
        ),
        annotator(Category::Prime, vec![Method::Primality]),
        annotator(Category::Periodic, vec![Method::Periodicity { max_period: default_max_period() }]),
        annotator(
            Category::Trigonometric,
            vec![search(TextField::Name, &["sin", "cos", "tangent", "trigonometric"])],
        ),
        annotator(
            Category::Modulo,
            vec![search(TextField::Name, &[" mod ", "modulo", "congruen"])],
        ),
        annotator(Category::Finite, vec![search(TextField::Keywords, &["fini", "full"])]),
        annotator(Category::Bounded, vec![Method::Boundedness { thresholds: default_thresholds() }]),
    ]
}
