//! Shared corpus shapes: categories, graded membership, sequence records,
//! and the decimal-string serde helpers used by every JSONL schema.
//!
//! Sequence values are serialized as decimal strings, never JSON numbers:
//! corpus values legitimately reach 10^120 and would not survive a round
//! trip through an f64-based JSON reader.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

/// Maximum membership level. Levels read: 0 = does not belong, 1 = more
/// likely than not does not belong, 2 = inconclusive, 3 = more likely than
/// not belongs, 4 = belongs.
pub const LEVEL_MAX: u8 = 4;

/// The ten sequence categories. The first seven are generative (each has a
/// grammar); `increasing`, `bounded` and `unique` are meta-categories
/// inferred from values after generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Polynomial,
    Exponential,
    Prime,
    Periodic,
    Modulo,
    Trigonometric,
    Finite,
    Increasing,
    Bounded,
    Unique,
}

impl Category {
    pub const ALL: [Category; 10] = [
        Category::Polynomial,
        Category::Exponential,
        Category::Prime,
        Category::Periodic,
        Category::Modulo,
        Category::Trigonometric,
        Category::Finite,
        Category::Increasing,
        Category::Bounded,
        Category::Unique,
    ];

    pub const GENERATIVE: [Category; 7] = [
        Category::Polynomial,
        Category::Exponential,
        Category::Prime,
        Category::Periodic,
        Category::Modulo,
        Category::Trigonometric,
        Category::Finite,
    ];

    pub fn is_meta(self) -> bool {
        matches!(self, Category::Increasing | Category::Bounded | Category::Unique)
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Polynomial => "polynomial",
            Category::Exponential => "exponential",
            Category::Prime => "prime",
            Category::Periodic => "periodic",
            Category::Modulo => "modulo",
            Category::Trigonometric => "trigonometric",
            Category::Finite => "finite",
            Category::Increasing => "increasing",
            Category::Bounded => "bounded",
            Category::Unique => "unique",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

/// Provenance of a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Synth,
    Oeis,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Synth => "synthetic",
            Source::Oeis => "organic",
        })
    }
}

/// One sequence with its graded category memberships.
///
/// `categories` stores only non-zero levels; absence means level 0. Synthetic
/// records carry the generating formula and its derivation length, organic
/// records do not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub id: String,
    pub source: Source,
    #[serde(with = "big_vec")]
    pub values: Vec<BigInt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula_length: Option<u32>,
    #[serde(default)]
    pub categories: BTreeMap<Category, u8>,
    pub offset: i64,
    /// Smallest satisfied bound from the boundedness meta-label. In-memory
    /// metadata only; not part of the record schema.
    #[serde(skip)]
    pub bounded_by: Option<BigInt>,
}

impl SequenceRecord {
    /// Membership level for a category; absent means 0.
    pub fn level(&self, c: Category) -> u8 {
        self.categories.get(&c).copied().unwrap_or(0)
    }

    /// Sets a membership level, keeping the only-non-zero-entries invariant.
    /// Panics on levels above [`LEVEL_MAX`].
    pub fn set_level(&mut self, c: Category, level: u8) {
        assert!(level <= LEVEL_MAX, "membership level {level} out of range");
        if level == 0 {
            self.categories.remove(&c);
        } else {
            self.categories.insert(c, level);
        }
    }

    /// Categories at or above a level threshold, in canonical order.
    pub fn categories_at_least(&self, min: u8) -> Vec<Category> {
        self.categories
            .iter()
            .filter(|&(_, &lvl)| lvl >= min)
            .map(|(&c, _)| c)
            .collect()
    }
}

/// Stable 64-bit FNV-1a over a seed and a list of string parts. Used wherever
/// a deterministic, platform-independent ordering or stream key is derived
/// from record identifiers.
pub fn stable_hash64(seed: u64, parts: &[&str]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for byte in seed.to_le_bytes() {
        h = (h ^ byte as u64).wrapping_mul(PRIME);
    }
    for part in parts {
        for &byte in part.as_bytes() {
            h = (h ^ byte as u64).wrapping_mul(PRIME);
        }
        // Separator so ("ab","c") and ("a","bc") differ.
        h = (h ^ 0xff).wrapping_mul(PRIME);
    }
    h
}

/// Serde adapter: `Vec<BigInt>` as a JSON array of decimal strings.
pub mod big_vec {
    use super::*;
    use serde::de::Error;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| s.parse().map_err(|_| D::Error::custom(format!("bad integer `{s}`"))))
            .collect()
    }
}

/// Serde adapter: one `BigInt` as a decimal string.
pub mod big_one {
    use super::*;
    use serde::de::Error;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(|_| D::Error::custom(format!("bad integer `{raw}`")))
    }
}

/// Serde adapter: `Vec<Option<BigInt>>` as decimal strings with JSON `null`
/// marking masked positions.
pub mod big_opt_vec {
    use super::*;
    use serde::de::Error;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Option<BigInt>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.as_ref().map(|b| b.to_string())))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Option<BigInt>>, D::Error> {
        let raw = Vec::<Option<String>>::deserialize(d)?;
        raw.iter()
            .map(|slot| match slot {
                None => Ok(None),
                Some(s) => s
                    .parse()
                    .map(Some)
                    .map_err(|_| D::Error::custom(format!("bad integer `{s}`"))),
            })
            .collect()
    }
}

/// Serde adapter: `Vec<(usize, BigInt)>` as `[[position, "value"], ...]`.
pub mod big_pairs {
    use super::*;
    use serde::de::Error;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[(usize, BigInt)], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|(i, x)| (*i, x.to_string())))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(usize, BigInt)>, D::Error> {
        let raw = Vec::<(usize, String)>::deserialize(d)?;
        raw.iter()
            .map(|(i, s)| {
                s.parse()
                    .map(|v| (*i, v))
                    .map_err(|_| D::Error::custom(format!("bad integer `{s}`")))
            })
            .collect()
    }
}
