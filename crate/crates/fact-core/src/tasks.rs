//! The 9:1:1:1 corpus split and the five benchmark task builders.
//!
//! Builders are pure functions of (records, parameters, seed). Determinism
//! comes from hashing record ids rather than positions, so adding or
//! removing unrelated records never reshuffles what remains. Records too
//! short for a task's window are excluded, never padded; a builder only
//! fails when that leaves nothing to emit.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::record::{big_one, big_opt_vec, big_pairs, stable_hash64, Category, SequenceRecord, Source};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    ClassifyOvr,
    ClassifyMulti,
    Similarity,
    Nspp,
    Continuation,
    Unmasking,
}

impl TaskKind {
    pub const ALL: [TaskKind; 6] = [
        TaskKind::ClassifyOvr,
        TaskKind::ClassifyMulti,
        TaskKind::Similarity,
        TaskKind::Nspp,
        TaskKind::Continuation,
        TaskKind::Unmasking,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::ClassifyOvr => "classify_ovr",
            TaskKind::ClassifyMulti => "classify_multi",
            TaskKind::Similarity => "similarity",
            TaskKind::Nspp => "nspp",
            TaskKind::Continuation => "continuation",
            TaskKind::Unmasking => "unmasking",
        }
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether a task file was built from one category's records or from all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Within,
    Across,
}

/// Kind-dependent target. The four JSON shapes are disjoint (bool, array of
/// label strings, array of [position, value] pairs, decimal string), so the
/// encoding needs no tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TaskTarget {
    Bool(bool),
    Labels(BTreeSet<Category>),
    Masked(#[serde(with = "big_pairs")] Vec<(usize, BigInt)>),
    Value(#[serde(with = "big_one")] BigInt),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub task: TaskKind,
    pub id: String,
    pub scope: Scope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
    /// Input window; `None` entries are masked positions (JSON null).
    #[serde(with = "big_opt_vec")]
    pub input: Vec<Option<BigInt>>,
    pub target: TaskTarget,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mask_positions: Vec<usize>,
    /// Similarity only: candidate record ids, `per_category` from each
    /// in-scope category.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<Vec<String>>,
}

/// One model output per task instance: 1 candidate for single-shot tasks,
/// up to the configured k for multi-shot ones. The payload shape depends on
/// the task, so candidates stay as raw JSON here and are decoded by the
/// evaluator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub candidates: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TaskError {
    #[error("no {0} records available")]
    EmptySource(Source),
    #[error("split ratios must be 3 or 4 positive parts")]
    BadRatios,
    #[error("category {category} has no usable {side} records (level 2 records are excluded)")]
    InsufficientClass { category: Category, side: &'static str },
    #[error("record {id} is too short: need {need} values, have {have}")]
    TooShort { id: String, need: usize, have: usize },
    #[error("category {category} has {have} candidate records, need {need}")]
    InsufficientCategory { category: Category, have: usize, need: usize },
    #[error("need at least {need} eligible records, have {have}")]
    InsufficientCorpus { need: usize, have: usize },
    #[error("mask probability must lie strictly between 0 and 1, got {0}")]
    BadMaskProb(f64),
    #[error("no records are long enough to build instances")]
    NoInstances,
}

/// Split configuration. Ratios are train : val : test_synth, with an
/// optional fourth part requesting the organic test_oeis set (the ratio
/// value itself carries no weight: organic records are never subsampled).
#[derive(Debug, Clone)]
pub struct SplitSpec {
    pub ratios: Vec<u32>,
    pub seed: u64,
    pub stratify_by_category: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { ratios: vec![9, 1, 1, 1], seed: 1234, stratify_by_category: true }
    }
}

#[derive(Debug, Default)]
pub struct SplitOutput {
    pub train: Vec<SequenceRecord>,
    pub val: Vec<SequenceRecord>,
    pub test_synth: Vec<SequenceRecord>,
    pub test_oeis: Vec<SequenceRecord>,
}

/// Deterministic stratified split. Synthetic records are apportioned over
/// train/val/test_synth by the first three ratios (largest-remainder rule,
/// so every stratum lands within one record of its exact share); organic
/// records all go to test_oeis. A three-part ratio splits a synthetic-only
/// corpus; the four-part form requires organic records to exist.
pub fn split(records: Vec<SequenceRecord>, spec: &SplitSpec) -> Result<SplitOutput, TaskError> {
    if !(spec.ratios.len() == 3 || spec.ratios.len() == 4) || spec.ratios.iter().any(|&r| r == 0) {
        return Err(TaskError::BadRatios);
    }
    let mut out = SplitOutput::default();
    let mut synth = Vec::new();
    for r in records {
        match r.source {
            Source::Synth => synth.push(r),
            Source::Oeis => out.test_oeis.push(r),
        }
    }
    if synth.is_empty() {
        return Err(TaskError::EmptySource(Source::Synth));
    }
    if spec.ratios.len() == 4 && out.test_oeis.is_empty() {
        return Err(TaskError::EmptySource(Source::Oeis));
    }

    let stratum_key = |r: &SequenceRecord| -> String {
        if !spec.stratify_by_category {
            return String::from("all");
        }
        let cats: Vec<&str> = r.categories_at_least(3).iter().map(|c| c.name()).collect();
        if cats.is_empty() {
            String::from("none")
        } else {
            cats.join("+")
        }
    };

    let mut strata: std::collections::BTreeMap<String, Vec<SequenceRecord>> = Default::default();
    for r in synth {
        strata.entry(stratum_key(&r)).or_default().push(r);
    }

    let weights = [spec.ratios[0] as u64, spec.ratios[1] as u64, spec.ratios[2] as u64];
    let total: u64 = weights.iter().sum();
    for (_, mut members) in strata {
        members.sort_by_cached_key(|r| (stable_hash64(spec.seed, &["split", &r.id]), r.id.clone()));
        let n = members.len() as u64;
        // Largest-remainder apportionment: floor shares first, then one
        // extra to the largest fractional remainders.
        let mut sizes = [0usize; 3];
        let mut rems: Vec<(u64, usize)> = Vec::with_capacity(3);
        for (i, w) in weights.iter().enumerate() {
            sizes[i] = ((n * w) / total) as usize;
            rems.push(((n * w) % total, i));
        }
        let mut leftover = members.len() - sizes.iter().sum::<usize>();
        rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for (_, i) in rems {
            if leftover == 0 {
                break;
            }
            sizes[i] += 1;
            leftover -= 1;
        }
        let mut it = members.into_iter();
        out.train.extend(it.by_ref().take(sizes[0]));
        out.val.extend(it.by_ref().take(sizes[1]));
        out.test_synth.extend(it.by_ref().take(sizes[2]));
    }
    Ok(out)
}

/// The category used for per-category metric breakdowns: the record's
/// highest-level membership at level >= 3, earliest in [`Category::ALL`] on
/// ties.
pub fn primary_category(record: &SequenceRecord) -> Option<Category> {
    let mut best: Option<(Category, u8)> = None;
    for c in Category::ALL {
        let l = record.level(c);
        if l >= 3 && best.map_or(true, |(_, bl)| l > bl) {
            best = Some((c, l));
        }
    }
    best.map(|(c, _)| c)
}

fn window_input(record: &SequenceRecord, window: usize) -> Vec<Option<BigInt>> {
    record.values[..window].iter().cloned().map(Some).collect()
}

fn scope_of(scope_category: Option<Category>) -> Scope {
    if scope_category.is_some() {
        Scope::Within
    } else {
        Scope::Across
    }
}

/// One-vs-rest binary classification for one category: positives are
/// records at level >= 3, negatives at level <= 1, exactly balanced by
/// deterministically downsampling the larger side. Level-2 records are
/// excluded entirely.
pub fn build_ovr(
    records: &[SequenceRecord],
    category: Category,
    window: usize,
    per_side: Option<usize>,
    seed: u64,
) -> Result<Vec<TaskInstance>, TaskError> {
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for r in records {
        if r.values.len() < window {
            continue;
        }
        match r.level(category) {
            l if l >= 3 => positives.push(r),
            l if l <= 1 => negatives.push(r),
            _ => {}
        }
    }
    for (side, list) in [("positive", &positives), ("negative", &negatives)] {
        if list.is_empty() {
            return Err(TaskError::InsufficientClass { category, side });
        }
    }
    let order_key =
        |r: &SequenceRecord| (stable_hash64(seed, &["ovr", category.name(), &r.id]), r.id.clone());
    positives.sort_by_cached_key(|r| order_key(r));
    negatives.sort_by_cached_key(|r| order_key(r));
    let n = positives.len().min(negatives.len()).min(per_side.unwrap_or(usize::MAX));

    let mut instances = Vec::with_capacity(2 * n);
    for (list, label) in [(&positives, true), (&negatives, false)] {
        for r in &list[..n] {
            instances.push(TaskInstance {
                task: TaskKind::ClassifyOvr,
                id: format!("ovr:{}:{}", category, r.id),
                scope: Scope::Within,
                category: Some(category),
                input: window_input(r, window),
                target: TaskTarget::Bool(label),
                mask_positions: Vec::new(),
                pool: None,
            });
        }
    }
    instances.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(instances)
}

/// Multilabel classification: the target is every category at level >= 3.
/// Records with an empty label set (or too short for the window) are
/// dropped.
pub fn build_multiclass(records: &[SequenceRecord], window: usize) -> Vec<TaskInstance> {
    records
        .iter()
        .filter(|r| r.values.len() >= window)
        .filter_map(|r| {
            let labels: BTreeSet<Category> = r.categories_at_least(3).into_iter().collect();
            if labels.is_empty() {
                return None;
            }
            Some(TaskInstance {
                task: TaskKind::ClassifyMulti,
                id: format!("multi:{}", r.id),
                scope: Scope::Across,
                category: primary_category(r),
                input: window_input(r, window),
                target: TaskTarget::Labels(labels),
                mask_positions: Vec::new(),
                pool: None,
            })
        })
        .collect()
}

/// Where a negative NSPP partner's window is cut from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapPolicy {
    /// The partner's own continuation window `[window, 2*window)`.
    Aligned,
    /// A uniformly random window of the partner.
    Random,
}

/// Next-sub-sequence prediction: for each eligible record one positive
/// instance (its true continuation) and one negative (a window from another
/// record, same primary category with probability 1/2). Exactly balanced by
/// construction.
pub fn build_nspp(
    records: &[SequenceRecord],
    window: usize,
    gap_policy: GapPolicy,
    seed: u64,
    scope_category: Option<Category>,
) -> Result<Vec<TaskInstance>, TaskError> {
    let eligible: Vec<&SequenceRecord> = records.iter().filter(|r| r.values.len() >= 2 * window).collect();
    if eligible.len() < 2 {
        if let Some(r) = records.iter().find(|r| r.values.len() < 2 * window) {
            if eligible.is_empty() && !records.is_empty() {
                return Err(TaskError::TooShort {
                    id: r.id.clone(),
                    need: 2 * window,
                    have: r.values.len(),
                });
            }
        }
        return Err(TaskError::InsufficientCorpus { need: 2, have: eligible.len() });
    }
    let scope = scope_of(scope_category);

    let mut instances = Vec::with_capacity(2 * eligible.len());
    for r in &eligible {
        let s1 = &r.values[..window];
        let true_s2 = &r.values[window..2 * window];
        let category = scope_category.or_else(|| primary_category(r));

        let mut input: Vec<Option<BigInt>> = s1.iter().cloned().map(Some).collect();
        input.extend(true_s2.iter().cloned().map(Some));
        instances.push(TaskInstance {
            task: TaskKind::Nspp,
            id: format!("nspp:{}:pos", r.id),
            scope,
            category,
            input,
            target: TaskTarget::Bool(true),
            mask_positions: Vec::new(),
            pool: None,
        });

        let mut rng = ChaCha8Rng::seed_from_u64(stable_hash64(seed, &["nspp", &r.id]));
        let mut fake_s2: Option<Vec<BigInt>> = None;
        for _ in 0..20 {
            let same_category = rng.gen_bool(0.5);
            let my_cat = primary_category(r);
            let pool: Vec<&&SequenceRecord> = eligible
                .iter()
                .filter(|p| p.id != r.id && (primary_category(p) == my_cat) == same_category)
                .collect();
            // One side can be empty (single-category corpora); fall back to
            // any partner rather than starving the negative.
            let pool: Vec<&&SequenceRecord> = if pool.is_empty() {
                eligible.iter().filter(|p| p.id != r.id).collect()
            } else {
                pool
            };
            let partner = pool[rng.gen_range(0..pool.len())];
            let start = match gap_policy {
                GapPolicy::Aligned => window,
                GapPolicy::Random => rng.gen_range(0..=partner.values.len() - window),
            };
            let candidate = &partner.values[start..start + window];
            // An accidental true continuation would mislabel the instance;
            // redraw instead.
            if candidate != true_s2 {
                fake_s2 = Some(candidate.to_vec());
                break;
            }
        }
        let Some(fake_s2) = fake_s2 else {
            // Every draw collided with the true continuation; drop the
            // positive too so the output stays balanced.
            instances.pop();
            continue;
        };
        let mut input: Vec<Option<BigInt>> = s1.iter().cloned().map(Some).collect();
        input.extend(fake_s2.into_iter().map(Some));
        instances.push(TaskInstance {
            task: TaskKind::Nspp,
            id: format!("nspp:{}:neg", r.id),
            scope,
            category,
            input,
            target: TaskTarget::Bool(false),
            mask_positions: Vec::new(),
            pool: None,
        });
    }
    if instances.is_empty() {
        return Err(TaskError::NoInstances);
    }
    Ok(instances)
}

/// Continuation: input is the first `prefix_len` values, the target is the
/// next one.
pub fn build_continuation(
    records: &[SequenceRecord],
    prefix_len: usize,
    scope_category: Option<Category>,
) -> Result<Vec<TaskInstance>, TaskError> {
    let scope = scope_of(scope_category);
    let mut instances = Vec::new();
    for r in records {
        if r.values.len() < prefix_len + 1 {
            continue;
        }
        instances.push(TaskInstance {
            task: TaskKind::Continuation,
            id: format!("cont:{}", r.id),
            scope,
            category: scope_category.or_else(|| primary_category(r)),
            input: window_input(r, prefix_len),
            target: TaskTarget::Value(r.values[prefix_len].clone()),
            mask_positions: Vec::new(),
            pool: None,
        });
    }
    if instances.is_empty() {
        return Err(first_too_short(records, prefix_len + 1));
    }
    Ok(instances)
}

/// One unmasking instance with an explicit mask set. Masked positions carry
/// JSON null in the input; the targets hold the original values. Masking
/// only the last position reproduces a continuation instance's information
/// content, which keeps continuation a special case of this task.
pub fn unmasking_instance(
    record: &SequenceRecord,
    window: usize,
    masks: &[usize],
    scope_category: Option<Category>,
) -> Result<TaskInstance, TaskError> {
    if record.values.len() < window {
        return Err(TaskError::TooShort {
            id: record.id.clone(),
            need: window,
            have: record.values.len(),
        });
    }
    debug_assert!(masks.windows(2).all(|w| w[0] < w[1]), "masks must be sorted and distinct");
    debug_assert!(masks.iter().all(|&p| p < window), "masks must fall inside the window");
    let mut input = window_input(record, window);
    let mut targets = Vec::with_capacity(masks.len());
    for &p in masks {
        targets.push((p, record.values[p].clone()));
        input[p] = None;
    }
    Ok(TaskInstance {
        task: TaskKind::Unmasking,
        id: format!("mask:{}", record.id),
        scope: scope_of(scope_category),
        category: scope_category.or_else(|| primary_category(record)),
        input,
        target: TaskTarget::Masked(targets),
        mask_positions: masks.to_vec(),
        pool: None,
    })
}

/// Unmasking: every window position is masked independently with
/// probability `mask_prob`; a zero-mask draw force-masks the final position
/// so every instance has at least one target.
pub fn build_unmasking(
    records: &[SequenceRecord],
    window: usize,
    mask_prob: f64,
    seed: u64,
    scope_category: Option<Category>,
) -> Result<Vec<TaskInstance>, TaskError> {
    if !(mask_prob > 0.0 && mask_prob < 1.0) {
        return Err(TaskError::BadMaskProb(mask_prob));
    }
    let mut instances = Vec::new();
    for r in records {
        if r.values.len() < window {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(stable_hash64(seed, &["mask", &r.id]));
        let mut masks: Vec<usize> = (0..window).filter(|_| rng.gen_bool(mask_prob)).collect();
        if masks.is_empty() {
            masks.push(window - 1);
        }
        instances.push(unmasking_instance(r, window, &masks, scope_category)?);
    }
    if instances.is_empty() {
        return Err(first_too_short(records, window));
    }
    Ok(instances)
}

/// Similarity queries: each eligible record becomes a query whose candidate
/// pool holds `per_category` deterministically sampled records from every
/// in-scope category (query excluded); the target is the query's own label
/// set.
pub fn build_similarity(
    records: &[SequenceRecord],
    per_category: usize,
    window: usize,
    seed: u64,
    scope_category: Option<Category>,
) -> Result<Vec<TaskInstance>, TaskError> {
    let eligible: Vec<&SequenceRecord> = records.iter().filter(|r| r.values.len() >= window).collect();
    if eligible.is_empty() {
        return Err(first_too_short(records, window));
    }
    // In-scope categories: all with at least one member among the eligible
    // records, in enum order so pools are stable.
    let mut members: std::collections::BTreeMap<Category, Vec<&SequenceRecord>> = Default::default();
    for r in &eligible {
        for c in r.categories_at_least(3) {
            members.entry(c).or_default().push(r);
        }
    }
    for list in members.values_mut() {
        list.sort_by_cached_key(|r| (stable_hash64(seed, &["sim", &r.id]), r.id.clone()));
    }

    let mut instances = Vec::new();
    for r in &eligible {
        let labels: BTreeSet<Category> = r.categories_at_least(3).into_iter().collect();
        if labels.is_empty() {
            continue;
        }
        let mut pool = Vec::with_capacity(per_category * members.len());
        for (c, list) in &members {
            let picked: Vec<&str> =
                list.iter().filter(|p| p.id != r.id).take(per_category).map(|p| p.id.as_str()).collect();
            if picked.len() < per_category {
                return Err(TaskError::InsufficientCategory {
                    category: *c,
                    have: picked.len(),
                    need: per_category,
                });
            }
            pool.extend(picked.into_iter().map(str::to_string));
        }
        instances.push(TaskInstance {
            task: TaskKind::Similarity,
            id: format!("sim:{}", r.id),
            scope: scope_of(scope_category),
            category: scope_category.or_else(|| primary_category(r)),
            input: window_input(r, window),
            target: TaskTarget::Labels(labels),
            mask_positions: Vec::new(),
            pool: Some(pool),
        });
    }
    if instances.is_empty() {
        return Err(TaskError::NoInstances);
    }
    Ok(instances)
}

fn first_too_short(records: &[SequenceRecord], need: usize) -> TaskError {
    match records.iter().find(|r| r.values.len() < need) {
        Some(r) => TaskError::TooShort { id: r.id.clone(), need, have: r.values.len() },
        None => TaskError::NoInstances,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(id: &str, category: Category, values: Vec<BigInt>) -> SequenceRecord {
        let mut r = SequenceRecord {
            id: id.to_string(),
            source: Source::Synth,
            values,
            formula: None,
            formula_length: None,
            categories: Default::default(),
            offset: 0,
            bounded_by: None,
        };
        r.set_level(category, 4);
        r
    }

    fn organic(id: &str, values: Vec<BigInt>) -> SequenceRecord {
        SequenceRecord {
            id: id.to_string(),
            source: Source::Oeis,
            values,
            formula: None,
            formula_length: None,
            categories: Default::default(),
            offset: 0,
            bounded_by: None,
        }
    }

    fn ints(values: &[i64]) -> Vec<BigInt> {
        values.iter().copied().map(BigInt::from).collect()
    }

    fn squares(n: usize) -> Vec<BigInt> {
        (0..n as i64).map(|x| BigInt::from(x * x)).collect()
    }

    fn corpus(n_poly: usize, n_peri: usize) -> Vec<SequenceRecord> {
        let mut rs = Vec::new();
        for i in 0..n_poly {
            let k = i as i64 + 1;
            rs.push(synth(
                &format!("p{i:03}"),
                Category::Polynomial,
                (0..20).map(|x| BigInt::from(k * x + k)).collect(),
            ));
        }
        for i in 0..n_peri {
            let k = i as i64;
            rs.push(synth(
                &format!("q{i:03}"),
                Category::Periodic,
                (0..20).map(|x| BigInt::from((x % 3) * 7 + k)).collect(),
            ));
        }
        rs
    }

    #[test]
    fn split_obeys_ratio_law_per_stratum() {
        let mut records = corpus(12, 0);
        records.push(organic("A000001", ints(&[1, 2, 3])));
        let out = split(records, &SplitSpec::default()).unwrap();
        let n = [out.train.len(), out.val.len(), out.test_synth.len()];
        assert_eq!(n.iter().sum::<usize>(), 12);
        // Exact shares are 12*(9,1,1)/11; each size must be within 1.
        for (size, w) in n.iter().zip([9.0f64, 1.0, 1.0]) {
            let exact = 12.0 * w / 11.0;
            assert!((*size as f64 - exact).abs() < 1.0 + 1e-9, "{size} vs {exact}");
        }
        assert_eq!(out.test_oeis.len(), 1);
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let mut records = corpus(40, 30);
        records.push(organic("A000002", ints(&[1, 2])));
        let a = split(records.clone(), &SplitSpec::default()).unwrap();
        let b = split(records, &SplitSpec::default()).unwrap();
        let ids = |v: &[SequenceRecord]| v.iter().map(|r| r.id.clone()).collect::<Vec<_>>();
        assert_eq!(ids(&a.train), ids(&b.train));
        assert_eq!(ids(&a.val), ids(&b.val));
        assert_eq!(ids(&a.test_synth), ids(&b.test_synth));

        let mut all: Vec<String> = ids(&a.train);
        all.extend(ids(&a.val));
        all.extend(ids(&a.test_synth));
        all.extend(ids(&a.test_oeis));
        let unique: std::collections::BTreeSet<&String> = all.iter().collect();
        assert_eq!(unique.len(), all.len(), "splits must be disjoint");
    }

    #[test]
    fn split_requires_both_sources() {
        assert_eq!(
            split(corpus(5, 0), &SplitSpec::default()).unwrap_err(),
            TaskError::EmptySource(Source::Oeis)
        );
        assert_eq!(
            split(vec![organic("A000001", ints(&[1]))], &SplitSpec::default()).unwrap_err(),
            TaskError::EmptySource(Source::Synth)
        );
        let spec = SplitSpec { ratios: vec![9, 0, 1, 1], ..SplitSpec::default() };
        assert_eq!(split(corpus(5, 0), &spec).unwrap_err(), TaskError::BadRatios);
        let spec = SplitSpec { ratios: vec![9, 1], ..SplitSpec::default() };
        assert_eq!(split(corpus(5, 0), &spec).unwrap_err(), TaskError::BadRatios);
    }

    #[test]
    fn three_part_ratios_split_synthetic_only_corpora() {
        let spec = SplitSpec { ratios: vec![9, 1, 1], ..SplitSpec::default() };
        let out = split(corpus(22, 11), &spec).unwrap();
        assert_eq!(out.train.len() + out.val.len() + out.test_synth.len(), 33);
        assert!(out.test_oeis.is_empty());
    }

    #[test]
    fn ovr_is_exactly_balanced() {
        let records = corpus(100, 40);
        let instances = build_ovr(&records, Category::Polynomial, 10, None, 7).unwrap();
        let pos = instances.iter().filter(|i| i.target == TaskTarget::Bool(true)).count();
        let neg = instances.len() - pos;
        assert_eq!((pos, neg), (40, 40));
        for i in &instances {
            assert_eq!(i.input.len(), 10);
            assert_eq!(i.category, Some(Category::Polynomial));
            assert_eq!(i.scope, Scope::Within);
        }
    }

    #[test]
    fn ovr_excludes_level_two_and_errors_without_classes() {
        let mut records = corpus(3, 3);
        for r in &mut records {
            r.set_level(Category::Polynomial, 2);
        }
        assert_eq!(
            build_ovr(&records, Category::Polynomial, 10, None, 7).unwrap_err(),
            TaskError::InsufficientClass { category: Category::Polynomial, side: "positive" }
        );
    }

    #[test]
    fn multiclass_targets_are_level_three_plus() {
        let mut r = synth("m1", Category::Polynomial, squares(20));
        r.set_level(Category::Increasing, 4);
        r.set_level(Category::Bounded, 2);
        let low = synth("m2", Category::Exponential, ints(&[1; 20]));
        let mut low = low;
        low.set_level(Category::Exponential, 1);

        let instances = build_multiclass(&[r, low], 10);
        assert_eq!(instances.len(), 1, "all-low records are dropped");
        match &instances[0].target {
            TaskTarget::Labels(set) => {
                assert!(set.contains(&Category::Polynomial));
                assert!(set.contains(&Category::Increasing));
                assert!(!set.contains(&Category::Bounded));
            }
            other => panic!("unexpected target {other:?}"),
        }
    }

    #[test]
    fn nspp_positive_is_true_continuation() {
        let records = corpus(6, 6);
        let instances = build_nspp(&records, 5, GapPolicy::Aligned, 11, None).unwrap();
        let pos = instances.iter().filter(|i| i.target == TaskTarget::Bool(true)).count();
        assert_eq!(pos * 2, instances.len(), "exactly balanced");

        let r = &records[0];
        let inst = instances.iter().find(|i| i.id == format!("nspp:{}:pos", r.id)).unwrap();
        let expected: Vec<Option<BigInt>> = r.values[..10].iter().cloned().map(Some).collect();
        assert_eq!(inst.input, expected);

        let neg = instances.iter().find(|i| i.id == format!("nspp:{}:neg", r.id)).unwrap();
        assert_eq!(neg.input[..5], expected[..5], "s1 is shared");
        assert_ne!(neg.input[5..], expected[5..], "negative s2 must differ");
    }

    #[test]
    fn nspp_needs_two_records() {
        let records = corpus(1, 0);
        assert!(matches!(
            build_nspp(&records, 5, GapPolicy::Aligned, 11, None),
            Err(TaskError::InsufficientCorpus { .. })
        ));
    }

    #[test]
    fn continuation_examples() {
        let fib = organic("A000045", ints(&[1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89]));
        let out = build_continuation(&[fib], 10, None).unwrap();
        assert_eq!(out[0].target, TaskTarget::Value(BigInt::from(89)));
        assert_eq!(out[0].input.len(), 10);

        let exact = organic("A000004", ints(&[0, 0, 0]));
        assert_eq!(
            build_continuation(&[exact], 3, None).unwrap_err(),
            TaskError::TooShort { id: "A000004".into(), need: 4, have: 3 }
        );
    }

    #[test]
    fn unmasking_masks_line_up() {
        let records = corpus(50, 0);
        let instances = build_unmasking(&records, 10, 0.25, 3, None).unwrap();
        assert_eq!(instances.len(), 50);
        for inst in &instances {
            assert!(!inst.mask_positions.is_empty());
            let TaskTarget::Masked(targets) = &inst.target else {
                panic!("unmasking target must be masked pairs");
            };
            assert_eq!(targets.len(), inst.mask_positions.len());
            for (p, v) in targets {
                assert!(inst.input[*p].is_none(), "masked input must be null");
                let original = &records.iter().find(|r| inst.id == format!("mask:{}", r.id)).unwrap().values[*p];
                assert_eq!(v, original);
            }
            for (i, slot) in inst.input.iter().enumerate() {
                assert_eq!(slot.is_none(), inst.mask_positions.contains(&i));
            }
        }
    }

    #[test]
    fn unmasking_rejects_bad_probability() {
        let records = corpus(2, 0);
        assert!(matches!(build_unmasking(&records, 10, 0.0, 3, None), Err(TaskError::BadMaskProb(_))));
        assert!(matches!(build_unmasking(&records, 10, 1.0, 3, None), Err(TaskError::BadMaskProb(_))));
    }

    #[test]
    fn forced_final_mask_contains_continuation() {
        let r = synth("c1", Category::Polynomial, squares(20));
        let inst = unmasking_instance(&r, 11, &[10], None).unwrap();
        assert_eq!(inst.mask_positions, vec![10]);
        assert!(inst.input[10].is_none());
        let cont = build_continuation(&[r.clone()], 10, None).unwrap().remove(0);
        assert_eq!(inst.input[..10], cont.input[..]);
        let TaskTarget::Masked(targets) = &inst.target else { unreachable!() };
        assert_eq!(TaskTarget::Value(targets[0].1.clone()), cont.target);
    }

    #[test]
    fn similarity_pools_exclude_query() {
        let records = corpus(8, 8);
        let instances = build_similarity(&records, 5, 10, 13, None).unwrap();
        assert_eq!(instances.len(), 16);
        for inst in &instances {
            let pool = inst.pool.as_ref().unwrap();
            // Two categories in scope, five candidates each.
            assert_eq!(pool.len(), 10);
            let query_id = inst.id.strip_prefix("sim:").unwrap();
            assert!(pool.iter().all(|p| p != query_id), "query leaked into its own pool");
        }
    }

    #[test]
    fn similarity_needs_enough_candidates() {
        let records = corpus(8, 2);
        assert_eq!(
            build_similarity(&records, 5, 10, 13, None).unwrap_err(),
            TaskError::InsufficientCategory { category: Category::Periodic, have: 2, need: 5 }
        );
    }

    #[test]
    fn instances_round_trip_through_jsonl() {
        let records = corpus(6, 6);
        let mut all = build_ovr(&records, Category::Polynomial, 10, None, 7).unwrap();
        all.extend(build_multiclass(&records, 10));
        all.extend(build_nspp(&records, 5, GapPolicy::Aligned, 11, None).unwrap());
        all.extend(build_continuation(&records, 10, None).unwrap());
        all.extend(build_unmasking(&records, 10, 0.25, 3, None).unwrap());
        all.extend(build_similarity(&records, 5, 10, 13, None).unwrap());
        for inst in &all {
            let line = serde_json::to_string(inst).unwrap();
            let back: TaskInstance = serde_json::from_str(&line).unwrap();
            assert_eq!(&back, inst);
        }
    }

    #[test]
    fn builders_are_deterministic() {
        let records = corpus(20, 20);
        let a = build_nspp(&records, 5, GapPolicy::Random, 11, None).unwrap();
        let b = build_nspp(&records, 5, GapPolicy::Random, 11, None).unwrap();
        assert_eq!(a, b);
        let a = build_unmasking(&records, 10, 0.25, 3, None).unwrap();
        let b = build_unmasking(&records, 10, 0.25, 3, None).unwrap();
        assert_eq!(a, b);
    }
}
