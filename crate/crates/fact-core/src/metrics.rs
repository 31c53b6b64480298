//! Evaluation metrics and the flexible contrastive loss.
//!
//! All reductions run in instance order with plain sequential summation, so
//! results are bit-identical from run to run. Values enter floating point
//! only here, through the signed log transform `slog`; everything upstream
//! is exact.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::record::Category;
use crate::tasks::{PredictionRecord, TaskInstance, TaskKind, TaskTarget};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("no instances to score")]
    Empty,
    #[error("macro-F1 needs a non-empty label list")]
    EmptyLabelList,
    #[error("instance has no candidates")]
    NoCandidates,
    #[error("distance must be non-negative, got {0}")]
    NegativeDistance(f64),
    #[error("invalid contrastive parameters: {0}")]
    BadParams(String),
    #[error("no pair weighting is defined for task {0}")]
    UnknownTask(TaskKind),
    #[error("no prediction found for instance {0}")]
    MissingPrediction(String),
    #[error("malformed candidate for instance {id}: {reason}")]
    BadCandidate { id: String, reason: String },
}

/// Signed log transform: sign(v) * ln(1 + |v|). Defined for every integer,
/// odd, and equal to log1p on the non-negatives.
pub fn slog(v: &BigInt) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let mag = (v.magnitude() + 1u32).to_f64().unwrap_or(f64::INFINITY).ln();
    if v.is_negative() {
        -mag
    } else {
        mag
    }
}

/// Fraction of exact matches.
pub fn accuracy(preds: &[bool], truths: &[bool]) -> Result<f64, MetricError> {
    check_lengths(preds.len(), truths.len())?;
    if preds.is_empty() {
        return Err(MetricError::Empty);
    }
    let hits = preds.iter().zip(truths).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Unweighted mean of per-class F1 over `labels`. Any 0/0 ratio on the way
/// (precision, recall, or F1 itself) is taken as 0, so a class absent from
/// both sides contributes 0 and still counts toward the mean.
pub fn macro_f1(
    pred_sets: &[BTreeSet<Category>],
    truth_sets: &[BTreeSet<Category>],
    labels: &[Category],
) -> Result<f64, MetricError> {
    check_lengths(pred_sets.len(), truth_sets.len())?;
    if labels.is_empty() {
        return Err(MetricError::EmptyLabelList);
    }
    let mut sum = 0.0;
    for &label in labels {
        sum += class_f1(pred_sets, truth_sets, label);
    }
    Ok(sum / labels.len() as f64)
}

fn class_f1(pred_sets: &[BTreeSet<Category>], truth_sets: &[BTreeSet<Category>], label: Category) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for (p, t) in pred_sets.iter().zip(truth_sets) {
        match (p.contains(&label), t.contains(&label)) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = ratio_or_zero(tp, tp + fp);
    let recall = ratio_or_zero(tp, tp + fn_);
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn ratio_or_zero(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Root mean squared logarithmic error under `slog`.
pub fn rmsle(preds: &[BigInt], truths: &[BigInt]) -> Result<f64, MetricError> {
    check_lengths(preds.len(), truths.len())?;
    if preds.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut sum = 0.0;
    for (p, t) in preds.iter().zip(truths) {
        let d = slog(p) - slog(t);
        sum += d * d;
    }
    Ok((sum / preds.len() as f64).sqrt())
}

/// Plain RMSE on raw values.
pub fn rmse(pred: &[BigInt], truth: &[BigInt]) -> Result<f64, MetricError> {
    check_lengths(pred.len(), truth.len())?;
    if pred.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut sum = 0.0;
    for (p, t) in pred.iter().zip(truth) {
        let d = (p - t).to_f64().unwrap_or(f64::INFINITY);
        sum += d * d;
    }
    Ok((sum / pred.len() as f64).sqrt())
}

/// RMSE of the candidate closest to the truth. This is the per-instance
/// quantity; dataset scores average it over instances.
pub fn top_k_rmse(candidates: &[Vec<BigInt>], truth: &[BigInt]) -> Result<f64, MetricError> {
    if candidates.is_empty() {
        return Err(MetricError::NoCandidates);
    }
    let mut best = f64::INFINITY;
    for c in candidates {
        best = best.min(rmse(c, truth)?);
    }
    Ok(best)
}

/// Fraction of queries with any true label among the first k entries of
/// their ranking.
pub fn recall_at_k(
    rankings: &[Vec<Category>],
    truth_sets: &[BTreeSet<Category>],
    k: usize,
) -> Result<f64, MetricError> {
    check_lengths(rankings.len(), truth_sets.len())?;
    if rankings.is_empty() || rankings.iter().any(|r| r.is_empty()) {
        return Err(MetricError::Empty);
    }
    let hits = rankings
        .iter()
        .zip(truth_sets)
        .filter(|(ranking, truth)| ranking.iter().take(k).any(|l| truth.contains(l)))
        .count();
    Ok(hits as f64 / rankings.len() as f64)
}

/// Margin `alpha` penalizing dissimilar pairs, mixing weight `lambda`
/// interpolating between the dissimilar and similar terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastiveParams {
    pub alpha: f64,
    pub lambda: f64,
}

impl ContrastiveParams {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self, MetricError> {
        if !(alpha > 0.0) {
            return Err(MetricError::BadParams(format!("alpha must be positive, got {alpha}")));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(MetricError::BadParams(format!("lambda must lie in [0, 1], got {lambda}")));
        }
        Ok(ContrastiveParams { alpha, lambda })
    }
}

/// L = (1 - lambda) * max(alpha - d, 0)^2 + lambda * d^2.
pub fn contrastive_loss(d: f64, params: &ContrastiveParams) -> Result<f64, MetricError> {
    if !(d >= 0.0) {
        return Err(MetricError::NegativeDistance(d));
    }
    let d_a = (params.alpha - d).max(0.0).powi(2);
    let d_n = d * d;
    Ok((1.0 - params.lambda) * d_a + params.lambda * d_n)
}

/// Per-pair data from which each task derives its mixing weight.
#[derive(Debug, Clone)]
pub enum PairData<'a> {
    /// Similarity: lambda is the same-class indicator.
    Similarity { same_class: bool },
    /// Continuation: lambda is the common-prefix fraction of the two
    /// sequences.
    Continuation { a: &'a [BigInt], b: &'a [BigInt] },
    /// Unmasking: lambda is the fraction of masked entries.
    Unmasking { masked: usize, len: usize },
}

pub fn lambda_for_task(task: TaskKind, data: &PairData) -> Result<f64, MetricError> {
    match (task, data) {
        (TaskKind::Similarity, PairData::Similarity { same_class }) => {
            Ok(if *same_class { 1.0 } else { 0.0 })
        }
        (TaskKind::Continuation, PairData::Continuation { a, b }) => {
            check_lengths(a.len(), b.len())?;
            if a.is_empty() {
                return Err(MetricError::Empty);
            }
            let prefix = a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count();
            Ok(prefix as f64 / a.len() as f64)
        }
        (TaskKind::Unmasking, PairData::Unmasking { masked, len }) => {
            if *len == 0 {
                return Err(MetricError::Empty);
            }
            debug_assert!(masked <= len);
            Ok(*masked as f64 / *len as f64)
        }
        (task, _) => Err(MetricError::UnknownTask(task)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryScore {
    pub value: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: String,
    pub value: f64,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_category: Option<BTreeMap<Category, CategoryScore>>,
}

/// Score predictions against instances. Instances may mix task kinds; each
/// kind contributes its own metrics:
/// one-vs-rest and next-subsequence get accuracy, multilabel classification
/// gets macro-F1 (per-class F1 in the category breakdown), continuation
/// gets RMSLE of the first candidate plus top-k RMSE, unmasking gets top-k
/// RMSE, and similarity gets Recall@k. Candidate lists longer than `k` are
/// truncated.
pub fn evaluate(
    instances: &[TaskInstance],
    preds: &[PredictionRecord],
    k: usize,
) -> Result<Vec<MetricReport>, MetricError> {
    if instances.is_empty() {
        return Err(MetricError::Empty);
    }
    let by_id: HashMap<&str, &PredictionRecord> = preds.iter().map(|p| (p.id.as_str(), p)).collect();
    let mut joined: Vec<(&TaskInstance, &PredictionRecord)> = Vec::with_capacity(instances.len());
    for inst in instances {
        let pred =
            by_id.get(inst.id.as_str()).ok_or_else(|| MetricError::MissingPrediction(inst.id.clone()))?;
        joined.push((inst, pred));
    }

    let mut reports = Vec::new();
    for kind in TaskKind::ALL {
        let group: Vec<&(&TaskInstance, &PredictionRecord)> =
            joined.iter().filter(|(i, _)| i.task == kind).collect();
        if group.is_empty() {
            continue;
        }
        let cats: Vec<Option<Category>> = group.iter().map(|(i, _)| i.category).collect();
        match kind {
            TaskKind::ClassifyOvr | TaskKind::Nspp => {
                let mut ps = Vec::with_capacity(group.len());
                let mut ts = Vec::with_capacity(group.len());
                for (inst, pred) in &group {
                    ps.push(decode_bool(inst, pred)?);
                    let TaskTarget::Bool(t) = inst.target else {
                        return Err(bad(inst, "expected a boolean target"));
                    };
                    ts.push(t);
                }
                reports.push(sliced_report("accuracy", &cats, |idx| {
                    accuracy(&gather(&ps, idx), &gather(&ts, idx))
                })?);
            }
            TaskKind::ClassifyMulti => {
                let mut ps = Vec::with_capacity(group.len());
                let mut ts = Vec::with_capacity(group.len());
                for (inst, pred) in &group {
                    ps.push(decode_labels(inst, first_candidate(inst, pred)?)?);
                    let TaskTarget::Labels(t) = &inst.target else {
                        return Err(bad(inst, "expected a label-set target"));
                    };
                    ts.push(t.clone());
                }
                let labels: Vec<Category> = Category::ALL
                    .into_iter()
                    .filter(|c| ps.iter().chain(&ts).any(|s| s.contains(c)))
                    .collect();
                let value = macro_f1(&ps, &ts, &labels)?;
                let mut per_category = BTreeMap::new();
                for &label in &labels {
                    let n = ts.iter().filter(|t| t.contains(&label)).count();
                    per_category.insert(label, CategoryScore { value: class_f1(&ps, &ts, label), n });
                }
                reports.push(MetricReport {
                    metric: "macro_f1".into(),
                    value,
                    n: group.len(),
                    per_category: Some(per_category),
                });
            }
            TaskKind::Continuation => {
                let mut firsts = Vec::with_capacity(group.len());
                let mut truths = Vec::with_capacity(group.len());
                let mut minima = Vec::with_capacity(group.len());
                for (inst, pred) in &group {
                    let TaskTarget::Value(t) = &inst.target else {
                        return Err(bad(inst, "expected a value target"));
                    };
                    let candidates = decode_values(inst, pred, k)?;
                    let lists: Vec<Vec<BigInt>> =
                        candidates.iter().map(|v| vec![v.clone()]).collect();
                    minima.push(top_k_rmse(&lists, std::slice::from_ref(t))?);
                    firsts.push(candidates.into_iter().next().unwrap());
                    truths.push(t.clone());
                }
                reports.push(sliced_report("rmsle", &cats, |idx| {
                    rmsle(&gather(&firsts, idx), &gather(&truths, idx))
                })?);
                reports.push(sliced_report("top_k_rmse", &cats, |idx| mean(&gather(&minima, idx)))?);
            }
            TaskKind::Unmasking => {
                let mut minima = Vec::with_capacity(group.len());
                for (inst, pred) in &group {
                    let TaskTarget::Masked(pairs) = &inst.target else {
                        return Err(bad(inst, "expected masked-pair targets"));
                    };
                    let truth: Vec<BigInt> = pairs.iter().map(|(_, v)| v.clone()).collect();
                    let candidates = decode_value_lists(inst, pred, k, truth.len())?;
                    minima.push(top_k_rmse(&candidates, &truth)?);
                }
                reports.push(sliced_report("top_k_rmse", &cats, |idx| mean(&gather(&minima, idx)))?);
            }
            TaskKind::Similarity => {
                let mut rankings = Vec::with_capacity(group.len());
                let mut truths = Vec::with_capacity(group.len());
                for (inst, pred) in &group {
                    if pred.candidates.is_empty() {
                        return Err(MetricError::NoCandidates);
                    }
                    let mut ranking = Vec::with_capacity(pred.candidates.len());
                    for c in &pred.candidates {
                        ranking.push(decode_label(inst, c)?);
                    }
                    rankings.push(ranking);
                    let TaskTarget::Labels(t) = &inst.target else {
                        return Err(bad(inst, "expected a label-set target"));
                    };
                    truths.push(t.clone());
                }
                reports.push(sliced_report("recall_at_k", &cats, |idx| {
                    recall_at_k(&gather(&rankings, idx), &gather(&truths, idx), k)
                })?);
            }
        }
    }
    Ok(reports)
}

fn check_lengths(left: usize, right: usize) -> Result<(), MetricError> {
    if left != right {
        return Err(MetricError::LengthMismatch { left, right });
    }
    Ok(())
}

fn mean(values: &[f64]) -> Result<f64, MetricError> {
    if values.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

fn gather<T: Clone>(values: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| values[i].clone()).collect()
}

/// Build one report: the metric over all instances, plus the same metric
/// restricted to each category present.
fn sliced_report<F>(
    metric: &str,
    cats: &[Option<Category>],
    f: F,
) -> Result<MetricReport, MetricError>
where
    F: Fn(&[usize]) -> Result<f64, MetricError>,
{
    let all: Vec<usize> = (0..cats.len()).collect();
    let value = f(&all)?;
    let present: BTreeSet<Category> = cats.iter().flatten().copied().collect();
    let mut per_category = BTreeMap::new();
    for c in present {
        let idx: Vec<usize> =
            (0..cats.len()).filter(|&i| cats[i] == Some(c)).collect();
        per_category.insert(c, CategoryScore { value: f(&idx)?, n: idx.len() });
    }
    Ok(MetricReport {
        metric: metric.into(),
        value,
        n: cats.len(),
        per_category: if per_category.is_empty() { None } else { Some(per_category) },
    })
}

fn bad(inst: &TaskInstance, reason: &str) -> MetricError {
    MetricError::BadCandidate { id: inst.id.clone(), reason: reason.to_string() }
}

fn first_candidate<'a>(
    inst: &TaskInstance,
    pred: &'a PredictionRecord,
) -> Result<&'a serde_json::Value, MetricError> {
    pred.candidates.first().ok_or_else(|| {
        MetricError::BadCandidate { id: inst.id.clone(), reason: "no candidates".into() }
    })
}

fn decode_bool(inst: &TaskInstance, pred: &PredictionRecord) -> Result<bool, MetricError> {
    first_candidate(inst, pred)?.as_bool().ok_or_else(|| bad(inst, "expected a boolean"))
}

fn decode_label(inst: &TaskInstance, v: &serde_json::Value) -> Result<Category, MetricError> {
    serde_json::from_value(v.clone()).map_err(|e| bad(inst, &format!("bad label: {e}")))
}

fn decode_labels(
    inst: &TaskInstance,
    v: &serde_json::Value,
) -> Result<BTreeSet<Category>, MetricError> {
    let arr = v.as_array().ok_or_else(|| bad(inst, "expected an array of labels"))?;
    arr.iter().map(|l| decode_label(inst, l)).collect()
}

fn decode_value(inst: &TaskInstance, v: &serde_json::Value) -> Result<BigInt, MetricError> {
    if let Some(s) = v.as_str() {
        return BigInt::from_str(s).map_err(|e| bad(inst, &format!("bad integer: {e}")));
    }
    if let Some(i) = v.as_i64() {
        return Ok(BigInt::from(i));
    }
    Err(bad(inst, "expected a decimal string or integer"))
}

/// Up to k single values, at least one.
fn decode_values(
    inst: &TaskInstance,
    pred: &PredictionRecord,
    k: usize,
) -> Result<Vec<BigInt>, MetricError> {
    if pred.candidates.is_empty() {
        return Err(MetricError::NoCandidates);
    }
    pred.candidates.iter().take(k).map(|c| decode_value(inst, c)).collect()
}

/// Up to k value lists of the given length, at least one.
fn decode_value_lists(
    inst: &TaskInstance,
    pred: &PredictionRecord,
    k: usize,
    len: usize,
) -> Result<Vec<Vec<BigInt>>, MetricError> {
    if pred.candidates.is_empty() {
        return Err(MetricError::NoCandidates);
    }
    let mut lists = Vec::new();
    for c in pred.candidates.iter().take(k) {
        let arr = c.as_array().ok_or_else(|| bad(inst, "expected an array of values"))?;
        if arr.len() != len {
            return Err(bad(inst, &format!("expected {len} values, got {}", arr.len())));
        }
        lists.push(arr.iter().map(|v| decode_value(inst, v)).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(lists)
}
