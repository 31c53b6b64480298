//! Reference predictors: a dummy floor and a k-nearest-neighbor model.
//!
//! Both models speak the task-instance format directly and emit prediction
//! records the evaluator understands, so every task kind can run end to end
//! without a learned model. Sequence windows are compared through the same
//! signed log transform the metrics use; raw magnitudes would make
//! Euclidean distance meaningless on exponential data.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::json;
use thiserror::Error;

use crate::metrics::slog;
use crate::record::Category;
use crate::tasks::{PredictionRecord, TaskInstance, TaskKind, TaskTarget};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("model was not fitted for task {0}")]
    Unfitted(TaskKind),
    #[error("training set is empty")]
    EmptyTraining,
    #[error("k = {k} exceeds the {n} training instances for task {task}")]
    KTooLarge { task: TaskKind, k: usize, n: usize },
    #[error("feature length mismatch: expected {expected}, got {got} (instance {id})")]
    FeatureLengthMismatch { id: String, expected: usize, got: usize },
    #[error("bad instance {id}: {reason}")]
    BadInstance { id: String, reason: String },
}

fn bad(id: &str, reason: impl Into<String>) -> BaselineError {
    BaselineError::BadInstance { id: id.to_string(), reason: reason.into() }
}

/// slog features of an input window; masked positions become 0.
fn features(input: &[Option<BigInt>]) -> Vec<f64> {
    input.iter().map(|v| v.as_ref().map_or(0.0, slog)).collect()
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Mean rounded to the nearest integer, halves away from zero.
fn rounded_mean(values: &[BigInt]) -> BigInt {
    let sum: BigInt = values.iter().sum();
    BigRational::new(sum, BigInt::from(values.len())).round().to_integer()
}

fn majority(bools: &[bool]) -> bool {
    2 * bools.iter().filter(|&&b| b).count() >= bools.len()
}

fn expect_bool(inst: &TaskInstance) -> Result<bool, BaselineError> {
    match inst.target {
        TaskTarget::Bool(b) => Ok(b),
        _ => Err(bad(&inst.id, "expected a boolean target")),
    }
}

fn expect_labels(inst: &TaskInstance) -> Result<&BTreeSet<Category>, BaselineError> {
    match &inst.target {
        TaskTarget::Labels(s) => Ok(s),
        _ => Err(bad(&inst.id, "expected a label-set target")),
    }
}

fn expect_value(inst: &TaskInstance) -> Result<&BigInt, BaselineError> {
    match &inst.target {
        TaskTarget::Value(v) => Ok(v),
        _ => Err(bad(&inst.id, "expected a value target")),
    }
}

fn expect_masked(inst: &TaskInstance) -> Result<&[(usize, BigInt)], BaselineError> {
    match &inst.target {
        TaskTarget::Masked(pairs) => Ok(pairs),
        _ => Err(bad(&inst.id, "expected masked-pair targets")),
    }
}

/// Constant predictor: majority class, modal label set, or rounded training
/// mean, depending on the task. The floor every real model must beat.
#[derive(Debug, Default)]
pub struct DummyModel {
    bools: HashMap<TaskKind, bool>,
    label_mode: Option<BTreeSet<Category>>,
    ranked_labels: Option<Vec<Category>>,
    mean_value: Option<BigInt>,
    mean_masked: Option<BigInt>,
    fitted: bool,
}

impl DummyModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fit(&mut self, train: &[TaskInstance]) -> Result<(), BaselineError> {
        if train.is_empty() {
            return Err(BaselineError::EmptyTraining);
        }
        for kind in [TaskKind::ClassifyOvr, TaskKind::Nspp] {
            let targets: Vec<bool> = train
                .iter()
                .filter(|i| i.task == kind)
                .map(expect_bool)
                .collect::<Result<_, _>>()?;
            if !targets.is_empty() {
                self.bools.insert(kind, majority(&targets));
            }
        }

        let mut set_counts: BTreeMap<BTreeSet<Category>, usize> = BTreeMap::new();
        for inst in train.iter().filter(|i| i.task == TaskKind::ClassifyMulti) {
            *set_counts.entry(expect_labels(inst)?.clone()).or_insert(0) += 1;
        }
        self.label_mode =
            set_counts.iter().max_by_key(|(set, n)| (**n, Reverse((*set).clone()))).map(|(s, _)| s.clone());

        let mut label_counts: BTreeMap<Category, usize> = BTreeMap::new();
        for inst in train.iter().filter(|i| i.task == TaskKind::Similarity) {
            for &l in expect_labels(inst)? {
                *label_counts.entry(l).or_insert(0) += 1;
            }
        }
        if !label_counts.is_empty() {
            let mut ranked: Vec<Category> = label_counts.keys().copied().collect();
            ranked.sort_by_key(|c| (Reverse(label_counts[c]), *c));
            self.ranked_labels = Some(ranked);
        }

        let values: Vec<BigInt> = train
            .iter()
            .filter(|i| i.task == TaskKind::Continuation)
            .map(|i| expect_value(i).cloned())
            .collect::<Result<_, _>>()?;
        if !values.is_empty() {
            self.mean_value = Some(rounded_mean(&values));
        }

        let mut masked = Vec::new();
        for inst in train.iter().filter(|i| i.task == TaskKind::Unmasking) {
            masked.extend(expect_masked(inst)?.iter().map(|(_, v)| v.clone()));
        }
        if !masked.is_empty() {
            self.mean_masked = Some(rounded_mean(&masked));
        }

        self.fitted = true;
        Ok(())
    }

    pub fn predict(&self, instances: &[TaskInstance]) -> Result<Vec<PredictionRecord>, BaselineError> {
        let mut out = Vec::with_capacity(instances.len());
        for inst in instances {
            if !self.fitted {
                return Err(BaselineError::Unfitted(inst.task));
            }
            let unfitted = || BaselineError::Unfitted(inst.task);
            let candidates = match inst.task {
                TaskKind::ClassifyOvr | TaskKind::Nspp => {
                    vec![json!(*self.bools.get(&inst.task).ok_or_else(unfitted)?)]
                }
                TaskKind::ClassifyMulti => {
                    let mode = self.label_mode.as_ref().ok_or_else(unfitted)?;
                    vec![serde_json::to_value(mode).expect("labels serialize")]
                }
                TaskKind::Similarity => {
                    let ranked = self.ranked_labels.as_ref().ok_or_else(unfitted)?;
                    ranked.iter().map(|l| serde_json::to_value(l).expect("label serializes")).collect()
                }
                TaskKind::Continuation => {
                    vec![json!(self.mean_value.as_ref().ok_or_else(unfitted)?.to_string())]
                }
                TaskKind::Unmasking => {
                    let v = self.mean_masked.as_ref().ok_or_else(unfitted)?.to_string();
                    vec![json!(vec![v; inst.mask_positions.len()])]
                }
            };
            out.push(PredictionRecord { id: inst.id.clone(), candidates });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
enum Payload {
    Bool(bool),
    Labels(BTreeSet<Category>),
    Value(BigInt),
    /// Full unmasked window, for answering arbitrary mask positions.
    Window(Vec<BigInt>),
}

#[derive(Debug)]
struct KnnEntry {
    id: String,
    features: Vec<f64>,
    payload: Payload,
}

#[derive(Debug)]
struct KindState {
    feature_len: usize,
    entries: Vec<KnnEntry>,
}

/// k-nearest-neighbor predictions under Euclidean distance on slog
/// features. Distance ties break by training instance id, so predictions
/// are deterministic.
#[derive(Debug)]
pub struct KnnModel {
    k: usize,
    kinds: HashMap<TaskKind, KindState>,
}

impl KnnModel {
    pub fn fit(train: &[TaskInstance], k: usize) -> Result<Self, BaselineError> {
        if train.is_empty() {
            return Err(BaselineError::EmptyTraining);
        }
        let mut kinds: HashMap<TaskKind, KindState> = HashMap::new();
        for inst in train {
            let payload = match inst.task {
                TaskKind::ClassifyOvr | TaskKind::Nspp => Payload::Bool(expect_bool(inst)?),
                TaskKind::ClassifyMulti | TaskKind::Similarity => {
                    Payload::Labels(expect_labels(inst)?.clone())
                }
                TaskKind::Continuation => Payload::Value(expect_value(inst)?.clone()),
                TaskKind::Unmasking => Payload::Window(unmask(inst)?),
            };
            let feats = features(&inst.input);
            let state = kinds.entry(inst.task).or_insert_with(|| KindState {
                feature_len: feats.len(),
                entries: Vec::new(),
            });
            if feats.len() != state.feature_len {
                return Err(BaselineError::FeatureLengthMismatch {
                    id: inst.id.clone(),
                    expected: state.feature_len,
                    got: feats.len(),
                });
            }
            state.entries.push(KnnEntry { id: inst.id.clone(), features: feats, payload });
        }
        for (task, state) in &mut kinds {
            if k > state.entries.len() {
                return Err(BaselineError::KTooLarge { task: *task, k, n: state.entries.len() });
            }
            state.entries.sort_by(|a, b| a.id.cmp(&b.id));
        }
        Ok(KnnModel { k, kinds })
    }

    pub fn predict(&self, instances: &[TaskInstance]) -> Result<Vec<PredictionRecord>, BaselineError> {
        // Similarity pools reference sibling records of the same batch;
        // index them once by bare record id.
        let mut batch_index: HashMap<&str, (Vec<f64>, &BTreeSet<Category>)> = HashMap::new();
        for inst in instances.iter().filter(|i| i.task == TaskKind::Similarity) {
            let rid = inst.id.strip_prefix("sim:").unwrap_or(&inst.id);
            let TaskTarget::Labels(labels) = &inst.target else {
                return Err(bad(&inst.id, "expected a label-set target"));
            };
            batch_index.insert(rid, (features(&inst.input), labels));
        }

        let mut out = Vec::with_capacity(instances.len());
        for inst in instances {
            let state = self.kinds.get(&inst.task).ok_or(BaselineError::Unfitted(inst.task))?;
            let query = features(&inst.input);
            if query.len() != state.feature_len {
                return Err(BaselineError::FeatureLengthMismatch {
                    id: inst.id.clone(),
                    expected: state.feature_len,
                    got: query.len(),
                });
            }
            let candidates = match inst.task {
                TaskKind::Similarity => self.rank_pool(inst, &batch_index)?,
                _ => self.from_neighbors(inst, state, &query)?,
            };
            out.push(PredictionRecord { id: inst.id.clone(), candidates });
        }
        Ok(out)
    }

    fn neighbors<'a>(&self, state: &'a KindState, query: &[f64]) -> Vec<&'a KnnEntry> {
        let mut scored: Vec<(f64, &KnnEntry)> =
            state.entries.iter().map(|e| (euclidean(query, &e.features), e)).collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.id.cmp(&b.1.id)));
        scored.into_iter().take(self.k).map(|(_, e)| e).collect()
    }

    fn from_neighbors(
        &self,
        inst: &TaskInstance,
        state: &KindState,
        query: &[f64],
    ) -> Result<Vec<serde_json::Value>, BaselineError> {
        let near = self.neighbors(state, query);
        Ok(match inst.task {
            TaskKind::ClassifyOvr | TaskKind::Nspp => {
                let votes: Vec<bool> = near
                    .iter()
                    .map(|e| match e.payload {
                        Payload::Bool(b) => b,
                        _ => unreachable!("payload fixed per kind at fit"),
                    })
                    .collect();
                vec![json!(majority(&votes))]
            }
            TaskKind::ClassifyMulti => {
                let mut counts: BTreeMap<Category, usize> = BTreeMap::new();
                for e in &near {
                    let Payload::Labels(labels) = &e.payload else { unreachable!() };
                    for &l in labels {
                        *counts.entry(l).or_insert(0) += 1;
                    }
                }
                let winners: BTreeSet<Category> =
                    counts.iter().filter(|(_, &n)| 2 * n > self.k).map(|(&l, _)| l).collect();
                vec![serde_json::to_value(winners).expect("labels serialize")]
            }
            TaskKind::Continuation => near
                .iter()
                .map(|e| {
                    let Payload::Value(v) = &e.payload else { unreachable!() };
                    json!(v.to_string())
                })
                .collect(),
            TaskKind::Unmasking => near
                .iter()
                .map(|e| {
                    let Payload::Window(w) = &e.payload else { unreachable!() };
                    let vals: Vec<String> =
                        inst.mask_positions.iter().map(|&p| w[p].to_string()).collect();
                    json!(vals)
                })
                .collect(),
            TaskKind::Similarity => unreachable!("similarity ranks its pool instead"),
        })
    }

    /// Rank the query's candidate pool by distance and emit each newly seen
    /// label in that order.
    fn rank_pool(
        &self,
        inst: &TaskInstance,
        batch_index: &HashMap<&str, (Vec<f64>, &BTreeSet<Category>)>,
    ) -> Result<Vec<serde_json::Value>, BaselineError> {
        let pool = inst.pool.as_ref().ok_or_else(|| bad(&inst.id, "similarity needs a pool"))?;
        let query = features(&inst.input);
        let mut scored = Vec::with_capacity(pool.len());
        for rid in pool {
            let (feats, labels) = batch_index
                .get(rid.as_str())
                .ok_or_else(|| bad(&inst.id, format!("pool record {rid} not in batch")))?;
            scored.push((euclidean(&query, feats), rid, *labels));
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        let mut ranked = Vec::new();
        let mut seen = BTreeSet::new();
        for (_, _, labels) in scored {
            for &l in labels {
                if seen.insert(l) {
                    ranked.push(serde_json::to_value(l).expect("label serializes"));
                }
            }
        }
        Ok(ranked)
    }
}

/// Reconstruct the full window of an unmasking instance from its input and
/// targets.
fn unmask(inst: &TaskInstance) -> Result<Vec<BigInt>, BaselineError> {
    let pairs = expect_masked(inst)?;
    let mut window: Vec<Option<BigInt>> = inst.input.clone();
    for (p, v) in pairs {
        if *p >= window.len() || window[*p].is_some() {
            return Err(bad(&inst.id, "targets do not match masked positions"));
        }
        window[*p] = Some(v.clone());
    }
    window
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| bad(&inst.id, format!("position {i} has no value"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::Scope;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn bool_inst(id: &str, target: bool, window: &[i64]) -> TaskInstance {
        TaskInstance {
            task: TaskKind::ClassifyOvr,
            id: id.into(),
            scope: Scope::Within,
            category: Some(Category::Polynomial),
            input: window.iter().map(|&v| Some(big(v))).collect(),
            target: TaskTarget::Bool(target),
            mask_positions: vec![],
            pool: None,
        }
    }

    fn cont_inst(id: &str, window: &[i64], target: i64) -> TaskInstance {
        TaskInstance {
            task: TaskKind::Continuation,
            id: id.into(),
            scope: Scope::Across,
            category: None,
            input: window.iter().map(|&v| Some(big(v))).collect(),
            target: TaskTarget::Value(big(target)),
            mask_positions: vec![],
            pool: None,
        }
    }

    #[test]
    fn dummy_predicts_constants() {
        let train = vec![
            cont_inst("cont:a", &[1, 2], 7),
            cont_inst("cont:b", &[3, 4], 7),
            bool_inst("ovr:poly:a", true, &[1, 2]),
            bool_inst("ovr:poly:b", true, &[2, 3]),
            bool_inst("ovr:poly:c", false, &[3, 4]),
        ];
        let mut model = DummyModel::new();
        model.fit(&train).unwrap();
        let preds = model.predict(&train).unwrap();
        assert_eq!(preds[0].candidates[0], json!("7"));
        assert_eq!(preds[2].candidates[0], json!(true), "majority class");
    }

    #[test]
    fn dummy_unfitted_errors() {
        let model = DummyModel::new();
        let err = model.predict(&[cont_inst("cont:a", &[1], 2)]).unwrap_err();
        assert_eq!(err, BaselineError::Unfitted(TaskKind::Continuation));
        let mut model = DummyModel::new();
        assert_eq!(model.fit(&[]).unwrap_err(), BaselineError::EmptyTraining);
    }

    #[test]
    fn dummy_mean_rounds_half_away_from_zero() {
        assert_eq!(rounded_mean(&[big(1), big(2)]), big(2));
        assert_eq!(rounded_mean(&[big(-1), big(-2)]), big(-2));
        assert_eq!(rounded_mean(&[big(1), big(2), big(3)]), big(2));
    }

    #[test]
    fn knn_exact_match_is_nearest() {
        let train = vec![
            cont_inst("cont:a", &[1, 2, 3], 4),
            cont_inst("cont:b", &[10, 20, 30], 40),
            cont_inst("cont:c", &[100, 200, 300], 400),
        ];
        let model = KnnModel::fit(&train, 1).unwrap();
        let preds = model.predict(&[cont_inst("cont:q", &[10, 20, 30], 0)]).unwrap();
        assert_eq!(preds[0].candidates, vec![json!("40")]);
    }

    #[test]
    fn knn_train_equals_test_has_zero_top_k() {
        let train = vec![
            cont_inst("cont:a", &[1, 2, 3], 4),
            cont_inst("cont:b", &[10, 20, 30], 40),
            cont_inst("cont:c", &[100, 200, 300], 400),
        ];
        let model = KnnModel::fit(&train, 3).unwrap();
        let preds = model.predict(&train).unwrap();
        let reports = crate::metrics::evaluate(&train, &preds, 3).unwrap();
        let top_k = reports.iter().find(|r| r.metric == "top_k_rmse").unwrap();
        assert_eq!(top_k.value, 0.0, "truth is among the k candidates");
    }

    #[test]
    fn knn_k_too_large() {
        let train = vec![cont_inst("cont:a", &[1], 2)];
        assert_eq!(
            KnnModel::fit(&train, 5).unwrap_err(),
            BaselineError::KTooLarge { task: TaskKind::Continuation, k: 5, n: 1 }
        );
    }

    #[test]
    fn knn_distance_ties_break_by_id() {
        // Two training rows with identical windows but different targets.
        let train = vec![
            cont_inst("cont:b", &[5, 5], 1),
            cont_inst("cont:a", &[5, 5], 2),
            cont_inst("cont:c", &[9, 9], 3),
        ];
        let model = KnnModel::fit(&train, 1).unwrap();
        let preds = model.predict(&[cont_inst("cont:q", &[5, 5], 0)]).unwrap();
        assert_eq!(preds[0].candidates, vec![json!("2")], "cont:a sorts before cont:b");
    }

    #[test]
    fn knn_unmasking_answers_at_query_positions() {
        let mk = |id: &str, input: &[Option<i64>], pairs: &[(usize, i64)]| TaskInstance {
            task: TaskKind::Unmasking,
            id: id.into(),
            scope: Scope::Across,
            category: None,
            input: input.iter().map(|v| v.map(big)).collect(),
            target: TaskTarget::Masked(pairs.iter().map(|&(p, v)| (p, big(v))).collect()),
            mask_positions: pairs.iter().map(|&(p, _)| p).collect(),
            pool: None,
        };
        let train = vec![mk("mask:a", &[Some(1), None, Some(3)], &[(1, 2)])];
        let model = KnnModel::fit(&train, 1).unwrap();
        let query = mk("mask:q", &[None, Some(2), Some(3)], &[(0, 1)]);
        let preds = model.predict(&[query]).unwrap();
        // Neighbor's full window is [1, 2, 3]; answer at position 0 is 1.
        assert_eq!(preds[0].candidates, vec![json!(["1"])]);
    }

    #[test]
    fn knn_similarity_ranks_pool_labels() {
        let mk = |rid: &str, window: &[i64], label: Category, pool: Option<Vec<&str>>| TaskInstance {
            task: TaskKind::Similarity,
            id: format!("sim:{rid}"),
            scope: Scope::Across,
            category: Some(label),
            input: window.iter().map(|&v| Some(big(v))).collect(),
            target: TaskTarget::Labels([label].into_iter().collect()),
            mask_positions: vec![],
            pool: pool.map(|p| p.iter().map(|s| s.to_string()).collect()),
        };
        let batch = vec![
            mk("q", &[1, 2, 3], Category::Polynomial, Some(vec!["near", "far"])),
            mk("near", &[1, 2, 4], Category::Polynomial, Some(vec!["q", "far"])),
            mk("far", &[900, 900, 900], Category::Periodic, Some(vec!["q", "near"])),
        ];
        let model = KnnModel::fit(&batch, 1).unwrap();
        let preds = model.predict(&batch).unwrap();
        assert_eq!(preds[0].id, "sim:q");
        assert_eq!(preds[0].candidates, vec![json!("polynomial"), json!("periodic")]);
    }
}
