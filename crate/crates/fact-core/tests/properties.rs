//! Property tests for the structural invariants: parser round-trips,
//! evaluator equivalence against the naive interpreter, sampling budget
//! laws, split apportionment, task balance, and metric oracle agreement.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;

use fact_core::annotate::{
    aggregate, degree_by_divided_differences, Aggregator, Score, Verdict,
};
use fact_core::expr::{eval, parse, EvalLimits, Expr};
use fact_core::grammar::{
    builtin_grammar, generate, target_length, GenConfig, BUDGET_SLACK,
};
use fact_core::metrics::{accuracy, macro_f1, recall_at_k, rmsle, top_k_rmse};
use fact_core::oracle::{
    naive_accuracy, naive_eval, naive_macro_f1, naive_recall_at_k, naive_rmsle, naive_top_k_rmse,
};
use fact_core::record::{Category, SequenceRecord, Source};
use fact_core::tasks::{
    build_nspp, build_ovr, build_unmasking, split, GapPolicy, SplitSpec, TaskTarget,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn boxed(e: Expr) -> Box<Expr> {
    Box::new(e)
}

/// Canonical expressions only: numeric literals go through `Expr::number`
/// so the parse round-trip is exact.
fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        2 => Just(Expr::Var),
        2 => (0u8..=9).prop_map(Expr::Const),
        1 => (10u64..1_000_000).prop_map(|v| Expr::number(BigUint::from(v))),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(boxed(a), boxed(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(boxed(a), boxed(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mult(boxed(a), boxed(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Pow(boxed(a), boxed(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mod(boxed(a), boxed(b))),
            inner.clone().prop_map(|a| Expr::PrimeIdx(boxed(a))),
            inner.clone().prop_map(|a| Expr::SinPi(boxed(a))),
            inner.clone().prop_map(|a| Expr::CosPi(boxed(a))),
        ]
    })
}

fn arb_root() -> impl Strategy<Value = Expr> {
    prop_oneof![
        4 => arb_expr(),
        1 => (arb_expr(), 1u64..12).prop_map(|(e, k)| Expr::PeriodicWrap(boxed(e), k)),
    ]
}

proptest! {
    #[test]
    fn parse_round_trips_rendered_expressions(e in arb_root()) {
        prop_assert!(e.is_valid());
        let rendered = e.to_string();
        let back = parse(&rendered).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn evaluators_agree_on_values_and_error_kinds(e in arb_root(), x in -12i64..=12) {
        // A small cap makes overflow a common, exercised path.
        let limits = EvalLimits { max_digits: 30, max_prime_index: 500 };
        let x = BigInt::from(x);
        let fast = eval(&e, &x, &limits);
        let naive = naive_eval(&e, &x, &limits);
        match (fast, naive) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(a), Err(b)) => prop_assert_eq!(a.kind(), b),
            (a, b) => prop_assert!(false, "fast {:?} vs naive {:?}", a, b),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampling_spends_almost_the_whole_budget(
        cat_idx in 0usize..Category::GENERATIVE.len(),
        budget in 0u32..40,
        seed in any::<u64>(),
    ) {
        let category = Category::GENERATIVE[cat_idx];
        let grammar = builtin_grammar(category).unwrap();
        let min = grammar.min_completion(grammar.start());
        let budget = budget.max(min);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sampled = grammar.sample_formula(budget, &mut rng).unwrap();
        prop_assert!(sampled.expansions <= budget);
        prop_assert!(sampled.expansions + BUDGET_SLACK >= budget.max(min));
        prop_assert!(sampled.expr.is_valid());
    }

    #[test]
    fn schedule_is_monotone_with_exact_endpoints(
        total in 2usize..5000,
        len_min in 2u32..10,
        span in 0u32..30,
    ) {
        let len_max = len_min + span;
        prop_assert_eq!(target_length(0, total, len_min, len_max), len_min);
        prop_assert_eq!(target_length(total - 1, total, len_min, len_max), len_max);
        let mut prev = len_min;
        for i in 0..total {
            let t = target_length(i, total, len_min, len_max);
            prop_assert!(t >= prev && t <= len_max);
            prev = t;
        }
    }

    #[test]
    fn periodic_sequences_repeat_with_their_period(seed in any::<u64>()) {
        let config = GenConfig { count: 6, terms_per_sequence: 24, seed, ..GenConfig::default() };
        let out = generate(Category::Periodic, &config).unwrap();
        for r in &out.records {
            let formula = parse(r.formula.as_ref().unwrap()).unwrap();
            let Expr::PeriodicWrap(_, k) = formula else {
                prop_assert!(false, "periodic formulas wrap at the root");
                return Ok(());
            };
            let k = k as usize;
            for (i, v) in r.values.iter().enumerate() {
                prop_assert_eq!(v, &r.values[i % k]);
            }
        }
    }
}

fn synth_record(i: usize, levels: &[(Category, u8)], len: usize) -> SequenceRecord {
    let mut r = SequenceRecord {
        id: format!("synth:test:{i:06}"),
        source: Source::Synth,
        values: (0..len as i64).map(BigInt::from).collect(),
        formula: None,
        formula_length: None,
        categories: BTreeMap::new(),
        offset: 0,
        bounded_by: None,
    };
    for &(c, l) in levels {
        r.set_level(c, l);
    }
    r
}

fn arb_corpus() -> impl Strategy<Value = Vec<SequenceRecord>> {
    let levels = proptest::collection::vec(
        (0usize..Category::ALL.len(), 0u8..=4),
        0..3,
    );
    proptest::collection::vec((levels, 4usize..40), 3..60).prop_map(|specs| {
        specs
            .into_iter()
            .enumerate()
            .map(|(i, (levels, len))| {
                let levels: Vec<(Category, u8)> =
                    levels.into_iter().map(|(ci, l)| (Category::ALL[ci], l)).collect();
                synth_record(i, &levels, len)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_keeps_every_stratum_within_one_of_its_share(
        corpus in arb_corpus(),
        seed in any::<u64>(),
    ) {
        let mut records = corpus;
        let stratum_of: BTreeMap<String, String> = records
            .iter()
            .map(|r| {
                let cats: Vec<&str> = r.categories_at_least(3).iter().map(|c| c.name()).collect();
                let key = if cats.is_empty() { "none".into() } else { cats.join("+") };
                (r.id.clone(), key)
            })
            .collect();
        let n_in = records.len();
        records.push(SequenceRecord {
            id: "A000001".into(),
            source: Source::Oeis,
            values: vec![BigInt::from(1)],
            formula: None,
            formula_length: None,
            categories: BTreeMap::new(),
            offset: 0,
            bounded_by: None,
        });
        let spec = SplitSpec { seed, ..SplitSpec::default() };
        let out = split(records, &spec).unwrap();

        let mut seen = BTreeSet::new();
        let parts = [(&out.train, 9.0), (&out.val, 1.0), (&out.test_synth, 1.0)];
        let mut stratum_sizes: BTreeMap<&str, usize> = BTreeMap::new();
        for id in stratum_of.keys() {
            *stratum_sizes.entry(stratum_of[id].as_str()).or_insert(0) += 1;
        }
        for (part, weight) in parts {
            let mut per_stratum: BTreeMap<&str, usize> = BTreeMap::new();
            for r in part.iter() {
                prop_assert!(seen.insert(r.id.clone()), "record assigned twice");
                *per_stratum.entry(stratum_of[&r.id].as_str()).or_insert(0) += 1;
            }
            for (stratum, &total) in &stratum_sizes {
                let got = per_stratum.get(stratum).copied().unwrap_or(0) as f64;
                let exact = total as f64 * weight / 11.0;
                prop_assert!(
                    (got - exact).abs() < 1.0 + 1e-9,
                    "stratum {} part weight {}: got {} want ~{}",
                    stratum, weight, got, exact
                );
            }
        }
        prop_assert_eq!(seen.len(), n_in);
        prop_assert_eq!(out.test_oeis.len(), 1);
    }

    #[test]
    fn ovr_outputs_are_balanced_and_windowed(
        corpus in arb_corpus(),
        seed in any::<u64>(),
    ) {
        let window = 4;
        if let Ok(instances) = build_ovr(&corpus, Category::Polynomial, window, None, seed) {
            let pos = instances.iter().filter(|i| i.target == TaskTarget::Bool(true)).count();
            prop_assert_eq!(2 * pos, instances.len());
            for inst in &instances {
                prop_assert_eq!(inst.input.len(), window);
                let rid = inst.id.rsplit(':').next().unwrap();
                let record = corpus.iter().find(|r| r.id.ends_with(rid)).unwrap();
                let level = record.level(Category::Polynomial);
                prop_assert!(level != 2, "level-2 records are excluded");
                prop_assert_eq!(inst.target == TaskTarget::Bool(true), level >= 3);
            }
        }
    }

    #[test]
    fn nspp_outputs_are_balanced_with_no_self_pairs(
        corpus in arb_corpus(),
        seed in any::<u64>(),
    ) {
        let window = 2;
        if let Ok(instances) = build_nspp(&corpus, window, GapPolicy::Random, seed, None) {
            let pos = instances.iter().filter(|i| i.target == TaskTarget::Bool(true)).count();
            prop_assert_eq!(2 * pos, instances.len());
            for inst in instances.iter().filter(|i| i.target == TaskTarget::Bool(false)) {
                let rid = &inst.id["nspp:".len()..inst.id.len() - ":neg".len()];
                let record = corpus.iter().find(|r| r.id == rid).unwrap();
                let true_s2: Vec<_> =
                    record.values[window..2 * window].iter().cloned().map(Some).collect();
                prop_assert_ne!(&inst.input[window..], &true_s2[..]);
            }
        }
    }

    #[test]
    fn unmasking_always_masks_inside_the_window(
        corpus in arb_corpus(),
        seed in any::<u64>(),
        prob in 0.05f64..0.9,
    ) {
        let window = 4;
        if let Ok(instances) = build_unmasking(&corpus, window, prob, seed, None) {
            for inst in &instances {
                prop_assert!(!inst.mask_positions.is_empty());
                prop_assert!(inst.mask_positions.iter().all(|&p| p < window));
                for (i, v) in inst.input.iter().enumerate() {
                    prop_assert_eq!(v.is_none(), inst.mask_positions.contains(&i));
                }
            }
        }
    }
}

fn arb_verdicts() -> impl Strategy<Value = Vec<Score>> {
    let score = prop_oneof![
        Just(Score::StrongNo),
        Just(Score::WeakNo),
        Just(Score::Inconclusive),
        Just(Score::WeakYes),
        Just(Score::StrongYes),
    ];
    proptest::collection::vec(score, 1..6)
}

fn score_from_level(l: u8) -> Score {
    match l {
        0 => Score::StrongNo,
        1 => Score::WeakNo,
        2 => Score::Inconclusive,
        3 => Score::WeakYes,
        _ => Score::StrongYes,
    }
}

proptest! {
    #[test]
    fn aggregation_is_monotone_in_each_verdict(
        scores in arb_verdicts(),
        raise_idx in any::<proptest::sample::Index>(),
    ) {
        let to_verdicts = |ss: &[Score]| -> Vec<Verdict> {
            ss.iter().map(|&s| Verdict::new(s, "test")).collect()
        };
        let base = aggregate(&to_verdicts(&scores), Aggregator::ConfidentMaxConflictDamping).unwrap();
        let i = raise_idx.index(scores.len());
        for raised_level in scores[i].level()..=4 {
            let mut raised = scores.clone();
            raised[i] = score_from_level(raised_level);
            let after =
                aggregate(&to_verdicts(&raised), Aggregator::ConfidentMaxConflictDamping).unwrap();
            prop_assert!(
                after >= base,
                "raising verdict {} from {:?} to {:?} lowered {} -> {}",
                i, scores[i], raised[i], base, after
            );
        }
    }

    #[test]
    fn divided_differences_find_the_true_degree(
        coeffs in proptest::collection::vec(-9i64..=9, 1..6),
        lead in prop_oneof![Just(-3i64), Just(-1), Just(1), Just(2), Just(5)],
    ) {
        let degree = coeffs.len();
        let n = degree + 8;
        let values: Vec<BigInt> = (0..n as i64)
            .map(|x| {
                let mut acc = BigInt::from(lead);
                for &c in coeffs.iter().rev() {
                    acc = acc * x + c;
                }
                acc
            })
            .collect();
        let found = degree_by_divided_differences(&values, 10).unwrap();
        prop_assert_eq!(found, Some(degree));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn metric_implementations_match_the_naive_oracle(
        pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..40),
        values in proptest::collection::vec((-1_000_000i64..1_000_000, -1_000_000i64..1_000_000), 1..40),
        label_rows in proptest::collection::vec(
            (0u16..1024, 0u16..1024, 0usize..Category::ALL.len()),
            1..30,
        ),
        k in 1usize..5,
    ) {
        let (ps, ts): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
        prop_assert_eq!(accuracy(&ps, &ts).unwrap(), naive_accuracy(&ps, &ts));

        let preds: Vec<BigInt> = values.iter().map(|&(p, _)| BigInt::from(p)).collect();
        let truths: Vec<BigInt> = values.iter().map(|&(_, t)| BigInt::from(t)).collect();
        let fast = rmsle(&preds, &truths).unwrap();
        prop_assert!((fast - naive_rmsle(&preds, &truths)).abs() <= 1e-12);

        let candidates = vec![preds.clone(), truths.iter().map(|t| t + 1).collect()];
        let fast = top_k_rmse(&candidates, &truths).unwrap();
        prop_assert!((fast - naive_top_k_rmse(&candidates, &truths)).abs() <= 1e-12);

        let mask = |bits: u16| -> BTreeSet<Category> {
            Category::ALL
                .iter()
                .enumerate()
                .filter(|(i, _)| bits & (1 << i) != 0)
                .map(|(_, &c)| c)
                .collect()
        };
        let pred_sets: Vec<BTreeSet<Category>> = label_rows.iter().map(|&(p, _, _)| mask(p)).collect();
        let truth_sets: Vec<BTreeSet<Category>> = label_rows.iter().map(|&(_, t, _)| mask(t)).collect();
        let labels = Category::ALL;
        let fast = macro_f1(&pred_sets, &truth_sets, &labels).unwrap();
        prop_assert!((fast - naive_macro_f1(&pred_sets, &truth_sets, &labels)).abs() <= 1e-12);

        let rankings: Vec<Vec<Category>> = label_rows
            .iter()
            .map(|&(_, _, start)| {
                (0..Category::ALL.len())
                    .map(|j| Category::ALL[(start + j) % Category::ALL.len()])
                    .collect()
            })
            .collect();
        let fast = recall_at_k(&rankings, &truth_sets, k).unwrap();
        prop_assert_eq!(fast, naive_recall_at_k(&rankings, &truth_sets, k));
    }
}
