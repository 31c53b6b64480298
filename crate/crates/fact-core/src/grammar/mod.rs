//! Per-category context-free grammars over the expression language, and the
//! budgeted derivation sampler that drives corpus generation.
//!
//! # Derivation length
//!
//! The complexity of a formula is the number of non-terminal expansions in
//! its derivation. `Var`, `Const` and `ConstPos` are logical terminals (they
//! only pick a leaf token) and cost nothing; every other rewrite costs one.
//! Under this counting the minimal derivation from the arithmetic root `N`
//! costs exactly 2 (`N -> T -> x`), which is the default schedule floor.
//!
//! # Budgeted sampling
//!
//! [`Grammar::sample_formula`] performs a leftmost derivation under a hard
//! expansion budget. At each step it chooses uniformly among the alternatives
//! that (a) still fit the budget after accounting for the minimal completion
//! of every pending non-terminal, and (b) keep the budget reachable, i.e. the
//! maximal completion of the pending sentential form (saturating to infinity
//! through recursive rules) can still absorb all but [`BUDGET_SLACK`] of the
//! remaining budget. If no alternative satisfies both, it falls back to one
//! of minimal completion size. The result always lands in
//! `[max(1, budget - BUDGET_SLACK), budget]` expansions.
//!
//! # Length schedule
//!
//! [`target_length`] maps slot `i` of `total` to a budget via
//! `len_min + floor((len_max - len_min) * ln(total / (total - i)) / ln(total))`.
//! The curve starts at `len_min` (ln 1 = 0), reaches `len_max` exactly at the
//! final slot, and is monotone; because it stays flat for most of the range
//! and only climbs near the end, short formulas dominate the corpus while the
//! longest budgets remain represented.

mod generate;

pub use generate::{default_start, generate, label_meta, GenConfig, GenError, Generated};

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;
use thiserror::Error;

use crate::expr::Expr;
use crate::record::Category;

/// Tolerated shortfall below the budget: exact-length derivations are not
/// always reachable, and accepting `[budget - 2, budget]` avoids rejection
/// storms without visibly distorting the length distribution.
pub const BUDGET_SLACK: u32 = 2;

/// Grammar non-terminals. One shared alphabet serves all category grammars;
/// each grammar simply wires a subset together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Nt {
    /// Arithmetic root.
    N,
    /// Leaf term: a variable or a digit.
    T,
    Add,
    Sub,
    Mult,
    Pow,
    Modulo,
    Prime,
    Sin,
    Cos,
    /// Decimal literal built digit by digit.
    NConst,
    /// Digit 1..=9 (leading position).
    ConstPos,
    /// Digit 0..=9.
    Const,
    Var,
    /// Root wrapper for the periodic category.
    Periodic,
    /// Period constant of the periodic wrapper.
    K,
}

/// Expansion cost of rewriting a non-terminal: logical terminals are free.
pub fn expansion_cost(nt: Nt) -> u32 {
    match nt {
        Nt::Var | Nt::Const | Nt::ConstPos => 0,
        _ => 1,
    }
}

/// How a production assembles its value from its children's fragments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Build {
    /// Single child, passed through unchanged.
    Forward,
    /// Digit-string child becomes a constant expression.
    NumberExpr,
    /// Single-digit child becomes `Const`.
    DigitExpr,
    Add,
    Sub,
    Mult,
    /// `(N ** NConst)`: exponent is a literal (polynomial grammar).
    PowConstExp,
    /// `(N ** N)`.
    PowExprExp,
    Mod,
    /// `prime(x)`, no children.
    PrimeOfX,
    Sin,
    Cos,
    VarExpr,
    /// Leaf digit.
    Digit(u8),
    /// `(ConstPos NConst)`: digit concatenation.
    DigitsConcat,
    /// `periodic(N, K)`.
    Periodic,
}

/// One production alternative: the non-terminals on its right-hand side (in
/// order) plus the assembly rule. Terminal symbols are implicit in `build`.
#[derive(Debug, Clone)]
pub struct Production {
    pub rhs: Vec<Nt>,
    build: Build,
}

impl Production {
    fn new(rhs: Vec<Nt>, build: Build) -> Self {
        Production { rhs, build }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("budget {budget} is below the grammar's minimal completion size {min}")]
    BudgetInfeasible { budget: u32, min: u32 },
    #[error("category {0} is a meta-category and has no grammar")]
    MetaCategoryHasNoGrammar(Category),
    #[error("non-terminal {0:?} appears on a right-hand side but has no productions")]
    MissingProductions(Nt),
    #[error("non-terminal {0:?} cannot derive a finite terminal string")]
    Nonproductive(Nt),
}

/// A sampled derivation: the expression and the number of non-terminal
/// expansions spent deriving it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sampled {
    pub expr: Expr,
    pub expansions: u32,
}

/// A context-free grammar over [`Expr`] with precomputed minimal and maximal
/// completion sizes per non-terminal.
#[derive(Debug, Clone)]
pub struct Grammar {
    pub category: Category,
    start: Nt,
    prods: BTreeMap<Nt, Vec<Production>>,
    min_size: BTreeMap<Nt, u32>,
    /// `None` means unbounded (the non-terminal reaches a recursive rule).
    max_size: BTreeMap<Nt, Option<u32>>,
}

impl Grammar {
    fn new(category: Category, start: Nt, prods: BTreeMap<Nt, Vec<Production>>) -> Result<Grammar, GrammarError> {
        for alts in prods.values() {
            for alt in alts {
                for &child in &alt.rhs {
                    if !prods.contains_key(&child) {
                        return Err(GrammarError::MissingProductions(child));
                    }
                }
            }
        }
        if !prods.contains_key(&start) {
            return Err(GrammarError::MissingProductions(start));
        }
        let min_size = compute_min_sizes(&prods)?;
        let max_size = compute_max_sizes(&prods);
        Ok(Grammar {
            category,
            start,
            prods,
            min_size,
            max_size,
        })
    }

    pub fn start(&self) -> Nt {
        self.start
    }

    pub fn productions(&self, nt: Nt) -> &[Production] {
        self.prods.get(&nt).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Minimal number of expansions needed to finish a derivation from `nt`.
    pub fn min_completion(&self, nt: Nt) -> u32 {
        self.min_size[&nt]
    }

    /// Maximal number of expansions a derivation from `nt` can spend, `None`
    /// if unbounded.
    pub fn max_completion(&self, nt: Nt) -> Option<u32> {
        self.max_size[&nt]
    }

    /// Samples one derivation with at most `budget` expansions (and at least
    /// `budget - BUDGET_SLACK` where the grammar permits).
    pub fn sample_formula<R: Rng>(&self, budget: u32, rng: &mut R) -> Result<Sampled, GrammarError> {
        let min = self.min_completion(self.start);
        if budget < min {
            return Err(GrammarError::BudgetInfeasible { budget, min });
        }
        let mut remaining = budget;
        let frag = self.expand(self.start, &mut remaining, 0, Some(0), rng);
        let expr = match frag {
            Frag::E(e) => e,
            Frag::D(digits) => Expr::number(digits.parse::<BigUint>().expect("digit string")),
        };
        Ok(Sampled {
            expr,
            expansions: budget - remaining,
        })
    }

    fn alt_min(&self, nt: Nt, alt: &Production) -> u32 {
        expansion_cost(nt) + alt.rhs.iter().map(|c| self.min_size[c]).sum::<u32>()
    }

    fn alt_max(&self, nt: Nt, alt: &Production) -> Option<u32> {
        let mut total = expansion_cost(nt);
        for c in &alt.rhs {
            total = total.checked_add(self.max_size[c]?)?;
        }
        Some(total)
    }

    fn expand<R: Rng>(
        &self,
        nt: Nt,
        remaining: &mut u32,
        reserved_min: u32,
        reserved_max: Option<u32>,
        rng: &mut R,
    ) -> Frag {
        let alts = &self.prods[&nt];
        let mut feasible = Vec::with_capacity(alts.len());
        for (i, alt) in alts.iter().enumerate() {
            // Fits: this choice plus the cheapest completion of everything
            // else pending stays within the budget.
            if self.alt_min(nt, alt) + reserved_min > *remaining {
                continue;
            }
            // Keeps the budget reachable: everything pending can still absorb
            // all but BUDGET_SLACK of the remaining budget.
            let total_max = match (self.alt_max(nt, alt), reserved_max) {
                (Some(a), Some(r)) => a.checked_add(r),
                _ => None,
            };
            if let Some(tm) = total_max {
                if tm.saturating_add(BUDGET_SLACK) < *remaining {
                    continue;
                }
            }
            feasible.push(i);
        }
        let chosen = if feasible.is_empty() {
            // No alternative is both affordable and budget-filling: take a
            // minimal-completion one (always affordable, see module docs).
            let best = alts.iter().map(|a| self.alt_min(nt, a)).min().expect("non-empty alternatives");
            let mins: Vec<usize> = alts
                .iter()
                .enumerate()
                .filter(|(_, a)| self.alt_min(nt, *a) == best)
                .map(|(i, _)| i)
                .collect();
            mins[rng.gen_range(0..mins.len())]
        } else {
            feasible[rng.gen_range(0..feasible.len())]
        };
        let alt = &alts[chosen];
        *remaining = remaining.saturating_sub(expansion_cost(nt));

        let mut frags = Vec::with_capacity(alt.rhs.len());
        for (j, &child) in alt.rhs.iter().enumerate() {
            let rest = &alt.rhs[j + 1..];
            let rest_min: u32 = rest.iter().map(|c| self.min_size[c]).sum::<u32>() + reserved_min;
            let rest_max = reserved_max.and_then(|base| {
                rest.iter()
                    .try_fold(base, |acc, c| self.max_size[c].and_then(|m| acc.checked_add(m)))
            });
            frags.push(self.expand(child, remaining, rest_min, rest_max, rng));
        }
        build_frag(alt.build, frags)
    }
}

/// Intermediate derivation value: an expression or a raw digit string.
enum Frag {
    E(Expr),
    D(String),
}

impl Frag {
    fn expr(self) -> Expr {
        match self {
            Frag::E(e) => e,
            Frag::D(d) => Expr::number(d.parse::<BigUint>().expect("digit string")),
        }
    }

    fn digits(self) -> String {
        match self {
            Frag::D(d) => d,
            Frag::E(_) => unreachable!("expression fragment where digits were expected"),
        }
    }
}

fn build_frag(build: Build, mut frags: Vec<Frag>) -> Frag {
    let mut take = |i: usize| std::mem::replace(&mut frags[i], Frag::D(String::new()));
    match build {
        Build::Forward => take(0),
        Build::NumberExpr => {
            let digits = take(0).digits();
            Frag::E(Expr::number(digits.parse::<BigUint>().expect("digit string")))
        }
        Build::DigitExpr => {
            let digits = take(0).digits();
            Frag::E(Expr::Const(digits.parse::<u8>().expect("single digit")))
        }
        Build::Add => {
            let (l, r) = (take(0).expr(), take(1).expr());
            Frag::E(Expr::Add(Box::new(l), Box::new(r)))
        }
        Build::Sub => {
            let (l, r) = (take(0).expr(), take(1).expr());
            Frag::E(Expr::Sub(Box::new(l), Box::new(r)))
        }
        Build::Mult => {
            let (l, r) = (take(0).expr(), take(1).expr());
            Frag::E(Expr::Mult(Box::new(l), Box::new(r)))
        }
        Build::PowConstExp => {
            let base = take(0).expr();
            let exp = Expr::number(take(1).digits().parse::<BigUint>().expect("digit string"));
            Frag::E(Expr::Pow(Box::new(base), Box::new(exp)))
        }
        Build::PowExprExp => {
            let (l, r) = (take(0).expr(), take(1).expr());
            Frag::E(Expr::Pow(Box::new(l), Box::new(r)))
        }
        Build::Mod => {
            let (l, r) = (take(0).expr(), take(1).expr());
            Frag::E(Expr::Mod(Box::new(l), Box::new(r)))
        }
        Build::PrimeOfX => Frag::E(Expr::PrimeIdx(Box::new(Expr::Var))),
        Build::Sin => Frag::E(Expr::SinPi(Box::new(take(0).expr()))),
        Build::Cos => Frag::E(Expr::CosPi(Box::new(take(0).expr()))),
        Build::VarExpr => Frag::E(Expr::Var),
        Build::Digit(d) => Frag::D(d.to_string()),
        Build::DigitsConcat => {
            let head = take(0).digits();
            let tail = take(1).digits();
            Frag::D(format!("{head}{tail}"))
        }
        Build::Periodic => {
            let body = take(0).expr();
            // Raw period from the derivation; generation clamps it to the
            // configured range, the builder only guarantees validity.
            let k = take(1)
                .digits()
                .parse::<BigUint>()
                .expect("digit string")
                .to_u64()
                .unwrap_or(u64::MAX)
                .max(1);
            Frag::E(Expr::PeriodicWrap(Box::new(body), k))
        }
    }
}

fn compute_min_sizes(prods: &BTreeMap<Nt, Vec<Production>>) -> Result<BTreeMap<Nt, u32>, GrammarError> {
    let mut min: BTreeMap<Nt, Option<u32>> = prods.keys().map(|&nt| (nt, None)).collect();
    loop {
        let mut changed = false;
        for (&nt, alts) in prods {
            for alt in alts {
                let Some(children) = alt.rhs.iter().map(|c| min[c]).collect::<Option<Vec<u32>>>() else {
                    continue;
                };
                let cand = expansion_cost(nt) + children.into_iter().sum::<u32>();
                if min[&nt].map_or(true, |cur| cand < cur) {
                    min.insert(nt, Some(cand));
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    min.into_iter()
        .map(|(nt, v)| v.map(|v| (nt, v)).ok_or(GrammarError::Nonproductive(nt)))
        .collect()
}

fn compute_max_sizes(prods: &BTreeMap<Nt, Vec<Production>>) -> BTreeMap<Nt, Option<u32>> {
    // Transitive reachability between non-terminals.
    let mut reach: BTreeMap<Nt, BTreeSet<Nt>> = prods
        .iter()
        .map(|(&nt, alts)| (nt, alts.iter().flat_map(|a| a.rhs.iter().copied()).collect()))
        .collect();
    loop {
        let mut changed = false;
        for &nt in prods.keys() {
            let step: BTreeSet<Nt> = reach[&nt]
                .iter()
                .flat_map(|c| reach[c].iter().copied())
                .collect();
            let before = reach[&nt].len();
            reach.get_mut(&nt).unwrap().extend(step);
            changed |= reach[&nt].len() != before;
        }
        if !changed {
            break;
        }
    }
    let cyclic: BTreeSet<Nt> = prods.keys().copied().filter(|nt| reach[nt].contains(nt)).collect();

    // A non-terminal is unbounded iff it is cyclic or reaches a cyclic one;
    // the rest form a DAG and get an exact maximum.
    fn bounded_max(
        nt: Nt,
        prods: &BTreeMap<Nt, Vec<Production>>,
        memo: &mut BTreeMap<Nt, u32>,
    ) -> u32 {
        if let Some(&v) = memo.get(&nt) {
            return v;
        }
        let v = prods[&nt]
            .iter()
            .map(|alt| {
                expansion_cost(nt)
                    + alt.rhs.iter().map(|&c| bounded_max(c, prods, memo)).sum::<u32>()
            })
            .max()
            .unwrap_or(0);
        memo.insert(nt, v);
        v
    }

    let mut memo = BTreeMap::new();
    prods
        .keys()
        .map(|&nt| {
            let unbounded = cyclic.contains(&nt) || reach[&nt].iter().any(|c| cyclic.contains(c));
            if unbounded {
                (nt, None)
            } else {
                (nt, Some(bounded_max(nt, prods, &mut memo)))
            }
        })
        .collect()
}

/// Builds the grammar for a generative category.
///
/// All grammars share the arithmetic base `N -> Add | Sub | Mult | Pow |
/// NConst | T`; the polynomial grammar restricts exponents to literals,
/// `prime`/`modulo`/`trigonometric` splice in their extra alternatives, and
/// `periodic` wraps the base in a root `periodic(N, K)`. The `finite`
/// category reuses the plain base here; its per-slot mixture over base
/// grammars and the random cut live in [`generate`].
pub fn builtin_grammar(category: Category) -> Result<Grammar, GrammarError> {
    if category.is_meta() {
        return Err(GrammarError::MetaCategoryHasNoGrammar(category));
    }
    let mut prods: BTreeMap<Nt, Vec<Production>> = BTreeMap::new();

    let mut n_alts = vec![
        Production::new(vec![Nt::Add], Build::Forward),
        Production::new(vec![Nt::Sub], Build::Forward),
        Production::new(vec![Nt::Mult], Build::Forward),
        Production::new(vec![Nt::Pow], Build::Forward),
    ];
    match category {
        Category::Prime => n_alts.push(Production::new(vec![Nt::Prime], Build::Forward)),
        Category::Modulo => n_alts.push(Production::new(vec![Nt::Modulo], Build::Forward)),
        Category::Trigonometric => {
            n_alts.push(Production::new(vec![Nt::Sin], Build::Forward));
            n_alts.push(Production::new(vec![Nt::Cos], Build::Forward));
        }
        _ => {}
    }
    n_alts.push(Production::new(vec![Nt::NConst], Build::NumberExpr));
    n_alts.push(Production::new(vec![Nt::T], Build::Forward));
    prods.insert(Nt::N, n_alts);

    prods.insert(
        Nt::T,
        vec![
            Production::new(vec![Nt::Var], Build::Forward),
            Production::new(vec![Nt::Const], Build::DigitExpr),
        ],
    );
    prods.insert(Nt::Add, vec![Production::new(vec![Nt::N, Nt::N], Build::Add)]);
    prods.insert(Nt::Sub, vec![Production::new(vec![Nt::N, Nt::N], Build::Sub)]);
    prods.insert(Nt::Mult, vec![Production::new(vec![Nt::N, Nt::N], Build::Mult)]);
    let pow = if category == Category::Polynomial {
        Production::new(vec![Nt::N, Nt::NConst], Build::PowConstExp)
    } else {
        Production::new(vec![Nt::N, Nt::N], Build::PowExprExp)
    };
    prods.insert(Nt::Pow, vec![pow]);
    prods.insert(
        Nt::NConst,
        vec![
            Production::new(vec![Nt::ConstPos, Nt::NConst], Build::DigitsConcat),
            Production::new(vec![Nt::Const], Build::Forward),
        ],
    );
    prods.insert(Nt::Var, vec![Production::new(vec![], Build::VarExpr)]);
    prods.insert(Nt::Const, (0..=9).map(|d| Production::new(vec![], Build::Digit(d))).collect());
    prods.insert(Nt::ConstPos, (1..=9).map(|d| Production::new(vec![], Build::Digit(d))).collect());

    match category {
        Category::Prime => {
            prods.insert(Nt::Prime, vec![Production::new(vec![], Build::PrimeOfX)]);
        }
        Category::Modulo => {
            prods.insert(Nt::Modulo, vec![Production::new(vec![Nt::N, Nt::N], Build::Mod)]);
        }
        Category::Trigonometric => {
            prods.insert(Nt::Sin, vec![Production::new(vec![Nt::N], Build::Sin)]);
            prods.insert(Nt::Cos, vec![Production::new(vec![Nt::N], Build::Cos)]);
        }
        _ => {}
    }

    let start = if category == Category::Periodic {
        prods.insert(Nt::Periodic, vec![Production::new(vec![Nt::N, Nt::K], Build::Periodic)]);
        prods.insert(Nt::K, vec![Production::new(vec![Nt::NConst], Build::Forward)]);
        Nt::Periodic
    } else {
        Nt::N
    };

    Grammar::new(category, start, prods)
}

/// Budget for slot `i` of `total` under the logarithmic schedule, clamped to
/// `[len_min, len_max]`. See the module docs for the closed form and why it
/// is short-biased.
pub fn target_length(i: usize, total: usize, len_min: u32, len_max: u32) -> u32 {
    debug_assert!(i < total.max(1));
    if total <= 1 || len_max <= len_min {
        return len_min;
    }
    let total_f = total as f64;
    let frac = (total_f / (total_f - i as f64)).ln() / total_f.ln();
    let len = len_min as f64 + ((len_max - len_min) as f64 * frac).floor();
    (len as u32).clamp(len_min, len_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn builtin_grammars_exist_for_generative_categories() {
        for c in Category::GENERATIVE {
            builtin_grammar(c).unwrap();
        }
        for c in [Category::Increasing, Category::Bounded, Category::Unique] {
            assert!(matches!(
                builtin_grammar(c),
                Err(GrammarError::MetaCategoryHasNoGrammar(_))
            ));
        }
    }

    #[test]
    fn minimal_completions() {
        let g = builtin_grammar(Category::Polynomial).unwrap();
        assert_eq!(g.min_completion(Nt::N), 2);
        assert_eq!(g.min_completion(Nt::T), 1);
        assert_eq!(g.min_completion(Nt::NConst), 1);
        assert_eq!(g.min_completion(Nt::Add), 5);
        assert_eq!(g.min_completion(Nt::Pow), 4);

        let g = builtin_grammar(Category::Periodic).unwrap();
        assert_eq!(g.min_completion(Nt::Periodic), 5);

        let g = builtin_grammar(Category::Prime).unwrap();
        assert_eq!(g.min_completion(Nt::Prime), 1);
    }

    #[test]
    fn max_completions_saturate_on_recursion() {
        let g = builtin_grammar(Category::Polynomial).unwrap();
        assert_eq!(g.max_completion(Nt::T), Some(1));
        assert_eq!(g.max_completion(Nt::Var), Some(0));
        assert_eq!(g.max_completion(Nt::N), None);
        assert_eq!(g.max_completion(Nt::NConst), None);
    }

    #[test]
    fn infeasible_budget_rejected() {
        let g = builtin_grammar(Category::Polynomial).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            g.sample_formula(1, &mut rng).unwrap_err(),
            GrammarError::BudgetInfeasible { budget: 1, min: 2 }
        );
    }

    #[test]
    fn minimal_budget_yields_minimal_formula() {
        let g = builtin_grammar(Category::Polynomial).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let s = g.sample_formula(2, &mut rng).unwrap();
            assert_eq!(s.expansions, 2);
            assert!(
                matches!(s.expr, Expr::Var | Expr::Const(_)),
                "budget 2 must yield a bare term, got {}",
                s.expr
            );
        }
    }

    #[test]
    fn budget_law_holds_across_categories() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for c in Category::GENERATIVE {
            let g = builtin_grammar(c).unwrap();
            let min = g.min_completion(g.start());
            for budget in min..=30 {
                for _ in 0..20 {
                    let s = g.sample_formula(budget, &mut rng).unwrap();
                    assert!(s.expansions <= budget, "{c}: {} > {budget}", s.expansions);
                    assert!(
                        s.expansions + BUDGET_SLACK >= budget.max(min),
                        "{c}: {} too far below {budget}",
                        s.expansions
                    );
                    assert!(s.expr.is_valid(), "{c}: invalid tree {}", s.expr);
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let g = builtin_grammar(Category::Trigonometric).unwrap();
        let one: Vec<String> = {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (0..20).map(|_| g.sample_formula(12, &mut rng).unwrap().expr.to_string()).collect()
        };
        let two: Vec<String> = {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (0..20).map(|_| g.sample_formula(12, &mut rng).unwrap().expr.to_string()).collect()
        };
        assert_eq!(one, two);
    }

    #[test]
    fn schedule_endpoints_and_monotonicity() {
        assert_eq!(target_length(0, 500_000, 2, 20), 2);
        assert_eq!(target_length(499_999, 500_000, 2, 20), 20);
        assert_eq!(target_length(0, 1, 2, 20), 2);
        let mut prev = 0;
        for i in 0..10_000 {
            let t = target_length(i, 10_000, 2, 20);
            assert!((2..=20).contains(&t));
            assert!(t >= prev, "schedule must be monotone");
            prev = t;
        }
    }

    #[test]
    fn schedule_is_short_biased() {
        let lens: Vec<u32> = (0..10_000).map(|i| target_length(i, 10_000, 2, 20)).collect();
        let short = lens.iter().filter(|&&l| l <= 5).count();
        let long = lens.iter().filter(|&&l| l >= 16).count();
        assert!(long >= 1, "long budgets must remain present");
        assert!(short > long, "short {short} must dominate long {long}");
    }
}
