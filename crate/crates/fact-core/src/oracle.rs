//! Naive reference implementations for differential testing.
//!
//! Everything here recomputes a result the slow, obvious way so the test
//! suite can cross-check the production paths against an independent route:
//! the evaluator walks expressions with repeated multiplication and trial
//! division instead of fast exponentiation and a sieve, and the metric
//! reimplementations use different algebraic forms of the same quantities.
//! Production code must never call into this module.

use std::collections::BTreeSet;
use std::sync::Mutex;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::expr::{EvalErrorKind, EvalLimits, Expr};
use crate::record::Category;

/// Naive recursive evaluation of `e` at `x = n`. Matches the production
/// evaluator on both values and error kinds.
pub fn naive_eval(e: &Expr, x: &BigInt, limits: &EvalLimits) -> Result<BigInt, EvalErrorKind> {
    let v = match e {
        Expr::Const(d) => BigInt::from(*d),
        Expr::NConst(v) => BigInt::from(v.clone()),
        Expr::Var => x.clone(),
        Expr::Add(l, r) => naive_eval(l, x, limits)? + naive_eval(r, x, limits)?,
        Expr::Sub(l, r) => naive_eval(l, x, limits)? - naive_eval(r, x, limits)?,
        Expr::Mult(l, r) => naive_eval(l, x, limits)? * naive_eval(r, x, limits)?,
        Expr::Pow(base, exp) => {
            let b = naive_eval(base, x, limits)?;
            let ex = naive_eval(exp, x, limits)?;
            naive_pow(b, ex, limits.max_digits)?
        }
        Expr::Mod(a, m) => {
            let av = naive_eval(a, x, limits)?;
            let mv = naive_eval(m, x, limits)?;
            if mv.is_zero() {
                return Err(EvalErrorKind::ModuloByZero);
            }
            // Euclidean remainder from the truncated one.
            let m_abs = mv.abs();
            let mut r = av % &m_abs;
            if r.is_negative() {
                r += &m_abs;
            }
            r
        }
        Expr::PrimeIdx(arg) => {
            let k = naive_eval(arg, x, limits)?;
            match k.to_usize() {
                Some(i) if i >= 1 && i <= limits.max_prime_index => {
                    BigInt::from(naive_nth_prime(i))
                }
                _ => return Err(EvalErrorKind::PrimeIndexOutOfRange),
            }
        }
        Expr::SinPi(arg) => {
            naive_eval(arg, x, limits)?;
            BigInt::zero()
        }
        Expr::CosPi(arg) => {
            let k = naive_eval(arg, x, limits)?;
            if (k % 2u8).is_zero() {
                BigInt::one()
            } else {
                -BigInt::one()
            }
        }
        Expr::PeriodicWrap(body, k) => {
            if x.is_negative() {
                return Err(EvalErrorKind::DomainError);
            }
            let wrapped = x % BigInt::from(*k);
            naive_eval(body, &wrapped, limits)?
        }
    };
    if over_cap(&v, limits.max_digits) {
        return Err(EvalErrorKind::Overflow);
    }
    Ok(v)
}

/// Digit-count cap check via the decimal rendering: the cap 10^max_digits
/// itself is allowed, anything with more digits (or the same digit count
/// but larger) is not.
fn over_cap(v: &BigInt, max_digits: u32) -> bool {
    let s = v.magnitude().to_string();
    let d = max_digits as usize;
    if s.len() <= d {
        return false;
    }
    if s.len() > d + 1 {
        return true;
    }
    !(s.starts_with('1') && s[1..].bytes().all(|b| b == b'0'))
}

fn naive_pow(base: BigInt, exp: BigInt, max_digits: u32) -> Result<BigInt, EvalErrorKind> {
    if exp.is_negative() {
        return Err(EvalErrorKind::NegativeExponent);
    }
    if base.is_zero() {
        return Ok(if exp.is_zero() { BigInt::one() } else { BigInt::zero() });
    }
    if base.magnitude().is_one() {
        let odd = !(&exp % 2u8).is_zero();
        return Ok(if base.is_negative() && odd { -BigInt::one() } else { BigInt::one() });
    }
    // |base| >= 2, so the magnitude strictly grows each step and any
    // overflow surfaces long before the step counter becomes large.
    let mut acc = BigInt::one();
    let mut i = BigInt::zero();
    while i < exp {
        acc *= &base;
        if over_cap(&acc, max_digits) {
            return Err(EvalErrorKind::Overflow);
        }
        i += 1u8;
    }
    Ok(acc)
}

/// 1-indexed nth prime by incremental trial division against all smaller
/// primes, cached across calls.
pub fn naive_nth_prime(n: usize) -> u64 {
    static FOUND: Mutex<Vec<u64>> = Mutex::new(Vec::new());
    let mut primes = FOUND.lock().unwrap();
    if primes.is_empty() {
        primes.extend([2u64, 3]);
    }
    while primes.len() < n {
        // All primes below the candidate are already in the list, and the
        // next prime is under 2x the last (Bertrand), so trial division by
        // known primes up to sqrt is always conclusive.
        let mut candidate = primes.last().unwrap() + 2;
        while !primes.iter().take_while(|&&p| p * p <= candidate).all(|&p| candidate % p != 0) {
            candidate += 2;
        }
        primes.push(candidate);
    }
    primes[n - 1]
}

/// sign(v) * ln(1 + |v|) computed with `ln_1p` on an f64 magnitude, rather
/// than converting |v| + 1 exactly. Agrees with the production transform to
/// a few ulps on magnitudes below the evaluation cap.
pub fn naive_slog(v: &BigInt) -> f64 {
    let l = v.magnitude().to_f64().unwrap_or(f64::INFINITY).ln_1p();
    if v.sign() == Sign::Minus {
        -l
    } else {
        l
    }
}

pub fn naive_accuracy(preds: &[bool], truths: &[bool]) -> f64 {
    assert_eq!(preds.len(), truths.len());
    let mut hits = 0usize;
    for i in 0..preds.len() {
        if preds[i] == truths[i] {
            hits += 1;
        }
    }
    hits as f64 / preds.len() as f64
}

/// Macro-F1 through the single-fraction form F1 = 2TP / (2TP + FP + FN),
/// which encodes the 0/0 -> 0 convention in its denominator.
pub fn naive_macro_f1(
    pred_sets: &[BTreeSet<Category>],
    truth_sets: &[BTreeSet<Category>],
    labels: &[Category],
) -> f64 {
    assert_eq!(pred_sets.len(), truth_sets.len());
    let mut total = 0.0;
    for label in labels {
        let mut tp = 0u64;
        let mut fp = 0u64;
        let mut fn_ = 0u64;
        for i in 0..pred_sets.len() {
            let p = pred_sets[i].contains(label);
            let t = truth_sets[i].contains(label);
            if p && t {
                tp += 1;
            } else if p {
                fp += 1;
            } else if t {
                fn_ += 1;
            }
        }
        let den = 2 * tp + fp + fn_;
        if den > 0 {
            total += 2.0 * tp as f64 / den as f64;
        }
    }
    total / labels.len() as f64
}

pub fn naive_rmsle(preds: &[BigInt], truths: &[BigInt]) -> f64 {
    assert_eq!(preds.len(), truths.len());
    let mut sum = 0.0;
    for i in 0..preds.len() {
        let d = naive_slog(&preds[i]) - naive_slog(&truths[i]);
        sum += d * d;
    }
    (sum / preds.len() as f64).sqrt()
}

/// Plain RMSE with the difference taken in floating point. Only valid on
/// magnitudes small enough for f64 to represent exactly (below 2^52).
pub fn naive_rmse(pred: &[BigInt], truth: &[BigInt]) -> f64 {
    assert_eq!(pred.len(), truth.len());
    let mut sum = 0.0;
    for i in 0..pred.len() {
        let d = pred[i].to_f64().unwrap() - truth[i].to_f64().unwrap();
        sum += d * d;
    }
    (sum / pred.len() as f64).sqrt()
}

pub fn naive_top_k_rmse(candidates: &[Vec<BigInt>], truth: &[BigInt]) -> f64 {
    let mut best = f64::INFINITY;
    for c in candidates {
        let r = naive_rmse(c, truth);
        if r < best {
            best = r;
        }
    }
    best
}

pub fn naive_recall_at_k(
    rankings: &[Vec<Category>],
    truth_sets: &[BTreeSet<Category>],
    k: usize,
) -> f64 {
    assert_eq!(rankings.len(), truth_sets.len());
    let mut hits = 0usize;
    for i in 0..rankings.len() {
        let top = &rankings[i][..k.min(rankings[i].len())];
        if top.iter().any(|l| truth_sets[i].contains(l)) {
            hits += 1;
        }
    }
    hits as f64 / rankings.len() as f64
}

/// The contrastive loss written as its two branches instead of a hinge.
pub fn naive_contrastive_loss(d: f64, alpha: f64, lambda: f64) -> f64 {
    if d < alpha {
        (1.0 - lambda) * (alpha - d) * (alpha - d) + lambda * d * d
    } else {
        lambda * d * d
    }
}
