//! Exact evaluation with resource limits.
//!
//! Every value produced at any node is bounded by a configurable digit cap;
//! exceeding it is an [`EvalError::Overflow`]. Exponentiation rejects
//! obviously-overflowing powers from bit lengths alone before computing
//! anything, so a hostile `(9 ** (9 ** 9))` fails fast instead of allocating.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::Expr;
use crate::primes;

/// Resource limits for evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalLimits {
    /// Any intermediate or final magnitude above `10^max_digits` is an error.
    pub max_digits: u32,
    /// `prime(k)` accepts `1 <= k <= max_prime_index`.
    pub max_prime_index: usize,
}

impl Default for EvalLimits {
    fn default() -> Self {
        EvalLimits {
            max_digits: 120,
            max_prime_index: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("negative exponent in `{expr}` at x = {input}")]
    NegativeExponent { expr: String, input: BigInt },
    #[error("modulo by zero in `{expr}` at x = {input}")]
    ModuloByZero { expr: String, input: BigInt },
    #[error("prime index {index} outside 1..={max} in `{expr}` at x = {input}")]
    PrimeIndexOutOfRange {
        expr: String,
        input: BigInt,
        index: BigInt,
        max: usize,
    },
    #[error("magnitude exceeds 10^{max_digits} in `{expr}` at x = {input}")]
    Overflow {
        expr: String,
        input: BigInt,
        max_digits: u32,
    },
    #[error("domain error in `{expr}` at x = {input}: {reason}")]
    DomainError {
        expr: String,
        input: BigInt,
        reason: String,
    },
}

/// Discriminant-only view of an [`EvalError`], convenient for equivalence
/// checks between interpreters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    NegativeExponent,
    ModuloByZero,
    PrimeIndexOutOfRange,
    Overflow,
    DomainError,
}

impl EvalError {
    pub fn kind(&self) -> EvalErrorKind {
        match self {
            EvalError::NegativeExponent { .. } => EvalErrorKind::NegativeExponent,
            EvalError::ModuloByZero { .. } => EvalErrorKind::ModuloByZero,
            EvalError::PrimeIndexOutOfRange { .. } => EvalErrorKind::PrimeIndexOutOfRange,
            EvalError::Overflow { .. } => EvalErrorKind::Overflow,
            EvalError::DomainError { .. } => EvalErrorKind::DomainError,
        }
    }
}

/// Evaluates `e` at `x = n` under `limits`.
pub fn eval(e: &Expr, n: &BigInt, limits: &EvalLimits) -> Result<BigInt, EvalError> {
    let cap = BigUint::from(10u8).pow(limits.max_digits);
    let cap_bits = cap.bits();
    let ev = Evaluator {
        limits,
        cap,
        cap_bits,
    };
    ev.node(e, n)
}

/// Failure of [`eval_sequence`]: the first index (0-based position in the
/// requested range) at which evaluation failed, and why.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("term {index} (x = {x}) failed: {error}")]
pub struct SequenceError {
    pub index: usize,
    pub x: BigInt,
    pub error: EvalError,
}

/// Evaluates `e` at `x = start, start+1, ..., start+count-1`, failing
/// atomically on the first error.
pub fn eval_sequence(
    e: &Expr,
    start: i64,
    count: usize,
    limits: &EvalLimits,
) -> Result<Vec<BigInt>, SequenceError> {
    let cap = BigUint::from(10u8).pow(limits.max_digits);
    let cap_bits = cap.bits();
    let ev = Evaluator {
        limits,
        cap,
        cap_bits,
    };
    let mut out = Vec::with_capacity(count);
    for (index, off) in (0..count).enumerate() {
        let x = BigInt::from(start) + BigInt::from(off);
        match ev.node(e, &x) {
            Ok(v) => out.push(v),
            Err(error) => return Err(SequenceError { index, x, error }),
        }
    }
    Ok(out)
}

struct Evaluator<'a> {
    limits: &'a EvalLimits,
    /// `10^max_digits`, computed once per call.
    cap: BigUint,
    cap_bits: u64,
}

impl Evaluator<'_> {
    fn node(&self, e: &Expr, x: &BigInt) -> Result<BigInt, EvalError> {
        let v = match e {
            Expr::Const(d) => BigInt::from(*d),
            Expr::NConst(v) => BigInt::from(v.clone()),
            Expr::Var => x.clone(),
            Expr::Add(l, r) => self.node(l, x)? + self.node(r, x)?,
            Expr::Sub(l, r) => self.node(l, x)? - self.node(r, x)?,
            Expr::Mult(l, r) => self.node(l, x)? * self.node(r, x)?,
            Expr::Pow(base, exp) => {
                let b = self.node(base, x)?;
                let ex = self.node(exp, x)?;
                self.pow(b, ex, e, x)?
            }
            Expr::Mod(a, m) => {
                let av = self.node(a, x)?;
                let mv = self.node(m, x)?;
                if mv.is_zero() {
                    return Err(EvalError::ModuloByZero {
                        expr: e.to_string(),
                        input: x.clone(),
                    });
                }
                av.mod_floor(&mv.abs())
            }
            Expr::PrimeIdx(arg) => {
                let k = self.node(arg, x)?;
                let idx = k.to_usize().filter(|&i| i >= 1 && i <= self.limits.max_prime_index);
                match idx {
                    Some(i) => BigInt::from(primes::nth_prime(i)),
                    None => {
                        return Err(EvalError::PrimeIndexOutOfRange {
                            expr: e.to_string(),
                            input: x.clone(),
                            index: k,
                            max: self.limits.max_prime_index,
                        })
                    }
                }
            }
            Expr::SinPi(arg) => {
                // sin(pi * k) == 0 for integer k; the argument still runs so
                // its errors surface.
                self.node(arg, x)?;
                BigInt::zero()
            }
            Expr::CosPi(arg) => {
                let k = self.node(arg, x)?;
                if k.is_odd() {
                    -BigInt::one()
                } else {
                    BigInt::one()
                }
            }
            Expr::PeriodicWrap(body, k) => {
                if x.is_negative() {
                    return Err(EvalError::DomainError {
                        expr: e.to_string(),
                        input: x.clone(),
                        reason: "periodic wrapper requires a non-negative input".into(),
                    });
                }
                let wrapped = x.mod_floor(&BigInt::from(*k));
                self.node(body, &wrapped)?
            }
        };
        self.check_cap(v, e, x)
    }

    fn check_cap(&self, v: BigInt, e: &Expr, x: &BigInt) -> Result<BigInt, EvalError> {
        if *v.magnitude() > self.cap {
            Err(EvalError::Overflow {
                expr: e.to_string(),
                input: x.clone(),
                max_digits: self.limits.max_digits,
            })
        } else {
            Ok(v)
        }
    }

    fn pow(&self, base: BigInt, exp: BigInt, node: &Expr, x: &BigInt) -> Result<BigInt, EvalError> {
        if exp.is_negative() {
            return Err(EvalError::NegativeExponent {
                expr: node.to_string(),
                input: x.clone(),
            });
        }
        if base.is_zero() {
            // 0 ** 0 == 1 by convention.
            return Ok(if exp.is_zero() { BigInt::one() } else { BigInt::zero() });
        }
        if base.magnitude().is_one() {
            // (+-1)^e: only the parity of e matters.
            return Ok(if base.is_negative() && exp.is_odd() {
                -BigInt::one()
            } else {
                BigInt::one()
            });
        }
        let overflow = || EvalError::Overflow {
            expr: node.to_string(),
            input: x.clone(),
            max_digits: self.limits.max_digits,
        };
        // |base| >= 2^(bits-1), so |base^e| >= 2^((bits-1)*e); once that
        // reaches the cap's bit length the result is certainly over the cap
        // (cap < 2^cap_bits). Exponents surviving this test are small enough
        // that the result has fewer than 2*cap_bits bits and is cheap to
        // build; the exact cap check happens on the computed value.
        let bits = base.magnitude().bits();
        let e = exp.to_u64().ok_or_else(overflow)?;
        if (bits - 1).saturating_mul(e) >= self.cap_bits {
            return Err(overflow());
        }
        Ok(Pow::pow(&base, e))
    }
}
