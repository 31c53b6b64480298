//! The closed-form expression language that generates the synthetic corpus.
//!
//! An [`Expr`] is a small arithmetic AST over one variable `x` with exact
//! integer semantics: `+`, `-`, `*`, exponentiation, Euclidean modulo,
//! prime-by-index lookup, the degenerate integer-argument trigonometric
//! functions (`sin(pi * k) = 0`, `cos(pi * k) = (-1)^k`), and a root-only
//! periodic wrapper that reduces the input modulo a fixed period before
//! evaluating its body.
//!
//! Rendering ([`Expr::to_string`]) and parsing ([`parse`]) are exact inverses
//! on the canonical surface syntax: every binary node is parenthesized, so no
//! precedence rules exist and `parse(render(e)) == e` structurally.

mod eval;
mod parse;

pub use eval::{eval, eval_sequence, EvalError, EvalErrorKind, EvalLimits, SequenceError};
pub use parse::{parse, ParseError};

use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// Expression AST.
///
/// Two invariants are maintained by the constructors and the parser rather
/// than the type system: `NConst` holds only multi-digit values (single
/// digits canonicalize to `Const`, since the surface syntax cannot tell them
/// apart), and `PeriodicWrap` appears only as the root of a tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    /// Single decimal digit 0..=9.
    Const(u8),
    /// Decimal literal >= 10 (arbitrary length, never a leading zero).
    NConst(BigUint),
    /// The input variable `x`.
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mult(Box<Expr>, Box<Expr>),
    /// `(base ** exponent)`; evaluation requires a non-negative exponent and
    /// defines `0 ** 0 == 1`.
    Pow(Box<Expr>, Box<Expr>),
    /// Euclidean remainder: the result lies in `[0, |modulus|)`.
    Mod(Box<Expr>, Box<Expr>),
    /// `prime(k)`: the k-th prime, 1-indexed.
    PrimeIdx(Box<Expr>),
    /// `sin(pi * (e))`, identically zero on integers.
    SinPi(Box<Expr>),
    /// `cos(pi * (e))`, `(-1)^e` on integers.
    CosPi(Box<Expr>),
    /// `periodic(body, k)`: evaluates `body` at `x mod k`. Root-only; k >= 1.
    PeriodicWrap(Box<Expr>, u64),
}

impl Expr {
    /// Canonical constant constructor: values 0..=9 become [`Expr::Const`],
    /// anything larger [`Expr::NConst`].
    pub fn number(value: BigUint) -> Expr {
        match value.to_u8() {
            Some(d) if d <= 9 => Expr::Const(d),
            _ => Expr::NConst(value),
        }
    }

    /// Checks the tree invariants: digit range of `Const`, multi-digit
    /// `NConst`, positive period, and `PeriodicWrap` only at the root.
    pub fn is_valid(&self) -> bool {
        fn check(e: &Expr, root: bool) -> bool {
            match e {
                Expr::Const(d) => *d <= 9,
                Expr::NConst(v) => v >= &BigUint::from(10u8),
                Expr::Var => true,
                Expr::Add(l, r)
                | Expr::Sub(l, r)
                | Expr::Mult(l, r)
                | Expr::Pow(l, r)
                | Expr::Mod(l, r) => check(l, false) && check(r, false),
                Expr::PrimeIdx(a) | Expr::SinPi(a) | Expr::CosPi(a) => check(a, false),
                Expr::PeriodicWrap(body, k) => root && *k >= 1 && check(body, false),
            }
        }
        check(self, true)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(d) => write!(f, "{d}"),
            Expr::NConst(v) => write!(f, "{v}"),
            Expr::Var => write!(f, "x"),
            Expr::Add(l, r) => write!(f, "({l} + {r})"),
            Expr::Sub(l, r) => write!(f, "({l} - {r})"),
            Expr::Mult(l, r) => write!(f, "({l} * {r})"),
            Expr::Pow(l, r) => write!(f, "({l} ** {r})"),
            Expr::Mod(l, r) => write!(f, "({l} % {r})"),
            Expr::PrimeIdx(a) => write!(f, "prime({a})"),
            Expr::SinPi(a) => write!(f, "sin(pi * ({a}))"),
            Expr::CosPi(a) => write!(f, "cos(pi * ({a}))"),
            Expr::PeriodicWrap(body, k) => write!(f, "periodic({body}, {k})"),
        }
    }
}
