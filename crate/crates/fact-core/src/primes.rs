//! Prime lookups shared by expression evaluation and the primality
//! classification method.
//!
//! The prime-by-index table is a process-wide cache: readers take a shared
//! lock and the table is extended under an exclusive lock when an index
//! beyond the current horizon is requested. Extension re-sieves from scratch,
//! which is cheap (the default index ceiling of 100 000 needs a sieve to
//! ~1.3 million) and keeps the code obviously correct.

use std::sync::RwLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

static PRIMES: RwLock<Vec<u64>> = RwLock::new(Vec::new());

/// Witness set sufficient for a deterministic Miller-Rabin verdict on every
/// value below 2^64 (in fact below 3.3 * 10^24).
const SMALL_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Fixed witness bases used above the deterministic range. The verdict there
/// is probabilistic (error probability below 4^-25) but reproducible, which
/// the deterministic-pipeline contract requires.
const BIG_WITNESSES: [u64; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Returns the k-th prime, 1-indexed: `nth_prime(1) == 2`.
///
/// Safe for concurrent use; the underlying table grows on demand and is never
/// shrunk. Panics if `k == 0`.
pub fn nth_prime(k: usize) -> u64 {
    assert!(k >= 1, "prime indices are 1-based");
    {
        let primes = PRIMES.read().unwrap();
        if let Some(&p) = primes.get(k - 1) {
            return p;
        }
    }
    let mut primes = PRIMES.write().unwrap();
    while primes.len() < k {
        let bound = sieve_bound(k.max(primes.len() * 2));
        *primes = sieve(bound);
    }
    primes[k - 1]
}

/// Upper bound on the k-th prime: k(ln k + ln ln k) for k >= 6, padded.
fn sieve_bound(k: usize) -> u64 {
    if k < 6 {
        return 16;
    }
    let kf = k as f64;
    (kf * (kf.ln() + kf.ln().ln())).ceil() as u64 + 16
}

fn sieve(bound: u64) -> Vec<u64> {
    let bound = bound.max(2) as usize;
    let mut composite = vec![false; bound + 1];
    let mut out = Vec::new();
    for n in 2..=bound {
        if !composite[n] {
            out.push(n as u64);
            let mut m = n * n;
            while m <= bound {
                composite[m] = true;
                m += n;
            }
        }
    }
    out
}

/// Outcome of a primality test: `certain` is false when the value was large
/// enough that only fixed-base probabilistic rounds were run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Primality {
    pub is_prime: bool,
    pub certain: bool,
}

/// Miller-Rabin primality test on a non-negative integer.
///
/// Deterministic below 2^64; above that, 25 fixed witness rounds are used and
/// the result is flagged as uncertain.
pub fn is_prime(n: &BigUint) -> Primality {
    if let Some(small) = n.to_u64() {
        Primality {
            is_prime: is_prime_u64(small),
            certain: true,
        }
    } else {
        Primality {
            is_prime: miller_rabin_big(n, &BIG_WITNESSES),
            certain: false,
        }
    }
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let (d, s) = decompose(n - 1);
    'witness: for &a in &SMALL_WITNESSES {
        let mut x = pow_mod_u64(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn miller_rabin_big(n: &BigUint, witnesses: &[u64]) -> bool {
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    if n.is_even() {
        return *n == two;
    }
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &a in witnesses {
        let a = BigUint::from(a) % n;
        if a.is_zero() || a.is_one() {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Splits n - 1 as d * 2^s with d odd.
fn decompose(mut d: u64) -> (u64, u32) {
    let s = d.trailing_zeros();
    d >>= s;
    (d, s)
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc: u64 = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}
