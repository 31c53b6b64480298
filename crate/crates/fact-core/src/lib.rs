//! Core library for an integer-sequence benchmark toolkit.
//!
//! The pipeline this crate supports runs in stages, each of which is pure and
//! seed-deterministic:
//!
//! 1. [`grammar`] regenerates a synthetic corpus from per-category
//!    context-free grammars over the expression language in [`expr`].
//! 2. [`oeis`] ingests organic sequence data (stripped or JSONL form) into the
//!    same [`record::SequenceRecord`] shape.
//! 3. [`annotate`] assigns graded category memberships using heuristic
//!    classification methods and a pluggable verdict aggregator.
//! 4. [`tasks`] splits the corpus and materializes the five benchmark tasks.
//! 5. [`metrics`] scores prediction files, and [`baselines`] provides the
//!    dummy and k-NN reference models.
//!
//! All arithmetic on sequence values is exact (arbitrary-precision integers,
//! exact rationals); floating point appears only in metric reductions and the
//! k-NN feature space, never in classification decisions.
//!
//! [`oracle`] holds deliberately naive reference implementations (a direct
//! recursive evaluator, trial-division primes, straight-line metrics) that the
//! test suites compare against the production paths. They share no code with
//! the implementations they check.

pub mod annotate;
pub mod baselines;
pub mod expr;
pub mod grammar;
pub mod metrics;
pub mod oeis;
pub mod oracle;
pub mod primes;
pub mod record;
pub mod tasks;

pub use record::{Category, SequenceRecord, Source};
