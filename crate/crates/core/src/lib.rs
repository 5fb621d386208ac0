//! Correlation measures of finite binary sequences.
//!
//! The crate computes the order-`r` correlation measure `C_r` of a
//! `{-1, +1}` sequence exactly (bit-parallel tuple enumeration) or as a
//! sampled lower bound, certifies the known minimum-value lower bounds
//! through Welch-bound vector constructions, ships brute-force oracles for
//! the combinatorial lemmas behind the limit theory, and runs seeded Monte
//! Carlo experiments whose reports are reproducible bit for bit.
//!
//! Module map:
//!
//! * [`seqcore`]: packed sequences, seeded generation, enumeration, text I/O.
//! * [`measures`]: correlation sums, walk ranges, exact/sampled `C_r`.
//! * [`bounds`]: binomials, double factorials, Welch bound, certificates.
//! * [`oracles`]: literal brute-force reference implementations.
//! * [`experiments`]: Monte Carlo harness and report serialization.
//! * [`cli`]: the `corrlab` command line.

pub mod bounds;
pub mod cli;
mod error;
pub mod experiments;
pub mod measures;
pub mod oracles;
pub mod seqcore;

pub use error::{Error, Result};
pub use measures::{CorrelationResult, Normalization, ShiftTuple};
pub use seqcore::{BinarySequence, SeedSpec};
