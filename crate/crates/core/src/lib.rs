//! Minsky machines and the algebraic and arithmetic simulations built from them:
//! semigroup presentations, a word-problem engine, Conway piecewise dilations,
//! finite semigroups, and identity checks.

pub mod algebra;
pub mod conway;
pub mod identity;
pub mod machine;
pub mod presentation;
pub mod primes;
pub mod rewrite;
pub mod trace;
