//! Exact combinatorial toolkit around zero-avoiding permutations in finite
//! abelian groups.
//!
//! The pieces fit together like this:
//!
//! - [`groups`] implements arithmetic in `Z/d_1 x ... x Z/d_k`.
//! - [`condition`] evaluates the divisor condition that characterizes when a
//!   sequence of `n - 1` elements admits a permutation `sigma` with every
//!   product `s * a_sigma(s)` nonzero (`n` the group exponent).
//! - [`matching`] is the bipartite-matching engine (Hopcroft-Karp plus Hall
//!   deficiency certificates) underneath the solvers.
//! - [`solvers`] produces verified permutation certificates and solves the
//!   related distinct-shifted-sums assignment problem, each with a small
//!   exhaustive oracle.
//! - [`subset_sums`] computes subset-sum reachability and tests the
//!   "at least `n` distinct subset sums" lower bound, double-checking any
//!   candidate counterexample by independent enumeration.
//! - [`covering`] handles rational arithmetic progressions exactly: integer
//!   traces, coverage queries, and a consistency check tying covered runs to
//!   fractional parts of reciprocal subset sums.
//!
//! Everything is exact integer or rational arithmetic; results that refute
//! an expected theorem are returned as dedicated errors rather than silently
//! absorbed, so downstream tooling can escalate them.

pub mod condition;
pub mod covering;
pub mod groups;
pub mod matching;
pub mod solvers;
pub mod subset_sums;

use thiserror::Error;

pub use condition::{
    check_condition, divisors, lift_integers, ConditionReport, ConditionRow, GroupInstance,
};
pub use covering::{
    integer_trace, parse_rational, system_from_permutation, CoveringSystem, CriterionVerdict,
    IntegerTrace, Rat, RationalAP,
};
pub use groups::{GroupElement, GroupSpec};
pub use matching::{
    brute_force_max_matching, hall_violator, max_matching, BipartiteGraph, HallViolator, Matching,
};
pub use solvers::{
    brute_force_assignment, brute_force_permutation, product_graph, solve_assignment,
    solve_permutation, verify_assignment, verify_permutation, AssignmentCertificate,
    AssignmentProblem, AssignmentViolation, PermutationCertificate, PermutationOutcome,
};
pub use subset_sums::{
    check_sum_bound, group_subset_sums, residue_coverage, BoundCheck, BoundVerdict,
    ResidueCoverage, SubsetSumReport,
};

/// Errors from group construction and arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("a group needs at least one cyclic factor")]
    EmptySpec,
    #[error("modulus {modulus} is below 2")]
    ModulusTooSmall { modulus: u64 },
    #[error("modulus {modulus} exceeds the supported maximum {max}")]
    ModulusTooLarge { modulus: u64, max: u64 },
    #[error("the lcm of the moduli does not fit in 64 bits")]
    ExponentOverflow,
    #[error("element does not belong to this group")]
    SpecMismatch,
    #[error("group order {order:?} exceeds the enumeration budget {budget}")]
    BudgetExceeded { order: Option<u128>, budget: u128 },
}

/// Errors from divisor-condition inputs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConditionError {
    #[error("divisors of 0 are not defined here")]
    ZeroInput,
    #[error("expected {expected} elements, got {got}")]
    WrongLength { expected: u64, got: u64 },
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Errors from the matching engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("left side has {left} vertices; the brute-force oracle allows {limit}")]
    TooLarge { left: usize, limit: usize },
    #[error("neighbor {right} of left vertex {left} is outside 0..{right_size}")]
    InvalidNeighbor {
        left: usize,
        right: usize,
        right_size: usize,
    },
    #[error("pair ({left}, {right}) is not a valid matching edge here")]
    InvalidMatching { left: usize, right: usize },
    #[error("matching admits an augmenting path, so it is not maximum")]
    NotMaximum,
}

/// Errors from the permutation and assignment solvers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("sigma is not a bijection on {{1, ..., n-1}}")]
    NotABijection,
    #[error("instance size {size} exceeds the brute-force limit {limit}")]
    TooLarge { size: u64, limit: u64 },
    #[error("modulus {n} is below 2")]
    InvalidModulus { n: u64 },
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: u64, got: u64 },
    #[error("gcd hypothesis fails at position {position}: gcd = {gcd} > position")]
    HypothesisViolated { position: u64, gcd: u64 },
    #[error("assignment value {value} is outside 1..{n}")]
    InvalidAssignment { value: u64, n: u64 },
    /// The premise guaranteed a solution and none was found; this is a bug
    /// or a refutation, never routine.
    #[error("theorem contradiction: {context}")]
    TheoremContradiction { context: String },
}

/// Errors from subset-sum reachability.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubsetSumError {
    #[error("modulus {n} is below 2")]
    InvalidModulus { n: u64 },
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: u64, got: u64 },
    #[error("group order {order:?} exceeds the reachability budget {budget}")]
    BudgetExceeded { order: Option<u128>, budget: u128 },
    #[error("hypothesis s * a_s != 0 fails at position {position}")]
    HypothesisViolated { position: u64 },
    #[error("theorem contradiction: {context}")]
    TheoremContradiction { context: String },
    /// The bitmap dynamic program and the explicit subset enumeration
    /// disagreed; one of them is wrong, so nothing a caller should trust.
    #[error(
        "subset-sum routes disagree: dynamic program {dp_count}, enumeration \
         {enumerated_count} ({context})"
    )]
    VerificationMismatch {
        dp_count: u64,
        enumerated_count: u64,
        context: String,
    },
}

/// Errors from rational covering systems.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoveringError {
    #[error("cannot parse {input:?} as a rational")]
    ParseRational { input: String },
    #[error("progression step must be positive, got {beta}")]
    NonPositiveBeta { beta: String },
    #[error("a covering system needs at least one progression")]
    EmptySystem,
    #[error("{count} progressions exceed the subset-enumeration limit {limit}")]
    TooManyAps { count: usize, limit: usize },
    #[error("modulus {n} is below 2")]
    InvalidModulus { n: u64 },
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: u64, got: u64 },
    #[error("multiplier at position {position} is {value}, outside 1..={n}")]
    ValueOutOfRange { position: u64, value: u64, n: u64 },
    #[error("sigma is not a bijection on {{1, ..., n-1}}")]
    NotABijection,
    #[error("coverage period {period} exceeds the decision budget {budget}")]
    PeriodTooLarge { period: String, budget: u64 },
}
