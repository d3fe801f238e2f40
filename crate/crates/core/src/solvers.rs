//! Certified solvers for two existence problems over a group of exponent `n`.
//!
//! *Permutations.* Given elements `a_1, ..., a_{n-1}`, find a permutation
//! `sigma` of `{1, ..., n-1}` with `s * a_sigma(s) != 0` for every position
//! `s`. Such a permutation exists exactly when the instance passes the
//! divisor condition of [`crate::condition`]; the solver certifies the
//! positive direction by matching positions to element indices (the edge
//! `(s, j)` is present when the order of `a_j` does not divide `s`) and the
//! negative direction by returning the failing condition report. A passing
//! condition with no perfect matching would falsify the equivalence and is
//! escalated as [`SolverError::TheoremContradiction`] rather than papered
//! over.
//!
//! *Assignments.* Given integers `m_s` with `gcd(m_s, n) <= s` and residues
//! `a_s`, find `f : {1, ..., n-1} -> {1, ..., n-1}` such that the sums
//! `f(i) + a_i` are pairwise distinct mod `n` and `n` never divides
//! `f(i) * m_i`. This is solved by matching indices to target residues.
//!
//! Both solvers re-verify their outputs through plain group arithmetic
//! ([`verify_permutation`], [`verify_assignment`]) instead of trusting the
//! graph construction, and both have small exhaustive oracles that scan
//! candidates in lexicographic order.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::condition::{check_condition, ConditionReport, GroupInstance};
use crate::matching::{max_matching, BipartiteGraph};
use crate::SolverError;

/// Positions above this exponent are refused by `brute_force_permutation`.
pub const PERMUTATION_BRUTE_FORCE_LIMIT: u64 = 7;

/// `brute_force_assignment` refuses once `(n-1)^(n-1)` exceeds this.
pub const ASSIGNMENT_BRUTE_FORCE_LIMIT: u128 = 10_000_000;

/// A permutation `sigma` of `{1, ..., n-1}` together with the verification
/// outcome: `violations` lists every position `s` with `s * a_sigma(s) = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationCertificate {
    pub sigma: Vec<u64>,
    pub certified: bool,
    pub violations: Vec<u64>,
}

/// What [`solve_permutation`] produced: a verified certificate, or the
/// failing condition report proving none exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PermutationOutcome {
    Certified(PermutationCertificate),
    ConditionFailed(ConditionReport),
}

/// The position/index bipartite graph: left vertex `s-1` is adjacent to
/// right vertex `j-1` exactly when the order of `a_j` does not divide `s`,
/// i.e. when `s * a_j != 0`.
pub fn product_graph(instance: &GroupInstance) -> BipartiteGraph {
    let spec = instance.group();
    let n = spec.exponent();
    let orders: Vec<u64> = instance
        .elements()
        .iter()
        .map(|a| spec.order_of(a).expect("validated instance"))
        .collect();
    let adjacency = (1..n)
        .map(|s| {
            (1..n)
                .filter(|&j| s % orders[(j - 1) as usize] != 0)
                .map(|j| (j - 1) as usize)
                .collect()
        })
        .collect();
    BipartiteGraph::new((n - 1) as usize, adjacency).expect("indices in range")
}

/// Decides the permutation problem: checks the divisor condition, and when
/// it passes extracts a permutation from a maximum matching on
/// [`product_graph`] and re-verifies it by direct multiplication.
pub fn solve_permutation(
    instance: &GroupInstance,
) -> Result<PermutationOutcome, SolverError> {
    let report = check_condition(instance);
    if !report.passed {
        return Ok(PermutationOutcome::ConditionFailed(report));
    }
    let graph = product_graph(instance);
    let matching = max_matching(&graph);
    if !matching.is_perfect_on_left() {
        return Err(SolverError::TheoremContradiction {
            context: format!(
                "divisor condition passed but the position/index graph has no \
                 perfect matching (maximum {} of {}) for {}",
                matching.size(),
                graph.left_size(),
                instance.describe()
            ),
        });
    }
    let sigma: Vec<u64> = (0..graph.left_size())
        .map(|s| matching.right_of(s).expect("perfect matching") as u64 + 1)
        .collect();
    let certificate = verify_permutation(instance, &sigma)?;
    if !certificate.certified {
        return Err(SolverError::TheoremContradiction {
            context: format!(
                "matching produced sigma {:?} that fails verification at \
                 positions {:?} for {}",
                certificate.sigma,
                certificate.violations,
                instance.describe()
            ),
        });
    }
    Ok(PermutationOutcome::Certified(certificate))
}

/// Checks a claimed permutation by recomputing every product `s * a_sigma(s)`
/// with plain scalar multiplication. Rejects non-bijections.
pub fn verify_permutation(
    instance: &GroupInstance,
    sigma: &[u64],
) -> Result<PermutationCertificate, SolverError> {
    let spec = instance.group();
    let n = spec.exponent();
    if sigma.len() as u64 != n - 1 {
        return Err(SolverError::NotABijection);
    }
    let mut seen = vec![false; (n - 1) as usize];
    for &j in sigma {
        if j == 0 || j >= n || seen[(j - 1) as usize] {
            return Err(SolverError::NotABijection);
        }
        seen[(j - 1) as usize] = true;
    }
    let mut violations = Vec::new();
    for s in 1..n {
        let image = instance.element(sigma[(s - 1) as usize]);
        if spec
            .scalar_mul(s, image)
            .expect("validated instance")
            .is_zero()
        {
            violations.push(s);
        }
    }
    Ok(PermutationCertificate {
        sigma: sigma.to_vec(),
        certified: violations.is_empty(),
        violations,
    })
}

/// Scans permutations of `{1, ..., n-1}` in lexicographic order and returns
/// the first one with all products nonzero, or `None` if none exists.
/// Refuses exponents above [`PERMUTATION_BRUTE_FORCE_LIMIT`].
pub fn brute_force_permutation(
    instance: &GroupInstance,
) -> Result<Option<PermutationCertificate>, SolverError> {
    let spec = instance.group();
    let n = spec.exponent();
    if n > PERMUTATION_BRUTE_FORCE_LIMIT {
        return Err(SolverError::TooLarge {
            size: n,
            limit: PERMUTATION_BRUTE_FORCE_LIMIT,
        });
    }
    let mut sigma: Vec<u64> = (1..n).collect();
    loop {
        let valid = (1..n).all(|s| {
            let image = instance.element(sigma[(s - 1) as usize]);
            !spec
                .scalar_mul(s, image)
                .expect("validated instance")
                .is_zero()
        });
        if valid {
            return Ok(Some(PermutationCertificate {
                sigma,
                certified: true,
                violations: Vec::new(),
            }));
        }
        if !next_permutation(&mut sigma) {
            return Ok(None);
        }
    }
}

/// In-place lexicographic successor; `false` once the sequence is the last.
fn next_permutation(p: &mut [u64]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// An assignment problem mod `n`: multipliers `m_s` (arbitrary integers,
/// reduced internally) satisfying `gcd(m_s, n) <= s` with `gcd(0, n) = n`,
/// and shift residues `a_s` in `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentProblem {
    n: u64,
    multipliers: Vec<i64>,
    multipliers_mod: Vec<u64>,
    shifts: Vec<u64>,
}

impl AssignmentProblem {
    /// Validates lengths, reduces the data mod `n`, and enforces the gcd
    /// hypothesis at every position.
    pub fn new(n: u64, multipliers: &[i64], shifts: &[i64]) -> Result<Self, SolverError> {
        if n < 2 {
            return Err(SolverError::InvalidModulus { n });
        }
        if multipliers.len() as u64 != n - 1 {
            return Err(SolverError::WrongLength {
                expected: n - 1,
                got: multipliers.len() as u64,
            });
        }
        if shifts.len() as u64 != n - 1 {
            return Err(SolverError::WrongLength {
                expected: n - 1,
                got: shifts.len() as u64,
            });
        }
        let reduce = |v: i64| (v as i128).rem_euclid(n as i128) as u64;
        let multipliers_mod: Vec<u64> = multipliers.iter().map(|&v| reduce(v)).collect();
        for (idx, &m) in multipliers_mod.iter().enumerate() {
            let s = idx as u64 + 1;
            let g = if m == 0 { n } else { m.gcd(&n) };
            if g > s {
                return Err(SolverError::HypothesisViolated { position: s, gcd: g });
            }
        }
        let shifts = shifts.iter().map(|&v| reduce(v)).collect();
        Ok(AssignmentProblem {
            n,
            multipliers: multipliers.to_vec(),
            multipliers_mod,
            shifts,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn multipliers(&self) -> &[i64] {
        &self.multipliers
    }

    pub fn shifts(&self) -> &[u64] {
        &self.shifts
    }

    fn describe(&self) -> String {
        format!(
            "n {}, multipliers {:?}, shifts {:?}",
            self.n, self.multipliers, self.shifts
        )
    }
}

/// A map `f` on `{1, ..., n-1}` with the verification outcome; `violations`
/// lists colliding sum pairs and positions with `n | f(i) * m_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentCertificate {
    pub f: Vec<u64>,
    pub certified: bool,
    pub violations: Vec<AssignmentViolation>,
}

/// One failed clause of an assignment check (positions are 1-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AssignmentViolation {
    SumCollision { i: u64, j: u64 },
    DivisibleProduct { i: u64 },
}

/// Solves the assignment problem by matching each index `i` to a target
/// residue `r`: the edge exists when `v = r - a_i (mod n)` is a legal value
/// (`v != 0` and `n` does not divide `v * m_i`), and the matched edge fixes
/// `f(i) = v`. The guaranteed perfect matching is re-verified; its absence
/// is escalated as a contradiction.
pub fn solve_assignment(
    problem: &AssignmentProblem,
) -> Result<AssignmentCertificate, SolverError> {
    let n = problem.n;
    let adjacency = (0..(n - 1) as usize)
        .map(|idx| {
            let a = problem.shifts[idx];
            let m = problem.multipliers_mod[idx];
            (0..n)
                .filter(|&r| {
                    let v = (r + n - a) % n;
                    v != 0 && (v as u128 * m as u128) % n as u128 != 0
                })
                .map(|r| r as usize)
                .collect()
        })
        .collect();
    let graph =
        BipartiteGraph::new(n as usize, adjacency).expect("residues in range");
    let matching = max_matching(&graph);
    if !matching.is_perfect_on_left() {
        return Err(SolverError::TheoremContradiction {
            context: format!(
                "gcd hypothesis holds but the index/residue graph has no perfect \
                 matching (maximum {} of {}) for {}",
                matching.size(),
                graph.left_size(),
                problem.describe()
            ),
        });
    }
    let f: Vec<u64> = (0..(n - 1) as usize)
        .map(|idx| {
            let r = matching.right_of(idx).expect("perfect matching") as u64;
            (r + n - problem.shifts[idx]) % n
        })
        .collect();
    let certificate = verify_assignment(problem, &f)?;
    if !certificate.certified {
        return Err(SolverError::TheoremContradiction {
            context: format!(
                "matching produced f {:?} that fails verification ({:?}) for {}",
                certificate.f,
                certificate.violations,
                problem.describe()
            ),
        });
    }
    Ok(certificate)
}

/// Checks a claimed assignment: values must lie in `{1, ..., n-1}`, then both
/// clauses are tested and every failure is reported.
pub fn verify_assignment(
    problem: &AssignmentProblem,
    f: &[u64],
) -> Result<AssignmentCertificate, SolverError> {
    let n = problem.n;
    if f.len() as u64 != n - 1 {
        return Err(SolverError::WrongLength {
            expected: n - 1,
            got: f.len() as u64,
        });
    }
    for &v in f {
        if v == 0 || v >= n {
            return Err(SolverError::InvalidAssignment { value: v, n });
        }
    }
    let mut violations = Vec::new();
    let sums: Vec<u64> = f
        .iter()
        .zip(&problem.shifts)
        .map(|(&v, &a)| (v + a) % n)
        .collect();
    for i in 0..sums.len() {
        for j in i + 1..sums.len() {
            if sums[i] == sums[j] {
                violations.push(AssignmentViolation::SumCollision {
                    i: i as u64 + 1,
                    j: j as u64 + 1,
                });
            }
        }
    }
    for (idx, &v) in f.iter().enumerate() {
        let m = problem.multipliers_mod[idx];
        if (v as u128 * m as u128) % n as u128 == 0 {
            violations.push(AssignmentViolation::DivisibleProduct { i: idx as u64 + 1 });
        }
    }
    Ok(AssignmentCertificate {
        f: f.to_vec(),
        certified: violations.is_empty(),
        violations,
    })
}

/// Backtracking scan over maps `{1, ..., n-1} -> {1, ..., n-1}` in
/// lexicographic order, returning the first valid assignment or `None`.
/// Refuses once the raw search space `(n-1)^(n-1)` exceeds
/// [`ASSIGNMENT_BRUTE_FORCE_LIMIT`].
pub fn brute_force_assignment(
    problem: &AssignmentProblem,
) -> Result<Option<AssignmentCertificate>, SolverError> {
    let n = problem.n;
    let space = (1..n).try_fold(1u128, |acc, _| {
        acc.checked_mul((n - 1) as u128)
            .filter(|&v| v <= ASSIGNMENT_BRUTE_FORCE_LIMIT)
    });
    if space.is_none() {
        return Err(SolverError::TooLarge {
            size: n,
            limit: 8,
        });
    }
    let mut f = vec![0u64; (n - 1) as usize];
    let mut sum_used = vec![false; n as usize];
    // Depth-first over positions in order, trying values 1..n at each: the
    // first complete assignment found is the lexicographically least valid
    // one, since every pruned candidate is invalid.
    fn descend(
        problem: &AssignmentProblem,
        idx: usize,
        f: &mut [u64],
        sum_used: &mut [bool],
    ) -> bool {
        let n = problem.n;
        if idx == f.len() {
            return true;
        }
        let a = problem.shifts[idx];
        let m = problem.multipliers_mod[idx];
        for v in 1..n {
            if (v as u128 * m as u128) % n as u128 == 0 {
                continue;
            }
            let sum = ((v + a) % n) as usize;
            if sum_used[sum] {
                continue;
            }
            f[idx] = v;
            sum_used[sum] = true;
            if descend(problem, idx + 1, f, sum_used) {
                return true;
            }
            sum_used[sum] = false;
        }
        false
    }
    if descend(problem, 0, &mut f, &mut sum_used) {
        let certificate = verify_assignment(problem, &f)?;
        debug_assert!(certificate.certified);
        Ok(Some(certificate))
    } else {
        Ok(None)
    }
}
