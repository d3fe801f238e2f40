//! Experiment configuration, instance generation, and batch evaluation with
//! JSONL logging.
//!
//! An experiment is a mode (which check to run on each instance), an
//! instance source (exhaustive lexicographic enumeration or seeded uniform
//! sampling), and budgets. Every processed instance becomes one JSONL record
//! carrying the instance descriptor, a verdict, and an optional payload; the
//! descriptor alone reproduces the verdict, which is how logged alarms are
//! replayed later. Instance `i` depends only on `(master_seed, i)`, workers
//! compute verdicts in parallel batches, and a single writer emits records
//! in instance order — so identical configurations produce identical log
//! bodies regardless of the worker count.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::ValueEnum;
use num_bigint::BigInt;
use num_rational::BigRational;
use permcert::condition::{check_condition, lift_integers, GroupInstance};
use permcert::covering::{parse_rational, CoveringSystem, CriterionVerdict, RationalAP, MAX_SUBSET_APS};
use permcert::groups::{GroupSpec, ENUMERATION_BUDGET};
use permcert::solvers::{solve_assignment, solve_permutation, AssignmentProblem, PermutationOutcome};
use permcert::subset_sums::{check_sum_bound, residue_coverage, BoundVerdict};
use permcert::{GroupError, SolverError, SubsetSumError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

/// Default number of sampled instances for the random strategy.
pub const DEFAULT_COUNT: u64 = 1000;

/// Default cap on the exhaustive enumeration size.
pub const DEFAULT_MAX_EXHAUSTIVE: u64 = 1_000_000;

/// Default upper bound on the number of progressions in a sampled system.
pub const DEFAULT_K_MAX: usize = 8;

/// Default magnitude bound for sampled rational numerators and denominators.
pub const DEFAULT_COEFF_MAX: u64 = 12;

/// A filtered sampler gives up after this many rejected candidates for a
/// single instance.
pub const FILTER_ATTEMPT_LIMIT: u32 = 100_000;

/// Identity of the per-instance generator, recorded in log headers.
pub const RNG_ID: &str = "chacha8 seeded by splitmix64(master_seed, index)";

/// Instances evaluated per parallel batch between writes.
const BATCH_SIZE: usize = 4096;

/// Errors from experiment setup, generation, and evaluation.
#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("exhaustive space of {space} instances exceeds the cap {budget} (raise --max-exhaustive or use --strategy random)")]
    BudgetExceeded { space: u128, budget: u64 },
    #[error("filter rejected {attempts} consecutive candidates for instance {index}; the filtered space looks empty")]
    FilterStalled { index: u64, attempts: u32 },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("instance evaluation failed: {0}")]
    Evaluation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Which check an experiment runs on each instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Permutation certificates versus the divisor condition.
    Thm11,
    /// Residue coverage of subset sums for condition-passing multipliers.
    Thm12,
    /// Shifted-sum assignments under the gcd hypothesis.
    Thm13,
    /// The subset-sum lower bound; candidate counterexamples on non-cyclic
    /// groups are the search target.
    Conj12,
    /// Consistency of the covering criterion on random rational systems.
    Lemma31,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Thm11 => "thm11",
            Mode::Thm12 => "thm12",
            Mode::Thm13 => "thm13",
            Mode::Conj12 => "conj12",
            Mode::Lemma31 => "lemma31",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Instance source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Exhaustive,
    Random,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::Random => "random",
        })
    }
}

/// Optional instance filter applied during generation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Filter {
    None,
    /// Keep only instances passing the divisor condition (thm11, thm12).
    Condition,
    /// Keep only instances satisfying the mode's hypothesis (thm13, conj12).
    Hypothesis,
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Filter::None => "none",
            Filter::Condition => "condition",
            Filter::Hypothesis => "hypothesis",
        })
    }
}

/// Everything that determines an experiment's records. Worker count and
/// output path are execution details and live outside the config, so two
/// runs with the same config compare equal line-for-line below the header.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub group: Option<Vec<u64>>,
    pub strategy: Strategy,
    /// Number of sampled instances; unused by the exhaustive strategy.
    pub count: u64,
    pub seed: u64,
    pub filter: Filter,
    pub dedup: bool,
    pub k_max: usize,
    pub coeff_max: u64,
    pub max_exhaustive: u64,
}

impl ExperimentConfig {
    /// The validated group, when the config carries one.
    pub fn group_spec(&self) -> Result<Option<GroupSpec>, ExploreError> {
        self.group
            .as_ref()
            .map(|moduli| GroupSpec::new(moduli.clone()))
            .transpose()
            .map_err(ExploreError::from)
    }
}

/// A self-contained instance descriptor: evaluating it again reproduces the
/// record's verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstanceData {
    Thm11 { group: Vec<u64>, elements: Vec<Vec<u64>> },
    Thm12 { n: u64, m: Vec<u64> },
    Thm13 { n: u64, m: Vec<u64>, a: Vec<u64> },
    Conj12 { group: Vec<u64>, elements: Vec<Vec<u64>> },
    Lemma31 { system: Vec<(String, String)> },
}

/// Per-instance outcome. Declaration order groups positives, then expected
/// negatives, then alarms; summaries list counts in this order.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    CoverageComplete,
    Assigned,
    MeetsBound,
    Consistent,
    ConditionFailed,
    HypothesisViolated,
    CandidateCounterexample,
    Contradiction,
    LemmaViolation,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Certified => "certified",
            Verdict::CoverageComplete => "coverage_complete",
            Verdict::Assigned => "assigned",
            Verdict::MeetsBound => "meets_bound",
            Verdict::Consistent => "consistent",
            Verdict::ConditionFailed => "condition_failed",
            Verdict::HypothesisViolated => "hypothesis_violated",
            Verdict::CandidateCounterexample => "candidate_counterexample",
            Verdict::Contradiction => "contradiction",
            Verdict::LemmaViolation => "lemma_violation",
        }
    }

    /// Research-grade alarms: these drive exit code 3 and get replayed by
    /// the report command.
    pub fn is_alarm(self) -> bool {
        matches!(
            self,
            Verdict::CandidateCounterexample | Verdict::Contradiction | Verdict::LemmaViolation
        )
    }

    /// Expected negatives: instances that fail their mode's precondition.
    pub fn is_negative(self) -> bool {
        matches!(self, Verdict::ConditionFailed | Verdict::HypothesisViolated)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// First line of every log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub version: String,
    pub rng: String,
    pub timestamp_unix: u64,
    pub jobs: usize,
    pub config: ExperimentConfig,
}

/// One evaluated instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub index: u64,
    pub seed: u64,
    pub instance: InstanceData,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub payload: Option<Value>,
}

/// Trailing aggregate line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogSummary {
    pub total: u64,
    pub verdicts: BTreeMap<Verdict, u64>,
    pub alarms: u64,
}

impl LogSummary {
    pub fn negatives(&self) -> u64 {
        self.verdicts
            .iter()
            .filter(|(v, _)| v.is_negative())
            .map(|(_, c)| c)
            .sum()
    }

    /// Process exit code: 3 for alarms, 1 for expected negatives only,
    /// 0 for a fully positive run.
    pub fn exit_code(&self) -> i32 {
        if self.alarms > 0 {
            3
        } else if self.negatives() > 0 {
            1
        } else {
            0
        }
    }
}

/// One parsed JSONL line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum LogLine {
    Header(LogHeader),
    Record(ExperimentRecord),
    Summary(LogSummary),
}

/// Derives the seed for instance `index` from the master seed: the
/// splitmix64 output function applied to `master + (index + 1) * golden`.
/// Instances are independent of worker scheduling because nothing else
/// feeds their generators.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn config_err(message: impl Into<String>) -> ExploreError {
    ExploreError::Config(message.into())
}

/// Rejects unusable configurations up front, so generation and evaluation
/// can rely on the invariants (group presence, cyclicity, filter/mode fit).
fn validate_config(config: &ExperimentConfig) -> Result<(), ExploreError> {
    if config.mode == Mode::Lemma31 {
        if config.group.is_some() {
            return Err(config_err("mode lemma31 does not take --group"));
        }
        if config.strategy != Strategy::Random {
            return Err(config_err(
                "mode lemma31 samples rational systems; only --strategy random applies",
            ));
        }
        if config.dedup {
            return Err(config_err("--dedup does not apply to mode lemma31"));
        }
        if config.k_max == 0 || config.k_max > MAX_SUBSET_APS {
            return Err(config_err(format!(
                "--k-max must be between 1 and {MAX_SUBSET_APS}"
            )));
        }
        if config.coeff_max == 0 {
            return Err(config_err("--coeff-max must be at least 1"));
        }
    } else {
        let spec = config
            .group_spec()?
            .ok_or_else(|| config_err(format!("mode {} requires --group", config.mode)))?;
        if matches!(config.mode, Mode::Thm12 | Mode::Thm13) && !spec.is_cyclic() {
            return Err(config_err(format!(
                "mode {} works modulo n; --group must describe a cyclic group",
                config.mode
            )));
        }
        let order = spec
            .order()
            .ok_or_else(|| config_err("group order is too large to sample"))?;
        if config.mode == Mode::Conj12 && order > ENUMERATION_BUDGET {
            return Err(config_err(format!(
                "mode conj12 walks the whole group; order {order} exceeds the budget {ENUMERATION_BUDGET}"
            )));
        }
    }
    match config.filter {
        Filter::None => {}
        Filter::Condition if matches!(config.mode, Mode::Thm11 | Mode::Thm12) => {}
        Filter::Hypothesis if matches!(config.mode, Mode::Thm13 | Mode::Conj12) => {}
        other => {
            return Err(config_err(format!(
                "--filter {other} does not apply to mode {}",
                config.mode
            )))
        }
    }
    if config.dedup {
        if config.strategy != Strategy::Exhaustive {
            return Err(config_err("--dedup requires --strategy exhaustive"));
        }
        if !matches!(config.mode, Mode::Thm11 | Mode::Thm12 | Mode::Conj12) {
            return Err(config_err(
                "--dedup applies only to order-invariant modes (thm11, thm12, conj12)",
            ));
        }
        if config.mode == Mode::Conj12 && config.filter == Filter::Hypothesis {
            return Err(config_err(
                "--dedup cannot combine with --filter hypothesis: the hypothesis depends on element positions",
            ));
        }
    }
    if config.strategy == Strategy::Random && config.count == 0 {
        return Err(config_err("--count must be at least 1 for random sampling"));
    }
    Ok(())
}

fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Number of non-decreasing tuples: C(base + len - 1, len), exactly.
fn multiset_count(base: u128, len: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 0..len as u128 {
        acc = acc.checked_mul(base.checked_add(i)?)? / (i + 1);
    }
    Some(acc)
}

/// Mixed-radix counter over `[0, base)^len`; false after the last tuple.
fn next_counter(digits: &mut [u128], base: u128) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Successor among non-decreasing tuples over `[0, base)^len`.
fn next_sorted(digits: &mut [u128], base: u128) -> bool {
    for i in (0..digits.len()).rev() {
        if digits[i] + 1 < base {
            let v = digits[i] + 1;
            for d in &mut digits[i..] {
                *d = v;
            }
            return true;
        }
    }
    false
}

/// Produces the full instance list for a config: the exhaustive strategy
/// enumerates tuples lexicographically (non-decreasing tuples under
/// `--dedup`, which is sound because the deduplicated modes are invariant
/// under input reordering); the random strategy draws each instance from its
/// own derived seed, rejection-sampling when a filter is set.
pub fn generate_instances(
    config: &ExperimentConfig,
) -> Result<Vec<(u64, InstanceData)>, ExploreError> {
    validate_config(config)?;
    match config.strategy {
        Strategy::Exhaustive => generate_exhaustive(config),
        Strategy::Random => generate_random(config),
    }
}

fn generate_exhaustive(
    config: &ExperimentConfig,
) -> Result<Vec<(u64, InstanceData)>, ExploreError> {
    let spec = config
        .group_spec()?
        .expect("validated: exhaustive modes carry a group");
    let n = spec.exponent();
    let len = (n - 1) as usize;
    let (base, digit_count) = match config.mode {
        Mode::Thm11 | Mode::Conj12 => (spec.order().expect("validated"), len),
        Mode::Thm12 => (n as u128, len),
        Mode::Thm13 => (n as u128, 2 * len),
        Mode::Lemma31 => unreachable!("validated: lemma31 is never exhaustive"),
    };
    let space = if config.dedup {
        multiset_count(base, digit_count)
    } else {
        checked_pow(base, digit_count)
    };
    match space {
        Some(space) if space <= config.max_exhaustive as u128 => {}
        space => {
            return Err(ExploreError::BudgetExceeded {
                space: space.unwrap_or(u128::MAX),
                budget: config.max_exhaustive,
            })
        }
    }
    let mut out = Vec::new();
    let mut digits = vec![0u128; digit_count];
    loop {
        let instance = build_exhaustive_instance(config.mode, &spec, &digits);
        if passes_filter(config.filter, &instance)? {
            let index = out.len() as u64;
            out.push((derive_seed(config.seed, index), instance));
        }
        let more = if config.dedup {
            next_sorted(&mut digits, base)
        } else {
            next_counter(&mut digits, base)
        };
        if !more {
            break;
        }
    }
    Ok(out)
}

fn build_exhaustive_instance(mode: Mode, spec: &GroupSpec, digits: &[u128]) -> InstanceData {
    let n = spec.exponent();
    let len = (n - 1) as usize;
    match mode {
        Mode::Thm11 | Mode::Conj12 => {
            let group = spec.moduli().to_vec();
            let elements = digits
                .iter()
                .map(|&d| spec.element_at(d).coords().to_vec())
                .collect();
            if mode == Mode::Thm11 {
                InstanceData::Thm11 { group, elements }
            } else {
                InstanceData::Conj12 { group, elements }
            }
        }
        Mode::Thm12 => InstanceData::Thm12 {
            n,
            m: digits.iter().map(|&d| d as u64 + 1).collect(),
        },
        Mode::Thm13 => InstanceData::Thm13 {
            n,
            m: digits[..len].iter().map(|&d| d as u64 + 1).collect(),
            a: digits[len..].iter().map(|&d| d as u64).collect(),
        },
        Mode::Lemma31 => unreachable!("validated: lemma31 is never exhaustive"),
    }
}

fn generate_random(config: &ExperimentConfig) -> Result<Vec<(u64, InstanceData)>, ExploreError> {
    let spec = config.group_spec()?;
    let mut out = Vec::with_capacity(config.count as usize);
    for index in 0..config.count {
        let seed = derive_seed(config.seed, index);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut attempts = 0u32;
        let instance = loop {
            attempts += 1;
            if attempts > FILTER_ATTEMPT_LIMIT {
                return Err(ExploreError::FilterStalled {
                    index,
                    attempts: FILTER_ATTEMPT_LIMIT,
                });
            }
            let candidate = sample_instance(config, spec.as_ref(), &mut rng);
            if passes_filter(config.filter, &candidate)? {
                break candidate;
            }
        };
        out.push((seed, instance));
    }
    Ok(out)
}

fn sample_instance(
    config: &ExperimentConfig,
    spec: Option<&GroupSpec>,
    rng: &mut ChaCha8Rng,
) -> InstanceData {
    match config.mode {
        Mode::Thm11 | Mode::Conj12 => {
            let spec = spec.expect("validated");
            let order = spec.order().expect("validated");
            let n = spec.exponent();
            let group = spec.moduli().to_vec();
            let elements = (1..n)
                .map(|_| spec.element_at(rng.gen_range(0..order)).coords().to_vec())
                .collect();
            if config.mode == Mode::Thm11 {
                InstanceData::Thm11 { group, elements }
            } else {
                InstanceData::Conj12 { group, elements }
            }
        }
        Mode::Thm12 => {
            let n = spec.expect("validated").exponent();
            InstanceData::Thm12 {
                n,
                m: (1..n).map(|_| rng.gen_range(1..=n)).collect(),
            }
        }
        Mode::Thm13 => {
            let n = spec.expect("validated").exponent();
            InstanceData::Thm13 {
                n,
                m: (1..n).map(|_| rng.gen_range(1..=n)).collect(),
                a: (1..n).map(|_| rng.gen_range(0..n)).collect(),
            }
        }
        Mode::Lemma31 => {
            let k = rng.gen_range(1..=config.k_max);
            let bound = config.coeff_max as i64;
            let system = (0..k)
                .map(|_| {
                    let alpha = BigRational::new(
                        BigInt::from(rng.gen_range(-bound..=bound)),
                        BigInt::from(rng.gen_range(1..=bound)),
                    );
                    let beta = BigRational::new(
                        BigInt::from(rng.gen_range(1..=bound)),
                        BigInt::from(rng.gen_range(1..=bound)),
                    );
                    (alpha.to_string(), beta.to_string())
                })
                .collect();
            InstanceData::Lemma31 { system }
        }
    }
}

fn passes_filter(filter: Filter, instance: &InstanceData) -> Result<bool, ExploreError> {
    match (filter, instance) {
        (Filter::None, _) => Ok(true),
        (Filter::Condition, InstanceData::Thm11 { group, elements }) => {
            let inst = build_group_instance(group, elements)?;
            Ok(check_condition(&inst).passed)
        }
        (Filter::Condition, InstanceData::Thm12 { n, m }) => {
            let signed: Vec<i64> = m.iter().map(|&v| v as i64).collect();
            let inst = lift_integers(*n, &signed)
                .map_err(|e| ExploreError::Evaluation(e.to_string()))?;
            Ok(check_condition(&inst).passed)
        }
        (Filter::Hypothesis, InstanceData::Thm13 { n, m, a }) => {
            let m_signed: Vec<i64> = m.iter().map(|&v| v as i64).collect();
            let a_signed: Vec<i64> = a.iter().map(|&v| v as i64).collect();
            match AssignmentProblem::new(*n, &m_signed, &a_signed) {
                Ok(_) => Ok(true),
                Err(SolverError::HypothesisViolated { .. }) => Ok(false),
                Err(err) => Err(ExploreError::Evaluation(err.to_string())),
            }
        }
        (Filter::Hypothesis, InstanceData::Conj12 { group, elements }) => {
            let inst = build_group_instance(group, elements)?;
            let spec = inst.group();
            for s in 1..spec.exponent() {
                let product = spec
                    .scalar_mul(s, inst.element(s))
                    .map_err(|e| ExploreError::Evaluation(e.to_string()))?;
                if product.is_zero() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        (filter, _) => Err(config_err(format!(
            "--filter {filter} does not apply to this instance kind"
        ))),
    }
}

fn build_group_instance(
    group: &[u64],
    elements: &[Vec<u64>],
) -> Result<GroupInstance, ExploreError> {
    let spec = GroupSpec::new(group.to_vec())?;
    let elems = elements
        .iter()
        .map(|coords| spec.element(coords.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    GroupInstance::new(spec, elems).map_err(|e| ExploreError::Evaluation(e.to_string()))
}

fn parse_system(pairs: &[(String, String)]) -> Result<CoveringSystem, ExploreError> {
    let mut aps = Vec::with_capacity(pairs.len());
    for (alpha, beta) in pairs {
        let alpha = parse_rational(alpha).map_err(|e| ExploreError::Evaluation(e.to_string()))?;
        let beta = parse_rational(beta).map_err(|e| ExploreError::Evaluation(e.to_string()))?;
        aps.push(RationalAP::new(alpha, beta).map_err(|e| ExploreError::Evaluation(e.to_string()))?);
    }
    CoveringSystem::new(aps).map_err(|e| ExploreError::Evaluation(e.to_string()))
}

/// Runs the check a descriptor asks for and returns the verdict plus an
/// optional payload. Theorem-contradicting outcomes come back as verdicts
/// (so they are logged and replayable), not errors; errors mean the
/// evaluation itself could not run.
pub fn evaluate_instance(instance: &InstanceData) -> Result<(Verdict, Option<Value>), ExploreError> {
    match instance {
        InstanceData::Thm11 { group, elements } => {
            let inst = build_group_instance(group, elements)?;
            match solve_permutation(&inst) {
                Ok(PermutationOutcome::Certified(cert)) => {
                    Ok((Verdict::Certified, Some(json!(cert))))
                }
                Ok(PermutationOutcome::ConditionFailed(report)) => Ok((
                    Verdict::ConditionFailed,
                    Some(json!({ "first_violation": report.first_violation })),
                )),
                Err(SolverError::TheoremContradiction { context }) => {
                    Ok((Verdict::Contradiction, Some(json!({ "context": context }))))
                }
                Err(err) => Err(ExploreError::Evaluation(err.to_string())),
            }
        }
        InstanceData::Thm12 { n, m } => {
            let signed: Vec<i64> = m.iter().map(|&v| v as i64).collect();
            let inst = lift_integers(*n, &signed)
                .map_err(|e| ExploreError::Evaluation(e.to_string()))?;
            let report = check_condition(&inst);
            let coverage = residue_coverage(*n, &signed)
                .map_err(|e| ExploreError::Evaluation(e.to_string()))?;
            if !report.passed {
                Ok((
                    Verdict::ConditionFailed,
                    Some(json!({
                        "first_violation": report.first_violation,
                        "reachable_count": coverage.reachable.len(),
                    })),
                ))
            } else if coverage.complete {
                Ok((Verdict::CoverageComplete, None))
            } else {
                Ok((
                    Verdict::Contradiction,
                    Some(json!({
                        "context": "condition passed yet subset sums miss residues",
                        "coverage": coverage,
                    })),
                ))
            }
        }
        InstanceData::Thm13 { n, m, a } => {
            let m_signed: Vec<i64> = m.iter().map(|&v| v as i64).collect();
            let a_signed: Vec<i64> = a.iter().map(|&v| v as i64).collect();
            match AssignmentProblem::new(*n, &m_signed, &a_signed) {
                Ok(problem) => match solve_assignment(&problem) {
                    Ok(cert) => Ok((Verdict::Assigned, Some(json!(cert)))),
                    Err(SolverError::TheoremContradiction { context }) => {
                        Ok((Verdict::Contradiction, Some(json!({ "context": context }))))
                    }
                    Err(err) => Err(ExploreError::Evaluation(err.to_string())),
                },
                Err(SolverError::HypothesisViolated { position, gcd }) => Ok((
                    Verdict::HypothesisViolated,
                    Some(json!({ "position": position, "gcd": gcd })),
                )),
                Err(err) => Err(ExploreError::Evaluation(err.to_string())),
            }
        }
        InstanceData::Conj12 { group, elements } => {
            let inst = build_group_instance(group, elements)?;
            match check_sum_bound(&inst) {
                Ok(check) => match check.verdict {
                    BoundVerdict::MeetsBound => Ok((
                        Verdict::MeetsBound,
                        Some(json!({
                            "reachable_count": check.report.reachable_count,
                            "bound": check.report.bound,
                        })),
                    )),
                    BoundVerdict::CandidateCounterexample { .. } => {
                        Ok((Verdict::CandidateCounterexample, Some(json!(check))))
                    }
                },
                Err(SubsetSumError::HypothesisViolated { position }) => Ok((
                    Verdict::HypothesisViolated,
                    Some(json!({ "position": position })),
                )),
                Err(
                    err @ (SubsetSumError::TheoremContradiction { .. }
                    | SubsetSumError::VerificationMismatch { .. }),
                ) => Ok((
                    Verdict::Contradiction,
                    Some(json!({ "context": err.to_string() })),
                )),
                Err(err) => Err(ExploreError::Evaluation(err.to_string())),
            }
        }
        InstanceData::Lemma31 { system } => {
            let sys = parse_system(system)?;
            match sys.verify_criterion() {
                Ok(CriterionVerdict::Consistent {
                    distinct_sums,
                    longest_run,
                    covers_all,
                }) => Ok((
                    Verdict::Consistent,
                    Some(json!({
                        "distinct_sums": distinct_sums,
                        "longest_run": longest_run,
                        "covers_all": covers_all,
                    })),
                )),
                Ok(CriterionVerdict::Violation {
                    distinct_sums,
                    run_start,
                    run_length,
                }) => Ok((
                    Verdict::LemmaViolation,
                    Some(json!({
                        "distinct_sums": distinct_sums,
                        "run_start": run_start.to_string(),
                        "run_length": run_length,
                    })),
                )),
                Err(err) => Err(ExploreError::Evaluation(err.to_string())),
            }
        }
    }
}

fn write_line<W: Write>(writer: &mut W, line: &LogLine) -> Result<(), ExploreError> {
    serde_json::to_writer(&mut *writer, line)?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Generates, evaluates, and logs a whole experiment. Workers evaluate
/// fixed-size batches in parallel; the single writer emits records in
/// instance order, so the log body is independent of `jobs`.
pub fn run_experiment(
    config: &ExperimentConfig,
    jobs: usize,
    out: &Path,
) -> Result<LogSummary, ExploreError> {
    if jobs == 0 {
        return Err(config_err("--jobs must be at least 1"));
    }
    let instances = generate_instances(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| config_err(e.to_string()))?;
    let mut writer = BufWriter::new(File::create(out)?);
    write_line(
        &mut writer,
        &LogLine::Header(LogHeader {
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng: RNG_ID.to_string(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .unwrap_or_default()
                .as_secs(),
            jobs,
            config: config.clone(),
        }),
    )?;
    let mut verdicts: BTreeMap<Verdict, u64> = BTreeMap::new();
    let mut alarms = 0u64;
    let mut index = 0u64;
    for batch in instances.chunks(BATCH_SIZE) {
        let results: Vec<(Verdict, Option<Value>)> = pool.install(|| {
            batch
                .par_iter()
                .map(|(_, instance)| evaluate_instance(instance))
                .collect::<Result<_, _>>()
        })?;
        for ((seed, instance), (verdict, payload)) in batch.iter().zip(results) {
            *verdicts.entry(verdict).or_insert(0) += 1;
            if verdict.is_alarm() {
                alarms += 1;
            }
            write_line(
                &mut writer,
                &LogLine::Record(ExperimentRecord {
                    index,
                    seed: *seed,
                    instance: instance.clone(),
                    verdict,
                    payload,
                }),
            )?;
            index += 1;
        }
    }
    let summary = LogSummary {
        total: index,
        verdicts,
        alarms,
    };
    write_line(&mut writer, &LogLine::Summary(summary.clone()))?;
    writer.flush()?;
    Ok(summary)
}
