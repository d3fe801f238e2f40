//! Rational arithmetic progressions, their integer traces, and an exact
//! consistency check for a covering principle.
//!
//! A progression `alpha + beta*Z` with rational `alpha` and positive
//! rational `beta` meets the integers in either nothing or a full residue
//! class: writing `alpha = A/B` and `beta = P/Q` in lowest terms, integers
//! occur exactly when `B` divides `Q`, and then they form `x0 + P*Z`
//! ([`integer_trace`], solved with an extended-gcd modular inverse).
//!
//! For a finite system of such progressions, the principle under test says:
//! if the system covers `N` consecutive integers, where `N` is the number of
//! distinct fractional parts of subset sums of the reciprocals `1/beta_s`,
//! then it covers every integer. [`CoveringSystem::verify_criterion`]
//! decides this exactly over one period and reports any violating run; no
//! violation is ever expected, so finding one is a research-grade alarm.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::CoveringError;

/// Exact rational scalar used throughout this module.
pub type Rat = BigRational;

/// Subset enumeration refuses systems with more progressions than this.
pub const MAX_SUBSET_APS: usize = 20;

/// Period-window decisions refuse periods longer than this.
pub const PERIOD_BUDGET: u64 = 1 << 26;

/// Parses a rational in `numer` or `numer/denom` notation.
pub fn parse_rational(s: &str) -> Result<Rat, CoveringError> {
    s.parse::<Rat>().map_err(|_| CoveringError::ParseRational {
        input: s.to_string(),
    })
}

/// The arithmetic progression `alpha + beta*Z`, `beta > 0`, kept in lowest
/// terms. Serializes as a two-string tuple such as `["1/2","3/2"]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalAP {
    alpha: Rat,
    beta: Rat,
}

impl RationalAP {
    pub fn new(alpha: Rat, beta: Rat) -> Result<Self, CoveringError> {
        if !beta.is_positive() {
            return Err(CoveringError::NonPositiveBeta {
                beta: beta.to_string(),
            });
        }
        Ok(RationalAP { alpha, beta })
    }

    pub fn alpha(&self) -> &Rat {
        &self.alpha
    }

    pub fn beta(&self) -> &Rat {
        &self.beta
    }
}

impl Serialize for RationalAP {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(2))?;
        seq.serialize_element(&self.alpha.to_string())?;
        seq.serialize_element(&self.beta.to_string())?;
        seq.end()
    }
}

impl<'de> Deserialize<'de> for RationalAP {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (alpha, beta) = <(String, String)>::deserialize(deserializer)?;
        let alpha = parse_rational(&alpha).map_err(de::Error::custom)?;
        let beta = parse_rational(&beta).map_err(de::Error::custom)?;
        RationalAP::new(alpha, beta).map_err(de::Error::custom)
    }
}

/// The set of integers inside a rational progression: empty, or a residue
/// class `residue + modulus*Z` with `0 <= residue < modulus`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntegerTrace {
    Empty,
    Class { residue: BigInt, modulus: BigInt },
}

impl IntegerTrace {
    pub fn contains(&self, x: &BigInt) -> bool {
        match self {
            IntegerTrace::Empty => false,
            IntegerTrace::Class { residue, modulus } => x.mod_floor(modulus) == *residue,
        }
    }
}

/// Computes the integer trace of `alpha + beta*Z`.
///
/// With `alpha = A/B` and `beta = P/Q` in lowest terms, `alpha + beta*t` is
/// an integer iff `B | Q` and `P*t = -A*(Q/B) (mod Q)`; since `gcd(P, Q) = 1`
/// the solutions form one class of `t` mod `Q`, and the resulting integers
/// form a class of modulus `P`.
pub fn integer_trace(ap: &RationalAP) -> IntegerTrace {
    let a = ap.alpha.numer();
    let b = ap.alpha.denom();
    let p = ap.beta.numer();
    let q = ap.beta.denom();
    if !q.mod_floor(b).is_zero() {
        return IntegerTrace::Empty;
    }
    let q1 = q / b;
    // Inverse of p mod q via extended gcd (gcd is 1 because beta is reduced).
    let inv = p.extended_gcd(q).x.mod_floor(q);
    let t0 = ((-a * q1).mod_floor(q) * inv).mod_floor(q);
    let x0 = &ap.alpha + &ap.beta * Rat::from_integer(t0);
    debug_assert!(x0.is_integer());
    IntegerTrace::Class {
        residue: x0.to_integer().mod_floor(p),
        modulus: p.clone(),
    }
}

/// Consistency verdict for the covering principle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CriterionVerdict {
    Consistent {
        distinct_sums: u64,
        longest_run: u64,
        covers_all: bool,
    },
    /// A run of `run_length >= distinct_sums` covered integers starting at
    /// `run_start`, in a system that does not cover everything.
    Violation {
        distinct_sums: u64,
        run_start: BigInt,
        run_length: u64,
    },
}

impl CriterionVerdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, CriterionVerdict::Consistent { .. })
    }
}

/// A finite, nonempty system of rational progressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringSystem {
    aps: Vec<RationalAP>,
}

impl CoveringSystem {
    pub fn new(aps: Vec<RationalAP>) -> Result<Self, CoveringError> {
        if aps.is_empty() {
            return Err(CoveringError::EmptySystem);
        }
        Ok(CoveringSystem { aps })
    }

    pub fn aps(&self) -> &[RationalAP] {
        &self.aps
    }

    /// The integer trace of each progression, in order.
    pub fn traces(&self) -> Vec<IntegerTrace> {
        self.aps.iter().map(integer_trace).collect()
    }

    /// Whether some progression contains the integer `x`.
    pub fn covers_integer(&self, x: &BigInt) -> bool {
        self.traces().iter().any(|t| t.contains(x))
    }

    /// Whether every integer in `start, start+1, ..., start+len-1` is
    /// covered. Vacuously true for `len = 0`.
    pub fn covers_range(&self, start: &BigInt, len: u64) -> bool {
        let traces = self.traces();
        let mut x = start.clone();
        for _ in 0..len {
            if !traces.iter().any(|t| t.contains(&x)) {
                return false;
            }
            x += 1;
        }
        true
    }

    /// Whether the system covers all of `Z`, decided exactly over one period
    /// `L = lcm` of the trace moduli.
    pub fn covers_all_integers(&self) -> Result<bool, CoveringError> {
        Ok(match self.coverage_bitmap()? {
            Some(bitmap) => bitmap.iter().all(|&b| b),
            None => false,
        })
    }

    /// The number of distinct fractional parts among the `2^k` subset sums
    /// of the reciprocals `1/beta_s`. Exact; refuses more than
    /// [`MAX_SUBSET_APS`] progressions.
    pub fn distinct_fractional_sums(&self) -> Result<u64, CoveringError> {
        if self.aps.len() > MAX_SUBSET_APS {
            return Err(CoveringError::TooManyAps {
                count: self.aps.len(),
                limit: MAX_SUBSET_APS,
            });
        }
        // frac(x + y) depends only on frac(x), so the running set can hold
        // fractional parts instead of raw sums.
        let mut fracs: HashSet<Rat> = HashSet::new();
        fracs.insert(Rat::zero());
        for ap in &self.aps {
            let recip = ap.beta.recip();
            let shifted: Vec<Rat> = fracs
                .iter()
                .map(|f| {
                    let s = f + &recip;
                    &s - s.floor()
                })
                .collect();
            fracs.extend(shifted);
        }
        Ok(fracs.len() as u64)
    }

    /// Tests the covering principle: a system covering `N` consecutive
    /// integers (`N` = [`Self::distinct_fractional_sums`]) must cover all of
    /// `Z`. Searches one period for a covered run of length `N`; such a run
    /// without full coverage is reported as a [`CriterionVerdict::Violation`].
    pub fn verify_criterion(&self) -> Result<CriterionVerdict, CoveringError> {
        let distinct_sums = self.distinct_fractional_sums()?;
        let bitmap = match self.coverage_bitmap()? {
            Some(bitmap) => bitmap,
            None => {
                // No progression contains any integer at all.
                return Ok(CriterionVerdict::Consistent {
                    distinct_sums,
                    longest_run: 0,
                    covers_all: false,
                });
            }
        };
        let period = bitmap.len();
        if bitmap.iter().all(|&b| b) {
            return Ok(CriterionVerdict::Consistent {
                distinct_sums,
                longest_run: period as u64,
                covers_all: true,
            });
        }
        // Longest circular run of covered integers: scan two periods. Since
        // coverage is periodic and incomplete, every run is shorter than one
        // period and the doubled window sees each wrapped run whole.
        let mut longest = 0u64;
        let mut longest_start = 0usize;
        let mut run = 0u64;
        let mut run_start = 0usize;
        for i in 0..2 * period {
            if bitmap[i % period] {
                if run == 0 {
                    run_start = i;
                }
                run += 1;
                if run > longest {
                    longest = run;
                    longest_start = run_start;
                }
            } else {
                run = 0;
            }
        }
        if longest >= distinct_sums {
            return Ok(CriterionVerdict::Violation {
                distinct_sums,
                run_start: BigInt::from(longest_start % period),
                run_length: longest,
            });
        }
        Ok(CriterionVerdict::Consistent {
            distinct_sums,
            longest_run: longest,
            covers_all: false,
        })
    }

    /// Coverage over one period `[0, L)`, or `None` when every trace is
    /// empty.
    fn coverage_bitmap(&self) -> Result<Option<Vec<bool>>, CoveringError> {
        let classes: Vec<(BigInt, BigInt)> = self
            .traces()
            .into_iter()
            .filter_map(|t| match t {
                IntegerTrace::Empty => None,
                IntegerTrace::Class { residue, modulus } => Some((residue, modulus)),
            })
            .collect();
        if classes.is_empty() {
            return Ok(None);
        }
        let mut period = BigInt::from(1u8);
        for (_, m) in &classes {
            period = period.lcm(m);
        }
        let l = period
            .to_u64()
            .filter(|&l| l <= PERIOD_BUDGET)
            .ok_or_else(|| CoveringError::PeriodTooLarge {
                period: period.to_string(),
                budget: PERIOD_BUDGET,
            })? as usize;
        let mut bitmap = vec![false; l];
        for (r, m) in &classes {
            let m = m.to_u64().expect("modulus divides the period") as usize;
            let r = r.to_u64().expect("residue below modulus") as usize;
            let mut i = r;
            while i < l {
                bitmap[i] = true;
                i += m;
            }
        }
        Ok(Some(bitmap))
    }
}

impl Serialize for CoveringSystem {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.aps.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CoveringSystem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let aps = Vec::<RationalAP>::deserialize(deserializer)?;
        CoveringSystem::new(aps).map_err(de::Error::custom)
    }
}

/// Builds the system `{ s + (n / m_sigma(s)) * Z : s = 1, ..., n-1 }` from a
/// modulus `n`, multipliers `m_s` in `{1, ..., n}`, and a permutation
/// `sigma` of `{1, ..., n-1}`. A certified permutation makes this system
/// cover `1..n-1` while missing `0`.
pub fn system_from_permutation(
    n: u64,
    m: &[u64],
    sigma: &[u64],
) -> Result<CoveringSystem, CoveringError> {
    if n < 2 {
        return Err(CoveringError::InvalidModulus { n });
    }
    if m.len() as u64 != n - 1 {
        return Err(CoveringError::WrongLength {
            expected: n - 1,
            got: m.len() as u64,
        });
    }
    if sigma.len() as u64 != n - 1 {
        return Err(CoveringError::WrongLength {
            expected: n - 1,
            got: sigma.len() as u64,
        });
    }
    for (idx, &v) in m.iter().enumerate() {
        if v == 0 || v > n {
            return Err(CoveringError::ValueOutOfRange {
                position: idx as u64 + 1,
                value: v,
                n,
            });
        }
    }
    let mut seen = vec![false; (n - 1) as usize];
    for &j in sigma {
        if j == 0 || j >= n || seen[(j - 1) as usize] {
            return Err(CoveringError::NotABijection);
        }
        seen[(j - 1) as usize] = true;
    }
    let aps = (1..n)
        .map(|s| {
            let mult = m[(sigma[(s - 1) as usize] - 1) as usize];
            RationalAP::new(
                Rat::from_integer(BigInt::from(s)),
                Rat::new(BigInt::from(n), BigInt::from(mult)),
            )
            .expect("n / m is positive")
        })
        .collect();
    CoveringSystem::new(aps)
}
