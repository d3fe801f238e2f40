//! Arithmetic in finite abelian groups presented as direct products of
//! cyclic groups `Z/d_1 x ... x Z/d_k`.
//!
//! A [`GroupSpec`] fixes the moduli `d_i` and precomputes the exponent
//! `n = lcm(d_i)`; a [`GroupElement`] is a coordinate vector reduced modulo
//! the respective `d_i`. All arithmetic is exact: intermediate products are
//! carried at double width, and nothing here ever rounds or wraps silently.

use std::fmt;

use num_integer::Integer;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::GroupError;

/// Largest modulus accepted for a single cyclic factor.
pub const MAX_MODULUS: u64 = 1 << 32;

/// Element-enumeration budget: groups larger than this refuse to enumerate.
pub const ENUMERATION_BUDGET: u128 = 1 << 24;

/// Order threshold below which `max_order_element` scans for the
/// lexicographically least witness instead of constructing one.
const LEX_SCAN_LIMIT: u128 = 1 << 16;

/// A finite abelian group `Z/d_1 x ... x Z/d_k`, all `d_i >= 2`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    moduli: Vec<u64>,
    exponent: u64,
    /// `prod(d_i)`, or `None` if the product overflows `u128`.
    order: Option<u128>,
}

impl GroupSpec {
    /// Validates the moduli and fixes the group.
    ///
    /// Rejects an empty modulus list, any modulus below 2 or above
    /// [`MAX_MODULUS`], and modulus lists whose lcm exceeds `u64`.
    pub fn new(moduli: impl Into<Vec<u64>>) -> Result<Self, GroupError> {
        let moduli = moduli.into();
        if moduli.is_empty() {
            return Err(GroupError::EmptySpec);
        }
        let mut exponent: u128 = 1;
        let mut order: Option<u128> = Some(1);
        for &d in &moduli {
            if d < 2 {
                return Err(GroupError::ModulusTooSmall { modulus: d });
            }
            if d > MAX_MODULUS {
                return Err(GroupError::ModulusTooLarge {
                    modulus: d,
                    max: MAX_MODULUS,
                });
            }
            let d = d as u128;
            exponent = exponent / exponent.gcd(&d) * d;
            if exponent > u64::MAX as u128 {
                return Err(GroupError::ExponentOverflow);
            }
            order = order.and_then(|o| o.checked_mul(d));
        }
        Ok(GroupSpec {
            moduli,
            exponent: exponent as u64,
            order,
        })
    }

    /// The cyclic factor moduli `d_1, ..., d_k`.
    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    /// The exponent `n = lcm(d_i)`: the least `s >= 1` with `s*a = 0` for all `a`.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// The group order `prod(d_i)`, or `None` if it overflows `u128`.
    pub fn order(&self) -> Option<u128> {
        self.order
    }

    /// Whether the group is cyclic, i.e. its order equals its exponent.
    pub fn is_cyclic(&self) -> bool {
        self.order == Some(self.exponent as u128)
    }

    /// The identity element `(0, ..., 0)`.
    pub fn identity(&self) -> GroupElement {
        GroupElement {
            coords: vec![0; self.moduli.len()],
        }
    }

    /// Builds an element after checking each coordinate against its modulus.
    pub fn element(&self, coords: impl Into<Vec<u64>>) -> Result<GroupElement, GroupError> {
        let e = GroupElement {
            coords: coords.into(),
        };
        self.check_membership(&e)?;
        Ok(e)
    }

    /// Whether `a` has the right arity and reduced coordinates for this group.
    pub fn contains(&self, a: &GroupElement) -> bool {
        a.coords.len() == self.moduli.len()
            && a.coords.iter().zip(&self.moduli).all(|(&c, &d)| c < d)
    }

    fn check_membership(&self, a: &GroupElement) -> Result<(), GroupError> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(GroupError::SpecMismatch)
        }
    }

    /// Componentwise sum `a + b`.
    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_membership(a)?;
        self.check_membership(b)?;
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .zip(&self.moduli)
            .map(|((&x, &y), &d)| {
                // x + y < 2^33 <= u64::MAX, but stay double width on principle.
                ((x as u128 + y as u128) % d as u128) as u64
            })
            .collect();
        Ok(GroupElement { coords })
    }

    /// The inverse `-a`.
    pub fn negate(&self, a: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_membership(a)?;
        let coords = a
            .coords
            .iter()
            .zip(&self.moduli)
            .map(|(&x, &d)| if x == 0 { 0 } else { d - x })
            .collect();
        Ok(GroupElement { coords })
    }

    /// The scalar multiple `s * a = a + ... + a` (`s` times); `0 * a` is the identity.
    pub fn scalar_mul(&self, s: u64, a: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check_membership(a)?;
        let coords = a
            .coords
            .iter()
            .zip(&self.moduli)
            .map(|(&x, &d)| ((s as u128 * x as u128) % d as u128) as u64)
            .collect();
        Ok(GroupElement { coords })
    }

    /// The order of `a`: the least `t >= 1` with `t*a = 0`.
    ///
    /// Computed coordinatewise as `lcm_i(d_i / gcd(a_i, d_i))`; always divides
    /// the exponent.
    pub fn order_of(&self, a: &GroupElement) -> Result<u64, GroupError> {
        self.check_membership(a)?;
        let mut order: u128 = 1;
        for (&c, &d) in a.coords.iter().zip(&self.moduli) {
            let cyc = (d / c.gcd(&d)) as u128;
            order = order / order.gcd(&cyc) * cyc;
        }
        debug_assert!(self.exponent as u128 % order == 0);
        Ok(order as u64)
    }

    /// A deterministic element of maximal order (equal to the exponent).
    ///
    /// For groups of order at most `2^16` this is the lexicographically least
    /// such element. Larger groups get a constructed witness: for each prime
    /// `p` dividing the exponent, the least coordinate realizing the maximal
    /// `p`-adic valuation contributes a summand of order `p^(v_p(n))`.
    pub fn max_order_element(&self) -> GroupElement {
        if let Some(order) = self.order {
            if order <= LEX_SCAN_LIMIT {
                for e in self.elements().expect("order below enumeration budget") {
                    if self.order_of(&e).expect("enumerated element") == self.exponent {
                        return e;
                    }
                }
                unreachable!("a finite abelian group attains its exponent");
            }
        }
        let mut coords = vec![0u64; self.moduli.len()];
        for (p, _) in prime_factors(self.exponent) {
            let mut best = (0usize, 0u32);
            for (i, &d) in self.moduli.iter().enumerate() {
                let v = padic_valuation(d, p);
                if v > best.1 {
                    best = (i, v);
                }
            }
            let (i, v) = best;
            let q = p.pow(v);
            let d = self.moduli[i];
            coords[i] = ((coords[i] as u128 + (d / q) as u128) % d as u128) as u64;
        }
        let e = GroupElement { coords };
        debug_assert_eq!(self.order_of(&e).unwrap(), self.exponent);
        e
    }

    /// Iterates over all elements in lexicographic coordinate order,
    /// identity first. Fails with `BudgetExceeded` for groups larger than
    /// [`ENUMERATION_BUDGET`].
    pub fn elements(&self) -> Result<Elements<'_>, GroupError> {
        match self.order {
            Some(order) if order <= ENUMERATION_BUDGET => Ok(Elements {
                spec: self,
                next: Some(vec![0; self.moduli.len()]),
            }),
            _ => Err(GroupError::BudgetExceeded {
                order: self.order,
                budget: ENUMERATION_BUDGET,
            }),
        }
    }

    /// The position of `a` in lexicographic enumeration order.
    pub fn index_of(&self, a: &GroupElement) -> Result<u128, GroupError> {
        self.check_membership(a)?;
        let mut idx: u128 = 0;
        for (&c, &d) in a.coords.iter().zip(&self.moduli) {
            idx = idx * d as u128 + c as u128;
        }
        Ok(idx)
    }

    /// The element at position `idx` in lexicographic enumeration order.
    /// `idx` must be less than the group order.
    pub fn element_at(&self, mut idx: u128) -> GroupElement {
        debug_assert!(self.order.map_or(true, |o| idx < o));
        let mut coords = vec![0u64; self.moduli.len()];
        for i in (0..self.moduli.len()).rev() {
            let d = self.moduli[i] as u128;
            coords[i] = (idx % d) as u64;
            idx /= d;
        }
        GroupElement { coords }
    }
}

impl fmt::Debug for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupSpec{:?}", self.moduli)
    }
}

impl Serialize for GroupSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.moduli.len()))?;
        for d in &self.moduli {
            seq.serialize_element(d)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let moduli = Vec::<u64>::deserialize(deserializer)?;
        GroupSpec::new(moduli).map_err(de::Error::custom)
    }
}

/// An element of a [`GroupSpec`], stored as reduced coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement {
    coords: Vec<u64>,
}

impl GroupElement {
    /// The coordinate vector.
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    /// Whether this is the identity.
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords)
    }
}

/// Lexicographic element iterator returned by [`GroupSpec::elements`].
pub struct Elements<'a> {
    spec: &'a GroupSpec,
    next: Option<Vec<u64>>,
}

impl Iterator for Elements<'_> {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut advanced = false;
        for i in (0..succ.len()).rev() {
            if succ[i] + 1 < self.spec.moduli[i] {
                succ[i] += 1;
                succ[i + 1..].iter_mut().for_each(|c| *c = 0);
                advanced = true;
                break;
            }
        }
        if advanced {
            self.next = Some(succ);
        }
        Some(GroupElement { coords: current })
    }
}

/// Prime factorization by trial division, `(prime, multiplicity)` pairs in
/// increasing prime order.
pub(crate) fn prime_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p <= n / p {
        if n % p == 0 {
            let mut mult = 0;
            while n % p == 0 {
                n /= p;
                mult += 1;
            }
            out.push((p, mult));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn padic_valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}
