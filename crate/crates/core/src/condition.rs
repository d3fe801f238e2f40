//! The divisor condition on element sequences.
//!
//! For a group of exponent `n` and elements `a_1, ..., a_{n-1}`, the
//! condition asks that for every divisor `d` of `n` at least `d - 1` of the
//! elements survive multiplication by `n/d`, i.e.
//! `#{ s : (n/d) * a_s != 0 } >= d - 1`.
//!
//! Over `Z/n` with integer data `m_s`, `(n/d) * m_s != 0 (mod n)` is the same
//! as `d` not dividing `m_s`, so [`lift_integers`] followed by
//! [`check_condition`] decides the integer form of the condition as well.

use serde::{Deserialize, Serialize};

use crate::groups::{GroupElement, GroupSpec};
use crate::ConditionError;

/// All divisors of `n` in increasing order. `n = 0` is rejected.
pub fn divisors(n: u64) -> Result<Vec<u64>, ConditionError> {
    if n == 0 {
        return Err(ConditionError::ZeroInput);
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = 1;
    while i <= n / i {
        if n % i == 0 {
            small.push(i);
            if i != n / i {
                large.push(n / i);
            }
        }
        i += 1;
    }
    large.reverse();
    small.extend(large);
    Ok(small)
}

/// A group together with exactly `exponent - 1` elements, the shape every
/// solver in this crate consumes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupInstance {
    group: GroupSpec,
    elements: Vec<GroupElement>,
}

impl GroupInstance {
    /// Validates the element count against the exponent and each element
    /// against the group.
    pub fn new(
        group: GroupSpec,
        elements: Vec<GroupElement>,
    ) -> Result<Self, ConditionError> {
        let expected = group.exponent() - 1;
        if elements.len() as u64 != expected {
            return Err(ConditionError::WrongLength {
                expected,
                got: elements.len() as u64,
            });
        }
        for e in &elements {
            if !group.contains(e) {
                return Err(ConditionError::Group(crate::GroupError::SpecMismatch));
            }
        }
        Ok(GroupInstance { group, elements })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    /// The element at 1-based position `s` (positions run `1..=n-1`).
    pub fn element(&self, s: u64) -> &GroupElement {
        &self.elements[(s - 1) as usize]
    }

    /// A compact `group ... elements ...` rendering for diagnostics.
    pub fn describe(&self) -> String {
        format!(
            "group {:?}, elements {:?}",
            self.group.moduli(),
            self.elements
        )
    }
}

/// One divisor row of a [`ConditionReport`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub d: u64,
    pub count: u64,
    pub required: u64,
    pub ok: bool,
}

/// The full per-divisor tally for an instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub n: u64,
    pub rows: Vec<ConditionRow>,
    pub passed: bool,
    pub first_violation: Option<u64>,
}

/// Evaluates the divisor condition, one row per divisor of the exponent in
/// increasing order; `first_violation` is the least divisor whose row fails.
pub fn check_condition(instance: &GroupInstance) -> ConditionReport {
    let spec = instance.group();
    let n = spec.exponent();
    let mut rows = Vec::new();
    let mut first_violation = None;
    for d in divisors(n).expect("exponent is at least 2") {
        let q = n / d;
        let count = instance
            .elements()
            .iter()
            .filter(|a| !spec.scalar_mul(q, a).expect("validated instance").is_zero())
            .count() as u64;
        let required = d - 1;
        let ok = count >= required;
        if !ok && first_violation.is_none() {
            first_violation = Some(d);
        }
        rows.push(ConditionRow {
            d,
            count,
            required,
            ok,
        });
    }
    ConditionReport {
        n,
        rows,
        passed: first_violation.is_none(),
        first_violation,
    }
}

/// Reduces integers `m_1, ..., m_{n-1}` into `Z/n` and packages them as an
/// instance over the cyclic group of order `n`.
pub fn lift_integers(n: u64, m: &[i64]) -> Result<GroupInstance, ConditionError> {
    let group = GroupSpec::new(vec![n])?;
    if m.len() as u64 != n - 1 {
        return Err(ConditionError::WrongLength {
            expected: n - 1,
            got: m.len() as u64,
        });
    }
    let elements = m
        .iter()
        .map(|&v| {
            let r = (v as i128).rem_euclid(n as i128) as u64;
            group.element(vec![r]).expect("reduced coordinate")
        })
        .collect();
    GroupInstance::new(group, elements)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic_instance(n: u64, m: &[i64]) -> GroupInstance {
        lift_integers(n, m).unwrap()
    }

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(12).unwrap(), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(7).unwrap(), vec![1, 7]);
        assert_eq!(divisors(1).unwrap(), vec![1]);
        assert!(matches!(divisors(0), Err(ConditionError::ZeroInput)));
    }

    #[test]
    fn passing_report_over_z4() {
        let report = check_condition(&cyclic_instance(4, &[1, 2, 3]));
        assert!(report.passed);
        assert_eq!(report.first_violation, None);
        let d2 = report.rows.iter().find(|r| r.d == 2).unwrap();
        assert_eq!((d2.count, d2.required), (2, 1));
        let d4 = report.rows.iter().find(|r| r.d == 4).unwrap();
        assert_eq!((d4.count, d4.required), (3, 3));
    }

    #[test]
    fn failing_report_flags_least_divisor() {
        let report = check_condition(&cyclic_instance(3, &[3, 3]));
        assert!(!report.passed);
        assert_eq!(report.first_violation, Some(3));
        let d3 = report.rows.iter().find(|r| r.d == 3).unwrap();
        assert_eq!((d3.count, d3.required, d3.ok), (0, 2, false));
    }

    #[test]
    fn non_cyclic_exponent_drives_the_length() {
        let group = GroupSpec::new(vec![2, 2]).unwrap();
        let e = group.element(vec![1, 0]).unwrap();
        let instance = GroupInstance::new(group, vec![e]).unwrap();
        assert!(check_condition(&instance).passed);
    }

    #[test]
    fn lift_reduces_into_range() {
        let instance = cyclic_instance(4, &[-1, 6, 3]);
        let coords: Vec<_> = instance
            .elements()
            .iter()
            .map(|e| e.coords()[0])
            .collect();
        assert_eq!(coords, vec![3, 2, 3]);
    }

    #[test]
    fn instance_length_is_checked() {
        assert!(matches!(
            lift_integers(4, &[1, 2]),
            Err(ConditionError::WrongLength {
                expected: 3,
                got: 2
            })
        ));
        let group = GroupSpec::new(vec![4, 2]).unwrap();
        let id = group.identity();
        assert!(GroupInstance::new(group, vec![id]).is_err());
    }

    #[test]
    fn report_wire_format() {
        let report = check_condition(&cyclic_instance(2, &[1]));
        assert_eq!(
            serde_json::to_string(&report).unwrap(),
            "{\"n\":2,\"rows\":[{\"d\":1,\"count\":0,\"required\":0,\"ok\":true},\
             {\"d\":2,\"count\":1,\"required\":1,\"ok\":true}],\
             \"passed\":true,\"first_violation\":null}"
        );
    }
}
