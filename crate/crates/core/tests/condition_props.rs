//! Properties of the divisor condition: agreement between the integer form
//! (`d` divides `m_s`) and the group form (`(n/d) * a_s = 0`), behavior of
//! the trivial and extreme divisor rows, and monotonicity under replacing an
//! element by one of larger order in the divisibility sense.

use permcert::condition::{check_condition, divisors, lift_integers, GroupInstance};
use permcert::groups::{GroupElement, GroupSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Advances a base-`n` counter holding digits in `1..=n`; false at the end.
fn next_tuple(digits: &mut [u64], n: u64) -> bool {
    for d in digits.iter_mut().rev() {
        if *d < n {
            *d += 1;
            return true;
        }
        *d = 1;
    }
    false
}

#[test]
fn integer_form_agrees_with_group_form() {
    for n in 2u64..=8 {
        let mut m = vec![1u64; (n - 1) as usize];
        loop {
            let signed: Vec<i64> = m.iter().map(|&v| v as i64).collect();
            let report = check_condition(&lift_integers(n, &signed).unwrap());
            for row in &report.rows {
                let direct = m.iter().filter(|&&v| v % row.d != 0).count() as u64;
                assert_eq!(
                    row.count, direct,
                    "count mismatch at n={n}, d={}, m={m:?}",
                    row.d
                );
                assert_eq!(row.ok, direct >= row.d - 1);
            }
            let direct_pass = divisors(n)
                .unwrap()
                .iter()
                .all(|&d| m.iter().filter(|&&v| v % d != 0).count() as u64 >= d - 1);
            assert_eq!(report.passed, direct_pass, "n={n}, m={m:?}");
            if !next_tuple(&mut m, n) {
                break;
            }
        }
    }
}

#[test]
fn trivial_divisor_row_never_fails() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.gen_range(2u64..=24);
        let m: Vec<i64> = (1..n).map(|_| rng.gen_range(-50i64..50)).collect();
        let report = check_condition(&lift_integers(n, &m).unwrap());
        let d1 = &report.rows[0];
        assert_eq!((d1.d, d1.required, d1.ok), (1, 0, true));
    }
}

#[test]
fn largest_divisor_row_counts_nonzero_elements() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let n = rng.gen_range(2u64..=24);
        let m: Vec<i64> = (1..n).map(|_| rng.gen_range(-50i64..50)).collect();
        let instance = lift_integers(n, &m).unwrap();
        let report = check_condition(&instance);
        let last = report.rows.last().unwrap();
        assert_eq!(last.d, n);
        let nonzero = instance.elements().iter().filter(|e| !e.is_zero()).count() as u64;
        assert_eq!(last.count, nonzero);
        assert_eq!(last.ok, nonzero == n - 1);
    }
}

/// Replacing an element by one whose order is a proper multiple of the old
/// order can only grow each row's count: if the old order did not divide
/// `n/d`, neither does any multiple of it.
#[test]
fn satisfied_rows_survive_divisibility_order_upgrades() {
    let shapes: &[&[u64]] = &[&[12], &[8], &[6, 2], &[4, 2], &[2, 2, 3]];
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for moduli in shapes {
        let spec = GroupSpec::new(moduli.to_vec()).unwrap();
        let all: Vec<GroupElement> = spec.elements().unwrap().collect();
        let order = all.len();
        let n = spec.exponent();
        for _ in 0..300 {
            let elements: Vec<GroupElement> = (1..n)
                .map(|_| all[rng.gen_range(0..order)].clone())
                .collect();
            let instance = GroupInstance::new(spec.clone(), elements.clone()).unwrap();
            let before = check_condition(&instance);

            let pos = rng.gen_range(0..elements.len());
            let old_order = spec.order_of(&elements[pos]).unwrap();
            let upgrades: Vec<&GroupElement> = all
                .iter()
                .filter(|e| {
                    let o = spec.order_of(e).unwrap();
                    o > old_order && o % old_order == 0
                })
                .collect();
            let Some(replacement) = upgrades.first() else {
                continue; // already at a maximal order in the divisibility lattice
            };
            let mut upgraded = elements.clone();
            upgraded[pos] = (*replacement).clone();
            let after =
                check_condition(&GroupInstance::new(spec.clone(), upgraded).unwrap());
            for (rb, ra) in before.rows.iter().zip(&after.rows) {
                assert!(ra.count >= rb.count, "count dropped at d={}", rb.d);
                if rb.ok {
                    assert!(ra.ok, "row d={} became unsatisfied", rb.d);
                }
            }
        }
    }
}

#[test]
fn passing_instances_stay_passing_under_element_permutations() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..300 {
        let n = rng.gen_range(2u64..=12);
        let m: Vec<i64> = (1..n).map(|_| rng.gen_range(1i64..=n as i64)).collect();
        let report = check_condition(&lift_integers(n, &m).unwrap());
        let mut shuffled = m.clone();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.gen_range(0..=i));
        }
        let shuffled_report = check_condition(&lift_integers(n, &shuffled).unwrap());
        assert_eq!(report.passed, shuffled_report.passed);
        assert_eq!(report.first_violation, shuffled_report.first_violation);
    }
}
