//! Acceptance gate. Each test covers one release criterion end to end and
//! prints a single `ACCEPTANCE <k> [...]: PASS (...)` line with instance
//! counts and elapsed time (visible with `-- --nocapture`). Runtime budgets
//! are asserted where a criterion carries one.

use std::collections::BTreeSet;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use permcert::condition::{check_condition, lift_integers, GroupInstance};
use permcert::covering::system_from_permutation;
use permcert::groups::GroupSpec;
use permcert::matching::{brute_force_max_matching, hall_violator, max_matching, BipartiteGraph};
use permcert::solvers::{
    brute_force_assignment, brute_force_permutation, solve_assignment, solve_permutation,
    verify_assignment, verify_permutation, AssignmentProblem, PermutationOutcome,
};
use permcert::subset_sums::{check_sum_bound, residue_coverage, BoundVerdict};
use permcert::{SolverError, SubsetSumError};
use permcert_cli::{
    analyze_log, run_experiment, ExperimentConfig, Filter, Mode, ReplayStatus, Strategy, Verdict,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Asserts the budget (when the criterion has one) and prints the line the
/// gate is graded on.
fn finish(criterion: u32, role: &str, details: &str, started: Instant, budget_secs: Option<u64>) {
    let elapsed = started.elapsed();
    if let Some(limit) = budget_secs {
        assert!(
            elapsed < Duration::from_secs(limit),
            "criterion {criterion} took {elapsed:?}, budget {limit}s"
        );
    }
    println!("ACCEPTANCE {criterion} [{role}]: PASS ({details}; elapsed {elapsed:.2?})");
}

/// Visits every tuple in `[0, base)^len` in lexicographic order.
fn for_each_tuple(base: u64, len: usize, mut f: impl FnMut(&[u64])) {
    let mut digits = vec![0u64; len];
    loop {
        f(&digits);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < base {
                break;
            }
            digits[i] = 0;
        }
    }
}

fn cyclic_instance(n: u64, multipliers: &[u64]) -> GroupInstance {
    let signed: Vec<i64> = multipliers.iter().map(|&v| v as i64).collect();
    lift_integers(n, &signed).expect("in-range multipliers")
}

fn group_instance(spec: &GroupSpec, indices: &[u64]) -> GroupInstance {
    let elements = indices
        .iter()
        .map(|&idx| spec.element_at(idx as u128))
        .collect();
    GroupInstance::new(spec.clone(), elements).expect("index enumeration stays in range")
}

/// Solver versus condition versus (optionally) the brute-force scan; returns
/// whether the instance certified.
fn assert_equivalence(instance: &GroupInstance, use_brute: bool) -> bool {
    let report = check_condition(instance);
    match solve_permutation(instance).expect("solver runs") {
        PermutationOutcome::Certified(cert) => {
            assert!(report.passed, "certificate without the condition: {instance:?}");
            let recheck = verify_permutation(instance, &cert.sigma).expect("valid bijection");
            assert!(recheck.certified);
            if use_brute {
                assert!(
                    brute_force_permutation(instance)
                        .expect("within brute-force limits")
                        .is_some(),
                    "solver certified but the scan found nothing: {instance:?}"
                );
            }
            true
        }
        PermutationOutcome::ConditionFailed(failed) => {
            assert!(!report.passed, "refusal despite the condition: {instance:?}");
            assert_eq!(failed.first_violation, report.first_violation);
            if use_brute {
                assert!(
                    brute_force_permutation(instance)
                        .expect("within brute-force limits")
                        .is_none(),
                    "scan found a certificate the solver missed: {instance:?}"
                );
            }
            false
        }
    }
}

#[test]
fn criterion_1_cyclic_sweeps_certify_exactly_on_the_condition() {
    let started = Instant::now();
    let mut instances = 0u64;
    let mut certified = 0u64;
    for n in 2..=7u64 {
        for_each_tuple(n, (n - 1) as usize, |digits| {
            let m: Vec<u64> = digits.iter().map(|&d| d + 1).collect();
            let instance = cyclic_instance(n, &m);
            if assert_equivalence(&instance, false) {
                certified += 1;
            }
            instances += 1;
        });
    }
    finish(
        1,
        "cyclic certificate/condition equivalence",
        &format!("{instances} instances over n=2..=7, {certified} certified"),
        started,
        Some(60),
    );
}

#[test]
fn criterion_2_non_cyclic_groups_certify_exactly_on_the_condition() {
    let started = Instant::now();
    let shapes: [&[u64]; 6] = [&[2, 2], &[3, 3], &[4, 2], &[6, 2], &[6, 3], &[8, 2]];
    let mut exhaustive_instances = 0u64;
    let mut random_instances = 0u64;
    let mut rng = ChaCha8Rng::seed_from_u64(1202);
    for moduli in shapes {
        let spec = GroupSpec::new(moduli.to_vec()).unwrap();
        let order = spec.order().unwrap() as u64;
        let len = (spec.exponent() - 1) as usize;
        let use_brute = spec.exponent() <= 6;
        let space = (0..len).try_fold(1u64, |acc, _| acc.checked_mul(order));
        match space {
            Some(space) if space <= 1_000_000 => {
                for_each_tuple(order, len, |indices| {
                    assert_equivalence(&group_instance(&spec, indices), use_brute);
                    exhaustive_instances += 1;
                });
            }
            _ => {
                for _ in 0..10_000 {
                    let indices: Vec<u64> =
                        (0..len).map(|_| rng.gen_range(0..order)).collect();
                    assert_equivalence(&group_instance(&spec, &indices), use_brute);
                    random_instances += 1;
                }
            }
        }
    }
    finish(
        2,
        "non-cyclic certificate/condition equivalence",
        &format!(
            "{exhaustive_instances} exhaustive + {random_instances} random instances over 6 group shapes"
        ),
        started,
        Some(120),
    );
}

#[test]
fn criterion_3_certificates_always_imply_the_condition() {
    let started = Instant::now();
    // Solver-produced certificates on a full small sweep.
    let mut solver_certified = 0u64;
    for_each_tuple(9, 2, |indices| {
        let spec = GroupSpec::new(vec![3, 3]).unwrap();
        let instance = group_instance(&spec, indices);
        if let PermutationOutcome::Certified(_) = solve_permutation(&instance).unwrap() {
            assert!(check_condition(&instance).passed);
            solver_certified += 1;
        }
    });
    // Oracle-produced certificates.
    let mut oracle_certified = 0u64;
    for n in 2..=5u64 {
        for_each_tuple(n, (n - 1) as usize, |digits| {
            let m: Vec<u64> = digits.iter().map(|&d| d + 1).collect();
            let instance = cyclic_instance(n, &m);
            if brute_force_permutation(&instance).unwrap().is_some() {
                assert!(check_condition(&instance).passed);
                oracle_certified += 1;
            }
        });
    }
    // Random bijections that happen to verify.
    let pool: [&[u64]; 8] = [
        &[4],
        &[5],
        &[6],
        &[7],
        &[2, 2],
        &[3, 3],
        &[4, 2],
        &[6, 2],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut random_certified = 0u64;
    for trial in 0..10_000u64 {
        let spec = GroupSpec::new(pool[(trial % 8) as usize].to_vec()).unwrap();
        let order = spec.order().unwrap() as u64;
        let len = (spec.exponent() - 1) as usize;
        let indices: Vec<u64> = (0..len).map(|_| rng.gen_range(0..order)).collect();
        let instance = group_instance(&spec, &indices);
        let mut sigma: Vec<u64> = (1..=len as u64).collect();
        sigma.shuffle(&mut rng);
        let cert = verify_permutation(&instance, &sigma).expect("valid bijection");
        if cert.certified {
            assert!(
                check_condition(&instance).passed,
                "verified bijection on a condition-failing instance: {instance:?}"
            );
            random_certified += 1;
        }
    }
    assert!(random_certified > 0, "no random bijection ever verified");
    finish(
        3,
        "certificates imply the condition",
        &format!(
            "{solver_certified} solver + {oracle_certified} oracle + {random_certified} random-bijection certificates"
        ),
        started,
        None,
    );
}

#[test]
fn criterion_4_condition_passing_multipliers_cover_every_residue() {
    let started = Instant::now();
    let mut exhaustive_passing = 0u64;
    for n in 2..=7u64 {
        for_each_tuple(n, (n - 1) as usize, |digits| {
            let m: Vec<i64> = digits.iter().map(|&d| d as i64 + 1).collect();
            let instance = lift_integers(n, &m).unwrap();
            if check_condition(&instance).passed {
                let coverage = residue_coverage(n, &m).unwrap();
                assert!(coverage.complete, "n={n}, m={m:?} left residues uncovered");
                exhaustive_passing += 1;
            }
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1204);
    let mut random_passing = 0u64;
    for n in 8..=30u64 {
        let mut kept = 0;
        while kept < 10_000 {
            let m: Vec<i64> = (1..n).map(|_| rng.gen_range(1..=n) as i64).collect();
            let instance = lift_integers(n, &m).unwrap();
            if !check_condition(&instance).passed {
                continue;
            }
            let coverage = residue_coverage(n, &m).unwrap();
            assert!(coverage.complete, "n={n}, m={m:?} left residues uncovered");
            kept += 1;
            random_passing += 1;
        }
    }
    finish(
        4,
        "condition-passing multipliers cover all residues",
        &format!(
            "{exhaustive_passing} exhaustive (n<=7) + {random_passing} random (n=8..=30) passing tuples"
        ),
        started,
        Some(90),
    );
}

#[test]
fn criterion_5_assignments_exist_for_every_hypothesis_pair() {
    let started = Instant::now();
    let mut exhaustive_pairs = 0u64;
    for n in 2..=5u64 {
        let len = (n - 1) as usize;
        let mut hypothesis_multipliers: Vec<Vec<i64>> = Vec::new();
        let zeros = vec![0i64; len];
        for_each_tuple(n, len, |digits| {
            let m: Vec<i64> = digits.iter().map(|&d| d as i64 + 1).collect();
            if AssignmentProblem::new(n, &m, &zeros).is_ok() {
                hypothesis_multipliers.push(m);
            }
        });
        for m in &hypothesis_multipliers {
            for_each_tuple(n, len, |digits| {
                let a: Vec<i64> = digits.iter().map(|&d| d as i64).collect();
                let problem = AssignmentProblem::new(n, m, &a).expect("hypothesis already checked");
                let cert = solve_assignment(&problem)
                    .unwrap_or_else(|err| panic!("n={n}, m={m:?}, a={a:?}: {err}"));
                assert!(cert.certified);
                let recheck = verify_assignment(&problem, &cert.f).unwrap();
                assert!(recheck.certified);
                assert!(
                    brute_force_assignment(&problem)
                        .expect("within brute-force limits")
                        .is_some(),
                    "solver succeeded but the scan found nothing: n={n}, m={m:?}, a={a:?}"
                );
                exhaustive_pairs += 1;
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1203);
    let mut random_solved = 0u64;
    let mut random_rejected = 0u64;
    for _ in 0..10_000u64 {
        let n = rng.gen_range(2..=12u64);
        let m: Vec<i64> = (1..n).map(|_| rng.gen_range(1..=n) as i64).collect();
        let a: Vec<i64> = (1..n).map(|_| rng.gen_range(0..n) as i64).collect();
        match AssignmentProblem::new(n, &m, &a) {
            Ok(problem) => {
                // Zero tolerance for a contradiction: the solve must succeed.
                let cert = solve_assignment(&problem)
                    .unwrap_or_else(|err| panic!("n={n}, m={m:?}, a={a:?}: {err}"));
                assert!(verify_assignment(&problem, &cert.f).unwrap().certified);
                random_solved += 1;
            }
            Err(SolverError::HypothesisViolated { .. }) => random_rejected += 1,
            Err(err) => panic!("unexpected rejection: {err}"),
        }
    }
    finish(
        5,
        "assignment solver on hypothesis pairs",
        &format!(
            "{exhaustive_pairs} exhaustive pairs (n<=5) + {random_solved} random solves, {random_rejected} hypothesis rejects (n<=12)"
        ),
        started,
        Some(120),
    );
}

#[test]
fn criterion_6_sampled_systems_stay_consistent_and_certificates_induce_near_covers() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("systems.jsonl");
    let config = ExperimentConfig {
        mode: Mode::Lemma31,
        group: None,
        strategy: Strategy::Random,
        count: 1000,
        seed: 1206,
        filter: Filter::None,
        dedup: false,
        k_max: 10,
        coeff_max: 12,
        max_exhaustive: 1_000_000,
    };
    let summary = run_experiment(&config, 4, &log).unwrap();
    assert_eq!(summary.total, 1000);
    assert_eq!(summary.verdicts.get(&Verdict::Consistent).copied(), Some(1000));
    assert_eq!(summary.alarms, 0);

    // Every certificate from the cyclic sweeps turns into a system covering
    // exactly 1..n-1 and missing 0, with at least n distinct fractional sums.
    let mut linked = 0u64;
    for n in 2..=7u64 {
        for_each_tuple(n, (n - 1) as usize, |digits| {
            let m: Vec<u64> = digits.iter().map(|&d| d + 1).collect();
            let instance = cyclic_instance(n, &m);
            if let PermutationOutcome::Certified(cert) = solve_permutation(&instance).unwrap() {
                let system = system_from_permutation(n, &m, &cert.sigma).unwrap();
                assert!(
                    system.covers_range(&BigInt::from(1), n - 1),
                    "n={n}, m={m:?}: some of 1..n-1 uncovered"
                );
                assert!(
                    !system.covers_integer(&BigInt::from(0)),
                    "n={n}, m={m:?}: zero should stay uncovered"
                );
                assert!(system.distinct_fractional_sums().unwrap() >= n);
                linked += 1;
            }
        });
    }
    finish(
        6,
        "sampled systems consistent; certificates induce near-covers",
        &format!("1000 sampled systems + {linked} induced systems from certificates"),
        started,
        Some(60),
    );
}

#[test]
fn criterion_7_matching_engine_agrees_with_the_brute_force_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1207);
    let mut deficient = 0u64;
    for _ in 0..1000u64 {
        let left = rng.gen_range(1..=8usize);
        let right = rng.gen_range(1..=8usize);
        let density: f64 = rng.gen_range(0.05..0.95);
        let adjacency: Vec<Vec<usize>> = (0..left)
            .map(|_| (0..right).filter(|_| rng.gen_bool(density)).collect())
            .collect();
        let graph = BipartiteGraph::new(right, adjacency).unwrap();
        let matching = max_matching(&graph);
        assert_eq!(
            matching.size(),
            brute_force_max_matching(&graph).unwrap(),
            "matching size mismatch on {graph:?}"
        );
        let violator = hall_violator(&graph, &matching).unwrap();
        if matching.is_perfect_on_left() {
            assert!(violator.is_none());
        } else {
            let violator = violator.expect("deficient graphs yield a violator");
            assert!(
                violator.neighborhood.len() < violator.left_set.len(),
                "violator is not actually deficient: {violator:?}"
            );
            // Recompute the neighborhood from scratch.
            let expected: BTreeSet<usize> = violator
                .left_set
                .iter()
                .flat_map(|&u| graph.neighbors(u).iter().copied())
                .collect();
            let got: BTreeSet<usize> = violator.neighborhood.iter().copied().collect();
            assert_eq!(got, expected);
            deficient += 1;
        }
    }
    finish(
        7,
        "matching engine versus brute force",
        &format!("1000 random graphs (L,R<=8), {deficient} with deficiency certificates"),
        started,
        Some(10),
    );
}

#[test]
fn criterion_8_bound_sweeps_on_cyclic_and_non_cyclic_groups() {
    let started = Instant::now();

    // Cyclic part: every hypothesis-passing tuple meets the bound; on Z/n a
    // miss would surface as a contradiction error and fail the unwrap.
    let mut cyclic_checked = 0u64;
    for n in 2..=7u64 {
        let spec = GroupSpec::new(vec![n]).unwrap();
        for_each_tuple(n, (n - 1) as usize, |indices| {
            let instance = group_instance(&spec, indices);
            match check_sum_bound(&instance) {
                Ok(check) => {
                    assert_eq!(check.verdict, BoundVerdict::MeetsBound);
                    cyclic_checked += 1;
                }
                Err(SubsetSumError::HypothesisViolated { .. }) => {}
                Err(err) => panic!("n={n}, a={indices:?}: {err}"),
            }
        });
    }

    // Non-cyclic part: sweep every shape with exponent <= 6 and order <= 36
    // through the experiment pipeline, then vet any surviving candidates.
    let mut shapes = Vec::new();
    let mut prefix = Vec::new();
    collect_shapes(&mut prefix, 2, 1, &mut shapes);
    assert!(shapes.contains(&vec![2, 2]) && shapes.contains(&vec![5, 5]));
    let dir = tempfile::tempdir().unwrap();
    let mut swept = 0u64;
    let mut candidates = 0u64;
    for (idx, moduli) in shapes.iter().enumerate() {
        let spec = GroupSpec::new(moduli.clone()).unwrap();
        let order = spec.order().unwrap();
        let len = (spec.exponent() - 1) as usize;
        let space = (0..len).try_fold(1u128, |acc, _| acc.checked_mul(order));
        let exhaustive = matches!(space, Some(space) if space <= 1_000_000);
        let config = ExperimentConfig {
            mode: Mode::Conj12,
            group: Some(moduli.clone()),
            strategy: if exhaustive {
                Strategy::Exhaustive
            } else {
                Strategy::Random
            },
            count: 10_000,
            seed: 1208,
            filter: Filter::Hypothesis,
            dedup: false,
            k_max: 8,
            coeff_max: 12,
            max_exhaustive: 1_000_000,
        };
        let log = dir.path().join(format!("shape-{idx}.jsonl"));
        let summary = run_experiment(&config, 4, &log).unwrap();
        swept += summary.total;
        assert_eq!(summary.verdicts.get(&Verdict::Contradiction), None);
        assert_eq!(summary.verdicts.get(&Verdict::LemmaViolation), None);
        // The hypothesis filter ran at generation time, so nothing here may
        // be a hypothesis violation either.
        assert_eq!(summary.verdicts.get(&Verdict::HypothesisViolated), None);
        if summary.alarms > 0 {
            // A candidate is only reportable when it re-verified under the
            // independent enumeration and still replays from its record.
            assert_eq!(summary.exit_code(), 3);
            let analysis = analyze_log(&log).unwrap();
            for alarm in &analysis.alarms {
                assert_eq!(alarm.record.verdict, Verdict::CandidateCounterexample);
                assert_eq!(alarm.replay, ReplayStatus::Reproduced);
                let payload = alarm.record.payload.as_ref().expect("replayable record");
                assert!(
                    payload["verdict"]["candidate_counterexample"]["enumerated_count"].is_u64(),
                    "candidate without an enumeration recheck: {payload}"
                );
                candidates += 1;
            }
        } else {
            assert_eq!(summary.exit_code(), 0);
        }
    }
    finish(
        8,
        "subset-sum bound sweeps",
        &format!(
            "{cyclic_checked} cyclic instances + {swept} instances over {} non-cyclic shapes, {candidates} candidates",
            shapes.len()
        ),
        started,
        Some(180),
    );
}

/// All multisets of moduli in 2..=6 with exponent <= 6 and order <= 36
/// describing non-cyclic groups.
fn collect_shapes(prefix: &mut Vec<u64>, min: u64, product: u64, out: &mut Vec<Vec<u64>>) {
    if prefix.len() >= 2 {
        let spec = GroupSpec::new(prefix.clone()).unwrap();
        if spec.exponent() <= 6 && !spec.is_cyclic() {
            out.push(prefix.clone());
        }
    }
    for d in min..=6 {
        if product * d > 36 {
            continue;
        }
        prefix.push(d);
        collect_shapes(prefix, d, product * d, out);
        prefix.pop();
    }
}

#[test]
fn criterion_9_experiment_logs_are_byte_deterministic() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        ExperimentConfig {
            mode: Mode::Thm11,
            group: Some(vec![4]),
            strategy: Strategy::Exhaustive,
            count: 0,
            seed: 0,
            filter: Filter::None,
            dedup: false,
            k_max: 8,
            coeff_max: 12,
            max_exhaustive: 1_000_000,
        },
        ExperimentConfig {
            mode: Mode::Conj12,
            group: Some(vec![3, 3]),
            strategy: Strategy::Random,
            count: 500,
            seed: 13,
            filter: Filter::Hypothesis,
            dedup: false,
            k_max: 8,
            coeff_max: 12,
            max_exhaustive: 1_000_000,
        },
        ExperimentConfig {
            mode: Mode::Lemma31,
            group: None,
            strategy: Strategy::Random,
            count: 300,
            seed: 99,
            filter: Filter::None,
            dedup: false,
            k_max: 10,
            coeff_max: 12,
            max_exhaustive: 1_000_000,
        },
    ];
    let body = |path: &std::path::Path| -> Vec<u8> {
        let text = fs::read_to_string(path).unwrap();
        // Everything below the timestamped header line.
        text.lines().skip(1).collect::<Vec<_>>().join("\n").into_bytes()
    };
    for (idx, config) in configs.iter().enumerate() {
        let first = dir.path().join(format!("{idx}-first.jsonl"));
        let second = dir.path().join(format!("{idx}-second.jsonl"));
        let parallel = dir.path().join(format!("{idx}-parallel.jsonl"));
        run_experiment(config, 1, &first).unwrap();
        run_experiment(config, 1, &second).unwrap();
        run_experiment(config, 8, &parallel).unwrap();
        assert_eq!(body(&first), body(&second), "rerun diverged: {config:?}");
        assert_eq!(body(&first), body(&parallel), "jobs=8 diverged: {config:?}");
    }
    // Once more through the installed binary.
    let run_binary = |name: &str, jobs: &str| -> Vec<u8> {
        let log = dir.path().join(name);
        let out = Command::new(env!("CARGO_BIN_EXE_permcert"))
            .args([
                "explore",
                "--mode",
                "thm12",
                "--group",
                "[6]",
                "--strategy",
                "random",
                "--count",
                "200",
                "--seed",
                "5",
                "--jobs",
                jobs,
                "--out",
                log.to_str().unwrap(),
            ])
            .output()
            .expect("binary should run");
        assert!(
            out.status.code() == Some(0) || out.status.code() == Some(1),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        body(&log)
    };
    let serial = run_binary("bin-serial.jsonl", "1");
    let rerun = run_binary("bin-rerun.jsonl", "1");
    let parallel = run_binary("bin-parallel.jsonl", "8");
    assert_eq!(serial, rerun);
    assert_eq!(serial, parallel);
    finish(
        9,
        "byte-deterministic logs",
        "3 library configs + 1 binary config, reruns and jobs=8 identical",
        started,
        None,
    );
}
