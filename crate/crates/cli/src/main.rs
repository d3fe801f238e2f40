//! Binary front end: argument parsing, output formatting, and exit codes.
//!
//! Exit codes are part of the interface: 0 means every check passed or a
//! certificate was produced, 1 means an expected negative (a condition or
//! hypothesis the input genuinely fails), 2 means usage or I/O trouble, and
//! 3 flags research-grade alarms — contradictions of statements the library
//! treats as proven, criterion violations, or surviving counterexample
//! candidates.

use std::env;
use std::path::PathBuf;
use std::process;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use permcert::condition::{check_condition, lift_integers, GroupInstance};
use permcert::covering::{parse_rational, CoveringSystem, CriterionVerdict, IntegerTrace, RationalAP};
use permcert::groups::GroupSpec;
use permcert::solvers::{solve_assignment, solve_permutation, AssignmentProblem, PermutationOutcome};
use permcert::subset_sums::residue_coverage;
use permcert::SolverError;
use permcert_cli::explore::{
    DEFAULT_COEFF_MAX, DEFAULT_COUNT, DEFAULT_K_MAX, DEFAULT_MAX_EXHAUSTIVE,
};
use permcert_cli::{
    analyze_log, render_report, run_experiment, ExperimentConfig, Filter, Mode, Strategy,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "permcert",
    version,
    about = "Certify permutation, coverage, and covering-system statements over finite abelian groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the divisor condition for multipliers modulo n.
    Check {
        /// The modulus n (the group is Z/n).
        #[arg(long)]
        n: u64,
        /// Comma-separated integers m_1,...,m_{n-1}.
        #[arg(long, allow_hyphen_values = true)]
        m: String,
    },
    /// Find a certifying permutation over a finite abelian group, or show
    /// which divisor blocks one.
    Solve {
        /// Group moduli as JSON, e.g. "[4,2]".
        #[arg(long)]
        group: String,
        /// Element coordinates as JSON, e.g. "[[1,0],[2,1],[3,0]]".
        #[arg(long)]
        elements: String,
    },
    /// Compute which residues are reachable as subset sums of the
    /// multipliers.
    Coverage {
        /// The modulus n.
        #[arg(long)]
        n: u64,
        /// Comma-separated integers m_1,...,m_{n-1}.
        #[arg(long, allow_hyphen_values = true)]
        m: String,
    },
    /// Solve the shifted-sum assignment problem modulo n.
    Thm13 {
        /// The modulus n.
        #[arg(long)]
        n: u64,
        /// Comma-separated multipliers m_1,...,m_{n-1} with gcd(m_s, n) <= s.
        #[arg(long, allow_hyphen_values = true)]
        m: String,
        /// Comma-separated shifts a_1,...,a_{n-1}.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
    },
    /// Analyze a system of rational arithmetic progressions.
    Cover {
        /// JSON list of [alpha, beta] string pairs, e.g.
        /// '[["1/2","3"],["0","2"]]'.
        #[arg(long)]
        system: String,
        /// Also check the distinct-sums covering criterion.
        #[arg(long)]
        verify_lemma: bool,
    },
    /// Run a batch experiment and write a JSONL log.
    Explore {
        #[arg(long, value_enum)]
        mode: Mode,
        /// Group moduli as JSON, e.g. "[6,2]"; required for all modes but
        /// lemma31.
        #[arg(long)]
        group: Option<String>,
        #[arg(long, value_enum, default_value = "random")]
        strategy: Strategy,
        /// Number of sampled instances (random strategy only).
        #[arg(long, default_value_t = DEFAULT_COUNT)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; defaults to $PERMCERT_JOBS, then 1.
        #[arg(long)]
        jobs: Option<usize>,
        /// Path of the JSONL log to write.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "none")]
        filter: Filter,
        /// Deduplicate exhaustive enumeration by element multiset.
        #[arg(long)]
        dedup: bool,
        /// Largest sampled system size (lemma31).
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        k_max: usize,
        /// Magnitude bound for sampled numerators and denominators
        /// (lemma31).
        #[arg(long, default_value_t = DEFAULT_COEFF_MAX)]
        coeff_max: u64,
        /// Cap on the exhaustive enumeration size.
        #[arg(long, default_value_t = DEFAULT_MAX_EXHAUSTIVE)]
        max_exhaustive: u64,
    },
    /// Aggregate a JSONL log and replay any alarms.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            process::exit(2);
        }
    }
}

fn run(command: Command) -> anyhow::Result<i32> {
    match command {
        Command::Check { n, m } => {
            let m = parse_csv(&m)?;
            let instance = lift_integers(n, &m)?;
            let report = check_condition(&instance);
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Solve { group, elements } => {
            let instance = parse_group_instance(&group, &elements)?;
            match solve_permutation(&instance) {
                Ok(PermutationOutcome::Certified(cert)) => {
                    println!("{}", serde_json::to_string_pretty(&cert)?);
                    Ok(0)
                }
                Ok(PermutationOutcome::ConditionFailed(report)) => {
                    println!("{}", serde_json::to_string_pretty(&report)?);
                    Ok(1)
                }
                Err(SolverError::TheoremContradiction { context }) => {
                    eprintln!("contradiction: {context}");
                    Ok(3)
                }
                Err(err) => Err(err.into()),
            }
        }
        Command::Coverage { n, m } => {
            let m = parse_csv(&m)?;
            let coverage = residue_coverage(n, &m)?;
            println!("{}", serde_json::to_string_pretty(&coverage)?);
            Ok(if coverage.complete { 0 } else { 1 })
        }
        Command::Thm13 { n, m, a } => {
            let m = parse_csv(&m)?;
            let a = parse_csv(&a)?;
            match AssignmentProblem::new(n, &m, &a) {
                Ok(problem) => match solve_assignment(&problem) {
                    Ok(cert) => {
                        println!("{}", serde_json::to_string_pretty(&cert)?);
                        Ok(0)
                    }
                    Err(SolverError::TheoremContradiction { context }) => {
                        eprintln!("contradiction: {context}");
                        Ok(3)
                    }
                    Err(err) => Err(err.into()),
                },
                Err(err @ SolverError::HypothesisViolated { .. }) => {
                    eprintln!("{err}");
                    Ok(1)
                }
                Err(err) => Err(err.into()),
            }
        }
        Command::Cover {
            system,
            verify_lemma,
        } => {
            let pairs: Vec<(String, String)> = serde_json::from_str(&system)
                .context("--system must be a JSON list of [alpha, beta] string pairs")?;
            let mut aps = Vec::with_capacity(pairs.len());
            for (alpha, beta) in &pairs {
                aps.push(RationalAP::new(parse_rational(alpha)?, parse_rational(beta)?)?);
            }
            let system = CoveringSystem::new(aps)?;
            let traces: Vec<String> = system.traces().iter().map(trace_string).collect();
            let covers = system.covers_all_integers()?;
            let mut output = json!({
                "system": system,
                "traces": traces,
                "covers_all_integers": covers,
            });
            let mut code = if covers { 0 } else { 1 };
            if verify_lemma {
                let verdict = system.verify_criterion()?;
                if !verdict.is_consistent() {
                    code = 3;
                }
                output["criterion"] = criterion_json(&verdict);
            }
            println!("{}", serde_json::to_string_pretty(&output)?);
            Ok(code)
        }
        Command::Explore {
            mode,
            group,
            strategy,
            count,
            seed,
            jobs,
            out,
            filter,
            dedup,
            k_max,
            coeff_max,
            max_exhaustive,
        } => {
            let group = group
                .map(|text| {
                    serde_json::from_str::<Vec<u64>>(&text)
                        .context("--group must be a JSON list of moduli, e.g. \"[6,2]\"")
                })
                .transpose()?;
            let config = ExperimentConfig {
                mode,
                group,
                strategy,
                count,
                seed,
                filter,
                dedup,
                k_max,
                coeff_max,
                max_exhaustive,
            };
            let jobs = resolve_jobs(jobs)?;
            let start = Instant::now();
            let summary = run_experiment(&config, jobs, &out)?;
            // Timing goes to the console only; the log stays reproducible.
            println!("wrote {} records to {}", summary.total, out.display());
            for (verdict, count) in &summary.verdicts {
                println!("  {verdict}: {count}");
            }
            println!("alarms: {}", summary.alarms);
            println!("elapsed: {:.2?}", start.elapsed());
            Ok(summary.exit_code())
        }
        Command::Report { input } => {
            let analysis = analyze_log(&input)?;
            print!("{}", render_report(&analysis));
            Ok(analysis.exit_code())
        }
    }
}

fn parse_csv(text: &str) -> anyhow::Result<Vec<i64>> {
    text.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<i64>()
                .with_context(|| format!("invalid integer {part:?} in list"))
        })
        .collect()
}

fn parse_group_instance(group: &str, elements: &str) -> anyhow::Result<GroupInstance> {
    let moduli: Vec<u64> = serde_json::from_str(group)
        .context("--group must be a JSON list of moduli, e.g. \"[4,2]\"")?;
    let coords: Vec<Vec<u64>> = serde_json::from_str(elements)
        .context("--elements must be a JSON list of coordinate lists, e.g. \"[[1,0],[2,1]]\"")?;
    let spec = GroupSpec::new(moduli)?;
    let elems = coords
        .into_iter()
        .map(|c| spec.element(c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GroupInstance::new(spec, elems)?)
}

fn trace_string(trace: &IntegerTrace) -> String {
    match trace {
        IntegerTrace::Empty => "empty".to_string(),
        IntegerTrace::Class { residue, modulus } => format!("{residue}+{modulus}Z"),
    }
}

fn criterion_json(verdict: &CriterionVerdict) -> serde_json::Value {
    match verdict {
        CriterionVerdict::Consistent {
            distinct_sums,
            longest_run,
            covers_all,
        } => json!({
            "status": "consistent",
            "distinct_sums": distinct_sums,
            "longest_run": longest_run,
            "covers_all": covers_all,
        }),
        CriterionVerdict::Violation {
            distinct_sums,
            run_start,
            run_length,
        } => json!({
            "status": "violation",
            "distinct_sums": distinct_sums,
            "run_start": run_start.to_string(),
            "run_length": run_length,
        }),
    }
}

fn resolve_jobs(flag: Option<usize>) -> anyhow::Result<usize> {
    let jobs = match flag {
        Some(jobs) => jobs,
        None => match env::var("PERMCERT_JOBS") {
            Ok(value) => value
                .trim()
                .parse()
                .with_context(|| format!("PERMCERT_JOBS must be a positive integer, got {value:?}"))?,
            Err(_) => 1,
        },
    };
    anyhow::ensure!(jobs >= 1, "--jobs must be at least 1");
    Ok(jobs)
}
