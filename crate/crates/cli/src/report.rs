//! Post-hoc analysis of experiment logs: validation, aggregation, alarm
//! replay, and a human-readable rendering.
//!
//! A log is trustworthy only if it parses as header, records in index
//! order, and an optional trailing summary that agrees with the records
//! (the summary may be missing when a run was interrupted). Every alarm
//! record is replayed from its own descriptor before being reported, so a
//! surprising verdict is never echoed without an independent re-check.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

use crate::explore::{
    evaluate_instance, ExperimentRecord, ExploreError, LogHeader, LogLine, LogSummary, Verdict,
};

/// Errors from reading or interpreting a log file.
#[derive(Debug, Error)]
pub enum ReportError {
    #[error("malformed log: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Replay(#[from] ExploreError),
}

/// Outcome of re-running an alarm record's descriptor.
#[derive(Clone, Debug, PartialEq)]
pub enum ReplayStatus {
    /// Re-evaluation produced the logged verdict.
    Reproduced,
    /// Re-evaluation disagreed with the log; the record cannot be trusted.
    Diverged { original: Verdict, replayed: Verdict },
}

/// An alarm record, its verbatim log line, and its replay outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct AlarmRecord {
    pub line: String,
    pub record: ExperimentRecord,
    pub replay: ReplayStatus,
}

/// Aggregated view of one log file.
#[derive(Clone, Debug, PartialEq)]
pub struct LogAnalysis {
    pub header: LogHeader,
    pub total: u64,
    pub verdicts: BTreeMap<Verdict, u64>,
    pub alarms: Vec<AlarmRecord>,
}

impl LogAnalysis {
    pub fn negatives(&self) -> u64 {
        self.verdicts
            .iter()
            .filter(|(v, _)| v.is_negative())
            .map(|(_, c)| c)
            .sum()
    }

    /// Mirrors the experiment exit policy so reports can drive pipelines:
    /// 3 when any alarm is present, 1 for expected negatives, else 0.
    pub fn exit_code(&self) -> i32 {
        if !self.alarms.is_empty() {
            3
        } else if self.negatives() > 0 {
            1
        } else {
            0
        }
    }
}

/// Parses and validates a log, recomputing aggregates from the records and
/// replaying every alarm.
pub fn analyze_log(path: &Path) -> Result<LogAnalysis, ReportError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let first = match lines.next() {
        Some(line) => line?,
        None => return Err(ReportError::Malformed("log is empty".into())),
    };
    let header = match serde_json::from_str::<LogLine>(&first) {
        Ok(LogLine::Header(header)) => header,
        Ok(_) => {
            return Err(ReportError::Malformed(
                "first line is not a header".into(),
            ))
        }
        Err(err) => {
            return Err(ReportError::Malformed(format!(
                "unparseable first line: {err}"
            )))
        }
    };
    let mut verdicts: BTreeMap<Verdict, u64> = BTreeMap::new();
    let mut alarms = Vec::new();
    let mut total = 0u64;
    let mut summary: Option<LogSummary> = None;
    for (offset, line) in lines.enumerate() {
        let line = line?;
        let lineno = offset + 2;
        let parsed: LogLine = serde_json::from_str(&line)
            .map_err(|err| ReportError::Malformed(format!("line {lineno}: {err}")))?;
        match parsed {
            LogLine::Header(_) => {
                return Err(ReportError::Malformed(format!(
                    "line {lineno}: unexpected second header"
                )))
            }
            LogLine::Record(record) => {
                if summary.is_some() {
                    return Err(ReportError::Malformed(format!(
                        "line {lineno}: record after the summary"
                    )));
                }
                if record.index != total {
                    return Err(ReportError::Malformed(format!(
                        "line {lineno}: record index {} where {} was expected",
                        record.index, total
                    )));
                }
                *verdicts.entry(record.verdict).or_insert(0) += 1;
                total += 1;
                if record.verdict.is_alarm() {
                    let replay = match evaluate_instance(&record.instance) {
                        Ok((verdict, _)) if verdict == record.verdict => ReplayStatus::Reproduced,
                        Ok((verdict, _)) => ReplayStatus::Diverged {
                            original: record.verdict,
                            replayed: verdict,
                        },
                        Err(err) => return Err(ReportError::Replay(err)),
                    };
                    alarms.push(AlarmRecord {
                        line,
                        record,
                        replay,
                    });
                }
            }
            LogLine::Summary(s) => {
                if summary.is_some() {
                    return Err(ReportError::Malformed(format!(
                        "line {lineno}: duplicate summary"
                    )));
                }
                summary = Some(s);
            }
        }
    }
    if total == 0 {
        return Err(ReportError::Malformed("log contains no records".into()));
    }
    if let Some(summary) = summary {
        if summary.total != total
            || summary.verdicts != verdicts
            || summary.alarms != alarms.len() as u64
        {
            return Err(ReportError::Malformed(
                "summary line disagrees with the records".into(),
            ));
        }
    }
    Ok(LogAnalysis {
        header,
        total,
        verdicts,
        alarms,
    })
}

/// Renders an analysis as plain text: the run's identity, verdict counts,
/// and either an all-clear line or each alarm echoed verbatim with its
/// replay status.
pub fn render_report(analysis: &LogAnalysis) -> String {
    let mut out = String::new();
    let config = &analysis.header.config;
    out.push_str(&format!(
        "experiment: mode {} / strategy {} / seed {}\n",
        config.mode, config.strategy, config.seed
    ));
    if let Some(group) = &config.group {
        out.push_str(&format!("group: {group:?}\n"));
    }
    out.push_str(&format!(
        "log: version {} / rng {} / jobs {}\n",
        analysis.header.version, analysis.header.rng, analysis.header.jobs
    ));
    out.push_str(&format!("records: {}\n", analysis.total));
    for (verdict, count) in &analysis.verdicts {
        out.push_str(&format!("  {verdict}: {count}\n"));
    }
    if analysis.alarms.is_empty() {
        out.push_str(&format!(
            "all {} instances consistent; no alarms\n",
            analysis.total
        ));
    } else {
        out.push_str(&format!("alarms: {}\n", analysis.alarms.len()));
        for alarm in &analysis.alarms {
            out.push_str(&alarm.line);
            out.push('\n');
            match &alarm.replay {
                ReplayStatus::Reproduced => out.push_str(&format!(
                    "  replay: reproduced {}\n",
                    alarm.record.verdict
                )),
                ReplayStatus::Diverged { original, replayed } => out.push_str(&format!(
                    "  replay: DIVERGED (logged {original}, re-evaluation returned {replayed})\n"
                )),
            }
        }
    }
    out
}
