//! Report assembly. The JSON report is a pure function of the
//! configuration and the toolkit version: no timestamps, no timing,
//! no environment. Timing lives in the human-readable markdown copy
//! only.

use crate::cases::pretty;
use crate::checks::{CaseRecord, Status, CHECKS};
use crate::config::SweepConfig;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub not_applicable: usize,
}

pub fn summarize(records: &[CaseRecord]) -> Summary {
    let mut s = Summary {
        total: records.len(),
        ..Summary::default()
    };
    for r in records {
        match r.status {
            Status::Pass => s.pass += 1,
            Status::Fail => s.fail += 1,
            Status::NotApplicable => s.not_applicable += 1,
        }
    }
    s
}

pub fn report_json(config_hash: &str, records: &[CaseRecord]) -> String {
    let s = summarize(records);
    let cases: Vec<Value> = records.iter().map(|r| r.to_json()).collect();
    let doc = json!({
        "schema": "report.v1",
        "version": formclass::VERSION,
        "config_hash": config_hash,
        "summary": {
            "total": s.total,
            "pass": s.pass,
            "fail": s.fail,
            "not_applicable": s.not_applicable,
        },
        "cases": cases,
    });
    pretty(&doc)
}

pub fn cases_json(records: &[CaseRecord]) -> String {
    let cases: Vec<Value> = records.iter().map(|r| r.to_json()).collect();
    pretty(&Value::Array(cases))
}

pub fn report_markdown(
    cfg: &SweepConfig,
    config_hash: &str,
    records: &[CaseRecord],
    elapsed: Duration,
) -> String {
    let s = summarize(records);
    let mut md = String::new();
    writeln!(md, "# formclass verification report\n").unwrap();
    writeln!(md, "- toolkit version: {}", formclass::VERSION).unwrap();
    writeln!(md, "- config hash: `{config_hash}`").unwrap();
    let discs: Vec<String> = cfg.discriminants.iter().map(|d| d.to_string()).collect();
    let levels: Vec<String> = cfg.levels.iter().map(|n| n.to_string()).collect();
    writeln!(md, "- discriminants: {}", discs.join(", ")).unwrap();
    writeln!(md, "- levels: {}", levels.join(", ")).unwrap();
    writeln!(md, "- group templates: {}", cfg.group_templates.join(" ")).unwrap();
    writeln!(
        md,
        "- cases: {} total, {} pass, {} fail, {} not applicable",
        s.total, s.pass, s.fail, s.not_applicable
    )
    .unwrap();
    writeln!(md, "- elapsed: {:.2} s\n", elapsed.as_secs_f64()).unwrap();

    writeln!(md, "## Results by check\n").unwrap();
    writeln!(md, "| check | pass | fail | not applicable |").unwrap();
    writeln!(md, "|---|---:|---:|---:|").unwrap();
    let mut by_check: BTreeMap<&str, (usize, usize, usize)> =
        CHECKS.iter().map(|&c| (c, (0, 0, 0))).collect();
    for r in records {
        let e = by_check.entry(r.check.as_str()).or_default();
        match r.status {
            Status::Pass => e.0 += 1,
            Status::Fail => e.1 += 1,
            Status::NotApplicable => e.2 += 1,
        }
    }
    for (check, (p, f, a)) in &by_check {
        writeln!(md, "| {check} | {p} | {f} | {a} |").unwrap();
    }

    writeln!(md, "\n## Failures\n").unwrap();
    let failures: Vec<&CaseRecord> = records.iter().filter(|r| r.status == Status::Fail).collect();
    if failures.is_empty() {
        writeln!(md, "None.").unwrap();
    } else {
        for r in failures {
            writeln!(
                md,
                "- disc {} level {} group `{}` check `{}` — repro: `{}`",
                r.disc,
                r.level,
                r.group,
                r.check,
                r.repro()
            )
            .unwrap();
        }
    }
    md
}
