//! Analysis reports: the per-partition table, interface certificates, the
//! proof log and the system verdict, with a line-delimited JSON encoding.
//!
//! The encoding is one JSON object per line. The first line is the header
//! `{"format":"dimacheck-report","version":1}`; every following line carries a
//! `record` tag (`system`, `row`, `certificate`, `proof`, `global`, `verdict`).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::composer::MessageInterfaceParams;
use crate::dima::config::us_to_ms;
use crate::simulation::Clause;

pub const REPORT_FORMAT: &str = "dimacheck-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowVerdict {
    Safe,
    Unsafe,
    LimitExceeded,
}

impl RowVerdict {
    /// The verdict as printed in the table's Result column.
    pub fn as_cell(self) -> &'static str {
        match self {
            RowVerdict::Safe => "Yes",
            RowVerdict::Unsafe => "No",
            RowVerdict::LimitExceeded => "Limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionRow {
    pub partition: String,
    pub verdict: RowVerdict,
    pub explored_states: u64,
    pub peak_frontier: u64,
    pub elapsed_ms: u64,
    /// What went wrong, for unsafe rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub message: String,
    pub sender: String,
    pub receivers: Vec<String>,
    pub params: MessageInterfaceParams,
    pub holds: bool,
    /// True when the returned relation passed independent re-verification.
    pub verified: bool,
    /// Number of simulation checks run by the parameter search.
    pub attempts: u32,
    pub pairs: u64,
    pub concrete_states: u64,
    pub elapsed_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause: Option<Clause>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "kebab-case")]
pub enum ProofStep {
    /// `P1 ∥ … ∥ Pn ⊨ φ` split into one local property per partition.
    Decompose { partitions: Vec<String> },
    /// `Pj ⪯ A(msg)` established by a simulation check.
    Certificate { sender: String, message: String, holds: bool },
    /// `Pj ⪯ A(m1) ∥ … ∥ A(mk)` for the messages `Pj` sends to `receiver`.
    ComposeAbstractions { sender: String, receiver: String, messages: Vec<String>, holds: bool },
    /// `P1 ∥ … ∥ Pn ⪯ Pi ∥ (∥ A)` from reflexivity of `Pi` and compositionality.
    ComposeSystem { receiver: String, abstractions: Vec<String>, holds: bool },
    /// `Pi ∥ (∥ A) ⊨ φi` by model checking.
    Obligation { partition: String, holds: bool },
    /// `P1 ∥ … ∥ Pn ⊨ φi` by property preservation.
    Preservation { partition: String, holds: bool },
    /// Conjunction of the local conclusions.
    Conclude { schedulable: bool },
}

impl ProofStep {
    pub fn render(&self) -> String {
        let mark = |h: bool| if h { "holds" } else { "not established" };
        match self {
            ProofStep::Decompose { partitions } => {
                let all = partitions.join(" ∥ ");
                let phis: Vec<String> = partitions.iter().map(|p| format!("φ[{p}]")).collect();
                format!("decompose: {all} ⊨ {}", phis.join(" ∧ "))
            }
            ProofStep::Certificate { sender, message, holds } => format!("certificate: {sender} ⪯ A[{message}] ({})", mark(*holds)),
            ProofStep::ComposeAbstractions { sender, receiver, messages, holds } => {
                let a: Vec<String> = messages.iter().map(|m| format!("A[{m}]")).collect();
                format!("abstraction for {receiver}: {sender} ⪯ {} ({})", a.join(" ∥ "), mark(*holds))
            }
            ProofStep::ComposeSystem { receiver, abstractions, holds } => {
                let mut rhs = vec![receiver.clone()];
                rhs.extend(abstractions.iter().map(|m| format!("A[{m}]")));
                format!("composition: system ⪯ {} ({})", rhs.join(" ∥ "), mark(*holds))
            }
            ProofStep::Obligation { partition, holds } => format!("model check: {partition} ∥ env ⊨ φ[{partition}] ({})", mark(*holds)),
            ProofStep::Preservation { partition, holds } => format!("preservation: system ⊨ φ[{partition}] ({})", mark(*holds)),
            ProofStep::Conclude { schedulable } => {
                format!("conclusion: {}", if *schedulable { "system schedulable" } else { "not concluded" })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemVerdict {
    Schedulable,
    NotConcluded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalResult {
    pub verdict: RowVerdict,
    pub explored_states: u64,
    pub peak_frontier: u64,
    pub elapsed_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub system: String,
    pub quantum_us: u64,
    pub rows: Vec<PartitionRow>,
    pub certificates: Vec<CertificateRecord>,
    pub proof_log: Vec<ProofStep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global: Option<GlobalResult>,
    pub verdict: SystemVerdict,
    pub explanation: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
enum Record {
    System { name: String, quantum_us: u64 },
    Row(PartitionRow),
    Certificate(CertificateRecord),
    Proof(ProofStep),
    Global(GlobalResult),
    Verdict { verdict: SystemVerdict, explanation: Vec<String> },
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing or unsupported header")]
    Header,
    #[error("report has no {0} record")]
    Missing(&'static str),
}

impl AnalysisReport {
    pub fn is_schedulable(&self) -> bool {
        self.verdict == SystemVerdict::Schedulable
    }

    pub fn row(&self, partition: &str) -> Option<&PartitionRow> {
        self.rows.iter().find(|r| r.partition == partition)
    }

    pub fn to_jsonl(&self) -> String {
        let mut lines = Vec::new();
        let header = Header { format: REPORT_FORMAT.into(), version: REPORT_VERSION };
        lines.push(serde_json::to_string(&header).expect("header serializes"));
        let mut records = vec![Record::System { name: self.system.clone(), quantum_us: self.quantum_us }];
        records.extend(self.rows.iter().cloned().map(Record::Row));
        records.extend(self.certificates.iter().cloned().map(Record::Certificate));
        records.extend(self.proof_log.iter().cloned().map(Record::Proof));
        records.extend(self.global.iter().cloned().map(Record::Global));
        records.push(Record::Verdict { verdict: self.verdict, explanation: self.explanation.clone() });
        for r in &records {
            lines.push(serde_json::to_string(r).expect("records serialize"));
        }
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }

    pub fn from_jsonl(text: &str) -> Result<AnalysisReport, ReportError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(ReportError::Header)?;
        let header: Header = serde_json::from_str(first).map_err(|_| ReportError::Header)?;
        if header.format != REPORT_FORMAT || header.version != REPORT_VERSION {
            return Err(ReportError::Header);
        }
        let mut system = None;
        let mut verdict = None;
        let mut report = AnalysisReport {
            system: String::new(),
            quantum_us: 0,
            rows: vec![],
            certificates: vec![],
            proof_log: vec![],
            global: None,
            verdict: SystemVerdict::NotConcluded,
            explanation: vec![],
        };
        for (i, line) in lines {
            let rec: Record = serde_json::from_str(line).map_err(|e| ReportError::Malformed { line: i + 1, message: e.to_string() })?;
            match rec {
                Record::System { name, quantum_us } => system = Some((name, quantum_us)),
                Record::Row(r) => report.rows.push(r),
                Record::Certificate(c) => report.certificates.push(c),
                Record::Proof(p) => report.proof_log.push(p),
                Record::Global(g) => report.global = Some(g),
                Record::Verdict { verdict: v, explanation } => verdict = Some((v, explanation)),
            }
        }
        let (name, q) = system.ok_or(ReportError::Missing("system"))?;
        let (v, ex) = verdict.ok_or(ReportError::Missing("verdict"))?;
        report.system = name;
        report.quantum_us = q;
        report.verdict = v;
        report.explanation = ex;
        Ok(report)
    }

    /// Human-readable table. The Mem column is a proxy: explored states.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "system {} (quantum {} ms)", self.system, us_to_ms(self.quantum_us));
        let _ = writeln!(out, "{:<10} {:<7} {:>10} {:>16} {:>14}", "Partition", "Result", "Time(s)", "Mem(states)", "Peak frontier");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<10} {:<7} {:>10.3} {:>16} {:>14}",
                r.partition,
                r.verdict.as_cell(),
                r.elapsed_ms as f64 / 1000.0,
                r.explored_states,
                r.peak_frontier
            );
        }
        if !self.certificates.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(
                out,
                "{:<10} {:<8} {:>10} {:>12} {:>10} {:>10} {:<10}",
                "Message", "Sender", "Period", "InitOffset", "Offset", "Jitter", "Certified"
            );
            for c in &self.certificates {
                let p = &c.params;
                let _ = writeln!(
                    out,
                    "{:<10} {:<8} {:>10} {:>12} {:>10} {:>10} {:<10}",
                    c.message,
                    c.sender,
                    us_to_ms(p.period_us),
                    us_to_ms(p.init_offset_us),
                    us_to_ms(p.offset_us),
                    us_to_ms(p.jitter_us),
                    if c.holds { "yes" } else { "no" }
                );
            }
        }
        for r in &self.rows {
            if let Some(v) = &r.violation {
                let _ = writeln!(out, "\n{}: {v}", r.partition);
                for line in r.trace.iter().flatten() {
                    let _ = writeln!(out, "  {line}");
                }
            }
        }
        if let Some(g) = &self.global {
            let _ = writeln!(
                out,
                "\nglobal check: {} ({} states, {:.3} s)",
                match g.verdict {
                    RowVerdict::Safe => "safe",
                    RowVerdict::Unsafe => "unsafe",
                    RowVerdict::LimitExceeded => "limit exceeded",
                },
                g.explored_states,
                g.elapsed_ms as f64 / 1000.0
            );
            if let Some(v) = &g.violation {
                let _ = writeln!(out, "  {v}");
            }
        }
        let _ = writeln!(out, "\nverdict: {}", match self.verdict {
            SystemVerdict::Schedulable => "schedulable",
            SystemVerdict::NotConcluded => "not-concluded",
        });
        for e in &self.explanation {
            let _ = writeln!(out, "  {e}");
        }
        out
    }

    pub fn render_proof_log(&self) -> String {
        self.proof_log.iter().map(|s| s.render() + "\n").collect()
    }
}
