//! Attack reports: an ordered list of `key=value` fields, rendered either as
//! machine-readable lines or as aligned plain text.

use std::fmt;

use crate::attack::full::FullKeyResult;
use crate::attack::scan::{CandidateList, OpCounts};
use crate::attack::{binomial_lower_tail, binomial_upper_tail};
use crate::combiner::{encode_key, CombinerSpec};
use crate::error::{Error, Result};

/// Candidates listed individually; the rest are only counted.
const LISTED: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportStatus {
    Success,
    Miss,
    Infeasible,
}

impl fmt::Display for ReportStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportStatus::Success => "success",
            ReportStatus::Miss => "miss",
            ReportStatus::Infeasible => "infeasible",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttackReport {
    fields: Vec<(String, String)>,
}

impl AttackReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a field. Keys must be nonempty and free of `=` and whitespace;
    /// values must be single-line.
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        assert!(valid_key(&key), "bad report key {key:?}");
        assert!(!value.contains('\n'), "multi-line report value");
        self.fields.push((key, value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn fields(&self) -> &[(String, String)] {
        &self.fields
    }

    /// Report for a single scan.
    pub fn from_scan(spec: &CombinerSpec, list: &CandidateList) -> Self {
        let mut r = Self::new();
        let status = if list.entries.is_empty() {
            ReportStatus::Miss
        } else {
            ReportStatus::Success
        };
        r.push("status", status);
        r.push("mode", "register");
        r.push("spec", spec.name());
        r.push("register_set", register_set(spec));
        r.push_scan("", spec, list);
        r.push_ops("", &list.ops);
        r.push("wall_ms", list.elapsed.as_millis());
        r
    }

    /// Report for a whole-key recovery.
    pub fn from_full(spec: &CombinerSpec, res: &FullKeyResult) -> Self {
        let mut r = Self::new();
        r.push("status", ReportStatus::Success);
        r.push("mode", "full");
        r.push("spec", spec.name());
        r.push("register_set", register_set(spec));
        for list in &res.per_register {
            let name = spec.registers()[list.targets[0]].name();
            r.push_scan(&format!("{name}."), spec, list);
        }
        r.push("combinations", res.combinations);
        r.push_ops("", &res.ops);
        r.push("wall_ms", res.elapsed.as_millis());
        r.push("keys", res.keys.len());
        for (i, k) in res.keys.iter().enumerate() {
            r.push(format!("key.{i}"), encode_key(k));
        }
        r
    }

    /// Minimal report for a run that stopped with an error.
    pub fn failure(spec: &CombinerSpec, mode: &str, status: ReportStatus, message: &str) -> Self {
        let mut r = Self::new();
        r.push("status", status);
        r.push("mode", mode);
        r.push("spec", spec.name());
        r.push("register_set", register_set(spec));
        r.push("error", message.replace('\n', " "));
        r
    }

    fn push_scan(&mut self, prefix: &str, spec: &CombinerSpec, list: &CandidateList) {
        let p = &list.params;
        let names: Vec<&str> = list.targets.iter().map(|&i| spec.registers()[i].name()).collect();
        self.push(format!("{prefix}targets"), names.join(","));
        self.push(format!("{prefix}method"), list.method);
        self.push(format!("{prefix}n"), p.n);
        self.push(format!("{prefix}p"), p.p);
        self.push(format!("{prefix}bias"), if list.complemented { "negative" } else { "positive" });
        self.push(format!("{prefix}l"), p.l);
        self.push(format!("{prefix}p_f"), p.p_f);
        self.push(format!("{prefix}p_m"), p.p_m);
        self.push(format!("{prefix}threshold"), list.threshold);
        self.push(format!("{prefix}exact_p_f"), binomial_upper_tail(p.n, list.threshold, 0.5));
        self.push(format!("{prefix}exact_p_m"), binomial_lower_tail(p.n, list.threshold, p.p));
        self.push(format!("{prefix}retained"), list.entries.len());
        for (i, c) in list.entries.iter().take(LISTED).enumerate() {
            let states: Vec<String> = c.states.iter().map(|s| format!("{:x}", s.bits())).collect();
            self.push(
                format!("{prefix}candidate.{i}"),
                format!("{} {} {:.6}", states.join(","), c.matches, c.score),
            );
        }
    }

    fn push_ops(&mut self, prefix: &str, ops: &OpCounts) {
        self.push(format!("{prefix}candidates_scanned"), ops.candidates);
        self.push(format!("{prefix}register_clocks"), ops.register_clocks);
        self.push(format!("{prefix}bit_comparisons"), ops.bit_comparisons);
    }
}

fn register_set(spec: &CombinerSpec) -> String {
    spec.registers()
        .iter()
        .map(|r| format!("{}:{}", r.name(), r.length()))
        .collect::<Vec<_>>()
        .join(",")
}

fn valid_key(k: &str) -> bool {
    !k.is_empty() && !k.contains('=') && !k.contains(char::is_whitespace) && !k.starts_with('#')
}

/// One `key=value` line per field.
pub fn format_report_kv(r: &AttackReport) -> String {
    r.fields.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

/// Aligned `key  value` lines for reading.
pub fn format_report_text(r: &AttackReport) -> String {
    let width = r.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    r.fields.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_report_kv(text: &str) -> Result<AttackReport> {
    let mut r = AttackReport::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(i + 1, "expected `key=value`"))?;
        if !valid_key(k) {
            return Err(Error::parse(i + 1, format!("bad key {k:?}")));
        }
        if r.get(k).is_some() {
            return Err(Error::parse(i + 1, format!("duplicate key `{k}`")));
        }
        r.fields.push((k.to_string(), v.to_string()));
    }
    Ok(r)
}
