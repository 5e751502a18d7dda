//! Check reports in text and JSON form.

use std::fmt::Write;

use serde::Serialize;

use crate::checker::{CheckReport, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Safe,
    Unsafe,
    Unknown,
}

impl Status {
    pub fn of(v: &Verdict) -> Status {
        match v {
            Verdict::Safe => Status::Safe,
            Verdict::Unsafe(_) => Status::Unsafe,
            Verdict::Unknown { .. } => Status::Unknown,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Safe => "safe",
            Status::Unsafe => "unsafe",
            Status::Unknown => "unknown",
        }
    }

    /// 0 when safe, 1 when some entry is unsafe, 2 when only unknowns remain.
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Safe => 0,
            Status::Unsafe => 1,
            Status::Unknown => 2,
        }
    }

    fn join(self, other: Status) -> Status {
        match (self, other) {
            (Status::Unsafe, _) | (_, Status::Unsafe) => Status::Unsafe,
            (Status::Unknown, _) | (_, Status::Unknown) => Status::Unknown,
            _ => Status::Safe,
        }
    }
}

/// The pure form of one variant, for `--dump-pure`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PureDump {
    pub expr: String,
    pub contract: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Entry {
    pub name: String,
    pub verdict: Status,
    pub variants: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sites: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pure: Vec<PureDump>,
    /// Only filled in with `--timings`, so reports stay reproducible.
    pub ms: Option<u64>,
}

impl Entry {
    pub fn from_check(r: &CheckReport, dump_pure: bool, timings: bool) -> Entry {
        let mut e = Entry {
            name: r.name.clone(),
            verdict: Status::of(&r.verdict),
            variants: r.variants.len(),
            witness: None,
            reason: None,
            residual: None,
            sites: Vec::new(),
            pure: Vec::new(),
            ms: timings.then(|| r.elapsed.as_millis() as u64),
        };
        match &r.verdict {
            Verdict::Safe => {}
            Verdict::Unsafe(w) => e.witness = Some(w.to_string()),
            Verdict::Unknown { reason, sites } => {
                e.reason = Some(reason.clone());
                e.sites = sites.iter().map(|s| s.to_string()).collect();
                e.residual = r.variants.iter().find(|v| !v.verdict.is_safe()).map(|v| v.residual.to_string());
            }
        }
        if dump_pure {
            e.pure = r
                .variants
                .iter()
                .map(|v| PureDump { expr: v.pure.to_string(), contract: v.pure_contract.to_string() })
                .collect();
        }
        e
    }

    /// An entry that could not be checked at all.
    pub fn unknown(name: &str, reason: String) -> Entry {
        Entry {
            name: name.into(),
            verdict: Status::Unknown,
            variants: 0,
            witness: None,
            reason: Some(reason),
            residual: None,
            sites: Vec::new(),
            pure: Vec::new(),
            ms: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConfigEcho {
    pub fuel: usize,
    pub inline_depth: usize,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub file: String,
    pub status: Status,
    pub transactions: Vec<Entry>,
    pub functions: Vec<Entry>,
    pub config: ConfigEcho,
}

impl Report {
    pub fn new(file: String, transactions: Vec<Entry>, functions: Vec<Entry>, config: ConfigEcho) -> Report {
        let status = transactions.iter().chain(&functions).fold(Status::Safe, |s, e| s.join(e.verdict));
        Report { file, status, transactions, functions, config }
    }

    pub fn exit_code(&self) -> u8 {
        self.status.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.file);
        for (title, entries) in [("transaction", &self.transactions), ("function", &self.functions)] {
            for e in entries.iter() {
                let variants = if e.variants == 1 { String::new() } else { format!(" [{} variants]", e.variants) };
                let ms = e.ms.map(|m| format!(" ({m} ms)")).unwrap_or_default();
                let _ = writeln!(out, "  {title} {}: {}{variants}{ms}", e.name, e.verdict.label());
                if let Some(w) = &e.witness {
                    let _ = writeln!(out, "    witness: {w}");
                }
                if let Some(r) = &e.reason {
                    let _ = writeln!(out, "    reason: {r}");
                }
                for s in &e.sites {
                    let _ = writeln!(out, "    {s}");
                }
                if let Some(r) = &e.residual {
                    let _ = writeln!(out, "    residual: {r}");
                }
                for (i, p) in e.pure.iter().enumerate() {
                    let _ = writeln!(out, "    pure[{}]: {}", i + 1, p.expr);
                    let _ = writeln!(out, "    contract[{}]: {}", i + 1, p.contract);
                }
            }
        }
        let _ = writeln!(out, "status: {}", self.status.label());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(name: &str, verdict: Status) -> Entry {
        Entry { verdict, ..Entry::unknown(name, String::new()) }
    }

    fn cfg() -> ConfigEcho {
        ConfigEcho { fuel: 1000, inline_depth: 3, samples: 200, seed: 0 }
    }

    #[test]
    fn status_is_safe_only_when_everything_is() {
        let r = Report::new("f".into(), vec![entry("a", Status::Safe)], vec![], cfg());
        assert_eq!(r.exit_code(), 0);
        let r = Report::new("f".into(), vec![entry("a", Status::Unknown)], vec![entry("g", Status::Safe)], cfg());
        assert_eq!(r.exit_code(), 2);
        let r = Report::new("f".into(), vec![entry("a", Status::Unknown), entry("b", Status::Unsafe)], vec![], cfg());
        assert_eq!(r.exit_code(), 1);
        let r = Report::new("f".into(), vec![], vec![], cfg());
        assert_eq!(r.status, Status::Safe);
    }

    #[test]
    fn json_field_names() {
        let r = Report::new("x.stm".into(), vec![entry("a", Status::Safe)], vec![], cfg());
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["config"]["inlineDepth"], 3);
        assert_eq!(v["transactions"][0]["verdict"], "safe");
        assert!(v["transactions"][0]["ms"].is_null());
    }
}
