//! Step diagnostics: every exact identity and every inductive margin, with
//! measured value, bound, and pass/fail.

use crate::report::align;
use serde::Serialize;

/// How an entry is judged: hard identities must pass at desk scale;
/// asymptotic margins are reported without gating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckKind {
    /// Exact identity / support / structure check: binds at any scale.
    Identity,
    /// Inductive estimate of the scheme: desk-scale runs report the margin.
    Margin,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagEntry {
    pub name: String,
    pub kind: CheckKind,
    pub measured: f64,
    pub bound: f64,
    pub satisfied: bool,
}

impl DiagEntry {
    pub fn identity(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        DiagEntry {
            name: name.into(),
            kind: CheckKind::Identity,
            measured,
            bound,
            satisfied: measured <= bound,
        }
    }

    pub fn margin(name: impl Into<String>, measured: f64, bound: f64, satisfied: bool) -> Self {
        DiagEntry {
            name: name.into(),
            kind: CheckKind::Margin,
            measured,
            bound,
            satisfied,
        }
    }
}

/// Full step report.
#[derive(Debug, Clone, Serialize, Default)]
pub struct DiagnosticsReport {
    pub entries: Vec<DiagEntry>,
    pub notes: Vec<String>,
}

impl DiagnosticsReport {
    pub fn push(&mut self, e: DiagEntry) {
        self.entries.push(e);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// All hard identities pass (margins never gate).
    pub fn identities_ok(&self) -> bool {
        self.entries
            .iter()
            .filter(|e| e.kind == CheckKind::Identity)
            .all(|e| e.satisfied)
    }

    pub fn failed_identities(&self) -> Vec<&DiagEntry> {
        self.entries
            .iter()
            .filter(|e| e.kind == CheckKind::Identity && !e.satisfied)
            .collect()
    }

    pub fn to_table(&self) -> String {
        let mut rows: Vec<[String; 5]> = vec![[
            "check".into(),
            "kind".into(),
            "measured".into(),
            "bound".into(),
            "ok".into(),
        ]];
        for e in &self.entries {
            rows.push([
                e.name.clone(),
                match e.kind {
                    CheckKind::Identity => "identity".into(),
                    CheckKind::Margin => "margin".into(),
                },
                format!("{:.6e}", e.measured),
                format!("{:.6e}", e.bound),
                if e.satisfied { "yes".into() } else { "NO".into() },
            ]);
        }
        let mut out = align(&rows);
        for n in &self.notes {
            out.push_str("note: ");
            out.push_str(n);
            out.push('\n');
        }
        out
    }
}
