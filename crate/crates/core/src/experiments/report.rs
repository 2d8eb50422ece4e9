//! Report rows keyed by (experiment, q, d, label, x). Rows are sorted
//! before emission so identical configs reproduce byte-identical output
//! regardless of worker scheduling.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    pub q: u64,
    pub d: u64,
    /// Power index, aggregate tag, or seed tag.
    pub label: String,
    pub x: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Some(..) only for exact identities and explicit-constant checks;
    /// asymptotic trajectory rows carry None.
    pub pass: Option<bool>,
    pub note: String,
}

impl ReportRow {
    pub fn new(
        experiment: &str,
        q: u64,
        d: u64,
        label: impl Into<String>,
        x: u64,
        lhs: f64,
        rhs: f64,
    ) -> Self {
        ReportRow {
            experiment: experiment.to_string(),
            q,
            d,
            label: label.into(),
            x,
            lhs,
            rhs,
            ratio: ratio_of(lhs, rhs),
            pass: None,
            note: String::new(),
        }
    }

    pub fn pass(mut self, pass: bool) -> Self {
        self.pass = Some(pass);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    fn key(&self) -> (&str, u64, u64, &str, u64) {
        (&self.experiment, self.q, self.d, &self.label, self.x)
    }
}

pub fn ratio_of(lhs: f64, rhs: f64) -> f64 {
    if rhs != 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn new(mut rows: Vec<ReportRow>) -> Self {
        rows.sort_by(|a, b| a.key().cmp(&b.key()));
        ExperimentReport { rows }
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.pass == Some(false)).count()
    }

    pub fn all_checks_pass(&self) -> bool {
        self.failures() == 0
    }
}
