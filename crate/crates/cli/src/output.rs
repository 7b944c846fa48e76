//! Report serialization: JSON with a fixed field order, CSV with `.` decimal
//! point, `,` separators, `\n` line endings, and 17 significant digits.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

#[derive(Serialize, Clone, Copy, Debug)]
pub struct RunConfigOut {
    pub seed: u64,
    pub fd_step: f64,
    pub tolerance: f64,
}

#[derive(Serialize, Clone, Debug)]
pub struct AnchorResult {
    pub anchor: String,
    pub max_residual: f64,
    pub verdict: String,
}

#[derive(Serialize, Clone, Debug)]
pub struct PredicateOut {
    pub is_f_biharmonic: bool,
    pub cases: Vec<String>,
    pub agreement: String,
}

#[derive(Serialize, Clone, Debug)]
pub struct SampleOut {
    pub point: Vec<f64>,
    pub residual: f64,
}

impl From<&fbiharm_core::report::Sample> for SampleOut {
    fn from(s: &fbiharm_core::report::Sample) -> Self {
        Self {
            point: s.point.clone(),
            residual: s.residual,
        }
    }
}

/// The common report envelope: `{command, config, anchors, verdict}` plus
/// optional predicate and sample detail.
#[derive(Serialize, Clone, Debug)]
pub struct Report {
    pub command: String,
    pub config: RunConfigOut,
    pub anchors: Vec<AnchorResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicate: Option<PredicateOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<SampleOut>>,
    pub verdict: String,
}

#[derive(Serialize, Clone, Debug)]
pub struct TableReport {
    pub command: String,
    pub config: RunConfigOut,
    pub anchor: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// A numeric table with an optional text-row escape hatch for the suite CSV.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    text_rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
            text_rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row.to_vec());
    }

    pub fn push_text_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.text_rows.push(row);
    }
}

/// 17 significant digits, locale-independent.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct OutputSink {
    path: Option<std::path::PathBuf>,
}

impl OutputSink {
    pub fn new(path: Option<&Path>) -> Self {
        Self {
            path: path.map(Path::to_path_buf),
        }
    }

    pub fn write_json<T: Serialize>(&self, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(text.as_bytes())
    }

    pub fn write_csv(&self, table: &Table) -> anyhow::Result<()> {
        let mut text = String::new();
        text.push_str(&table.header.join(","));
        text.push('\n');
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        for row in &table.text_rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.write_bytes(text.as_bytes())
    }

    fn write_bytes(&self, bytes: &[u8]) -> anyhow::Result<()> {
        match &self.path {
            Some(path) => {
                std::fs::write(path, bytes)?;
            }
            None => {
                std::io::stdout().write_all(bytes)?;
            }
        }
        Ok(())
    }
}
