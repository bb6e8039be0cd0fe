//! Rendering of command results as JSON documents or CSV tables.

use serde::Serialize;
use serde_json::Value;

use crate::config::{OutputFormat, RunConfig};

/// Header prefix of the config line in CSV output.
pub const CSV_CONFIG_PREFIX: &str = "# config: ";

/// Plain table with a header row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Result of one command: a JSON value plus its tabular form.
#[derive(Clone, Debug)]
pub struct Report {
    pub result: Value,
    pub table: Table,
}

impl Report {
    pub fn new<R: Serialize>(result: &R, table: Table) -> Self {
        Report {
            result: serde_json::to_value(result).expect("results serialize"),
            table,
        }
    }
}

#[derive(Serialize)]
struct Document<'a> {
    command: &'a str,
    config: &'a RunConfig,
    result: &'a Value,
}

/// Full artifact text, embedding the resolved config.
pub fn render(config: &RunConfig, report: &Report) -> String {
    match config.output_format {
        OutputFormat::Json => {
            let doc = Document {
                command: config.command.as_str(),
                config,
                result: &report.result,
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("documents serialize");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut s = String::from(CSV_CONFIG_PREFIX);
            s.push_str(&config.to_json());
            s.push('\n');
            s.push_str(&report.table.render());
            s
        }
    }
}

/// Recovers the embedded config from a rendered artifact of either format.
pub fn embedded_config(text: &str) -> Option<RunConfig> {
    if let Some(rest) = text.strip_prefix(CSV_CONFIG_PREFIX) {
        let line = rest.lines().next()?;
        return RunConfig::from_json(line).ok();
    }
    let doc: Value = serde_json::from_str(text).ok()?;
    serde_json::from_value(doc.get("config")?.clone()).ok()
}
