use std::io;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::anchors::anchor;
use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    CheckFailure,
    NonConvergence,
    ConfigError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::CheckFailure => 1,
            Status::ConfigError => 2,
            Status::NonConvergence => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    pub anchor: String,
    pub inputs: Value,
    pub outputs: Value,
    pub pass: bool,
    pub tolerance: f64,
    /// Set when the check could not be evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub summary: String,
}

/// The report: byte-stable for a given resolved config. Wall-clock timings
/// live in a separate [`Timings`] file for that reason.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub status: Status,
    pub config: RunConfig,
    pub records: Vec<Record>,
    pub tables: Vec<String>,
    pub timings_file: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub subcommand: String,
    pub total_seconds: f64,
    pub checks: Vec<(String, f64)>,
}

/// A plot-ready sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self { name, header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// UTF-8, comma separated, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv of UTF-8 fields")
    }
}

/// Outcome of one check before it is wrapped into a [`Record`].
pub struct Outcome {
    pub inputs: Value,
    pub outputs: Value,
    pub pass: bool,
    pub tolerance: f64,
    pub summary: String,
}

/// Failure classes of a check that could not be evaluated.
#[derive(Debug, Clone)]
pub enum Failure {
    /// A configured value violated an operation's precondition.
    Config(String),
    NonConvergence(String),
    Numerical(String),
}

impl From<entlab_core::Error> for Failure {
    fn from(e: entlab_core::Error) -> Self {
        use entlab_core::Error as E;
        let msg = e.to_string();
        match e {
            E::NonConvergence { .. } => Failure::NonConvergence(msg),
            E::InvalidArgument(_)
            | E::Precondition(_)
            | E::OutOfExtent(..)
            | E::ProfileMismatch(_)
            | E::DimensionMismatch { .. }
            | E::HypothesisViolation(_)
            | E::Parse(_) => Failure::Config(msg),
            _ => Failure::Numerical(msg),
        }
    }
}

/// Runs checks in order and collects records, tables and timings.
pub struct Runner {
    pub records: Vec<Record>,
    pub tables: Vec<Table>,
    pub timings: Vec<(String, f64)>,
    pub status: Status,
    started: Instant,
}

impl Default for Runner {
    fn default() -> Self {
        Self::new()
    }
}

impl Runner {
    pub fn new() -> Self {
        Self {
            records: Vec::new(),
            tables: Vec::new(),
            timings: Vec::new(),
            status: Status::Pass,
            started: Instant::now(),
        }
    }

    pub fn check(&mut self, name: &str, f: impl FnOnce() -> Result<Outcome, Failure>) {
        let t0 = Instant::now();
        let result = f();
        self.timings.push((name.to_string(), t0.elapsed().as_secs_f64()));
        let record = match result {
            Ok(o) => {
                if !o.pass {
                    self.status = self.status.max(Status::CheckFailure);
                }
                Record {
                    name: name.to_string(),
                    anchor: anchor(name).to_string(),
                    inputs: o.inputs,
                    outputs: o.outputs,
                    pass: o.pass,
                    tolerance: o.tolerance,
                    error: None,
                    summary: o.summary,
                }
            }
            Err(fail) => {
                let (status, msg) = match fail {
                    Failure::Config(m) => (Status::ConfigError, m),
                    Failure::NonConvergence(m) => (Status::NonConvergence, m),
                    Failure::Numerical(m) => (Status::CheckFailure, m),
                };
                self.status = self.status.max(status);
                Record {
                    name: name.to_string(),
                    anchor: anchor(name).to_string(),
                    inputs: Value::Null,
                    outputs: Value::Null,
                    pass: false,
                    tolerance: f64::NAN,
                    summary: msg.clone(),
                    error: Some(msg),
                }
            }
        };
        self.records.push(record);
    }

    pub fn table(&mut self, t: Table) {
        self.tables.push(t);
    }

    pub fn elapsed(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }
}

/// Writes `text` only when it differs from the file on disk, so reruns
/// leave identical files untouched.
pub fn write_file(path: &Path, text: &str) -> io::Result<()> {
    if std::fs::read_to_string(path).ok().as_deref() == Some(text) {
        return Ok(());
    }
    std::fs::write(path, text)
}
