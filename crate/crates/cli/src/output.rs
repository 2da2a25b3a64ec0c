use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::cli::Format;
use crate::error::{CliError, CliResult};

pub const TOOL_NAME: &str = "mcb";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Fail,
}

#[derive(Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

/// Top-level JSON document shared by all commands.
#[derive(Debug, Serialize)]
pub struct Envelope {
    pub tool: Tool,
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub status: Status,
    pub warnings: Vec<String>,
    pub result: Value,
}

/// A finished command: its JSON document plus optional CSV artifacts.
pub struct Report {
    pub stem: String,
    pub envelope: Envelope,
    pub csv: Option<String>,
    /// Extra CSV files written only with `--output`, as `(suffix, contents)`.
    pub extra_csv: Vec<(String, String)>,
}

impl Report {
    pub fn new(stem: &str, command: &str, config: Value, result: Value) -> Self {
        Self {
            stem: stem.into(),
            envelope: Envelope {
                tool: Tool { name: TOOL_NAME, version: TOOL_VERSION },
                command: command.into(),
                config,
                seed: None,
                status: Status::Ok,
                warnings: Vec::new(),
                result,
            },
            csv: None,
            extra_csv: Vec::new(),
        }
    }
}

pub fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::math(format!("serialization failed: {e}")))
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

pub fn emit(report: &Report, format: Format, output: Option<&Path>) -> CliResult<()> {
    let json = serde_json::to_string_pretty(&report.envelope)
        .map_err(|e| CliError::math(format!("serialization failed: {e}")))?
        + "\n";
    let want_json = matches!(format, Format::Json | Format::Both);
    let want_csv = matches!(format, Format::Csv | Format::Both);
    for w in &report.envelope.warnings {
        eprintln!("WARN: {w}");
    }
    if want_csv && report.csv.is_none() {
        eprintln!("note: {} has no curve; no CSV written", report.envelope.command);
    }
    match output {
        Some(dir) => {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;
            if want_json {
                write(&dir.join(format!("{}.json", report.stem)), &json)?;
            }
            if want_csv {
                if let Some(csv) = &report.csv {
                    write(&dir.join(format!("{}.csv", report.stem)), csv)?;
                }
            }
            for (suffix, csv) in &report.extra_csv {
                write(&dir.join(format!("{}-{suffix}.csv", report.stem)), csv)?;
            }
        }
        None => {
            if want_json {
                print!("{json}");
            }
            if want_csv {
                if let Some(csv) = &report.csv {
                    print!("{csv}");
                }
            }
        }
    }
    Ok(())
}

/// Full-precision CSV float.
pub fn f(v: f64) -> String {
    format!("{v:.16e}")
}
