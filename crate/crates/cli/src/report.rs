use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use lpext::Error;

/// Plain `key = value` report written next to an output file.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            lines: vec![format!("command = {command}")],
        }
    }

    pub fn put(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.lines.push(format!("{key} = {value}"));
        self
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.lines.push(format!("{key} = {value:e}"));
        self
    }

    pub fn write(&self, output: &Path) -> lpext::Result<PathBuf> {
        let path = sidecar(output);
        let mut text = self.lines.join("\n");
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

pub fn sidecar(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".report.txt");
    PathBuf::from(s)
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::DimensionMismatch(_) => "dimension_mismatch",
        Error::NonFinite(_) => "non_finite",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::InsufficientData(_) => "insufficient_data",
        Error::Domain(_) => "domain",
        Error::SingularPivot { .. } => "singular_pivot",
        Error::Overflow { .. } => "overflow",
        Error::NotConverged { .. } => "not_converged",
        Error::Breakdown(_) => "breakdown",
        Error::Degenerate(_) => "degenerate",
        Error::Parse { .. } => "parse",
        Error::Unsupported(_) => "unsupported",
        Error::Io(_) => "io",
    }
}

/// `error code=<n> kind=<kind> message=<json string>`
pub fn error_line(e: &Error, code: u8) -> String {
    let msg = serde_json::to_string(&e.to_string()).unwrap_or_else(|_| "\"\"".into());
    format!("error code={code} kind={} message={msg}", kind(e))
}
