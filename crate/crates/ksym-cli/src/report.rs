//! The JSON report envelope shared by all commands.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;
use crate::fixture::FixtureId;

pub const TOOL: &str = "ksym";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub fixture: Option<FixtureId>,
    pub tolerance: f64,
    pub seed: u64,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &'static str, fixture: Option<FixtureId>, tolerance: f64, seed: u64, result: T) -> Self {
        Report {
            tool: TOOL,
            version: VERSION,
            command,
            fixture,
            tolerance,
            seed,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Writes the report to `out`, or to stdout when `out` is `None`.
    pub fn emit(&self, out: Option<&Path>) -> Result<(), CliError> {
        let text = self.to_json();
        match out {
            Some(p) => std::fs::write(p, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}
