use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::args::{Command, OutArgs};
use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Seventeen significant digits: parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rows of a CSV table with a fixed header.
pub struct CsvTable {
    text: String,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        let mut text = columns.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("output records serialize");
    text.push('\n');
    text
}

/// Record of one run, written next to its outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    /// Input files as given on the command line.
    pub inputs: Vec<PathBuf>,
    /// Output file names, relative to the manifest's directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|source| CliError::Manifest {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Destination of a run's files: a directory, or stdout.
pub struct Sink {
    dir: Option<PathBuf>,
    written: Vec<String>,
}

impl Sink {
    pub fn new(out: &OutArgs) -> CliResult<Self> {
        if let Some(dir) = &out.out {
            fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        }
        Ok(Self {
            dir: out.out.clone(),
            written: Vec::new(),
        })
    }

    pub fn is_dir(&self) -> bool {
        self.dir.is_some()
    }

    pub fn emit(&mut self, name: &str, contents: &str) -> CliResult<()> {
        match &self.dir {
            Some(dir) => {
                let path = dir.join(name);
                fs::write(&path, contents).map_err(CliError::io(&path))?;
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(contents.as_bytes())
                    .map_err(CliError::io("<stdout>"))?;
            }
        }
        self.written.push(name.to_owned());
        Ok(())
    }

    /// Like `emit`, but dropped when writing to stdout so that stdout
    /// carries a single table.
    pub fn emit_aux(&mut self, name: &str, contents: &str) -> CliResult<()> {
        if self.is_dir() {
            self.emit(name, contents)
        } else {
            Ok(())
        }
    }

    /// Writes the manifest when outputs went to a directory.
    pub fn finish(self, command: &Command, inputs: Vec<PathBuf>) -> CliResult<()> {
        let Some(dir) = self.dir else {
            return Ok(());
        };
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command: command.clone(),
            inputs,
            outputs: self.written,
        };
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, json(&manifest)).map_err(CliError::io(&path))
    }
}
