//! Subcommands of the `htlob` binary: discrete book simulation, limit-theorem
//! and closed-form validation suites, and the estimation pipeline. Every run
//! writes a JSON report carrying provenance and pass/fail validations.

pub mod commands;
pub mod config;
pub mod report;

use report::Report;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: u64,
    /// Overrides the config's path or replication count.
    pub paths: Option<u64>,
    pub out: PathBuf,
    pub format: Format,
    /// Record wall-clock runtimes in the report (breaks byte equality).
    pub timing: bool,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>, seed: u64) -> Self {
        RunOptions { seed, paths: None, out: out.into(), format: Format::Csv, timing: false }
    }

    pub fn file(&self, stem: &str) -> PathBuf {
        self.out.join(format!("{stem}.{}", self.format.ext()))
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.all_pass {
            0
        } else {
            1
        }
    }
}
