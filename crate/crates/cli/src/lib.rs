//! Command-line driver: instance I/O, experiment runs and reports.

pub mod commands;
pub mod instance;
pub mod report;

use std::path::PathBuf;

use stosched_core::greedy_time::IdleMode;
use stosched_core::lp::{DualVariant, Primal};
use stosched_core::Rational;
use thiserror::Error;

pub use commands::run;
pub use instance::{emit_instance, parse_instance};
pub use report::{render, Format, Report};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// The run completed but at least one check failed.
    pub const CHECK_FAILED: u8 = 1;
    /// Bad flags or arguments.
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    /// Malformed instance text or pmf.
    pub const SCHEMA: u8 = 4;
    /// Well-formed instance that fails validation.
    pub const INVALID_INSTANCE: u8 = 5;
    /// A solver or oracle could not produce a result.
    pub const COMPUTATION: u8 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("schema error{}{}: {msg}", line.map(|l| format!(" on line {l}")).unwrap_or_default(), if field.is_empty() { String::new() } else { format!(" at {field}") })]
    Schema { line: Option<usize>, field: String, msg: String },
    #[error("job {} on machine {}: {source}", job + 1, machine + 1)]
    Pmf { job: usize, machine: usize, source: stosched_core::Error },
    #[error("{0}")]
    Model(#[from] stosched_core::Error),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use stosched_core::Error as E;
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Schema { .. } | CliError::Pmf { .. } => exit::SCHEMA,
            CliError::Config(_) => exit::USAGE,
            CliError::Model(e) => match e {
                E::ProbSum { .. }
                | E::NonPositiveProb { .. }
                | E::DuplicateValue(_)
                | E::EmptyDist
                | E::Parse { .. } => exit::SCHEMA,
                E::ZeroMean
                | E::ZeroMeanPair { .. }
                | E::ForbiddenPair { .. }
                | E::Unschedulable(_)
                | E::InvalidJob { .. }
                | E::NoMachines
                | E::ReleaseOrder(_) => exit::INVALID_INSTANCE,
                E::BadSpeed { .. } => exit::USAGE,
                _ => exit::COMPUTATION,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpVariant {
    Primal(Primal),
    Dual(DualVariant),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Online-list greedy, its certificate and the LP cross-checks.
    List { instance: PathBuf },
    /// Online-time greedy: deterministic run, Monte Carlo and per-job bounds.
    Time { instance: PathBuf },
    /// Build, solve and optionally export one relaxation.
    Lp { instance: PathBuf, variant: LpVariant, export: Option<PathBuf> },
    /// Every certificate check.
    Verify { instance: PathBuf },
    /// Exact optimum by exhaustive search, against the greedy.
    Oracle { instance: PathBuf },
    /// Greedy against optimum on the lower-bound family, sizes `1..=k`.
    LowerBound { k: usize },
    /// Start-profile, moment and stopped-sum identities.
    Appendix,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::List { .. } => "list",
            Command::Time { .. } => "time",
            Command::Lp { .. } => "lp",
            Command::Verify { .. } => "verify",
            Command::Oracle { .. } => "oracle",
            Command::LowerBound { .. } => "lowerbound",
            Command::Appendix => "appendix",
        }
    }

    fn needs_certificate_speed(&self) -> bool {
        matches!(self, Command::List { .. } | Command::Verify { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub f: Rational,
    pub samples: usize,
    pub seed: u64,
    pub horizon: Option<u64>,
    pub format: Format,
    pub mode: IdleMode,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            f: stosched_core::rational::int(2),
            samples: 10_000,
            seed: 0,
            horizon: None,
            format: Format::Human,
            mode: IdleMode::ForcedIdle,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let f = stosched_core::rational::fmt(&self.f);
        if self.f < stosched_core::rational::int(1) {
            return Err(CliError::Config(format!("--f must be at least 1, got {f}")));
        }
        if self.command.needs_certificate_speed() && self.f < stosched_core::rational::int(2) {
            return Err(CliError::Config(format!("{} needs --f of at least 2, got {f}", self.command.name())));
        }
        if self.samples == 0 {
            return Err(CliError::Config("--samples must be at least 1".into()));
        }
        Ok(())
    }
}
