use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use stosched_cli::{exit, render, run, Command, Format, LpVariant, RunConfig};
use stosched_core::greedy_time::IdleMode;
use stosched_core::lp::{DualVariant, Primal};
use stosched_core::Rational;

#[derive(Parser)]
#[command(name = "stosched", version, about = "Greedy scheduling of stochastic jobs on unrelated machines")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Speed factor, an integer or "p/q".
    #[arg(long, global = true, default_value = "2", value_parser = parse_rational)]
    f: Rational,
    /// Monte Carlo replications.
    #[arg(long, global = true, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// LP horizon (number of unit slots); defaults to a serial-schedule bound.
    #[arg(long, global = true)]
    horizon: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "human")]
    format: OutFormat,
    #[arg(long, global = true, value_enum, default_value = "forced-idle")]
    mode: Mode,
}

#[derive(Subcommand)]
enum Cmd {
    /// Online-list greedy with its dual certificate and LP cross-checks.
    List { instance: PathBuf },
    /// Online-time greedy: deterministic run, Monte Carlo estimate, per-job bounds.
    Time { instance: PathBuf },
    /// Build and solve one relaxation.
    Lp {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "S")]
        variant: Variant,
        /// Also write the model in text form to this file.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Run every certificate check.
    Verify { instance: PathBuf },
    /// Exact optimum of a small instance against the greedy.
    Oracle { instance: PathBuf },
    /// Greedy against optimum on the lower-bound family of sizes 1..=k.
    Lowerbound { k: usize },
    /// Start-profile, moment and stopped-sum identities.
    Appendix,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Human,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    ForcedIdle,
    MaxProc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    #[value(name = "S")]
    S,
    #[value(name = "P")]
    P,
    #[value(name = "So", alias = "S_o")]
    So,
    #[value(name = "Po", alias = "P_o")]
    Po,
    #[value(name = "D")]
    D,
    #[value(name = "Do", alias = "D_o")]
    Do,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    stosched_core::rational::parse(s).ok_or_else(|| format!("expected an integer or \"p/q\", got {s:?}"))
}

fn config(cli: Cli) -> RunConfig {
    let command = match cli.command {
        Cmd::List { instance } => Command::List { instance },
        Cmd::Time { instance } => Command::Time { instance },
        Cmd::Lp { instance, variant, export } => {
            let variant = match variant {
                Variant::S => LpVariant::Primal(Primal::S),
                Variant::P => LpVariant::Primal(Primal::P),
                Variant::So => LpVariant::Primal(Primal::SOnline),
                Variant::Po => LpVariant::Primal(Primal::POnline),
                Variant::D => LpVariant::Dual(DualVariant::D),
                Variant::Do => LpVariant::Dual(DualVariant::DOnline),
            };
            Command::Lp { instance, variant, export }
        }
        Cmd::Verify { instance } => Command::Verify { instance },
        Cmd::Oracle { instance } => Command::Oracle { instance },
        Cmd::Lowerbound { k } => Command::LowerBound { k },
        Cmd::Appendix => Command::Appendix,
    };
    RunConfig {
        command,
        f: cli.f,
        samples: cli.samples,
        seed: cli.seed,
        horizon: cli.horizon,
        format: match cli.format {
            OutFormat::Human => Format::Human,
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        },
        mode: match cli.mode {
            Mode::ForcedIdle => IdleMode::ForcedIdle,
            Mode::MaxProc => IdleMode::MaxProc,
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("SCHED_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // only fails if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let cfg = config(cli);
    match run(&cfg) {
        Ok(report) => {
            print!("{}", render(&report, cfg.format));
            ExitCode::from(if report.passed() { exit::OK } else { exit::CHECK_FAILED })
        }
        Err(e) => {
            eprintln!("stosched: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
