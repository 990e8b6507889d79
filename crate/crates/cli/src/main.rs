//! `dgrel` — adequacy assessment for distributed generation systems.
//!
//! Exit codes: 0 success, 2 validation/usage error, 3 oracle cross-check
//! mismatch beyond tolerance.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dgrel_cli::config::load_system;
use dgrel_cli::report::{
    self, monte_carlo_doc, oracle_doc, report_document, sig, ORACLE_REL_TOLERANCE,
};
use dgrel_core::oracle::{enumerate_exact, monte_carlo};
use dgrel_core::{assess, discretize, BetaParams, SourceDensity, UFunction, WeibullParams};

#[derive(Parser)]
#[command(
    name = "dgrel",
    version,
    about = "Multi-state adequacy assessment for distributed generation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assess a system config: build the generation and load models and
    /// compute loss-of-load indices
    Assess {
        /// System description (JSON, schema version 1)
        #[arg(long)]
        config: PathBuf,
        /// Hourly load series overriding the config's load source
        #[arg(long)]
        load_csv: Option<PathBuf>,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Override the config's loss-counting convention
        #[arg(long)]
        strict_loss: Option<bool>,
        /// Cross-check the indices against exhaustive joint-state
        /// enumeration; exit 3 on disagreement beyond 1e-9 relative
        #[arg(long)]
        verify_oracle: bool,
        /// Also run a seeded Monte Carlo estimate with this many samples
        #[arg(long)]
        mc_samples: Option<u64>,
        /// Seed for the Monte Carlo stream
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Discretize a Beta or Weibull density into equal-width states
    Discretize {
        #[arg(long, value_enum)]
        dist: DistKind,
        /// Comma-separated parameters: alpha=..,beta=.. or k=..,c=..
        #[arg(long)]
        params: String,
        /// Number of states
        #[arg(long)]
        n: usize,
        /// Upper truncation bound
        #[arg(long)]
        max: f64,
    },
    /// Print one component's performance distribution, sorted by value
    Inspect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        load_csv: Option<PathBuf>,
        #[arg(long, value_enum)]
        component: ComponentKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistKind {
    Beta,
    Weibull,
}

#[derive(Clone, Copy, ValueEnum)]
enum ComponentKind {
    Solar,
    Wind,
    Ev,
    Transformer,
    Load,
    System,
}

enum CliFailure {
    /// Bad input of any kind: config, flags, files.
    Validation(String),
    /// Pipeline and enumeration oracle disagree beyond tolerance.
    OracleMismatch,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliFailure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliFailure::OracleMismatch) => {
            eprintln!(
                "error: oracle cross-check failed beyond {ORACLE_REL_TOLERANCE:e} relative"
            );
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliFailure> {
    match cli.command {
        Command::Assess {
            config,
            load_csv,
            out,
            format,
            strict_loss,
            verify_oracle,
            mc_samples,
            seed,
        } => {
            let system = load_system(&config, load_csv.as_deref(), strict_loss)
                .map_err(|e| CliFailure::Validation(e.to_string()))?;
            let report =
                assess(&system).map_err(|e| CliFailure::Validation(e.to_string()))?;
            let oracle = verify_oracle
                .then(|| enumerate_exact(&system))
                .transpose()
                .map_err(|e| CliFailure::Validation(e.to_string()))?
                .map(|exact| oracle_doc(&report, &exact));
            let mc = mc_samples
                .map(|n| monte_carlo(&system, n, seed))
                .transpose()
                .map_err(|e| CliFailure::Validation(e.to_string()))?
                .map(|estimate| monte_carlo_doc(&report, &estimate));
            let mismatch = oracle.as_ref().is_some_and(|o| !o.within_tolerance);
            let doc = report_document(&report, oracle, mc);
            let rendered = match format {
                Format::Json => report::to_json(&doc),
                Format::Text => report::to_text(&doc),
            };
            emit(out.as_deref(), &rendered)?;
            if mismatch {
                return Err(CliFailure::OracleMismatch);
            }
            Ok(())
        }
        Command::Discretize {
            dist,
            params,
            n,
            max,
        } => {
            let density = parse_density(dist, &params)?;
            let states = discretize(&density, n, max)
                .map_err(|e| CliFailure::Validation(e.to_string()))?;
            println!("{:>5}  {:>12}  {:>12}", "state", "value", "probability");
            for (i, (value, prob)) in states.state_pairs().enumerate() {
                println!("{:>5}  {:>12}  {:>12}", i + 1, sig(value, 6), sig(prob, 6));
            }
            Ok(())
        }
        Command::Inspect {
            config,
            load_csv,
            component,
        } => {
            let system = load_system(&config, load_csv.as_deref(), None)
                .map_err(|e| CliFailure::Validation(e.to_string()))?;
            let report =
                assess(&system).map_err(|e| CliFailure::Validation(e.to_string()))?;
            let (name, u): (&str, Option<&UFunction>) = match component {
                ComponentKind::Solar => ("solar", report.solar.as_ref()),
                ComponentKind::Wind => ("wind", report.wind.as_ref()),
                ComponentKind::Ev => ("ev", report.ev.as_ref()),
                ComponentKind::Transformer => ("transformer", report.transformer.as_ref()),
                ComponentKind::Load => ("load", Some(&report.load)),
                ComponentKind::System => ("system", Some(&report.generation)),
            };
            let u = u.ok_or_else(|| {
                CliFailure::Validation(format!("config has no {name} component"))
            })?;
            println!("{:>16}  {:>14}", "value_kw", "probability");
            for t in u.terms() {
                println!("{:>16}  {:>14}", t.value, sig(t.probability, 4));
            }
            Ok(())
        }
    }
}

fn emit(out: Option<&std::path::Path>, rendered: &str) -> Result<(), CliFailure> {
    match out {
        Some(path) => fs::write(path, rendered).map_err(|e| {
            CliFailure::Validation(format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

fn parse_density(dist: DistKind, params: &str) -> Result<SourceDensity, CliFailure> {
    let mut map = HashMap::new();
    for part in params.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| CliFailure::Validation(format!("bad parameter {part:?}")))?;
        let value: f64 = value.trim().parse().map_err(|_| {
            CliFailure::Validation(format!("parameter {key} is not a number: {value:?}"))
        })?;
        map.insert(key.trim().to_ascii_lowercase(), value);
    }
    let get = |names: &[&str]| names.iter().find_map(|n| map.get(*n).copied());
    match dist {
        DistKind::Beta => {
            let alpha = get(&["alpha", "a"])
                .ok_or_else(|| CliFailure::Validation("beta needs alpha=..".into()))?;
            let beta = get(&["beta", "b"])
                .ok_or_else(|| CliFailure::Validation("beta needs beta=..".into()))?;
            Ok(SourceDensity::Beta(BetaParams { alpha, beta }))
        }
        DistKind::Weibull => {
            let shape = get(&["k", "shape"])
                .ok_or_else(|| CliFailure::Validation("weibull needs k=..".into()))?;
            let scale = get(&["c", "scale"])
                .ok_or_else(|| CliFailure::Validation("weibull needs c=..".into()))?;
            Ok(SourceDensity::Weibull(WeibullParams { shape, scale }))
        }
    }
}
