use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use bergman_lab::experiment::{list_experiments, run, verify_all, write_outputs, ExperimentConfig, FrameCache, Profile};

/// Experiment runner for Bergman kernels of high tensor powers.
#[derive(Parser)]
#[command(name = "bergman", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Override a config entry, e.g. `--set ks=[8,16,24]` or `--set singular.tau=0.25`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List the experiment catalog.
    List {
        /// Print the catalog as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run the acceptance suite.
    Verify {
        #[arg(long, default_value = "quick")]
        profile: String,
        /// Write the suite report as JSON to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Remove every cached frame.
    CleanCache,
}

const EXIT_ASSERTION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICS: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<bergman_lab::Error>() {
        Some(bergman_lab::Error::Config(_)) => EXIT_USAGE,
        Some(bergman_lab::Error::Io(_)) | Some(bergman_lab::Error::Json(_)) => EXIT_USAGE,
        Some(_) => EXIT_NUMERICS,
        None => EXIT_USAGE,
    }
}

fn run_experiment(path: &PathBuf, overrides: &[String]) -> Result<u8> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut config = ExperimentConfig::from_toml(&text)?;
    for o in overrides {
        config.apply_override(o)?;
    }
    let cache = FrameCache::from_env();
    let report = run(&config, &cache)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let out = config.output.clone().unwrap_or_else(|| PathBuf::from("bergman-out").join(config.experiment.name()));
    write_outputs(&report, &out)?;
    for (name, value) in &report.constants {
        println!("{name} = {value:.6e}");
    }
    for a in &report.assertions {
        let status = if a.passed { "PASS" } else { "FAIL" };
        println!("[{status}] {}: {} (measured {:.6e}, bound {:.6e})", a.name, a.invariant, a.measured, a.bound);
    }
    println!("outputs in {} ({:.2}s)", out.display(), report.wall_time_s);
    Ok(if report.passed() { 0 } else { EXIT_ASSERTION })
}

fn list(json: bool) -> Result<u8> {
    let catalog = list_experiments();
    if json {
        println!("{}", serde_json::to_string_pretty(&catalog)?);
    } else {
        for e in &catalog {
            println!("{:<15} {}", e.id.name(), e.summary);
        }
    }
    Ok(0)
}

fn verify(profile: &str, report: Option<&PathBuf>) -> Result<u8> {
    let profile: Profile = profile.parse()?;
    let suite = verify_all(profile, &FrameCache::from_env())?;
    for c in &suite.criteria {
        println!("{c}");
    }
    println!("{} profile: {:.1}s", suite.profile, suite.wall_time_s);
    if let Some(path) = report {
        std::fs::write(path, serde_json::to_string_pretty(&suite)?)?;
    }
    Ok(if suite.criteria.iter().any(|c| c.error.is_some()) {
        EXIT_NUMERICS
    } else if suite.passed {
        0
    } else {
        EXIT_ASSERTION
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Run { config, overrides } => run_experiment(config, overrides),
        Command::List { json } => list(*json),
        Command::Verify { profile, report } => verify(profile, report.as_ref()),
        Command::CleanCache => FrameCache::from_env().clean().map_err(Into::into).map(|n| {
            println!("removed {n} cache files");
            0
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
